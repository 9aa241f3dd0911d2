"""Adaptive distinguishing sequences (ADSs) for sets of states.

An ADS is returned as a reset-free tree of :mod:`adtlearn.adt` nodes whose
final nodes reference the target states.  Machines are read through their
``delta`` / ``lam`` nested lists, where ``-1`` marks an undefined entry, so
both :class:`~adtlearn.mealy.MealyMachine` and a partial hypothesis work.
Undefined transitions are never crossed.
"""

import heapq
from collections import deque

import numpy as np

from . import kernels
from .adt import FinalNode, SymbolNode, chain, collect_leaves

PROFILES = ("BE", "ML", "MS")
DEFAULT_BUDGET = 100_000


class AdsError(Exception):
    pass


class NoAdsExists(AdsError):
    """The search space was exhausted: the targets provably have no ADS."""


class AdsBudgetExhausted(AdsError):
    """The node budget ran out before the search could decide."""


class NotMinimal(AdsError):
    pass


class IndistinguishableSet:
    """Witness returned when no ADS for all states exists."""

    __slots__ = ("states",)

    def __init__(self, states):
        self.states = tuple(sorted(states))

    def __repr__(self):
        return f"IndistinguishableSet({list(self.states)})"


class BlockRecorder:
    """Remembers the smallest set of open transitions that stopped a search."""

    __slots__ = ("states", "symbol")

    def __init__(self):
        self.states = None
        self.symbol = None

    def offer(self, states, symbol):
        if self.states is None or len(states) < len(self.states):
            self.states = tuple(sorted(states))
            self.symbol = symbol


def _tables(m):
    delta = m.delta
    lam = m.lam
    k = len(delta[0]) if delta else 0
    return delta, lam, k


def _arrays(m):
    d = getattr(m, "transitions", None)
    if d is not None:
        return d, m.output_table
    return kernels.as_arrays(m.delta, m.lam)


def _viable_inputs(d, o, cur):
    """Inputs that neither block nor merge two of the states in ``cur``."""
    idx = np.fromiter(cur, dtype=np.int64, count=len(cur))
    outs = o[idx]
    key = outs * (d.shape[0] + 1) + d[idx] + 1
    key.sort(axis=0)
    bad = (key[1:] == key[:-1]).any(axis=0) | (outs < 0).any(axis=0)
    return np.flatnonzero(~bad).tolist()


def _is_complete(delta):
    return all(t >= 0 for row in delta for t in row)


def relabel(tree, mapping):
    """Rewrite final-node references through ``mapping`` in place."""
    for f in collect_leaves(tree):
        f.state = mapping[f.state]
    return tree


def copy_tree(node):
    if type(node) is FinalNode:
        return FinalNode(node.state)
    new = SymbolNode(node.symbol)
    for o, c in node.children.items():
        new.add(o, copy_tree(c))
    return new


def ads_depth(node):
    if type(node) is FinalNode:
        return 0
    return 1 + max(ads_depth(c) for c in node.children.values())


def ads_size(node):
    """Number of symbol nodes."""
    if type(node) is FinalNode:
        return 0
    return 1 + sum(ads_size(c) for c in node.children.values())


def ads_cost(node, profile):
    return ads_depth(node) if profile == "ML" else ads_size(node)


def check_ads(m, tree, targets):
    """True if ``tree`` is an ADS for ``targets`` on ``m``."""
    delta, lam, _ = _tables(m)
    seen = set()

    def run(node, s):
        while type(node) is SymbolNode:
            i = node.symbol
            o = lam[s][i]
            if o < 0 or o not in node.children:
                return None
            node = node.children[o]
            s = delta[s][i]
            if s < 0 and type(node) is SymbolNode:
                return None
        return node

    for s in targets:
        leaf = run(tree, s)
        if leaf is None or leaf.state != s:
            return False
        seen.add(s)
    return len(collect_leaves(tree)) == len(seen)


# ------------------------------------------------------------------ stepping

_BLOCKED = 0
_CONVERGE = 1


def _step(delta, lam, states, i, recorder):
    """Apply input ``i`` to ``states``.

    Returns a list of ``(output, positions, successors)`` groups ordered by
    first position, or ``_BLOCKED`` / ``_CONVERGE``.
    """
    groups = {}
    for pos, s in enumerate(states):
        o = lam[s][i]
        if o < 0:
            if recorder is not None:
                recorder.offer([x for x in states if lam[x][i] < 0 or delta[x][i] < 0], i)
            return _BLOCKED
        g = groups.get(o)
        if g is None:
            groups[o] = g = (o, [], [])
        g[1].append(pos)
    out = []
    for o, positions, succ in groups.values():
        if len(positions) == 1:
            t = delta[states[positions[0]]][i]
            succ.append(t)
        else:
            seen = set()
            for pos in positions:
                t = delta[states[pos]][i]
                if t < 0:
                    if recorder is not None:
                        recorder.offer([states[p] for p in positions if delta[states[p]][i] < 0], i)
                    return _BLOCKED
                if t in seen:
                    return _CONVERGE
                seen.add(t)
                succ.append(t)
        out.append((o, positions, succ))
    return out


class _Budget:
    __slots__ = ("left",)

    def __init__(self, n):
        self.left = n

    def tick(self, n=1):
        self.left -= n
        if self.left < 0:
            raise AdsBudgetExhausted("node budget exhausted")


# --------------------------------------------------------------- pair search

def _pair_ads(m, p, q, recorder, arrays=None):
    delta, lam, _ = _tables(m)
    d, o = arrays if arrays is not None else _arrays(m)
    found, word, bp, bq, bi = kernels.pair_search(d, o, d, o, p, q, True)
    if not found:
        if recorder is not None and bi >= 0:
            recorder.offer([x for x in (int(bp), int(bq)) if x >= 0], int(bi))
        return None
    word = [int(x) for x in word]
    out_p = []
    out_q = []
    a, b = p, q
    for i in word:
        out_p.append(lam[a][i])
        out_q.append(lam[b][i])
        a, b = delta[a][i], delta[b][i]
    top = SymbolNode(word[-1])
    top.add(out_p[-1], FinalNode(p))
    top.add(out_q[-1], FinalNode(q))
    return chain(word[:-1], out_p[:-1], top)


# -------------------------------------------------- best-effort leveled search

class _BestEffort:
    def __init__(self, m, budget, recorder):
        self.m = m
        self.delta, self.lam, self.k = _tables(m)
        self.arrays = _arrays(m)
        self.budget = budget
        self.recorder = recorder
        self.failed = set()
        self.solved = {}

    def solve(self, states):
        """ADS for the sorted tuple ``states``; leaves reference those states."""
        if len(states) == 1:
            return FinalNode(states[0])
        key = frozenset(states)
        if key in self.failed:
            return None
        hit = self.solved.get(key)
        if hit is not None:
            return copy_tree(hit)
        if len(states) == 2:
            self.budget.tick()
            tree = _pair_ads(self.m, states[0], states[1], self.recorder, self.arrays)
        else:
            tree = self._search(states)
        if tree is None:
            self.failed.add(key)
        else:
            self.solved[key] = copy_tree(tree)
        return tree

    def _search(self, states):
        delta, lam, k = self.delta, self.lam, self.k
        visited = {frozenset(states)}
        queue = deque([(tuple(states), (), ())])
        while queue:
            cur, word, outs = queue.popleft()
            for i in range(k):
                self.budget.tick()
                groups = _step(delta, lam, cur, i, self.recorder)
                if groups is _BLOCKED or groups is _CONVERGE:
                    continue
                if len(groups) == 1:
                    o, _, succ = groups[0]
                    key = frozenset(succ)
                    if key not in visited:
                        visited.add(key)
                        queue.append((tuple(succ), word + (i,), outs + (o,)))
                    continue
                node = SymbolNode(i)
                ok = True
                for o, positions, succ in sorted(groups, key=lambda g: min(cur[p] for p in g[1])):
                    order = sorted(range(len(succ)), key=lambda j: succ[j])
                    sub = self.solve(tuple(succ[j] for j in order))
                    if sub is None:
                        ok = False
                        break
                    mapping = {succ[j]: states[positions[j]] for j in range(len(succ))}
                    node.add(o, relabel(sub, mapping))
                if ok:
                    return chain(word, outs, node)
        return None


# ------------------------------------------------ optimal search (ML and MS)

_VECTOR_MIN = 8


class _Optimal:
    """Cost-optimal ADS via a generalised Dijkstra over the successor-set graph.

    The graph is explored breadth first with a growing depth limit.  After
    each layer two passes run: one ignoring unexpanded sets (an upper bound
    with a witness tree) and one charging them an admissible lower bound.
    Search stops once both agree.
    """

    def __init__(self, m, profile, budget):
        self.delta, self.lam, self.k = _tables(m)
        self.arrays = _arrays(m)
        self.profile = profile
        self.budget = budget
        seen = {o for row in self.lam for o in row if o >= 0}
        self.branching = max(2, len(seen))

    def lower_bound(self, size):
        b = self.branching
        if self.profile == "ML":
            d, reach = 0, 1
            while reach < size:
                reach *= b
                d += 1
            return d
        return -(-(size - 1) // (b - 1))

    def solve(self, states):
        root = frozenset(states)
        order = {root: 0}
        edges = {}
        depth = {root: 0}
        frontier = [root]
        limit = 1
        while True:
            frontier = self._expand(frontier, limit, depth, order, edges)
            cost, best = self._knuth(edges, order)
            c = cost.get(root)
            if c is not None:
                if not frontier:
                    return self._build(root, best)
                pending = {key: self.lower_bound(len(key)) for key in frontier}
                low, _ = self._knuth(edges, order, pending)
                if low.get(root, c) >= c:
                    return self._build(root, best)
            elif not frontier:
                return None
            limit += 1

    def _expand(self, frontier, limit, depth, order, edges):
        """Expand all sets shallower than ``limit``; return the new frontier."""
        delta, lam, k = self.delta, self.lam, self.k
        arrays = self.arrays
        rest = []
        work = frontier
        while work:
            layer = []
            for key in work:
                if depth[key] >= limit:
                    rest.append(key)
                    continue
                self.budget.tick(k)
                cur = sorted(key)
                if len(cur) >= _VECTOR_MIN:
                    inputs = _viable_inputs(*arrays, cur)
                else:
                    inputs = range(k)
                out = []
                for i in inputs:
                    groups = {}
                    for s in cur:
                        o = lam[s][i]
                        if o < 0:
                            break
                        t = delta[s][i]
                        g = groups.get(o)
                        if g is None:
                            groups[o] = {t}
                        elif t < 0 or t in g or -1 in g:
                            break
                        else:
                            g.add(t)
                    else:
                        kids = []
                        for o, g in groups.items():
                            ck = frozenset(g)
                            kids.append((o, ck))
                            if len(ck) > 1 and ck not in depth:
                                depth[ck] = depth[key] + 1
                                order[ck] = len(order)
                                layer.append(ck)
                        out.append((i, kids))
                edges[key] = out
            work = layer
        return rest

    def _knuth(self, edges, order, pending=None):
        """Cheapest cost per expanded set; ``pending`` gives fixed costs for
        unexpanded ones (treated as unsolvable when absent)."""
        combine_max = self.profile == "ML"
        cost = dict(pending) if pending else {}
        best = {}
        parents = {}
        remaining = {}
        heap = []

        def value(kids):
            vals = [0 if len(ck) == 1 else cost[ck] for _, ck in kids]
            return 1 + (max(vals) if combine_max else sum(vals))

        for key, out in edges.items():
            for e, (i, kids) in enumerate(out):
                need = 0
                for _, ck in kids:
                    if len(ck) > 1 and ck not in cost:
                        need += 1
                        parents.setdefault(ck, []).append((key, e))
                remaining[(key, e)] = need
                if need == 0:
                    heapq.heappush(heap, (value(kids), order[key], i, key, e))
        while heap:
            c, _, _, key, e = heapq.heappop(heap)
            if key in cost:
                continue
            cost[key] = c
            best[key] = e
            for pkey, pe in parents.get(key, ()):
                if pkey in cost:
                    continue
                remaining[(pkey, pe)] -= 1
                if remaining[(pkey, pe)] == 0:
                    i, kids = edges[pkey][pe]
                    heapq.heappush(heap, (value(kids), order[pkey], i, pkey, pe))
        self._edges = edges
        return cost, best

    def _build(self, key, best):
        if len(key) == 1:
            return FinalNode(next(iter(key)))
        i, kids = self._edges[key][best[key]]
        delta, lam = self.delta, self.lam
        node = SymbolNode(i)
        for o, ck in kids:
            back = {delta[s][i]: s for s in key if lam[s][i] == o}
            node.add(o, relabel(self._build(ck, best), back))
        return node


# ------------------------------------------------------- Lee and Yannakakis

class _SplitNode:
    __slots__ = ("block", "children", "word", "parent", "depth")

    def __init__(self, block, parent=None):
        self.block = block
        self.children = []
        self.word = None
        self.parent = parent
        self.depth = 0 if parent is None else parent.depth + 1


def _lowest_containing(nodes):
    nodes = list({id(n): n for n in nodes}.values())
    while len(nodes) > 1:
        deepest = max(n.depth for n in nodes)
        lifted = {}
        for n in nodes:
            if n.depth == deepest:
                n = n.parent
            lifted[id(n)] = n
        nodes = list(lifted.values())
    return nodes[0]


def _valid(delta, lam, block, a):
    seen = set()
    for s in block:
        key = (lam[s][a], delta[s][a])
        if key in seen:
            return False
        seen.add(key)
    return True


def splitting_tree(m):
    """Lee-Yannakakis splitting tree for all states of a complete machine.

    Returns ``(root, leaf_of)`` or an :class:`IndistinguishableSet`.
    """
    delta, lam, k = _tables(m)
    n = len(delta)
    root = _SplitNode(list(range(n)))
    leaf_of = [root] * n

    def split(node, word, classes):
        node.word = word
        for cls in classes:
            child = _SplitNode(cls, node)
            node.children.append(child)
            for s in cls:
                leaf_of[s] = child

    def by_key(block, key):
        groups = {}
        for s in block:
            groups.setdefault(key(s), []).append(s)
        return list(groups.values())

    def try_implied(node, a):
        image = [delta[s][a] for s in node.block]
        leaves = {id(leaf_of[t]) for t in image}
        if len(leaves) < 2:
            return False
        v = _lowest_containing([leaf_of[t] for t in image])
        owner = {}
        for c in v.children:
            for t in c.block:
                owner[t] = id(c)
        split(node, (a,) + v.word, by_key(node.block, lambda s: owner[delta[s][a]]))
        return True

    leaves = [root] if n > 1 else []
    while leaves:
        size = max(len(x.block) for x in leaves)
        stage = [x for x in leaves if len(x.block) == size]
        pending = []
        for node in stage:
            block = node.block
            done = False
            for a in range(k):
                if len({lam[s][a] for s in block}) > 1 and _valid(delta, lam, block, a):
                    split(node, (a,), by_key(block, lambda s: lam[s][a]))
                    done = True
                    break
            if not done:
                for a in range(k):
                    if _valid(delta, lam, block, a) and try_implied(node, a):
                        done = True
                        break
            if not done:
                pending.append(node)
        progress = True
        while pending and progress:
            progress = False
            rest = []
            for node in pending:
                if any(_valid(delta, lam, node.block, a) and try_implied(node, a) for a in range(k)):
                    progress = True
                else:
                    rest.append(node)
            pending = rest
        if pending:
            return IndistinguishableSet(pending[0].block)
        leaves = [leaf_of[s] for s in range(n)]
        leaves = [x for x in {id(x): x for x in leaves}.values() if len(x.block) > 1]
    return root, leaf_of


def ly_ads(m):
    """ADS for all states of a complete minimal machine, or an IndistinguishableSet."""
    delta, lam, _ = _tables(m)
    n = len(delta)
    if n == 1:
        return FinalNode(0)
    result = splitting_tree(m)
    if isinstance(result, IndistinguishableSet):
        return result
    _, leaf_of = result

    def build(pairs):
        if len(pairs) == 1:
            return FinalNode(pairs[0][0])
        v = _lowest_containing([leaf_of[c] for _, c in pairs])
        return apply(pairs, v.word, 0)

    def apply(pairs, word, j):
        if len(pairs) == 1:
            return FinalNode(pairs[0][0])
        if j == len(word):
            return build(pairs)
        i = word[j]
        node = SymbolNode(i)
        groups = {}
        for init, cur in pairs:
            groups.setdefault(lam[cur][i], []).append((init, delta[cur][i]))
        for o in sorted(groups):
            node.add(o, apply(groups[o], word, j + 1))
        return node

    return build([(s, s) for s in range(n)])


def _has_equivalent_states(m):
    delta, lam, _ = _tables(m)
    blocks = kernels.refine_partition(np.asarray(delta), np.asarray(lam))
    return len(set(blocks.tolist())) < len(delta)


# ------------------------------------------------------------------- driver

# process-wide tallies; the harness reads differences around a run
counters = {"calls": 0, "found": 0, "budget_hits": 0}
_audit = None


def set_audit(fn):
    """Call ``fn(machine, targets, tree)`` for every tree returned; ``None`` disables."""
    global _audit
    _audit = fn


def compute_ads(m, targets, profile="BE", budget=DEFAULT_BUDGET, raise_on_failure=False,
                recorder=None, check_minimal=False):
    """ADS for ``targets`` on machine ``m``, or ``None``.

    ``profile`` is ``"BE"`` (first found, breadth first), ``"ML"`` (minimal
    depth) or ``"MS"`` (minimal number of symbol nodes).  With
    ``raise_on_failure`` a failed search raises :class:`NoAdsExists` or
    :class:`AdsBudgetExhausted` instead of returning ``None``.
    """
    if profile not in PROFILES:
        raise ValueError(f"unknown ADS profile {profile!r}")
    targets = sorted(set(targets))
    if not targets:
        raise ValueError("no target states")
    if len(targets) == 1:
        return FinalNode(targets[0])
    delta, lam, _ = _tables(m)
    if check_minimal and _is_complete(delta) and _has_equivalent_states(m):
        raise NotMinimal("machine has equivalent states")
    counters["calls"] += 1
    try:
        if len(targets) == 2:
            tree = _pair_ads(m, targets[0], targets[1], recorder)
        elif profile == "BE" and len(targets) == len(delta) and recorder is None and _is_complete(delta):
            tree = ly_ads(m)
            if isinstance(tree, IndistinguishableSet):
                tree = None
        elif profile == "BE":
            tree = _BestEffort(m, _Budget(budget), recorder).solve(tuple(targets))
        else:
            # the leveled search is complete, so a cheap failure there spares
            # the optimal search from exploring the whole successor graph
            shared = _Budget(budget)
            tree = _BestEffort(m, shared, recorder).solve(tuple(targets))
            if tree is not None:
                tree = _Optimal(m, profile, shared).solve(tuple(targets))
    except AdsBudgetExhausted:
        counters["budget_hits"] += 1
        if raise_on_failure:
            raise
        return None
    if tree is None:
        if raise_on_failure:
            raise NoAdsExists(f"no ADS for states {targets}")
        return None
    counters["found"] += 1
    if _audit is not None:
        _audit(m, targets, tree)
    return tree


def defensive_ads(m, targets, close_fn, profile="BE", budget=DEFAULT_BUDGET):
    """ADS search on a partial machine that closes blocking transitions on demand.

    When a search fails, the smallest recorded set of open transitions that
    stopped it is closed through ``close_fn(state, symbol)`` and the search is
    retried.  Exceptions raised by ``close_fn`` propagate.
    """
    closed = set()
    while True:
        rec = BlockRecorder()
        tree = compute_ads(m, targets, profile, budget, recorder=rec)
        if tree is not None:
            return tree
        if rec.states is None:
            return None
        todo = [(s, rec.symbol) for s in rec.states if (s, rec.symbol) not in closed]
        if not todo:
            return None
        for s, i in todo:
            closed.add((s, i))
            close_fn(s, i)
