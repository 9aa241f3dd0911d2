"""Replacing ADT subtrees by cheaper, reset-free trees.

A heuristic proposes :class:`Replacement` objects computed on the hypothesis.
Each proposal is validated against the system first; the validated tree is
spliced in only if it lowers the effective reset count of the region it
replaces.  Afterwards every transition into a state of a spliced region is
sifted again.
"""

from dataclasses import dataclass, field

from .adt import (Adt, ResetNode, collect_child_adts, collect_leaves, collect_reset_nodes,
                  collect_sub_adts, collect_symbol_nodes, chain, effective_reset_count,
                  find_lca, has_reset, leaf_states, reset_ratio, split_leaf, trace)
from .ads import compute_ads, defensive_ads, relabel
from .oracle import suffix_query


@dataclass
class Replacement:
    """Proposal to put ``tree`` where ``node`` is, covering all but ``cutout``."""

    node: object
    tree: object
    cutout: tuple = field(default_factory=tuple)


def _merge(result, inputs, outputs, state):
    """Graft a linear trace into ``result``; ``False`` if they conflict."""
    from .adt import FinalNode, SymbolNode
    node = result
    for j, (i, o) in enumerate(zip(inputs, outputs)):
        if type(node) is not SymbolNode or node.symbol != i:
            return False
        child = node.children.get(o)
        if child is None:
            node.add(o, chain(inputs[j + 1:], outputs[j + 1:], FinalNode(state)))
            return True
        node = child
    return False


def validate(learner, node, tree, cutout=()):
    """Check a proposed tree against the system and repair it.

    Every leaf's trace is replayed after its state's access word and the
    parent trace of ``node``.  A diverging output truncates the trace there
    and queues a counterexample.  Traces are merged into one tree; states that
    do not fit, and the ``cutout`` states, are placed by
    :func:`resolve_ambiguities`.  Returns the root of the validated tree.
    """
    from .adt import FinalNode
    hyp = learner.hyp
    oracle = learner.oracle
    pi, po = trace(node)
    holder = None
    for f in collect_leaves(tree):
        s = f.state
        t_in, t_out = trace(f)
        acc = hyp.access[s]
        oracle.reset()
        oracle.query_word(acc + pi)
        observed = []
        for i, expect in zip(t_in, t_out):
            o = oracle.query(i)
            observed.append(o)
            if o != expect:
                learner.store.add((acc + pi + tuple(t_in[:len(observed)]),
                                   hyp.run(acc) + po + tuple(observed)))
                break
        ins = tuple(t_in[:len(observed)])
        outs = tuple(observed)
        if holder is None:
            holder = Adt(chain(ins, outs, FinalNode(s)))
        elif not _merge(holder.root, ins, outs, s):
            resolve_ambiguities(learner, node, holder, s)
    for s in cutout:
        resolve_ambiguities(learner, node, holder, s)
    return holder.root


def resolve_ambiguities(learner, node, holder, s):
    """Sift state ``s`` through the tree in ``holder`` and split on conflict.

    The conflicting states are told apart by the discriminator at their lowest
    common ancestor in the learner's current ADT.
    """
    hyp = learner.hyp
    oracle = learner.oracle
    pi, _ = trace(node)
    acc = hyp.access[s]
    oracle.reset()
    oracle.query_word(acc + pi)
    leaf = holder.sift(acc, oracle, positioned=True)
    if leaf.state is None:
        leaf.state = s
        holder.leaves[s] = leaf
        return
    t = leaf.state
    if t == s:
        return
    lca = find_lca(learner.adt, t, s)
    disc = trace(lca)[0] + (lca.symbol,)
    o_t = suffix_query(oracle, hyp.access[t], disc)
    o_s = suffix_query(oracle, acc, disc)
    split_leaf(holder, leaf, t, s, disc, o_t, o_s, extend=False, top_reset=bool(pi))


def apply_replacements(learner, replacements):
    """Validate, filter and splice proposals; returns the accepted trees."""
    stats = learner.stats
    adt = learner.adt
    hyp = learner.hyp
    accepted = []
    for rep in replacements:
        stats.proposed += 1
        stats.proposed_states += len(collect_leaves(rep.tree)) + len(rep.cutout)
        stats.proposed_symbols += len(collect_symbol_nodes(rep.tree))
        learner.emit("replacement_proposed", states=len(collect_leaves(rep.tree)))
        validated = validate(learner, rep.node, rep.tree, rep.cutout)
        before = effective_reset_count(rep.node)
        after = effective_reset_count(validated)
        if after >= before:
            stats.discarded += 1
            learner.emit("replacement_discarded", before=before, after=after)
            continue
        adt.replace(rep.node, validated)
        resets = len(collect_reset_nodes(validated))
        stats.accepted += 1
        stats.accepted_symbols += len(collect_symbol_nodes(validated))
        stats.accepted_resets += resets
        stats.accepted_perfect += resets == 0
        learner.emit("replacement_accepted", before=before, after=after, resets=resets)
        accepted.append(validated)
    if accepted:
        adt.reindex()
        learner._hints.clear()
        for tree in accepted:
            for s in leaf_states(tree):
                for src, i in hyp.incoming(s):
                    hyp.enqueue(src, i)
        learner._verify()
        learner.close_transitions()
    return accepted


# ---------------------------------------------------------------- heuristics

def _follow(hyp, targets, word, outputs=None):
    """Map each target through ``word``; ``None`` on convergence.

    Returns ``{current: original}``.
    """
    mapping = {s: s for s in targets}
    for k, i in enumerate(word):
        nxt = {}
        for s in sorted(mapping):
            t = hyp.delta[s][i]
            if t < 0 or t in nxt:
                return None
            nxt[t] = mapping[s]
        mapping = nxt
    return mapping


def compute_adt_extension(learner, node, profile=None):
    """Reset-free tree for the states below the reset node above ``node``.

    The parent trace is applied to every state first; the ADS is computed for
    the successors and relabelled to the original states.
    """
    reset = node.parent
    if reset is None or type(reset) is not ResetNode:
        return None
    profile = profile or learner.config.subtree_profile
    pi, _ = trace(reset)
    mapping = _follow(learner.hyp, leaf_states(node), pi)
    if mapping is None:
        return None
    ads = compute_ads(learner.hyp, list(mapping), profile, learner.config.budget)
    if ads is None:
        return None
    return relabel(ads, mapping)


def heuristic_leveled(learner, profile=None):
    from collections import deque
    profile = profile or learner.config.subtree_profile
    out = []
    queue = deque([learner.adt.root])
    while queue:
        node = queue.popleft()
        ext = compute_adt_extension(learner, node, profile)
        if ext is not None:
            out.append(Replacement(node.parent, ext))
            continue
        if not has_reset(node):
            continue
        ads = compute_ads(learner.hyp, leaf_states(node), profile, learner.config.budget)
        if ads is not None:
            out.append(Replacement(node, ads))
            continue
        queue.extend(collect_child_adts(node))
    return out


def heuristic_exhaustive(learner, profile=None):
    profile = profile or learner.config.subtree_profile
    root = learner.adt.root
    if not has_reset(root):
        return []
    states = set(leaf_states(root))
    cutouts = [()] + sorted((tuple(sorted(leaf_states(sub))) for sub in collect_sub_adts(root)), key=len)
    for cut in cutouts:
        rest = states.difference(cut)
        if not rest:
            continue
        ads = compute_ads(learner.hyp, rest, profile, learner.config.budget)
        if ads is not None:
            return [Replacement(root, ads, cut)]
    return []


def heuristic_single(learner, profile=None):
    profile = profile or learner.config.subtree_profile
    subs = collect_sub_adts(learner.adt.root)
    subs.sort(key=reset_ratio, reverse=True)
    for sub in subs:
        ext = compute_adt_extension(learner, sub, profile)
        if ext is not None:
            return [Replacement(sub.parent, ext)]
        if has_reset(sub):
            ads = compute_ads(learner.hyp, leaf_states(sub), profile, learner.config.budget)
            if ads is not None:
                return [Replacement(sub, ads)]
    return []


_SUBTREE = {"LR": heuristic_leveled, "ER": heuristic_exhaustive, "SR": heuristic_single}


def subtree_replacements(learner):
    return _SUBTREE[learner.config.subtree](learner, learner.config.subtree_profile)


def immediate_replacement(learner, head, profile=None):
    """Try to replace a freshly split subtree (below a reset node) by an extension.

    Transitions needed along the parent trace and by the ADS search are
    closed on demand.  Returns a :class:`Replacement` or ``None``.
    """
    from .learner import ModificationSignal
    reset = head.parent
    if type(reset) is not ResetNode:
        return None
    profile = profile or learner.config.immediate
    hyp = learner.hyp
    pi, po = trace(reset)
    learner._signal = True
    try:
        while True:
            try:
                mapping = {s: s for s in leaf_states(head)}
                for k, i in enumerate(pi):
                    nxt = {}
                    for s in sorted(mapping):
                        if hyp.delta[s][i] < 0:
                            learner.close_transition(s, i)
                        if hyp.lam[s][i] != po[k]:
                            acc = hyp.access[mapping[s]]
                            learner.store.add((acc + pi[:k + 1], hyp.run(acc) + po[:k + 1]))
                            return None
                        t = hyp.delta[s][i]
                        if t in nxt:
                            return None
                        nxt[t] = mapping[s]
                    mapping = nxt
                ads = defensive_ads(hyp, list(mapping), learner.close_transition, profile,
                                    learner.config.budget)
            except ModificationSignal:
                learner.emit("immediate_restart")
                continue
            if ads is None:
                return None
            return Replacement(reset, relabel(ads, mapping))
    finally:
        learner._signal = False
