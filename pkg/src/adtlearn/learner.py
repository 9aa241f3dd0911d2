"""The ADT learner for Mealy machines.

The learner keeps a hypothesis (access words plus transition and output
tables) and an ADT that classifies the states reached by access words.
Counterexamples are decomposed with a binary search; each decomposition adds
one state and splits one ADT leaf.  Optional heuristics try to replace parts
of the ADT by reset-free adaptive distinguishing sequences.
"""

import re
from collections import deque
from dataclasses import dataclass

from . import adt as adtmod
from .adt import Adt, FinalNode, ResetNode, split_leaf, trace, traces
from .ads import DEFAULT_BUDGET, PROFILES
from .mealy import MealyMachine
from .oracle import suffix_query


class LearnerError(Exception):
    pass


class NotACounterexample(LearnerError):
    pass


class ModificationSignal(Exception):
    """Raised while a heuristic runs if closing a transition added a state."""


class AdtVerificationError(LearnerError):
    pass


_SPEC = re.compile(
    r"^ADT\[(NSE|SE)\|(NIR|IR_(?:BE|ML|MS))\|(NSR|(?:LR|ER|SR)_(?:BE|ML|MS))(\|OT)?\]$")


@dataclass(frozen=True)
class LearnerConfig:
    """Which heuristics the learner runs.

    ``immediate`` and ``subtree_profile`` are ADS profiles (``BE``, ``ML``,
    ``MS``) or ``None``; ``subtree`` is ``"LR"``, ``"ER"``, ``"SR"`` or ``None``.
    ``observation_tree`` enables the observation-tree discriminator shortcuts.
    """

    extend: bool = False
    immediate: str = None
    subtree: str = None
    subtree_profile: str = "BE"
    observation_tree: bool = False
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.immediate is not None and self.immediate not in PROFILES:
            raise ValueError(f"unknown immediate profile {self.immediate!r}")
        if self.subtree not in (None, "LR", "ER", "SR"):
            raise ValueError(f"unknown subtree heuristic {self.subtree!r}")
        if self.subtree_profile not in PROFILES:
            raise ValueError(f"unknown subtree profile {self.subtree_profile!r}")

    @classmethod
    def parse(cls, spec):
        """Parse ``ADT[a|b|c]`` (e.g. ``ADT[SE|IR_BE|LR_MS]``); ``|OT`` may follow."""
        m = _SPEC.match(spec.replace(" ", ""))
        if not m:
            raise ValueError(f"bad learner spec {spec!r}; expected ADT[NSE|SE | NIR|IR_x | NSR|LR_x|ER_x|SR_x]")
        ext, imm, sub, ot = m.groups()
        immediate = None if imm == "NIR" else imm[3:]
        subtree, profile = (None, "BE") if sub == "NSR" else (sub[:2], sub[3:])
        return cls(extend=ext == "SE", immediate=immediate, subtree=subtree,
                   subtree_profile=profile, observation_tree=bool(ot))

    @property
    def name(self):
        a = "SE" if self.extend else "NSE"
        b = "NIR" if self.immediate is None else f"IR_{self.immediate}"
        c = "NSR" if self.subtree is None else f"{self.subtree}_{self.subtree_profile}"
        return f"ADT[{a}|{b}|{c}{'|OT' if self.observation_tree else ''}]"

    def __str__(self):
        return self.name


def all_configs():
    """The 24 combinations of the naming scheme with BE profiles and NSR/LR_x."""
    out = []
    for ext in (False, True):
        for imm in (None, "BE"):
            for sub, prof in ((None, "BE"), ("LR", "BE"), ("LR", "ML"), ("LR", "MS"), ("ER", "BE"), ("SR", "BE")):
                out.append(LearnerConfig(extend=ext, immediate=imm, subtree=sub, subtree_profile=prof))
    return out


@dataclass(frozen=True)
class Decomposition:
    """``u a v`` split of a counterexample.

    ``u`` is the literal prefix; ``access`` is the access word of the
    hypothesis state reached by ``u``, which is what the split is based on.
    """

    u: tuple
    a: int
    v: tuple
    access: tuple


class Hypothesis:
    """Mutable hypothesis: dense states, ``-1`` for open entries."""

    def __init__(self, num_inputs):
        self.k = num_inputs
        self.delta = []
        self.lam = []
        self.access = []
        self.spanning = set()
        self.open = deque()

    @property
    def num_states(self):
        return len(self.delta)

    def add_state(self, access):
        self.delta.append([-1] * self.k)
        self.lam.append([-1] * self.k)
        self.access.append(tuple(access))
        return len(self.delta) - 1

    def enqueue(self, s, i):
        self.delta[s][i] = -1
        self.open.append((s, i))

    def incoming(self, target, spanning=False):
        """Transitions into ``target``; spanning-tree edges only if asked for.

        A spanning edge always sifts back to its own state, so re-sifting it
        is wasted work and would break the access paths meanwhile.
        """
        span = self.spanning
        return [(s, i) for s, row in enumerate(self.delta) for i, t in enumerate(row)
                if t == target and (spanning or (s, i) not in span)]

    def state_after(self, word, start=0):
        s = start
        delta = self.delta
        for i in word:
            s = delta[s][i]
            if s < 0:
                return None
        return s

    def run(self, word, start=0):
        """Output word from ``start``, or ``None`` if an open entry is hit."""
        s = start
        delta, lam = self.delta, self.lam
        out = []
        for i in word:
            o = lam[s][i]
            t = delta[s][i]
            if o < 0 or t < 0:
                return None
            out.append(o)
            s = t
        return tuple(out)

    def is_complete(self):
        return all(t >= 0 for row in self.delta for t in row)

    def to_machine(self, inputs, outputs):
        return MealyMachine(inputs, outputs, self.delta, self.lam, 0)


class CounterexampleStore:
    """Every counterexample seen (insertion ordered) and a FIFO of pending ones."""

    def __init__(self):
        self.seen = {}
        self.pending = deque()

    def add(self, ce, pending=True):
        ce = (tuple(ce[0]), tuple(ce[1]))
        self.seen.setdefault(ce, None)
        if pending:
            self.pending.append(ce)
        return ce

    def __len__(self):
        return len(self.seen)


class Stats:
    """Counters behind the ADT_* and OT_* statistics."""

    __slots__ = ("proposed", "proposed_states", "proposed_symbols", "accepted_symbols",
                 "accepted_resets", "accepted_perfect", "accepted", "ot_extend", "ot_shorter",
                 "decompositions", "discarded")

    def __init__(self):
        for name in self.__slots__:
            setattr(self, name, 0)

    def as_dict(self):
        return {name: getattr(self, name) for name in self.__slots__}


class ADTLearner:
    """Active learner driven through a caching symbol oracle.

    ``listener``, if given, is called as ``listener(event, data)`` for every
    learner event.  ``verifier``, if given, is called with the learner after
    each change of the ADT and may raise.
    """

    def __init__(self, oracle, inputs, outputs, config=None, listener=None, verifier=None):
        self.oracle = oracle
        self.inputs = inputs
        self.outputs = outputs
        self.config = config or LearnerConfig()
        self.listener = listener
        self.verifier = verifier
        self.hyp = Hypothesis(len(inputs))
        self.adt = None
        self.store = CounterexampleStore()
        self.stats = Stats()
        self.decompositions = []
        self._signal = False
        self._hints = {}

    # -------------------------------------------------------------- plumbing

    def emit(self, event, **data):
        if self.listener is not None:
            self.listener(event, data)

    def _verify(self):
        if self.verifier is not None:
            self.verifier(self)

    def hypothesis(self):
        return self.hyp.to_machine(self.inputs, self.outputs)

    # ---------------------------------------------------------- construction

    def initialize(self):
        hyp = self.hyp
        hyp.add_state(())
        self.adt = Adt(FinalNode(0))
        for i in range(hyp.k):
            hyp.enqueue(0, i)
        self.close_transitions()
        self.emit("initialized", states=hyp.num_states)
        self._verify()

    def close_transitions(self):
        hyp = self.hyp
        while hyp.open:
            s, i = hyp.open.popleft()
            if hyp.delta[s][i] < 0:
                self.close_transition(s, i)

    def close_transition(self, s, i):
        """Determine output and target of transition ``(s, i)`` by sifting."""
        hyp = self.hyp
        lp = hyp.access[s] + (i,)
        start = self._hints.pop((s, i), None)
        if hyp.lam[s][i] < 0:
            self.oracle.reset()
            if hyp.access[s]:
                self.oracle.query_word(hyp.access[s])
            hyp.lam[s][i] = self.oracle.query(i)
            leaf = self.adt.sift(lp, self.oracle, positioned=True)
        else:
            leaf = self.adt.sift(lp, self.oracle, start=start)
        if leaf.state is not None:
            hyp.delta[s][i] = leaf.state
            return
        n = hyp.add_state(lp)
        leaf.state = n
        self.adt.leaves[n] = leaf
        hyp.delta[s][i] = n
        hyp.spanning.add((s, i))
        for j in range(hyp.k):
            hyp.open.append((n, j))
        self.emit("state_added", state=n, cause="sift")
        if self._signal:
            raise ModificationSignal()

    # --------------------------------------------------------- counterexamples

    def is_counterexample(self, ce):
        out = self.hyp.run(ce[0])
        return out is not None and out != tuple(ce[1])

    def decompose(self, inputs, outputs):
        """Binary search for adjacent positions whose swap of prefix changes the output."""
        inputs = tuple(inputs)
        outputs = tuple(outputs)
        hyp = self.hyp
        hout = hyp.run(inputs)
        if hout is None:
            raise LearnerError("hypothesis is not closed")
        j = next((p for p in range(len(inputs)) if hout[p] != outputs[p]), None)
        if j is None:
            raise NotACounterexample(f"{inputs!r} is answered correctly by the hypothesis")
        inputs = inputs[:j + 1]
        states = [0]
        for i in inputs:
            states.append(hyp.delta[states[-1]][i])
        first = outputs[j]
        last = hout[j]

        def alpha(p):
            return suffix_query(self.oracle, hyp.access[states[p]], inputs[p:])[-1]

        lo, hi = 0, j
        if first == last:
            raise NotACounterexample("decomposition end points agree")
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if alpha(mid) == first:
                lo = mid
            else:
                hi = mid
        dec = Decomposition(inputs[:lo], inputs[lo], inputs[lo + 1:], hyp.access[states[lo]])
        self.decompositions.append(dec)
        self.stats.decompositions += 1
        self.emit("decomposition", u=dec.u, a=dec.a, v=dec.v, access=dec.access)
        return dec

    def refine(self, inputs, outputs):
        """Process an external counterexample.  Returns ``False`` if it is stale."""
        ce = (tuple(inputs), tuple(outputs))
        if len(ce[0]) != len(ce[1]):
            raise ValueError("input and output words differ in length")
        if not self.is_counterexample(ce):
            return False
        self.emit("counterexample", length=len(ce[0]))
        if self.config.subtree is not None:
            from . import replace
            reps = replace.subtree_replacements(self)
            if reps:
                replace.apply_replacements(self, reps)
        self.store.add(ce)
        self._refine_loop()
        return True

    def _refine_loop(self):
        store = self.store
        while True:
            while store.pending:
                ce = store.pending.popleft()
                while self.refine_internal(ce):
                    pass
            self.ensure_adt_consistency()
            if store.pending:
                continue
            for ce in list(store.seen):
                if self.is_counterexample(ce):
                    store.pending.append(ce)
            if not store.pending:
                return

    def refine_internal(self, ce):
        if not self.is_counterexample(ce):
            return False
        hyp = self.hyp
        dec = self.decompose(*ce)
        su = hyp.state_after(dec.u)
        sp = hyp.delta[su][dec.a]
        n = hyp.add_state(hyp.access[su] + (dec.a,))
        hyp.delta[su][dec.a] = n
        hyp.spanning.add((su, dec.a))
        self.emit("state_added", state=n, cause="counterexample")
        leaf = self.adt.leaves[sp]
        head = self._split(leaf, sp, n, dec.v)
        for j in range(hyp.k):
            hyp.open.append((n, j))
        start = head.parent if type(head.parent) is ResetNode else head
        for s, i in hyp.incoming(sp):
            hyp.enqueue(s, i)
            self._hints[(s, i)] = start
        self._verify()
        if self.config.immediate is not None and type(head.parent) is ResetNode:
            from . import replace
            rep = replace.immediate_replacement(self, head)
            if rep is not None:
                replace.apply_replacements(self, [rep])
        self.close_transitions()
        self._verify()
        return True

    def _split(self, leaf, sp, n, v):
        hyp = self.hyp
        acc_sp, acc_n = hyp.access[sp], hyp.access[n]
        extend = self.config.extend
        if self.config.observation_tree:
            tree = self.oracle.tree
            t_in, _ = trace(leaf)
            found = False
            if t_in:
                a = tree.node_for(acc_sp + t_in)
                b = tree.node_for(acc_n + t_in)
                w = tree.separating_word(a, b) if a is not None and b is not None else None
                if w:
                    v = t_in + w
                    extend = found = True
                    self.stats.ot_extend += 1
                    self.emit("ot_extension", length=len(w))
            if not found:
                a = tree.node_for(acc_sp)
                b = tree.node_for(acc_n)
                w = tree.separating_word(a, b) if a is not None and b is not None else None
                if w and len(w) < len(v):
                    v = w
                    self.stats.ot_shorter += 1
                    self.emit("ot_shorter", length=len(w))
        o_old = suffix_query(self.oracle, acc_sp, v)
        o_new = suffix_query(self.oracle, acc_n, v)
        head = split_leaf(self.adt, leaf, sp, n, v, o_old, o_new, extend=extend)
        self.emit("split", old=sp, new=n, length=len(v), reset=type(head.parent) is ResetNode)
        return head

    def ensure_adt_consistency(self):
        """Queue a counterexample for every ADT trace the hypothesis contradicts."""
        hyp = self.hyp
        found = 0
        for f in adtmod.collect_leaves(self.adt.root):
            s = f.state
            if s is None:
                continue
            for t_in, t_out in traces(f):
                got = hyp.run(t_in, s)
                if got is None or got == t_out:
                    continue
                k = next(p for p in range(len(t_in)) if got[p] != t_out[p])
                acc = hyp.access[s]
                ce = (acc + t_in[:k + 1], hyp.run(acc) + t_out[:k + 1])
                self.store.add(ce)
                found += 1
        if found:
            self.emit("adt_inconsistency", count=found)
        return found

    # ------------------------------------------------------------------ misc

    def learn(self, equivalence_oracle, max_rounds=None):
        """Convenience loop; returns the final hypothesis machine."""
        if self.adt is None:
            self.initialize()
        rounds = 0
        while max_rounds is None or rounds < max_rounds:
            rounds += 1
            ce = equivalence_oracle.find_counterexample(self.hypothesis())
            if ce is None:
                break
            self.refine(*ce)
        return self.hypothesis()


def twin_verifier(sul):
    """Verifier that checks every ADT trace against an uncounted copy of the system."""

    def check(learner):
        bad = learner.adt.verify_against(learner.hyp.access, sul)
        if bad:
            raise AdtVerificationError(f"{len(bad)} ADT trace(s) disagree with the system, first: {bad[0]}")
        adtmod.check_wellformed(learner.adt.root)

    return check
