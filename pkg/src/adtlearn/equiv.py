"""Equivalence oracles.

Each oracle has ``find_counterexample(hypothesis)`` returning ``None`` or an
``(inputs, outputs)`` pair where ``outputs`` are the system's answers and
differ from the hypothesis on the last symbol or earlier.
"""

import itertools

import numpy as np

from . import kernels
from .mealy import separating_word, state_separating_word, with_self_loops
from .oracle import membership_query

EXPANDED_LENGTH = 500


class EquivalenceOracle:
    def find_counterexample(self, hyp):
        raise NotImplementedError


class ExactOracle(EquivalenceOracle):
    """White-box oracle: shortest separating word against the known target."""

    def __init__(self, target):
        self.target = target

    def find_counterexample(self, hyp):
        hyp = hyp.relabel_outputs(self.target.outputs)
        w = separating_word(self.target, hyp)
        if w is None:
            return None
        return w, self.target.trace(w)


class ExpandedOracle(EquivalenceOracle):
    """Pads separating words with self loops of the modified target.

    The target is rewritten so that state ``x`` loops on input ``x mod |I|``.
    A separating word ``w`` is turned into ``w[:-1] + loop * pad + w[-1:]``
    with total length :data:`EXPANDED_LENGTH`, if that is still a
    counterexample; otherwise ``w`` is returned unchanged.
    """

    def __init__(self, target, length=EXPANDED_LENGTH):
        self.target = with_self_loops(target)
        self.length = length

    def find_counterexample(self, hyp):
        hyp = hyp.relabel_outputs(self.target.outputs)
        target = self.target
        w = separating_word(target, hyp)
        if w is None:
            return None
        if len(w) < self.length:
            x = target.state_after(w[:-1])
            y = x % target.num_inputs
            longer = w[:-1] + (y,) * (self.length - len(w)) + w[-1:]
            out = target.trace(longer)
            if out != hyp.trace(longer):
                return longer, out
        return w, target.trace(w)


class RandomWordOracle(EquivalenceOracle):
    """Random words posed as membership queries through the learner's oracle.

    ``queries`` words per call with lengths uniform in ``[min_len, max_len]``.
    The generator is seeded once, so a fixed seed gives a reproducible run.
    """

    def __init__(self, oracle, num_inputs, queries=200, min_len=20, max_len=400, seed=0):
        if min_len < 1 or max_len < min_len:
            raise ValueError("bad word length range")
        self.oracle = oracle
        self.k = num_inputs
        self.queries = queries
        self.min_len = min_len
        self.max_len = max_len
        self.rng = np.random.default_rng(seed)

    def find_counterexample(self, hyp):
        for _ in range(self.queries):
            n = int(self.rng.integers(self.min_len, self.max_len + 1))
            word = tuple(int(x) for x in self.rng.integers(0, self.k, size=n))
            out = membership_query(self.oracle, word)
            if hyp.trace(word) != out:
                return word, out
        return None


def characterizing_set(hyp):
    """Separating words for all state pairs (deduplicated, order of discovery)."""
    words = {}
    n = hyp.num_states
    for p in range(n):
        for q in range(p + 1, n):
            w = state_separating_word(hyp, p, q)
            if w is not None:
                words.setdefault(w, None)
    return list(words)


def identification_sets(hyp, wset):
    """Per state, a subset of ``wset`` that tells it apart from every other state."""
    n = hyp.num_states
    traces = [[hyp.trace(w, s) for w in wset] for s in range(n)]
    out = []
    for s in range(n):
        chosen = []
        rest = [t for t in range(n) if t != s]
        while rest:
            best = max(range(len(wset)), key=lambda j: sum(traces[s][j] != traces[t][j] for t in rest))
            left = [t for t in rest if traces[s][best] == traces[t][best]]
            if len(left) == len(rest):
                break
            chosen.append(wset[best])
            rest = left
        out.append(chosen)
    return out


class WpOracle(EquivalenceOracle):
    """Wp-method conformance test for up to ``depth`` extra states."""

    def __init__(self, oracle, depth=1):
        self.oracle = oracle
        self.depth = depth

    def test_words(self, hyp):
        k = hyp.num_inputs
        acc = hyp.access_sequences()
        cover = [acc[s] for s in sorted(acc, key=lambda s: (len(acc[s]), acc[s]))]
        wset = characterizing_set(hyp) or [(i,) for i in range(k)]
        ident = identification_sets(hyp, wset)
        middles = [()]
        for d in range(1, self.depth + 1):
            middles.extend(itertools.product(range(k), repeat=d))
        seen = set()
        for p in cover:
            for m in middles:
                for w in wset:
                    word = p + m + w
                    if word not in seen:
                        seen.add(word)
                        yield word
        cover_set = set(cover)
        for p in cover:
            for i in range(k):
                pi = p + (i,)
                if pi in cover_set:
                    continue
                for m in middles:
                    s = hyp.state_after(pi + m)
                    for w in ident[s] or wset:
                        word = pi + m + w
                        if word not in seen:
                            seen.add(word)
                            yield word

    def find_counterexample(self, hyp):
        for word in self.test_words(hyp):
            out = membership_query(self.oracle, word)
            if hyp.trace(word) != out:
                return word, out
        return None


class ChainOracle(EquivalenceOracle):
    """Ask each oracle in turn; the first counterexample wins."""

    def __init__(self, oracles):
        self.oracles = list(oracles)

    def find_counterexample(self, hyp):
        for o in self.oracles:
            ce = o.find_counterexample(hyp)
            if ce is not None:
                return ce
        return None


class CacheConsistencyOracle(EquivalenceOracle):
    """Looks for recorded observations the hypothesis contradicts."""

    def __init__(self, tree):
        self.tree = tree

    def find_counterexample(self, hyp):
        stack = [(self.tree.root, hyp.initial, (), ())]
        delta, lam = hyp.delta, hyp.lam
        while stack:
            node, s, word, out = stack.pop()
            for i in sorted(node, reverse=True):
                o, child = node[i]
                if lam[s][i] != o:
                    return word + (i,), out + (o,)
                stack.append((child, delta[s][i], word + (i,), out + (o,)))
        return None


class ScriptedOracle(EquivalenceOracle):
    """Hands out fixed counterexamples (checked against a target) in order."""

    def __init__(self, target, words):
        self.target = target
        self.words = [tuple(w) for w in words]

    def find_counterexample(self, hyp):
        while self.words:
            w = self.words.pop(0)
            out = self.target.trace(w)
            if hyp.relabel_outputs(self.target.outputs).trace(w) != out:
                return w, out
        return None


def run_words(machine, words):
    """Outputs of many words at once through the array kernel."""
    if not words:
        return []
    width = max(len(w) for w in words)
    arr = np.full((len(words), max(width, 1)), 0, dtype=np.int64)
    lengths = np.array([len(w) for w in words], dtype=np.int64)
    for j, w in enumerate(words):
        arr[j, :len(w)] = w
    out, _ = kernels.run_words(machine.transitions, machine.output_table, machine.initial, arr, lengths)
    return [tuple(int(x) for x in out[j, :len(w)]) for j, w in enumerate(words)]
