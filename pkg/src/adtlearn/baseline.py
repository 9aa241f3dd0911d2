"""Classic discrimination-tree learner used as a reference point.

Inner nodes hold a suffix; a word is classified by querying
``reset + access + suffix`` at every inner node on its way down and following
the child labelled with the whole output word.  Counterexamples are processed
with the same binary-search decomposition as the ADT learner.
"""

from collections import deque

from .learner import Decomposition, Hypothesis, NotACounterexample
from .mealy import MealyMachine
from .oracle import suffix_query


class _Inner:
    __slots__ = ("suffix", "children", "parent")

    def __init__(self, suffix):
        self.suffix = suffix
        self.children = {}
        self.parent = None


class _Leaf:
    __slots__ = ("state", "parent")

    def __init__(self, state):
        self.state = state
        self.parent = None


class DTLearner:
    def __init__(self, oracle, inputs, outputs):
        self.oracle = oracle
        self.inputs = inputs
        self.outputs = outputs
        self.hyp = Hypothesis(len(inputs))
        self.root = None
        self.leaves = {}
        self.decompositions = []

    def initialize(self):
        self.hyp.add_state(())
        self.root = _Leaf(0)
        self.leaves[0] = self.root
        for i in range(self.hyp.k):
            self.hyp.open.append((0, i))
        self._close()

    def hypothesis(self):
        return MealyMachine(self.inputs, self.outputs, self.hyp.delta, self.hyp.lam, 0)

    def _sift(self, word):
        node = self.root
        while type(node) is _Inner:
            out = suffix_query(self.oracle, word, node.suffix)
            child = node.children.get(out)
            if child is None:
                child = _Leaf(None)
                child.parent = node
                node.children[out] = child
                return child
            node = child
        return node

    def _close(self):
        hyp = self.hyp
        while hyp.open:
            s, i = hyp.open.popleft()
            if hyp.delta[s][i] >= 0:
                continue
            lp = hyp.access[s] + (i,)
            if hyp.lam[s][i] < 0:
                hyp.lam[s][i] = suffix_query(self.oracle, hyp.access[s], (i,))[0]
            leaf = self._sift(lp)
            if leaf.state is None:
                n = hyp.add_state(lp)
                leaf.state = n
                self.leaves[n] = leaf
                hyp.spanning.add((s, i))
                for j in range(hyp.k):
                    hyp.open.append((n, j))
            hyp.delta[s][i] = leaf.state

    def _decompose(self, inputs, outputs):
        hyp = self.hyp
        hout = hyp.run(inputs)
        j = next((p for p in range(len(inputs)) if hout[p] != outputs[p]), None)
        if j is None:
            raise NotACounterexample(repr(inputs))
        inputs = tuple(inputs[:j + 1])
        states = [0]
        for i in inputs:
            states.append(hyp.delta[states[-1]][i])
        first = outputs[j]
        lo, hi = 0, j
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if suffix_query(self.oracle, hyp.access[states[mid]], inputs[mid:])[-1] == first:
                lo = mid
            else:
                hi = mid
        dec = Decomposition(inputs[:lo], inputs[lo], inputs[lo + 1:], hyp.access[states[lo]])
        self.decompositions.append(dec)
        return dec

    def refine(self, inputs, outputs):
        ce = (tuple(inputs), tuple(outputs))
        changed = False
        while True:
            out = self.hyp.run(ce[0])
            if out is None or out == ce[1]:
                return changed
            changed = True
            self._refine_once(*ce)

    def _refine_once(self, inputs, outputs):
        hyp = self.hyp
        dec = self._decompose(inputs, outputs)
        su = hyp.state_after(dec.u)
        sp = hyp.delta[su][dec.a]
        n = hyp.add_state(hyp.access[su] + (dec.a,))
        hyp.delta[su][dec.a] = n
        hyp.spanning.add((su, dec.a))
        leaf = self.leaves[sp]
        inner = _Inner(dec.v)
        parent = leaf.parent
        o_old = suffix_query(self.oracle, hyp.access[sp], dec.v)
        o_new = suffix_query(self.oracle, hyp.access[n], dec.v)
        a, b = _Leaf(sp), _Leaf(n)
        a.parent = b.parent = inner
        inner.children[o_old] = a
        inner.children[o_new] = b
        self.leaves[sp] = a
        self.leaves[n] = b
        if parent is None:
            self.root = inner
        else:
            for key, child in parent.children.items():
                if child is leaf:
                    parent.children[key] = inner
                    break
        inner.parent = parent
        for j in range(hyp.k):
            hyp.open.append((n, j))
        for s, i in hyp.incoming(sp):
            hyp.enqueue(s, i)
        self._close()

    def inner_nodes(self):
        out = []
        queue = deque([self.root])
        while queue:
            node = queue.popleft()
            if type(node) is _Inner:
                out.append(node)
                queue.extend(node.children.values())
        return out
