"""Symbol query oracles and the observation tree cache."""

import logging

log = logging.getLogger(__name__)


class OracleError(Exception):
    pass


class QueryBeforeReset(OracleError):
    pass


class CacheInconsistency(OracleError):
    def __init__(self, word, cached, observed):
        self.word = tuple(word)
        self.cached = cached
        self.observed = observed
        super().__init__(f"after {self.word!r}: cache holds output {cached}, system answered {observed}")


class QueryCounters:
    """Resets and symbols that actually reached the system under learning."""

    __slots__ = ("resets", "symbols")

    def __init__(self):
        self.resets = 0
        self.symbols = 0

    def snapshot(self):
        return self.resets, self.symbols

    def __repr__(self):
        return f"QueryCounters(resets={self.resets}, symbols={self.symbols})"


class SymbolOracle:
    """Interface: ``reset()`` then any number of ``query(i)`` calls."""

    def reset(self):
        raise NotImplementedError

    def query(self, symbol):
        raise NotImplementedError

    def query_word(self, word):
        q = self.query
        return tuple([q(i) for i in word])


class SimulatedSUL(SymbolOracle):
    """A system under learning backed by a known Mealy machine."""

    def __init__(self, machine):
        self.machine = machine
        self._delta = machine.delta
        self._lam = machine.lam
        self._state = None
        self.counters = QueryCounters()

    def reset(self):
        self._state = self.machine.initial
        self.counters.resets += 1

    def query(self, symbol):
        s = self._state
        if s is None:
            raise QueryBeforeReset("query issued before the first reset")
        t = self._delta[s][symbol]
        if t < 0:
            from .mealy import UndefinedTransition
            raise UndefinedTransition(s, symbol)
        self._state = t
        self.counters.symbols += 1
        return self._lam[s][symbol]

    def query_word(self, word):
        s = self._state
        if s is None:
            raise QueryBeforeReset("query issued before the first reset")
        delta, lam = self._delta, self._lam
        out = []
        for i in word:
            out.append(lam[s][i])
            s = delta[s][i]
            if s < 0:
                from .mealy import UndefinedTransition
                raise UndefinedTransition(self._state, i)
        self._state = s
        self.counters.symbols += len(out)
        return tuple(out)


# An observation tree node is a dict: input -> [output, child node].


class ObservationTree:
    """Prefix-closed record of every observed run."""

    def __init__(self):
        self.root = {}
        self.size = 1

    def node_for(self, word):
        """Node reached by ``word``, or ``None`` if not fully recorded."""
        node = self.root
        for i in word:
            edge = node.get(i)
            if edge is None:
                return None
            node = edge[1]
        return node

    def outputs(self, word):
        """Recorded output word for ``word``, or ``None``."""
        node = self.root
        out = []
        for i in word:
            edge = node.get(i)
            if edge is None:
                return None
            out.append(edge[0])
            node = edge[1]
        return tuple(out)

    def insert(self, word, outputs):
        node = self.root
        for pos, (i, o) in enumerate(zip(word, outputs)):
            edge = node.get(i)
            if edge is None:
                edge = node[i] = [o, {}]
                self.size += 1
            elif edge[0] != o:
                raise CacheInconsistency(word[:pos + 1], edge[0], o)
            node = edge[1]
        return node

    def separating_word(self, n1, n2):
        """Shortest recorded word on which two nodes disagree, or ``None``.

        Only inputs recorded below both nodes are explored, smallest input first.
        """
        if n1 is n2:
            return None
        queue = [(n1, n2, ())]
        seen = {(id(n1), id(n2))}
        head = 0
        while head < len(queue):
            a, b, word = queue[head]
            head += 1
            if len(a) > len(b):
                common = [i for i in b if i in a]
            else:
                common = [i for i in a if i in b]
            common.sort()
            for i in common:
                ea, eb = a[i], b[i]
                if ea[0] != eb[0]:
                    return word + (i,)
            for i in common:
                ca, cb = a[i][1], b[i][1]
                if ca is cb:
                    continue
                key = (id(ca), id(cb))
                if key not in seen and ca and cb:
                    seen.add(key)
                    queue.append((ca, cb, word + (i,)))
        return None

    def walk(self):
        """Yield ``(word, outputs)`` for every maximal recorded run."""
        stack = [(self.root, (), ())]
        while stack:
            node, word, out = stack.pop()
            if not node:
                if word:
                    yield word, out
                continue
            for i in sorted(node, reverse=True):
                o, child = node[i]
                stack.append((child, word + (i,), out + (o,)))


class CachingOracle(SymbolOracle):
    """Serves runs from an observation tree and forwards only new behaviour.

    A run is answered from the tree until its first unrecorded edge.  At that
    point the inner oracle is reset once, the run's prefix is replayed on it,
    and every later symbol of the run is forwarded.  ``counters`` count what
    reached the inner oracle; ``issued`` counts what callers asked for.
    """

    def __init__(self, inner, warn_only=False):
        self.inner = inner
        self.tree = ObservationTree()
        self.counters = QueryCounters()
        self.issued = QueryCounters()
        self.warn_only = warn_only
        self.inconsistencies = 0
        self._node = None
        self._prefix = None
        self._live = False

    def reset(self):
        self._node = self.tree.root
        self._prefix = []
        self._live = False
        self.issued.resets += 1

    def _go_live(self):
        self.inner.reset()
        self.counters.resets += 1
        prefix = self._prefix
        if prefix:
            observed = self.inner.query_word(prefix)
            self.counters.symbols += len(prefix)
            cached = self.tree.outputs(prefix)
            if cached != observed:
                self._inconsistent(prefix, cached, observed)
        self._live = True

    def _inconsistent(self, word, cached, observed):
        self.inconsistencies += 1
        if not self.warn_only:
            raise CacheInconsistency(word, cached, observed)
        log.warning("cache inconsistency after %r: cached %r, observed %r", tuple(word), cached, observed)

    def query(self, symbol):
        node = self._node
        if node is None:
            raise QueryBeforeReset("query issued before the first reset")
        self.issued.symbols += 1
        self._prefix.append(symbol)
        edge = node.get(symbol)
        if edge is not None and not self._live:
            self._node = edge[1]
            return edge[0]
        if not self._live:
            self._prefix.pop()
            self._go_live()
            self._prefix.append(symbol)
        out = self.inner.query(symbol)
        self.counters.symbols += 1
        if edge is None:
            child = {}
            node[symbol] = [out, child]
            self.tree.size += 1
            self._node = child
        else:
            if edge[0] != out:
                self._inconsistent(self._prefix, edge[0], out)
                if self.warn_only:
                    edge[0] = out
            self._node = edge[1]
        return out

    def query_word(self, word):
        node = self._node
        if node is None:
            raise QueryBeforeReset("query issued before the first reset")
        if self._live:
            return tuple([self.query(i) for i in word])
        out = []
        for pos, i in enumerate(word):
            edge = node.get(i)
            if edge is None:
                self.issued.symbols += pos
                self._prefix.extend(word[:pos])
                self._node = node
                return tuple(out) + tuple([self.query(j) for j in word[pos:]])
            out.append(edge[0])
            node = edge[1]
        self.issued.symbols += len(word)
        self._prefix.extend(word)
        self._node = node
        return tuple(out)

    def ot_node_for(self, word):
        return self.tree.node_for(word)

    def ot_find_separating_word(self, n1, n2):
        return self.tree.separating_word(n1, n2)


def membership_query(oracle, word):
    """Reset, then the output word for ``word``."""
    oracle.reset()
    return oracle.query_word(word)


def suffix_query(oracle, prefix, suffix):
    """Outputs for ``suffix`` after ``prefix``, i.e. the tail of ``mq(prefix + suffix)``."""
    oracle.reset()
    if prefix:
        oracle.query_word(prefix)
    return oracle.query_word(suffix)
