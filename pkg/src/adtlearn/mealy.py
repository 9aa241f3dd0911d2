"""Deterministic Mealy machines over interned alphabets.

States, inputs and outputs are dense integers.  Alphabets map between those
integers and the human readable labels used in DOT files.  Transition and
output tables are ``(n, k)`` int arrays where ``-1`` marks an undefined entry.
"""

import re
from collections import deque

import numpy as np

from . import kernels


class MealyError(Exception):
    pass


class UndefinedTransition(MealyError):
    def __init__(self, state, symbol, position=None):
        self.state = state
        self.symbol = symbol
        self.position = position
        msg = f"no transition from state {state} on input {symbol}"
        if position is not None:
            msg += f" (word position {position})"
        super().__init__(msg)


class AlphabetMismatch(MealyError):
    pass


class ParseError(MealyError):
    def __init__(self, message, line, column):
        self.line = line
        self.column = column
        super().__init__(f"{message} at line {line}, column {column}")


class MissingInitial(MealyError):
    pass


class DuplicateTransition(MealyError):
    pass


class Alphabet:
    """Ordered set of symbol labels; index order is the canonical order."""

    __slots__ = ("labels", "_index")

    def __init__(self, labels):
        self.labels = tuple(str(x) for x in labels)
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self._index) != len(self.labels):
            raise ValueError("duplicate alphabet labels")

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, label):
        return label in self._index

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.labels == other.labels

    def __hash__(self):
        return hash(self.labels)

    def __repr__(self):
        return f"Alphabet({list(self.labels)!r})"

    def index(self, label):
        return self._index[label]

    def label(self, i):
        return self.labels[i]

    def encode(self, labels):
        return tuple(self._index[x] for x in labels)

    def decode(self, word):
        return tuple(self.labels[i] for i in word)

    def extended(self, labels):
        """Return an alphabet with ``labels`` appended where missing."""
        extra = [x for x in labels if x not in self._index]
        if not extra:
            return self
        return Alphabet(self.labels + tuple(dict.fromkeys(extra)))


class MealyMachine:
    """Immutable Mealy machine.

    ``transitions`` and ``outputs`` are read-only int64 arrays; ``delta`` and
    ``lam`` are the same tables as nested lists for fast scalar access.
    """

    def __init__(self, inputs, outputs, transitions, output_table, initial=0, state_labels=None):
        self.inputs = inputs if isinstance(inputs, Alphabet) else Alphabet(inputs)
        self.outputs = outputs if isinstance(outputs, Alphabet) else Alphabet(outputs)
        d, o = kernels.as_arrays(transitions, output_table)
        if d.shape != o.shape:
            raise ValueError("transition and output tables differ in shape")
        n, k = d.shape
        if k != len(self.inputs):
            raise AlphabetMismatch(f"table has {k} columns for {len(self.inputs)} inputs")
        if n and (d.max(initial=-1) >= n or d.min(initial=0) < -1):
            raise ValueError("transition target out of range")
        if n and (o.max(initial=-1) >= len(self.outputs) or o.min(initial=0) < -1):
            raise ValueError("output index out of range")
        if ((d < 0) != (o < 0)).any():
            raise ValueError("transition and output definedness differ")
        if not 0 <= initial < max(n, 1):
            raise ValueError("initial state out of range")
        d.setflags(write=False)
        o.setflags(write=False)
        self.transitions = d
        self.output_table = o
        self.initial = int(initial)
        self.delta = d.tolist()
        self.lam = o.tolist()
        self.state_labels = tuple(state_labels) if state_labels is not None else None

    @property
    def num_states(self):
        return self.transitions.shape[0]

    @property
    def num_inputs(self):
        return len(self.inputs)

    def __repr__(self):
        return f"<MealyMachine states={self.num_states} inputs={self.num_inputs} outputs={len(self.outputs)}>"

    def is_complete(self):
        return bool((self.transitions >= 0).all())

    def step(self, state, symbol):
        t = self.delta[state][symbol]
        if t < 0:
            raise UndefinedTransition(state, symbol)
        return t, self.lam[state][symbol]

    def state_after(self, word, start=None):
        s = self.initial if start is None else start
        delta = self.delta
        for pos, i in enumerate(word):
            t = delta[s][i]
            if t < 0:
                raise UndefinedTransition(s, i, pos)
            s = t
        return s

    def trace(self, word, start=None):
        """Output word produced by ``word`` from ``start`` (default: initial)."""
        s = self.initial if start is None else start
        delta, lam = self.delta, self.lam
        out = []
        for pos, i in enumerate(word):
            t = delta[s][i]
            if t < 0:
                raise UndefinedTransition(s, i, pos)
            out.append(lam[s][i])
            s = t
        return tuple(out)

    def trace_labels(self, labels, start=None):
        return self.outputs.decode(self.trace(self.inputs.encode(labels), start))

    def reachable_states(self):
        seen = [False] * self.num_states
        seen[self.initial] = True
        order = [self.initial]
        queue = deque(order)
        while queue:
            s = queue.popleft()
            for t in self.delta[s]:
                if t >= 0 and not seen[t]:
                    seen[t] = True
                    order.append(t)
                    queue.append(t)
        return order

    def access_sequences(self):
        """Shortest, input-order-minimal access word for each reachable state."""
        acc = {self.initial: ()}
        queue = deque([self.initial])
        while queue:
            s = queue.popleft()
            for i, t in enumerate(self.delta[s]):
                if t >= 0 and t not in acc:
                    acc[t] = acc[s] + (i,)
                    queue.append(t)
        return acc

    def relabel_outputs(self, alphabet):
        """Same machine with output indices expressed in ``alphabet``."""
        if alphabet == self.outputs:
            return self
        alphabet = alphabet.extended(self.outputs.labels)
        table = np.array([alphabet.index(x) for x in self.outputs.labels] + [-1], dtype=np.int64)
        return MealyMachine(self.inputs, alphabet, self.transitions, table[self.output_table],
                            self.initial, self.state_labels)


def _common_outputs(m1, m2):
    if m1.inputs != m2.inputs:
        raise AlphabetMismatch("machines use different input alphabets")
    if m1.outputs == m2.outputs:
        return m1, m2
    joint = m1.outputs.extended(m2.outputs.labels)
    return m1.relabel_outputs(joint), m2.relabel_outputs(joint)


def separating_word(m1, m2, s1=None, s2=None):
    """Shortest input word on which ``m1`` from ``s1`` and ``m2`` from ``s2`` differ.

    Ties between words of equal length go to the word that is smallest in
    input-index order.  Undefined transitions are not explored.  Returns
    ``None`` when no such word exists.
    """
    m1, m2 = _common_outputs(m1, m2)
    s1 = m1.initial if s1 is None else s1
    s2 = m2.initial if s2 is None else s2
    found, word, _, _, _ = kernels.pair_search(
        m1.transitions, m1.output_table, m2.transitions, m2.output_table, s1, s2, m1 is m2)
    return tuple(int(x) for x in word) if found else None


def state_separating_word(m, p, q):
    """Shortest word distinguishing states ``p`` and ``q`` of one machine."""
    if p == q:
        return None
    found, word, _, _, _ = kernels.pair_search(
        m.transitions, m.output_table, m.transitions, m.output_table, p, q, True)
    return tuple(int(x) for x in word) if found else None


def equivalent(m1, m2):
    return separating_word(m1, m2) is None


def state_partition(m):
    """Equivalence classes of the states of a complete machine as block ids."""
    return kernels.refine_partition(m.transitions, m.output_table)


def minimize(m):
    """Minimal machine equivalent to ``m`` (unreachable states dropped).

    State 0 of the result is the class of the initial state; the remaining
    classes are numbered in breadth-first order from it.
    """
    reach = m.reachable_states()
    index = {s: j for j, s in enumerate(sorted(reach))}
    keep = np.array(sorted(reach), dtype=np.int64)
    d = m.transitions[keep]
    o = m.output_table[keep]
    d = np.where(d >= 0, np.array([index.get(int(t), -1) for t in range(m.num_states)] + [-1])[d], -1)
    blocks = kernels.refine_partition(d, o)
    nblocks = int(blocks.max()) + 1 if blocks.size else 0
    rep = np.full(nblocks, -1, dtype=np.int64)
    for j in range(len(keep)):
        if rep[blocks[j]] < 0:
            rep[blocks[j]] = j
    qd = np.where(d[rep] >= 0, blocks[np.maximum(d[rep], 0)], -1)
    qo = o[rep]
    start = int(blocks[index[m.initial]])
    # renumber in BFS order from the initial class
    order = [start]
    seen = {start}
    queue = deque(order)
    while queue:
        b = queue.popleft()
        for t in qd[b]:
            t = int(t)
            if t >= 0 and t not in seen:
                seen.add(t)
                order.append(t)
                queue.append(t)
    rank = np.full(nblocks + 1, -1, dtype=np.int64)
    rank[np.array(order)] = np.arange(len(order))
    nd = rank[qd[order]]
    no = qo[order]
    return MealyMachine(m.inputs, m.outputs, nd, no, 0)


def random_mealy(n, k, o, seed):
    """Complete machine with uniformly drawn successors and outputs.

    Uses numpy's PCG64 generator; inputs are labelled ``i0..`` and outputs
    ``o0..``.  Successors are drawn as one ``(n, k)`` block, then outputs.
    """
    if n < 1 or k < 1 or o < 1:
        raise ValueError("n, k and o must be positive")
    rng = np.random.default_rng(seed)
    delta = rng.integers(0, n, size=(n, k), dtype=np.int64)
    lam = rng.integers(0, o, size=(n, k), dtype=np.int64)
    return MealyMachine([f"i{j}" for j in range(k)], [f"o{j}" for j in range(o)], delta, lam, 0)


def with_self_loops(m):
    """Copy of ``m`` where state ``x`` loops on input ``x mod |I|``."""
    d = m.transitions.copy()
    k = m.num_inputs
    for x in range(m.num_states):
        d[x, x % k] = x
    return MealyMachine(m.inputs, m.outputs, d, m.output_table, m.initial, m.state_labels)


# ---------------------------------------------------------------- DOT format

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*|\#[^\n]*|/\*.*?\*/)
  | (?P<arrow>->)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<id>[A-Za-z_\x80-\U0010ffff][A-Za-z_0-9\x80-\U0010ffff.']*|-?(?:\.[0-9]+|[0-9]+(?:\.[0-9]*)?))
  | (?P<punct>[{}\[\];,=])
""", re.VERBOSE | re.DOTALL)

_START_PREFIX = "__start"


def _tokenize(text):
    pos = 0
    line = 1
    col = 1
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind == "string":
            out.append(("id", re.sub(r"\\(.)", r"\1", value[1:-1]), line, col))
        elif kind in ("id", "arrow", "punct"):
            out.append((kind if kind != "punct" else value, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        pos = m.end()
    out.append(("eof", "", line, col))
    return out


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self, kind=None):
        tok = self.tokens[self.pos]
        if kind is not None and tok[0] != kind:
            want = "identifier" if kind == "id" else repr(kind)
            got = "end of input" if tok[0] == "eof" else repr(tok[1])
            raise ParseError(f"expected {want}, found {got}", tok[2], tok[3])
        self.pos += 1
        return tok

    def attrs(self):
        result = {}
        while self.peek()[0] == "[":
            self.take("[")
            while self.peek()[0] != "]":
                key = self.take("id")[1]
                self.take("=")
                result[key] = self.take("id")[1]
                if self.peek()[0] in (",", ";"):
                    self.take()
            self.take("]")
        return result

    def graph(self):
        tok = self.peek()
        if tok[0] == "id" and tok[1].lower() == "strict":
            self.take()
        tok = self.take("id")
        if tok[1].lower() not in ("digraph", "graph"):
            raise ParseError(f"expected 'digraph', found {tok[1]!r}", tok[2], tok[3])
        if self.peek()[0] == "id":
            self.take()
        self.take("{")
        nodes = []
        edges = []
        while self.peek()[0] != "}":
            if self.peek()[0] == ";":
                self.take()
                continue
            name_tok = self.take("id")
            name = name_tok[1]
            if name.lower() in ("node", "edge", "graph") and self.peek()[0] == "[":
                self.attrs()
                continue
            if self.peek()[0] == "=":
                self.take("=")
                self.take("id")
                continue
            if self.peek()[0] == "arrow":
                self.take("arrow")
                dst = self.take("id")[1]
                edges.append((name, dst, self.attrs(), name_tok[2], name_tok[3]))
            else:
                nodes.append((name, self.attrs()))
        self.take("}")
        self.take("eof")
        return nodes, edges


def parse_dot(text, inputs=None, outputs=None):
    """Parse a Mealy machine from DOT text.

    Edges carry ``label="input / output"``.  The initial state is the target
    of the edge leaving a node whose name starts with ``__start``.  States are
    numbered with the initial state first, then by first appearance; alphabets
    default to the order of first appearance.
    """
    nodes, edges = _Parser(text).graph()
    order = []
    seen = set()

    def note(name):
        if name not in seen and not name.startswith(_START_PREFIX):
            seen.add(name)
            order.append(name)

    for name, _ in nodes:
        note(name)
    initial = None
    trans = []
    for src, dst, attrs, line, col in edges:
        if src.startswith(_START_PREFIX):
            if initial is not None and initial != dst:
                raise ParseError("more than one initial state", line, col)
            initial = dst
            note(dst)
            continue
        note(src)
        note(dst)
        label = attrs.get("label")
        if label is None or "/" not in label:
            raise ParseError(f"edge {src} -> {dst} needs a label of the form 'input / output'", line, col)
        inp, _, out = label.partition("/")
        trans.append((src, dst, inp.strip(), out.strip(), line, col))
    if initial is None:
        raise MissingInitial("no edge from a __start node marks the initial state")
    names = [initial] + [x for x in order if x != initial]
    sid = {x: j for j, x in enumerate(names)}
    in_alpha = inputs if inputs is not None else Alphabet(dict.fromkeys(t[2] for t in trans))
    out_alpha = outputs if outputs is not None else Alphabet(dict.fromkeys(t[3] for t in trans))
    n, k = len(names), len(in_alpha)
    d = np.full((n, k), -1, dtype=np.int64)
    o = np.full((n, k), -1, dtype=np.int64)
    for src, dst, inp, out, line, col in trans:
        if inp not in in_alpha:
            raise ParseError(f"unknown input {inp!r}", line, col)
        if out not in out_alpha:
            raise ParseError(f"unknown output {out!r}", line, col)
        s, i = sid[src], in_alpha.index(inp)
        if d[s, i] >= 0:
            raise DuplicateTransition(f"state {src} has two transitions on input {inp!r} (line {line})")
        d[s, i] = sid[dst]
        o[s, i] = out_alpha.index(out)
    return MealyMachine(in_alpha, out_alpha, d, o, 0, names)


def _quote(text):
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(m, name="mealy"):
    """Serialize ``m`` in the DOT dialect understood by :func:`parse_dot`."""
    labels = m.state_labels or tuple(f"s{j}" for j in range(m.num_states))
    lines = [f"digraph {name} {{", '  __start [shape=none, label=""];']
    for j in range(m.num_states):
        lines.append(f"  {_quote(labels[j])} [shape=circle];")
    lines.append(f"  __start -> {_quote(labels[m.initial])};")
    for s in range(m.num_states):
        for i in range(m.num_inputs):
            t = m.delta[s][i]
            if t < 0:
                continue
            lab = f"{m.inputs.label(i)} / {m.outputs.label(m.lam[s][i])}"
            lines.append(f"  {_quote(labels[s])} -> {_quote(labels[t])} [label={_quote(lab)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_dot(path):
    with open(path, encoding="utf-8") as fh:
        return parse_dot(fh.read())


def save_dot(m, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_dot(m))
