"""Adaptive distinguishing trees (ADTs).

An ADT is a rooted tree of three node kinds.  A symbol node applies an input
and branches on the observed output, a reset node resets the system and
replays the access word of the state being classified, and a final node names
the hypothesis state the run identifies.  Every node keeps its parent and the
output labelling the edge from that parent (``None`` below a reset node).
"""

from collections import deque


class AdtError(Exception):
    pass


class NotADiscriminator(AdtError):
    pass


class MalformedAdt(AdtError):
    pass


class AdtNode:
    __slots__ = ("parent", "label")

    def __init__(self):
        self.parent = None
        self.label = None


class SymbolNode(AdtNode):
    __slots__ = ("symbol", "children")

    def __init__(self, symbol):
        super().__init__()
        self.symbol = symbol
        self.children = {}

    def add(self, output, child):
        child.parent = self
        child.label = output
        self.children[output] = child
        return child

    def __repr__(self):
        return f"SymbolNode({self.symbol})"


class ResetNode(AdtNode):
    __slots__ = ("child",)

    def __init__(self, child=None):
        super().__init__()
        self.child = None
        if child is not None:
            self.set_child(child)

    def set_child(self, child):
        child.parent = self
        child.label = None
        self.child = child
        return child

    def __repr__(self):
        return "ResetNode()"


class FinalNode(AdtNode):
    __slots__ = ("state",)

    def __init__(self, state=None):
        super().__init__()
        self.state = state

    def __repr__(self):
        return f"FinalNode({self.state})"


def children(node):
    """Children in canonical order (symbol node children by output index)."""
    if type(node) is SymbolNode:
        return [node.children[o] for o in sorted(node.children)]
    if type(node) is ResetNode:
        return [node.child] if node.child is not None else []
    return []


def iter_nodes(node):
    """Pre-order traversal of the subtree rooted at ``node``."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(children(n)))


def collect_leaves(node):
    return [n for n in iter_nodes(node) if type(n) is FinalNode]


def collect_reset_nodes(node):
    return [n for n in iter_nodes(node) if type(n) is ResetNode]


def collect_symbol_nodes(node):
    return [n for n in iter_nodes(node) if type(n) is SymbolNode]


def collect_sub_adts(node):
    """The child of every reset node in the subtree of ``node``."""
    return [r.child for r in collect_reset_nodes(node)]


def collect_child_adts(node):
    """Children of the topmost reset nodes strictly below ``node``."""
    out = []
    stack = list(reversed(children(node)))
    while stack:
        n = stack.pop()
        if type(n) is ResetNode:
            out.append(n.child)
        else:
            stack.extend(reversed(children(n)))
    return out


def leaf_states(node):
    return [f.state for f in collect_leaves(node)]


def has_reset(node):
    return any(type(n) is ResetNode for n in iter_nodes(node))


def path(node):
    """Nodes from the root down to ``node`` (inclusive)."""
    out = []
    while node is not None:
        out.append(node)
        node = node.parent
    out.reverse()
    return out


def trace(node):
    """Input and output words leading to ``node`` since the nearest reset above."""
    inputs = []
    outputs = []
    cur = node
    parent = cur.parent
    while parent is not None and type(parent) is not ResetNode:
        inputs.append(parent.symbol)
        outputs.append(cur.label)
        cur = parent
        parent = cur.parent
    inputs.reverse()
    outputs.reverse()
    return tuple(inputs), tuple(outputs)


def traces(node):
    """All traces of ``node``: its own, then one per reset-delimited segment above.

    The root has no traces; a node directly below a reset node inherits the
    traces of that reset node.  Returned deepest first.
    """
    out = []
    cur = node
    while cur.parent is not None:
        if type(cur.parent) is ResetNode:
            cur = cur.parent
            continue
        out.append(trace(cur))
        top = cur.parent
        while top.parent is not None and type(top) is not ResetNode:
            top = top.parent
        cur = top
    return out


def effective_reset_count(node):
    """Sum over the leaves below ``node`` of the reset nodes on their path to ``node``."""
    total = 0
    stack = [(node, 0)]
    while stack:
        n, resets = stack.pop()
        t = type(n)
        if t is ResetNode:
            if n.child is not None:
                stack.append((n.child, resets + 1))
        elif t is SymbolNode:
            for c in n.children.values():
                stack.append((c, resets))
        else:
            total += resets
    return total


def reset_ratio(node):
    """``(1 + resets) / leaves`` for the subtree rooted at ``node``."""
    leaves = len(collect_leaves(node))
    return (1 + len(collect_reset_nodes(node))) / leaves if leaves else 0.0


def check_wellformed(root):
    """Raise :class:`MalformedAdt` unless ``root`` is a well-formed tree."""
    if type(root) is not FinalNode and type(root) is not SymbolNode:
        raise MalformedAdt("a multi-node tree must have a symbol node at its root")
    seen = set()
    for n in iter_nodes(root):
        if id(n) in seen:
            raise MalformedAdt("node reachable twice")
        seen.add(id(n))
        t = type(n)
        if t is SymbolNode:
            if not n.children:
                raise MalformedAdt(f"symbol node {n.symbol} has no children")
            for o, c in n.children.items():
                if c.parent is not n or c.label != o:
                    raise MalformedAdt("broken parent link below a symbol node")
        elif t is ResetNode:
            if n.child is None:
                raise MalformedAdt("reset node without child")
            if n.child.parent is not n:
                raise MalformedAdt("broken parent link below a reset node")
        elif t is not FinalNode:
            raise MalformedAdt(f"unknown node type {t.__name__}")
    refs = [f.state for f in collect_leaves(root) if f.state is not None]
    if len(refs) != len(set(refs)):
        raise MalformedAdt("a state is referenced by more than one final node")


def chain(inputs, outputs, leaf):
    """Linear symbol chain for a trace ending in ``leaf``; returns its top node."""
    node = leaf
    for i, o in zip(reversed(inputs), reversed(outputs)):
        sym = SymbolNode(i)
        sym.add(o, node)
        node = sym
    return node


def replace_node(old, new):
    """Put ``new`` where ``old`` hangs; returns the new root if ``old`` was the root."""
    parent = old.parent
    label = old.label
    old.parent = None
    if parent is None:
        new.parent = None
        new.label = None
        return new
    if type(parent) is ResetNode:
        parent.set_child(new)
    else:
        parent.add(label, new)
    return None


class Adt:
    """A tree together with an index from state to final node."""

    def __init__(self, root=None):
        self.root = root if root is not None else FinalNode(0)
        self.leaves = {}
        self.reindex()

    def reindex(self):
        self.leaves = {f.state: f for f in collect_leaves(self.root) if f.state is not None}

    def leaf(self, state):
        return self.leaves[state]

    def replace(self, old, new):
        root = replace_node(old, new)
        if root is not None:
            self.root = root

    def sift(self, access, oracle, positioned=False, start=None):
        """Classify the state reached by ``access``.

        Returns the final node reached; if an output has no branch yet, a new
        final node without a state reference is created and returned.  With
        ``positioned`` the oracle is assumed to already sit after ``access``.
        ``start`` begins classification at an inner node whose trace, if any,
        is replayed first.
        """
        node = self.root if start is None else start
        pending = not positioned
        if start is not None and type(node) is not ResetNode:
            prefix = trace(node)[0]
            if prefix and type(node) is not FinalNode:
                oracle.reset()
                oracle.query_word(access)
                oracle.query_word(prefix)
                pending = False
        while True:
            t = type(node)
            if t is FinalNode:
                return node
            if t is ResetNode:
                pending = True
                node = node.child
                continue
            if pending:
                oracle.reset()
                oracle.query_word(access)
                pending = False
            out = oracle.query(node.symbol)
            child = node.children.get(out)
            if child is None:
                return node.add(out, FinalNode(None))
            node = child

    def verify_against(self, access, oracle):
        """Check every trace of every final node against ``oracle``.

        ``access`` maps states to access words.  Returns a list of
        ``(state, inputs, expected, observed)`` violations.
        """
        bad = []
        for f in collect_leaves(self.root):
            if f.state is None:
                continue
            acc = tuple(access[f.state])
            for inputs, expected in traces(f):
                oracle.reset()
                oracle.query_word(acc)
                observed = oracle.query_word(inputs)
                if observed != expected:
                    bad.append((f.state, inputs, expected, observed))
        return bad

    def to_dot(self, inputs=None, outputs=None, name="adt"):
        return to_dot(self.root, inputs, outputs, name)


def find_lca(adt, s1, s2):
    """Lowest common ancestor of the final nodes of two states."""
    a = adt.leaves[s1]
    b = adt.leaves[s2]
    ancestors = set()
    n = a
    while n is not None:
        ancestors.add(id(n))
        n = n.parent
    n = b
    while n is not None:
        if id(n) in ancestors:
            return n
        n = n.parent
    raise AdtError("nodes are not in one tree")


def split_leaf(tree, leaf, old_state, new_state, word, mq_old, mq_new, extend=False, top_reset=False):
    """Split ``leaf`` (referencing ``old_state``) using discriminator ``word``.

    ``mq_old`` and ``mq_new`` are the output words of ``word`` after the
    access words of the two states.  The chain stops at the first diverging
    output.  A reset node is put in front of the chain unless the leaf is the
    root, sits right below a reset node, or ``extend`` applies: with
    ``extend``, if the leaf's trace is a proper prefix of ``word`` with
    matching outputs on both states, only the rest of ``word`` is grafted.
    ``top_reset`` forces a reset when the leaf is the root (used for trees that
    will sit below a non-empty trace).  Returns the grafted symbol node.
    """
    word = tuple(word)
    mq_old = tuple(mq_old)
    mq_new = tuple(mq_new)
    if len(mq_old) != len(word) or len(mq_new) != len(word):
        raise ValueError("output words must match the discriminator length")
    d = next((j for j in range(len(word)) if mq_old[j] != mq_new[j]), None)
    if d is None:
        raise NotADiscriminator(f"word {word!r} does not separate states {old_state} and {new_state}")
    start = 0
    use_reset = True
    parent = leaf.parent
    if parent is None:
        use_reset = top_reset
    elif type(parent) is ResetNode:
        use_reset = False
    elif extend:
        t_in, t_out = trace(leaf)
        m = len(t_in)
        if m < len(word) and word[:m] == t_in and mq_old[:m] == t_out and mq_new[:m] == t_out:
            start = m
            use_reset = False
    top = SymbolNode(word[d])
    top.add(mq_old[d], FinalNode(old_state))
    top.add(mq_new[d], FinalNode(new_state))
    head = chain(word[start:d], mq_old[start:d], top)
    graft = ResetNode(head) if use_reset else head
    tree.replace(leaf, graft)
    tree.leaves[old_state] = top.children[mq_old[d]]
    tree.leaves[new_state] = top.children[mq_new[d]]
    return head


def _q(text):
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(root, inputs=None, outputs=None, name="adt"):
    """Debug rendering of a tree in DOT."""
    ids = {}
    lines = [f"digraph {name} {{"]

    def label_in(i):
        return inputs.label(i) if inputs is not None else str(i)

    def label_out(o):
        return outputs.label(o) if outputs is not None else str(o)

    for n in iter_nodes(root):
        ids[id(n)] = f"n{len(ids)}"
        t = type(n)
        if t is SymbolNode:
            lines.append(f"  {ids[id(n)]} [shape=ellipse, label={_q(label_in(n.symbol))}];")
        elif t is ResetNode:
            lines.append(f"  {ids[id(n)]} [shape=diamond, label=\"reset\"];")
        else:
            ref = "?" if n.state is None else f"s{n.state}"
            lines.append(f"  {ids[id(n)]} [shape=box, label={_q(ref)}];")
        if n.parent is not None:
            edge = "" if n.label is None else f" [label={_q(label_out(n.label))}]"
            lines.append(f"  {ids[id(n.parent)]} -> {ids[id(n)]}{edge};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def describe(node):
    """Compact nested-tuple form, handy in tests.

    Symbol nodes become ``(symbol, {output: child})``, reset nodes
    ``("reset", child)`` and final nodes their state.
    """
    t = type(node)
    if t is FinalNode:
        return node.state
    if t is ResetNode:
        return ("reset", describe(node.child))
    return (node.symbol, {o: describe(c) for o, c in sorted(node.children.items())})


def from_description(desc):
    """Inverse of :func:`describe`."""
    if isinstance(desc, tuple) and desc and desc[0] == "reset":
        return ResetNode(from_description(desc[1]))
    if isinstance(desc, tuple):
        sym, kids = desc
        node = SymbolNode(sym)
        for o, c in kids.items():
            node.add(o, from_description(c))
        return node
    return FinalNode(desc)


def bfs_nodes(root):
    queue = deque([root])
    while queue:
        n = queue.popleft()
        yield n
        queue.extend(children(n))
