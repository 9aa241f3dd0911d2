import pytest

from adtlearn.adt import (Adt, FinalNode, MalformedAdt, NotADiscriminator, ResetNode, SymbolNode,
                          check_wellformed, collect_child_adts, collect_leaves, collect_reset_nodes,
                          collect_sub_adts, describe, effective_reset_count, find_lca,
                          from_description, path, reset_ratio, split_leaf, trace, traces)
from adtlearn.oracle import CachingOracle, SimulatedSUL

from conftest import enc

A, B, C = 0, 1, 2


def traces_example():
    """a -0-> s0, a -1-> b -0-> reset -> c {0: s1, 1: s2}."""
    return Adt(from_description((A, {0: 0, 1: (B, {0: ("reset", (C, {0: 1, 1: 2}))})})))


def test_paths():
    adt = traces_example()
    s1 = adt.leaf(1)
    ancestors = path(s1)[:-1]
    assert len(ancestors) == 4
    assert [type(n) for n in ancestors] == [SymbolNode, SymbolNode, ResetNode, SymbolNode]
    assert [n.symbol for n in ancestors if type(n) is SymbolNode] == [A, B, C]
    assert path(adt.root) == [adt.root]
    assert len(path(adt.leaf(0))) == 2


def test_traces():
    adt = traces_example()
    assert trace(adt.leaf(1)) == ((C,), (0,))
    assert set(traces(adt.leaf(1))) == {((C,), (0,)), ((A, B), (1, 0))}
    assert trace(adt.leaf(2)) == ((C,), (1,))
    assert set(traces(adt.leaf(2))) == {((C,), (1,)), ((A, B), (1, 0))}
    assert trace(adt.leaf(0)) == ((A,), (0,))
    assert traces(adt.leaf(0)) == [((A,), (0,))]
    assert trace(adt.root) == ((), ())
    assert traces(adt.root) == []


def test_structure_queries():
    adt = traces_example()
    c = adt.leaf(1).parent
    assert collect_sub_adts(adt.root) == [c]
    assert collect_child_adts(adt.root) == [c]
    assert find_lca(adt, 1, 2) is c
    assert find_lca(adt, 0, 2) is adt.root
    assert effective_reset_count(adt.root) == 2
    assert reset_ratio(c) == pytest.approx(0.5)
    leaf = adt.leaf(0)
    assert collect_leaves(leaf) == [leaf]
    assert collect_reset_nodes(leaf) == []
    check_wellformed(adt.root)


def test_wellformedness_violations():
    with pytest.raises(MalformedAdt):
        check_wellformed(ResetNode(FinalNode(0)))
    with pytest.raises(MalformedAdt):
        check_wellformed(SymbolNode(0))
    with pytest.raises(MalformedAdt):
        check_wellformed(from_description((0, {0: 1, 1: 1})))
    node = from_description((0, {0: ("reset", 1), 1: 2}))
    node.children[0].child = None
    with pytest.raises(MalformedAdt):
        check_wellformed(node)


def coffee_words(coffee):
    water, pod, button = (coffee.inputs.index(x) for x in ("water", "pod", "button"))
    ok, bad, cup = (coffee.outputs.index(x) for x in ("✓", "✗", "☕"))
    return water, pod, button, ok, bad, cup


def test_split_sequence_on_coffee(coffee):
    water, pod, button, ok, bad, cup = coffee_words(coffee)
    tree = Adt(FinalNode(0))
    head = split_leaf(tree, tree.leaf(0), 0, 1, (water,), (ok,), (bad,))
    assert head is tree.root
    assert describe(tree.root) == (water, {ok: 0, bad: 1})

    base = Adt(from_description(describe(tree.root)))
    split_leaf(base, base.leaf(0), 0, 2, (water, button), (ok, bad), (ok, cup))
    assert describe(base.root) == (water, {ok: ("reset", (water, {ok: (button, {bad: 0, cup: 2})})),
                                          bad: 1})
    assert len(collect_reset_nodes(base.root)) == 1
    assert effective_reset_count(base.root) == 2

    ext = Adt(from_description(describe(tree.root)))
    split_leaf(ext, ext.leaf(0), 0, 2, (water, button), (ok, bad), (ok, cup), extend=True)
    assert describe(ext.root) == (water, {ok: (button, {bad: 0, cup: 2}), bad: 1})
    assert effective_reset_count(ext.root) == 0
    for t in (base, ext):
        check_wellformed(t.root)
        assert sorted(t.leaves) == [0, 1, 2]


def test_split_requires_discriminator():
    tree = Adt(FinalNode(0))
    with pytest.raises(NotADiscriminator):
        split_leaf(tree, tree.leaf(0), 0, 1, (0, 1), (0, 0), (0, 0))


def test_split_stops_at_first_difference():
    tree = Adt(FinalNode(0))
    split_leaf(tree, tree.leaf(0), 0, 1, (0, 1, 2), (5, 6, 7), (5, 8, 9))
    assert describe(tree.root) == (0, {5: (1, {6: 0, 8: 1})})


def test_split_below_reset_needs_no_reset():
    adt = Adt(from_description((A, {0: 0, 1: ("reset", 1)})))
    split_leaf(adt, adt.leaf(1), 1, 3, (B,), (0,), (1,))
    assert describe(adt.root) == (A, {0: 0, 1: ("reset", (B, {0: 1, 1: 3}))})
    adt = traces_example()
    split_leaf(adt, adt.leaf(1), 1, 3, (A,), (0,), (1,))
    assert describe(adt.leaf(2).parent) == (C, {0: ("reset", (A, {0: 1, 1: 3})), 1: 2})


def test_sift_coffee(coffee):
    water, pod, button, ok, bad, cup = coffee_words(coffee)
    cache = CachingOracle(SimulatedSUL(coffee))
    two = Adt(from_description((water, {ok: 0, bad: 1})))
    assert two.sift(enc(coffee, "button"), cache).state == 1

    three = Adt(from_description((water, {ok: ("reset", (water, {ok: (button, {bad: 0, cup: 2})})),
                                          bad: 1})))
    assert three.sift(enc(coffee, "pod"), cache).state == 2
    # the second run after the reset sees the coffee
    assert cache.tree.outputs(enc(coffee, "pod water button")) == (ok, ok, cup)


def test_sift_single_leaf_is_free(coffee):
    cache = CachingOracle(SimulatedSUL(coffee))
    adt = Adt(FinalNode(0))
    assert adt.sift(enc(coffee, "pod pod"), cache).state == 0
    assert cache.issued.snapshot() == (0, 0)


def test_sift_new_output_creates_leaf(coffee):
    water, pod, button, ok, bad, cup = coffee_words(coffee)
    cache = CachingOracle(SimulatedSUL(coffee))
    adt = Adt(from_description((button, {bad: 0})))
    leaf = adt.sift(enc(coffee, "pod water"), cache)
    assert leaf.state is None and leaf.label == cup


def test_verify_against(coffee):
    water, pod, button, ok, bad, cup = coffee_words(coffee)
    adt = Adt(from_description((water, {ok: ("reset", (water, {ok: (button, {bad: 0, cup: 2})})),
                                        bad: 1})))
    access = {0: (), 1: enc(coffee, "button"), 2: enc(coffee, "pod")}
    assert adt.verify_against(access, SimulatedSUL(coffee)) == []
    access[2] = enc(coffee, "water")
    bad_runs = adt.verify_against(access, SimulatedSUL(coffee))
    assert [b[0] for b in bad_runs] == [2]


def test_describe_round_trip():
    desc = (A, {0: 0, 1: (B, {0: ("reset", (C, {0: 1, 1: 2}))})})
    assert describe(from_description(desc)) == desc
