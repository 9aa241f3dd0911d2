import pytest

from adtlearn.adt import Adt, FinalNode, from_description, leaf_states
from adtlearn.equiv import ChainOracle, ExactOracle, RandomWordOracle
from adtlearn.learner import (ADTLearner, LearnerConfig, NotACounterexample, all_configs,
                              twin_verifier)
from adtlearn.mealy import MealyMachine, equivalent, minimize, random_mealy
from adtlearn.oracle import CachingOracle, SimulatedSUL

from conftest import enc


def make(machine, config=None, debug=True):
    events = []
    cache = CachingOracle(SimulatedSUL(machine))
    verifier = twin_verifier(SimulatedSUL(machine)) if debug else None
    learner = ADTLearner(cache, machine.inputs, machine.outputs, config or LearnerConfig(),
                         lambda e, d: events.append((e, d)), verifier)
    return learner, cache, events


def feed(learner, machine, text):
    w = enc(machine, text)
    return learner.refine(w, machine.trace(w))


def test_initial_hypothesis(coffee):
    learner, cache, _ = make(coffee)
    learner.initialize()
    hyp = learner.hypothesis()
    assert hyp.num_states == 1
    assert list(coffee.outputs.decode(hyp.lam[0])) == ["✓", "✓", "✗", "✓"]
    # one output-determining symbol per input, nothing else
    assert cache.counters.snapshot() == (4, 4)


def test_single_state_sul_needs_no_counterexample():
    m = MealyMachine(["a", "b"], ["x", "y"], [[0, 0]], [[0, 1]])
    learner, _, _ = make(m)
    learner.initialize()
    assert ExactOracle(m).find_counterexample(learner.hypothesis()) is None


def test_coffee_decompositions(coffee):
    learner, _, events = make(coffee)
    learner.initialize()
    water, pod, button = enc(coffee, "water pod button")
    assert feed(learner, coffee, "button water")
    assert [(d.access, d.a, d.v) for d in learner.decompositions] == [((), button, (water,))]
    # closing after the first split finds nothing new
    assert learner.hyp.num_states == 2
    assert learner.hyp.delta == [[0, 0, 1, 0], [1, 1, 1, 1]]

    events.clear()
    assert feed(learner, coffee, "pod water pod water button")
    assert [(d.access, d.a, d.v) for d in learner.decompositions[1:]] == [
        ((), pod, (water, button)), ((pod,), water, (button,))]
    added = [d["state"] for e, d in events if e == "state_added" and d["cause"] == "counterexample"]
    assert added == [2, 3]
    assert learner.hyp.num_states == 4


def test_stale_counterexample_changes_nothing(coffee):
    learner, cache, _ = make(coffee)
    learner.initialize()
    feed(learner, coffee, "button water")
    before = (learner.hyp.num_states, cache.counters.snapshot(), len(learner.decompositions))
    assert not feed(learner, coffee, "button water")
    assert not feed(learner, coffee, "water water")
    assert (learner.hyp.num_states, cache.counters.snapshot(), len(learner.decompositions)) == before


def test_decompose_rejects_non_counterexample(coffee):
    learner, _, _ = make(coffee)
    learner.initialize()
    w = enc(coffee, "water pod")
    with pytest.raises(NotACounterexample):
        learner.decompose(w, coffee.trace(w))
    with pytest.raises(ValueError):
        learner.refine(w, (0,))


def test_coffee_learns_minimal_machine(coffee):
    for config in all_configs():
        learner, _, _ = make(coffee, config)
        hyp = learner.learn(ExactOracle(coffee))
        assert hyp.num_states == 6, config
        assert equivalent(hyp, minimize(coffee))


@pytest.mark.parametrize("config", all_configs(), ids=str)
def test_internal_refinements_bounded(config):
    for seed in range(3):
        m = random_mealy(15, 3, 3, seed)
        n = minimize(m).num_states
        learner, _, events = make(m, config)
        hyp = learner.learn(ExactOracle(m))
        assert equivalent(hyp, m)
        # canonical: never more states than the minimal machine
        assert hyp.num_states == n
        internal = sum(1 for e, d in events if e == "decomposition")
        assert internal <= n - 1


@pytest.mark.parametrize("spec", ["ADT[NSE|NIR|NSR|OT]", "ADT[SE|IR_BE|LR_BE|OT]"])
def test_observation_tree_variants_converge(spec):
    for seed in range(4):
        m = random_mealy(20, 3, 2, seed)
        learner, _, events = make(m, LearnerConfig.parse(spec))
        hyp = learner.learn(ExactOracle(m))
        assert equivalent(hyp, m)
        st = learner.stats
        assert st.ot_extend == sum(1 for e, _ in events if e == "ot_extension")
        assert st.ot_shorter == sum(1 for e, _ in events if e == "ot_shorter")


def test_observation_tree_shorter_word_is_shorter():
    seen = 0
    for seed in range(10):
        m = random_mealy(20, 3, 2, seed)
        learner, cache, events = make(m, LearnerConfig(observation_tree=True))
        # long random words fill the observation tree with spare traces
        learner.learn(ChainOracle([RandomWordOracle(cache, 3, 50, 20, 60, seed), ExactOracle(m)]))
        decs = [d for e, d in events if e == "decomposition"]
        shorter = [d for e, d in events if e == "ot_shorter"]
        seen += len(shorter)
        # every substitution replaced the decomposition suffix by a strictly shorter word
        last_v = None
        for e, d in events:
            if e == "decomposition":
                last_v = d["v"]
            elif e == "ot_shorter":
                assert d["length"] < len(last_v)
        assert len(decs) >= len(shorter)
    assert seen > 0


def test_adt_consistency_on_single_leaf(coffee):
    learner, _, _ = make(coffee)
    learner.initialize()
    assert learner.ensure_adt_consistency() == 0


def test_adt_consistency_queues_diverging_trace(coffee):
    learner, _, _ = make(coffee, debug=False)
    learner.initialize()
    feed(learner, coffee, "button water")
    # pretend a replacement left state 0 with a trace the hypothesis contradicts
    water, button = enc(coffee, "water button")
    ok, bad, cup = (coffee.outputs.index(x) for x in "✓✗☕")
    learner.adt = Adt(from_description((button, {bad: (water, {cup: 0}), cup: 1})))
    learner.store.pending.clear()
    assert learner.ensure_adt_consistency() == 2
    # state 1 is reached by button, so its trace is prefixed with it
    assert list(learner.store.pending) == [((button, water), (bad, cup)),
                                           ((button, button), (bad, cup))]


def test_config_names_round_trip():
    for cfg in all_configs():
        assert LearnerConfig.parse(cfg.name) == cfg
    assert len(all_configs()) == 24
    cfg = LearnerConfig.parse("ADT[ SE | IR_MS | SR_ML | OT ]")
    assert (cfg.extend, cfg.immediate, cfg.subtree, cfg.subtree_profile, cfg.observation_tree) == \
        (True, "MS", "SR", "ML", True)
    for bad in ("ADT[SE|IR|NSR]", "ADT[SE|NIR]", "SE|NIR|NSR", "ADT[XE|NIR|NSR]"):
        with pytest.raises(ValueError):
            LearnerConfig.parse(bad)
    with pytest.raises(ValueError):
        LearnerConfig(subtree="XR")


def test_leaves_match_hypothesis_states(coffee):
    learner, _, _ = make(coffee, LearnerConfig.parse("ADT[SE|IR_BE|LR_MS]"))
    learner.learn(ExactOracle(coffee))
    assert sorted(leaf_states(learner.adt.root)) == list(range(learner.hyp.num_states))
    assert type(Adt(FinalNode(0)).root) is FinalNode
