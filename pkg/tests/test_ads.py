import numpy as np
import pytest

from adtlearn import ads
from adtlearn.adt import FinalNode, SymbolNode, describe
from adtlearn.ads import (AdsBudgetExhausted, IndistinguishableSet, NoAdsExists, NotMinimal,
                          ads_depth, ads_size, check_ads, compute_ads, defensive_ads, ly_ads)
from adtlearn.learner import Hypothesis
from adtlearn.mealy import MealyMachine, minimize, random_mealy

import bruteforce


def small_instances(count, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(2, 5))
        m = random_mealy(n, 2, 2, int(rng.integers(0, 2**31)))
        size = int(rng.integers(2, n + 1))
        targets = sorted(rng.choice(n, size=size, replace=False).tolist())
        out.append((m, targets))
    return out


def test_two_states_one_symbol():
    m = MealyMachine(["a"], ["0", "1"], [[0], [1]], [[0], [1]])
    tree = compute_ads(m, [0, 1])
    assert describe(tree) == (0, {0: 0, 1: 1})


def test_singleton_is_a_leaf():
    tree = compute_ads(random_mealy(5, 2, 2, 0), [3], "MS")
    assert type(tree) is FinalNode and tree.state == 3


def test_one_input_splits_all():
    m = MealyMachine(["a", "b"], list("0123"), [[0, 1], [1, 2], [2, 3], [3, 0]],
                     [[0, 0], [1, 0], [2, 1], [3, 1]])
    for profile in ("ML", "MS", "BE"):
        tree = compute_ads(m, [0, 1, 2, 3], profile)
        assert ads_depth(tree) == 1 and ads_size(tree) == 1
        assert check_ads(m, tree, [0, 1, 2, 3])


def test_converging_pair_has_none():
    m = MealyMachine(["a"], ["0"], [[2], [2], [2]], [[0], [0], [0]])
    assert compute_ads(m, [0, 1], "ML") is None
    with pytest.raises(NoAdsExists):
        compute_ads(m, [0, 1, 2], "MS", raise_on_failure=True)


@pytest.mark.parametrize("profile", ["ML", "MS"])
def test_optimal_profiles_match_enumeration(profile):
    for m, targets in small_instances(250, seed=11 if profile == "ML" else 12):
        tree = compute_ads(m, targets, profile)
        expect = bruteforce.ads_optimum(m, targets, profile)
        if expect is None:
            assert tree is None
            continue
        assert tree is not None
        assert check_ads(m, tree, targets)
        cost = ads_depth(tree) if profile == "ML" else ads_size(tree)
        assert cost == expect


def test_best_effort_presence_matches_enumeration():
    for m, targets in small_instances(250, seed=13):
        tree = compute_ads(m, targets, "BE")
        expect = bruteforce.ads_optimum(m, targets, "ML")
        assert (tree is None) == (expect is None)
        if tree is not None:
            assert check_ads(m, tree, targets)


def test_lee_yannakakis_on_random_machines():
    found = 0
    for seed in range(200):
        m = random_mealy(8, 3, 2, seed)
        if minimize(m).num_states != 8:
            continue
        tree = ly_ads(m)
        if isinstance(tree, IndistinguishableSet):
            assert bruteforce.ads_optimum(m, range(8), "ML", max_depth=64) is None
            continue
        found += 1
        assert bruteforce.distinct_leaves(m, tree, range(8)) == list(range(8))
        assert ads_depth(tree) <= (8 * 8 - 8) // 2
    assert found > 0


def test_lee_yannakakis_trivial_cases():
    m = MealyMachine(["a"], list("012"), [[1], [2], [0]], [[0], [1], [2]])
    assert ads_depth(ly_ads(m)) == 1
    stuck = MealyMachine(["a", "b"], ["0", "1"], [[2, 2], [2, 2], [0, 1]], [[0, 0], [0, 0], [1, 1]])
    result = ly_ads(stuck)
    assert isinstance(result, IndistinguishableSet)
    assert set(result.states) >= {0, 1}


def test_not_minimal_is_reported():
    m = MealyMachine(["a"], ["0"], [[1], [0]], [[0], [0]])
    with pytest.raises(NotMinimal):
        compute_ads(m, [0, 1], check_minimal=True)


def test_budget_exhaustion():
    m = next(m for m in (random_mealy(8, 3, 2, s) for s in range(200))
             if not isinstance(ly_ads(m), IndistinguishableSet))
    targets = list(range(8))
    assert compute_ads(m, targets, "MS") is not None
    hits = ads.counters["budget_hits"]
    with pytest.raises(AdsBudgetExhausted):
        compute_ads(m, targets, "MS", budget=5, raise_on_failure=True)
    assert compute_ads(m, targets, "MS", budget=5) is None
    assert ads.counters["budget_hits"] == hits + 2


def test_audit_hook_sees_every_tree():
    seen = []
    ads.set_audit(lambda m, t, tree: seen.append(check_ads(m, tree, t)))
    try:
        for m, targets in small_instances(30, seed=3):
            compute_ads(m, targets, "MS")
    finally:
        ads.set_audit(None)
    assert seen and all(seen)


def coffee_like_hypothesis():
    """Three states, water loops on 0 and 2, everything else of 2 open."""
    h = Hypothesis(4)
    for acc in ((), (2,), (1,)):
        h.add_state(acc)
    h.delta[0] = [0, 2, 1, 0]
    h.lam[0] = [0, 0, 1, 0]
    h.delta[1] = [1, 1, 1, 1]
    h.lam[1] = [1, 1, 1, 1]
    h.delta[2][0] = 2
    h.lam[2][0] = 0
    return h


def test_defensive_closes_smallest_blocking_sets():
    h = coffee_like_hypothesis()
    closed = []
    # pod keeps the machine in state 2; button would serve coffee here
    answers = {1: (2, 0), 2: (1, 2), 3: (0, 0)}

    def close(s, i):
        closed.append((s, i))
        h.delta[s][i], h.lam[s][i] = answers[i]

    tree = defensive_ads(h, [0, 2], close)
    assert closed == [(2, 1), (2, 2)]
    assert describe(tree) == (2, {1: 0, 2: 2})


def test_defensive_on_complete_machine_matches_plain():
    m = random_mealy(6, 3, 3, 4)
    for targets in ([0, 1, 2], [1, 3, 4, 5]):
        plain = compute_ads(m, targets, "BE")
        guarded = defensive_ads(m, targets, lambda s, i: pytest.fail("nothing to close"))
        assert (plain is None) == (guarded is None)
        if plain is not None:
            assert describe(plain) == describe(guarded)


def test_defensive_gives_up_when_closing_does_not_help():
    h = coffee_like_hypothesis()

    # 2 now answers like 0 everywhere, and pod/button merge the pair
    answers = {1: (2, 0), 2: (1, 1), 3: (2, 0)}

    def close(s, i):
        h.delta[s][i], h.lam[s][i] = answers[i]

    assert defensive_ads(h, [0, 2], close) is None
