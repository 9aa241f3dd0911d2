import numpy as np
import pytest

from adtlearn import kernels
from adtlearn.mealy import random_mealy

pytestmark = pytest.mark.skipif(not kernels.HAVE_NUMBA, reason="numba not installed")


@pytest.mark.parametrize("seed", range(15))
def test_pair_search_backends_agree(seed):
    rng = np.random.default_rng(seed)
    a = random_mealy(int(rng.integers(1, 30)), 3, 2, seed)
    b = random_mealy(int(rng.integers(1, 30)), 3, 2, seed + 77)
    d1, l1 = kernels.as_arrays(a.delta, a.lam)
    d2, l2 = kernels.as_arrays(b.delta, b.lam)
    # punch holes so the blocked-transition path is exercised too
    if seed % 3 == 0:
        d2 = d2.copy()
        d2[0, 1] = -1
    got_np = kernels.pair_search_numpy(d1, l1, d2, l2, 0, 0)
    got_nb = kernels.pair_search_numba(d1, l1, d2, l2, 0, 0)
    assert repr(got_np) == repr(got_nb)
    same_np = kernels.pair_search_numpy(d1, l1, d1, l1, 0, a.num_states - 1, True)
    same_nb = kernels.pair_search_numba(d1, l1, d1, l1, 0, a.num_states - 1, True)
    assert repr(same_np) == repr(same_nb)


def test_run_words_backends_agree():
    m = random_mealy(40, 4, 3, 5)
    rng = np.random.default_rng(0)
    words = rng.integers(0, 4, size=(200, 30)).astype(np.int64)
    lengths = rng.integers(0, 31, size=200).astype(np.int64)
    d, o = kernels.as_arrays(m.delta, m.lam)
    a = kernels.run_words_numpy(d, o, 0, words, lengths)
    b = kernels.run_words_numba(d, o, 0, words, lengths)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)
    j = 7
    assert tuple(int(v) for v in a[0][j, :lengths[j]]) == m.trace(tuple(int(v) for v in words[j, :lengths[j]]))
