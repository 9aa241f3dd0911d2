"""Compare the numba kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Kernel timings call both implementations directly.  The end-to-end rows run
a learning job in a subprocess, once with ADTLEARN_DISABLE_NUMBA=1.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from adtlearn import kernels
from adtlearn.mealy import random_mealy

LEARN = """
import time
from adtlearn.harness import run_learning
from adtlearn.mealy import random_mealy
run_learning("ADT[NSE|NIR|NSR]", random_mealy(20, 3, 3, 0))
t = time.perf_counter()
for seed in range(3):
    run_learning("ADT[SE|IR_BE|LR_BE]", random_mealy(100, 25, 10, seed))
print(time.perf_counter() - t)
"""


def best(fn, repeat):
    fn()  # compile / warm up
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_rows(repeat):
    rows = []
    for n, k in ((100, 25), (500, 10), (2000, 5)):
        a = random_mealy(n, k, 4, 1)
        b = random_mealy(n, k, 4, 2)
        d1, l1 = kernels.as_arrays(a.delta, a.lam)
        d2, l2 = kernels.as_arrays(b.delta, b.lam)
        # the same machine from two different states walks the whole pair graph
        args = (d1, l1, d1, l1, 0, 0, True)
        t_np = best(lambda: kernels.pair_search_numpy(*args), repeat)
        t_nb = best(lambda: kernels.pair_search_numba(*args), repeat)
        rows.append((f"pair_search n={n} k={k} (no separation)", t_np, t_nb))
        args = (d1, l1, d2, l2, 0, 0, False)
        t_np = best(lambda: kernels.pair_search_numpy(*args), repeat)
        t_nb = best(lambda: kernels.pair_search_numba(*args), repeat)
        rows.append((f"pair_search n={n} k={k} (two machines)", t_np, t_nb))
    m = random_mealy(1000, 25, 10, 3)
    d, o = kernels.as_arrays(m.delta, m.lam)
    rng = np.random.default_rng(0)
    words = rng.integers(0, 25, size=(5000, 200)).astype(np.int64)
    lengths = np.full(5000, 200, dtype=np.int64)
    t_np = best(lambda: kernels.run_words_numpy(d, o, 0, words, lengths), repeat)
    t_nb = best(lambda: kernels.run_words_numba(d, o, 0, words, lengths), repeat)
    rows.append(("run_words 5000 x 200 symbols", t_np, t_nb))
    return rows


def learn_row():
    out = {}
    for name, flag in (("numpy", "1"), ("numba", "0")):
        env = dict(os.environ, ADTLEARN_DISABLE_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", LEARN], env=env, capture_output=True, text=True, check=True)
        out[name] = float(res.stdout.strip())
    return ("learn 3 x (100, 25, 10), ADT[SE|IR_BE|LR_BE]", out["numpy"], out["numba"])


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--no-learn", action="store_true", help="skip the end-to-end rows")
    args = p.parse_args()
    if not kernels.HAVE_NUMBA:
        sys.exit("numba is not available (or disabled); nothing to compare")
    rows = kernel_rows(args.repeat)
    if not args.no_learn:
        rows.append(learn_row())
    width = max(len(r[0]) for r in rows)
    print(f"{'case':<{width}}  {'numpy s':>10}  {'numba s':>10}  {'speedup':>8}")
    for name, t_np, t_nb in rows:
        print(f"{name:<{width}}  {t_np:10.4f}  {t_nb:10.4f}  {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
