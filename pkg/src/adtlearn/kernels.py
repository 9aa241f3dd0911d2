"""Array kernels shared by the machine, ADS and oracle code.

Every kernel has a numba implementation and a numpy implementation that
returns identical results.  The module level names pick numba when it is
available and not disabled through ``ADTLEARN_DISABLE_NUMBA``.
"""

import numpy as np

from ._accel import HAVE_NUMBA, njit

# pair_search returns (found, word, blocked_p, blocked_q, blocked_input).
# A blocked entry of -1 means the corresponding side was defined.


@njit(cache=True)
def _pair_search_nb(d1, l1, d2, l2, s1, s2, same):
    n1, k = d1.shape
    n2 = d2.shape[0]
    total = n1 * n2
    visited = np.zeros(total, np.bool_)
    parent = np.full(total, -1, np.int64)
    via = np.full(total, -1, np.int64)
    queue = np.empty(total, np.int64)
    start = s1 * n2 + s2
    visited[start] = True
    queue[0] = start
    head = 0
    tail = 1
    best = 3
    bp = -1
    bq = -1
    bi = -1
    while head < tail:
        cur = queue[head]
        head += 1
        p = cur // n2
        q = cur % n2
        for i in range(k):
            o1 = l1[p, i]
            o2 = l2[q, i]
            if o1 >= 0 and o2 >= 0 and o1 != o2:
                length = 1
                c = cur
                while c != start:
                    length += 1
                    c = parent[c]
                word = np.empty(length, np.int64)
                word[length - 1] = i
                pos = length - 2
                c = cur
                while c != start:
                    word[pos] = via[c]
                    pos -= 1
                    c = parent[c]
                return True, word, -1, -1, -1
            t1 = d1[p, i]
            t2 = d2[q, i]
            open1 = o1 < 0 or t1 < 0
            open2 = o2 < 0 or t2 < 0
            if open1 or open2:
                size = int(open1) + int(open2)
                if size < best:
                    best = size
                    bp = p if open1 else -1
                    bq = q if open2 else -1
                    bi = i
                continue
            if same and t1 == t2:
                continue
            nxt = t1 * n2 + t2
            if not visited[nxt]:
                visited[nxt] = True
                parent[nxt] = cur
                via[nxt] = i
                queue[tail] = nxt
                tail += 1
    return False, np.empty(0, np.int64), bp, bq, bi


def _pair_search_np(d1, l1, d2, l2, s1, s2, same):
    n1, k = d1.shape
    n2 = d2.shape[0]
    total = n1 * n2
    visited = np.zeros(total, dtype=bool)
    parent = np.full(total, -1, dtype=np.int64)
    via = np.full(total, -1, dtype=np.int64)
    start = s1 * n2 + s2
    visited[start] = True
    frontier = np.array([start], dtype=np.int64)
    best = 3
    bp = bq = bi = -1

    def path(code):
        out = []
        while code != start:
            out.append(int(via[code]))
            code = int(parent[code])
        return out[::-1]

    while frontier.size:
        fp = frontier // n2
        fq = frontier % n2
        o1 = l1[fp]
        o2 = l2[fq]
        t1 = d1[fp]
        t2 = d2[fq]
        sep = (o1 >= 0) & (o2 >= 0) & (o1 != o2)
        if sep.any():
            flat = int(np.argmax(sep.ravel()))
            f, i = divmod(flat, k)
            return True, np.array(path(int(frontier[f])) + [i], dtype=np.int64), -1, -1, -1
        open1 = (o1 < 0) | (t1 < 0)
        open2 = (o2 < 0) | (t2 < 0)
        blocked = open1 | open2
        if blocked.any():
            size = open1.astype(np.int64) + open2.astype(np.int64)
            size = np.where(blocked, size, 3).ravel()
            flat = int(np.argmin(size))
            if size[flat] < best:
                best = int(size[flat])
                f, i = divmod(flat, k)
                bp = int(fp[f]) if open1[f, i] else -1
                bq = int(fq[f]) if open2[f, i] else -1
                bi = i
        keep = ~blocked
        if same:
            keep &= t1 != t2
        codes = (t1 * n2 + t2).ravel()
        keep = keep.ravel()
        idx = np.nonzero(keep)[0]
        codes = codes[idx]
        _, first = np.unique(codes, return_index=True)
        first = np.sort(first)
        codes = codes[first]
        idx = idx[first]
        fresh = ~visited[codes]
        codes = codes[fresh]
        idx = idx[fresh]
        visited[codes] = True
        parent[codes] = frontier[idx // k]
        via[codes] = idx % k
        frontier = codes
    return False, np.empty(0, dtype=np.int64), bp, bq, bi


@njit(cache=True)
def _run_words_nb(delta, lam, start, words, lengths):
    m, width = words.shape
    out = np.full((m, width), -1, np.int64)
    final = np.full(m, -1, np.int64)
    for w in range(m):
        s = start
        ok = True
        for j in range(lengths[w]):
            i = words[w, j]
            o = lam[s, i]
            t = delta[s, i]
            if o < 0 or t < 0:
                ok = False
                break
            out[w, j] = o
            s = t
        if ok:
            final[w] = s
    return out, final


def _run_words_np(delta, lam, start, words, lengths):
    m, width = words.shape
    out = np.full((m, width), -1, dtype=np.int64)
    final = np.full(m, -1, dtype=np.int64)
    state = np.full(m, start, dtype=np.int64)
    alive = np.ones(m, dtype=bool)
    for j in range(width):
        active = alive & (lengths > j)
        if not active.any():
            break
        rows = np.nonzero(active)[0]
        s = state[rows]
        i = words[rows, j]
        o = lam[s, i]
        t = delta[s, i]
        bad = (o < 0) | (t < 0)
        alive[rows[bad]] = False
        good = rows[~bad]
        out[good, j] = o[~bad]
        state[good] = t[~bad]
    final[alive] = state[alive]
    return out, final


def refine_partition(delta, lam, blocks=None):
    """Moore-style partition refinement.

    Returns an array of block ids, numbered in order of first appearance.
    Undefined entries (-1) are treated as an extra output / successor value.
    """
    delta = np.asarray(delta, dtype=np.int64)
    lam = np.asarray(lam, dtype=np.int64)
    n = delta.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    if blocks is None:
        blocks = _relabel(lam)
    count = int(blocks.max()) + 1
    while True:
        succ = np.where(delta >= 0, blocks[np.maximum(delta, 0)], -1)
        sig = np.concatenate([blocks[:, None], lam, succ], axis=1)
        new = _relabel(sig)
        new_count = int(new.max()) + 1
        blocks = new
        if new_count == count:
            return blocks
        count = new_count


def _relabel(rows):
    rows = np.ascontiguousarray(rows)
    _, first, inverse = np.unique(rows, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    return rank[inverse].astype(np.int64)


def pair_search_numpy(d1, l1, d2, l2, s1, s2, same=False):
    return _pair_search_np(d1, l1, d2, l2, s1, s2, same)


def run_words_numpy(delta, lam, start, words, lengths):
    return _run_words_np(delta, lam, start, words, lengths)


if HAVE_NUMBA:
    def pair_search_numba(d1, l1, d2, l2, s1, s2, same=False):
        return _pair_search_nb(d1, l1, d2, l2, np.int64(s1), np.int64(s2), bool(same))

    def run_words_numba(delta, lam, start, words, lengths):
        return _run_words_nb(delta, lam, np.int64(start), words, lengths)

    pair_search = pair_search_numba
    run_words = run_words_numba
else:
    pair_search_numba = None
    run_words_numba = None
    pair_search = pair_search_numpy
    run_words = run_words_numpy

BACKEND = "numba" if HAVE_NUMBA else "numpy"


def as_arrays(delta, lam):
    """Coerce nested lists or arrays into contiguous int64 arrays."""
    d = np.ascontiguousarray(np.asarray(delta, dtype=np.int64))
    o = np.ascontiguousarray(np.asarray(lam, dtype=np.int64))
    if d.ndim == 1:
        d = d.reshape(len(d), 0)
        o = o.reshape(len(o), 0)
    return d, o


_warm = False


def warm_up():
    """Compile (or load from cache) the numba kernels.  Cheap on the numpy backend.

    The first call otherwise pays this cost inside whatever triggered it.
    """
    global _warm
    if _warm:
        return
    _warm = True
    # machines hand over read-only arrays, which numba specialises separately
    for frozen in (False, True):
        d, o = as_arrays([[0, 0]], [[0, 1]])
        d.flags.writeable = o.flags.writeable = not frozen
        pair_search(d, o, d, o, 0, 0, True)
        run_words(d, o, 0, np.zeros((1, 1), np.int64), np.ones(1, np.int64))
