"""Compiled inner loops.

Every kernel releases the GIL so that worker threads run concurrently.
Kernels writing relations return the number of rows written, or -1 when the
output buffer is full (the caller grows the buffer and retries).
"""

import numpy as np
from numba import njit

_NOGIL = dict(nogil=True, cache=True)


@njit(**_NOGIL)
def _in_filter(bitmap, fmask, key):
    h = key & fmask
    return (bitmap[h >> np.uint64(6)] >> (h & np.uint64(63))) & np.uint64(1)


@njit(**_NOGIL)
def _emit(a, left, n_left, members, j, r, V, deg, degsum, total_bound, out, count):
    """Confirm one fingerprint hit and append it; returns the new count."""
    ds = degsum
    for i in range(r):
        ds += deg[members[j, i]]
    if ds > total_bound:
        return count
    for w in range(V.shape[1]):
        x = V[a, w]
        for i in range(n_left):
            x ^= V[left[i], w]
        for i in range(r):
            x ^= V[members[j, i], w]
        if x != 0:
            return count
    if count >= out.shape[0]:
        return -1
    out[count, 0] = a
    for i in range(n_left):
        out[count, 1 + i] = left[i]
    for i in range(r):
        out[count, 1 + n_left + i] = members[j, i]
    for i in range(1 + n_left + r, out.shape[1]):
        out[count, i] = -1
    return count + 1


@njit(**_NOGIL)
def _lookup(a, left, n_left, lastmax, target, degsum, V, deg, total_bound,
            keys, members, bitmap, fmask, offsets, qshift, out, count):
    if _in_filter(bitmap, fmask, target) == 0:
        return count
    b = target >> qshift
    r = members.shape[1]
    for j in range(offsets[b], offsets[b + np.uint64(1)]):
        if keys[j] != target or members[j, 0] <= lastmax:
            continue
        count = _emit(a, left, n_left, members, j, r, V, deg, degsum, total_bound, out, count)
        if count < 0:
            return -1
    return count


@njit(**_NOGIL)
def probe_min_member(a, n_left, V, fp, deg, total_bound, keys, members, bitmap, fmask,
                     offsets, qshift, out):
    """All relations whose smallest member is ``a`` and whose other members
    split into ``n_left`` enumerated indices plus one entry of the subset
    table (``members``, sorted by fingerprint ``keys``).

    ``deg`` must be non-decreasing (canonical pool order), which lets the
    degree budget cut whole loop tails.
    """
    n = V.shape[0]
    count = 0
    left = np.empty(max(n_left, 1), dtype=np.int64)
    fa = fp[a]
    da = deg[a]
    if n_left == 0:
        return _lookup(a, left, 0, a, fa, da, V, deg, total_bound,
                       keys, members, bitmap, fmask, offsets, qshift, out, 0)
    if n_left == 1:
        for b in range(a + 1, n):
            d = da + deg[b]
            if d > total_bound:
                break
            left[0] = b
            count = _lookup(a, left, 1, b, fa ^ fp[b], d, V, deg, total_bound,
                            keys, members, bitmap, fmask, offsets, qshift, out, count)
            if count < 0:
                return -1
        return count
    if n_left == 2:
        for b in range(a + 1, n):
            dab = da + deg[b]
            if dab > total_bound:
                break
            fab = fa ^ fp[b]
            left[0] = b
            for c in range(b + 1, n):
                d = dab + deg[c]
                if d > total_bound:
                    break
                target = fab ^ fp[c]
                if _in_filter(bitmap, fmask, target) == 0:
                    continue
                left[1] = c
                count = _lookup(a, left, 2, c, target, d, V, deg, total_bound,
                                keys, members, bitmap, fmask, offsets, qshift, out, count)
                if count < 0:
                    return -1
        return count
    # generic lexicographic enumeration of left index tuples
    for i in range(n_left):
        left[i] = a + 1 + i
    if left[n_left - 1] >= n:
        return 0
    while True:
        target = fa
        d = da
        for i in range(n_left):
            target ^= fp[left[i]]
            d += deg[left[i]]
        if d <= total_bound:
            count = _lookup(a, left, n_left, left[n_left - 1], target, d, V, deg,
                            total_bound, keys, members, bitmap, fmask, offsets, qshift,
                            out, count)
            if count < 0:
                return -1
        i = n_left - 1
        while i >= 0 and left[i] == n - n_left + i:
            i -= 1
        if i < 0:
            return count
        left[i] += 1
        for j in range(i + 1, n_left):
            left[j] = left[j - 1] + 1


@njit(**_NOGIL)
def zero_rows_from(a, V, deg, total_bound, out):
    """1-term relations: row ``a`` itself vanishes."""
    if deg[a] > total_bound:
        return 0
    for w in range(V.shape[1]):
        if V[a, w] != 0:
            return 0
    out[0, 0] = a
    for i in range(1, out.shape[1]):
        out[0, i] = -1
    return 1


@njit(**_NOGIL)
def brute_force_subsets(V, deg, max_terms, total_bound, out):
    """Depth-first walk over every index subset of size <= max_terms.

    Keeps a running XOR per depth; no hashing, no splitting.
    """
    n, words = V.shape
    if n == 0 or max_terms == 0:
        return 0
    idx = np.empty(max_terms, dtype=np.int64)
    acc = np.zeros((max_terms + 1, words), dtype=np.uint64)
    dsum = np.zeros(max_terms + 1, dtype=np.int64)
    count = 0
    depth = 0
    idx[0] = -1
    while depth >= 0:
        idx[depth] += 1
        i = idx[depth]
        if i >= n:
            depth -= 1
            continue
        dsum[depth + 1] = dsum[depth] + deg[i]
        if dsum[depth + 1] > total_bound:
            continue
        zero = True
        for w in range(words):
            acc[depth + 1, w] = acc[depth, w] ^ V[i, w]
            if acc[depth + 1, w] != 0:
                zero = False
        if zero:
            if count >= out.shape[0]:
                return -1
            for t in range(depth + 1):
                out[count, t] = idx[t]
            for t in range(depth + 1, out.shape[1]):
                out[count, t] = -1
            count += 1
        if depth + 1 < max_terms:
            depth += 1
            idx[depth] = i
    return count


@njit(**_NOGIL)
def _lowest_bit(v, words):
    for w in range(words):
        x = v[w]
        if x != 0:
            pos = 0
            while (x & np.uint64(1)) == 0:
                x >>= np.uint64(1)
                pos += 1
            return w * 64 + pos
    return -1


@njit(**_NOGIL)
def gf2_rank(V):
    """Rank over GF(2) of the rows of ``V`` (bit-packed, uint64 words)."""
    n, words = V.shape
    nbits = words * 64
    basis = np.zeros((nbits, words), dtype=np.uint64)
    present = np.zeros(nbits, dtype=np.bool_)
    v = np.empty(words, dtype=np.uint64)
    rank = 0
    for i in range(n):
        for w in range(words):
            v[w] = V[i, w]
        while True:
            p = _lowest_bit(v, words)
            if p < 0:
                break
            if present[p]:
                for w in range(words):
                    v[w] ^= basis[p, w]
            else:
                for w in range(words):
                    basis[p, w] = v[w]
                present[p] = True
                rank += 1
                break
        if rank == nbits:
            break
    return rank
