"""Mining of sparse relations: sets of monomials whose truth vectors XOR to zero.

The engine enumerates relations by their smallest member ``a`` (canonical
pool position).  The remaining ``t`` members split into ``t // 2`` indices
enumerated directly and one ``t - t // 2`` subset looked up in a table of
subset fingerprints.  Fingerprints are a fixed random GF(2)-linear map from
truth vectors to 64 bits, so the fingerprint of a XOR is the XOR of
fingerprints; every hit is confirmed on the full vectors.

Relations are complete and canonically sorted per value of ``a``, which makes
truncation at ``result_limit`` deterministic and independent of the number of
worker threads.
"""

from __future__ import annotations

import itertools
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from math import comb
from typing import Callable, Iterator, Sequence

import numpy as np

from . import _kernels
from .monomials import Monomial, canonical_masks, eval_vector, render, vector_table
from .sbox import SBox

log = logging.getLogger(__name__)

FINGERPRINT_SEED = 0x5B0C5_2024
MAX_TABLE_ENTRIES = 60_000_000
BRUTE_FORCE_CAP = 5_000_000_000
_BLOCK = 32


@dataclass(frozen=True)
class SearchConfig:
    max_terms: int
    max_degree: int
    total_degree_bound: int | None = None
    include_constant: bool = False
    result_limit: int | None = 10_000
    worker_count: int = 1

    @property
    def total_bound(self) -> int:
        """Effective total-degree budget (defaults to ``max_terms * max_degree``)."""
        if self.total_degree_bound is None:
            return self.max_terms * self.max_degree
        return self.total_degree_bound

    def validate(self, sbox: SBox) -> None:
        if self.max_terms < 1:
            raise ValueError(f"max_terms must be at least 1, got {self.max_terms}")
        if not 0 <= self.max_degree <= sbox.n_vars:
            raise ValueError(f"max_degree must lie in 0..{sbox.n_vars}, got {self.max_degree}")
        if self.total_bound < self.max_degree:
            raise ValueError(f"total degree bound {self.total_bound} is below the "
                             f"per-monomial bound {self.max_degree}")
        if self.result_limit is not None and self.result_limit < 0:
            raise ValueError("result_limit must be non-negative")
        if self.worker_count < 1:
            raise ValueError("worker_count must be at least 1")

    def as_dict(self) -> dict:
        return {
            "max_terms": self.max_terms,
            "max_degree": self.max_degree,
            "total_degree_bound": self.total_bound,
            "include_constant": self.include_constant,
            "result_limit": self.result_limit,
        }


@dataclass(frozen=True)
class Relation:
    """Distinct monomials (constant allowed) whose sum vanishes on every state."""

    monomials: tuple[Monomial, ...]
    minimal: bool = True

    @property
    def term_count(self) -> int:
        return len(self.monomials)

    @property
    def total_degree(self) -> int:
        return sum(m.degree for m in self.monomials)

    @property
    def has_constant(self) -> bool:
        return any(m.is_constant for m in self.monomials)

    def sort_key(self) -> tuple:
        return tuple(m.sort_key() for m in self.monomials)

    def __str__(self) -> str:
        return " + ".join(render(m) for m in self.monomials) + " = 0"

    def as_dict(self) -> dict:
        return {
            "monomials": [render(m) for m in self.monomials if not m.is_constant],
            "constant": self.has_constant,
            "term_count": self.term_count,
            "total_degree": self.total_degree,
            "minimal": self.minimal,
        }


class SearchResult:
    """Relations in canonical order.

    Stored as rows of candidate indices; :class:`Relation` objects are only
    built on first access, which keeps large result sets cheap to count and
    compare.
    """

    def __init__(self, rows: np.ndarray, monomials: Sequence[Monomial], masks: np.ndarray,
                 minimal: np.ndarray, truncated: bool = False, pool_size: int = 0) -> None:
        self.rows = rows
        self.monomials = monomials
        self.masks = masks
        self.minimal = minimal
        self.truncated = truncated
        self.pool_size = pool_size
        self.lengths = (rows >= 0).sum(axis=1)

    @cached_property
    def relations(self) -> list[Relation]:
        get = self.monomials.__getitem__
        return [Relation(tuple(map(get, row[:t])), m) for row, t, m in
                zip(self.rows.tolist(), self.lengths.tolist(), self.minimal.tolist())]

    def __iter__(self) -> Iterator[Relation]:
        return iter(self.relations)

    def __len__(self) -> int:
        return len(self.rows)

    def __getitem__(self, i):
        return self.relations[i]

    def keys(self) -> set[tuple[int, ...]]:
        """Each relation as the tuple of its members' combined masks."""
        out: set[tuple[int, ...]] = set()
        for t, positions in _by_length(self.lengths):
            out.update(map(tuple, self.masks[self.rows[positions, :t]].tolist()))
        return out


# --- candidate pool ------------------------------------------------------------

@dataclass(frozen=True)
class Pool:
    sbox: SBox
    masks: np.ndarray
    vectors: np.ndarray
    degrees: np.ndarray
    fingerprints: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.masks)

    @cached_property
    def monomials(self) -> list[Monomial]:
        n_in, n_out = self.sbox.n_in, self.sbox.n_out
        return [Monomial.from_combined(c, n_in, n_out) for c in self.masks.tolist()]

    def monomial(self, i: int) -> Monomial:
        return self.monomials[i]


def linear_fingerprints(vectors: np.ndarray, seed: int = FINGERPRINT_SEED) -> np.ndarray:
    """Random GF(2)-linear 64-bit images of bit-packed vectors."""
    n, words = vectors.shape
    rng = np.random.default_rng(seed)
    per_bit = rng.integers(0, 2**64, size=(words * 8, 8), dtype=np.uint64, endpoint=False)
    fp = np.zeros(n, dtype=np.uint64)
    byte_values = np.arange(256)
    for pos in range(words * 8):
        table = np.zeros(256, dtype=np.uint64)
        for bit in range(8):
            table[(byte_values >> bit) & 1 == 1] ^= per_bit[pos, bit]
        w, k = divmod(pos, 8)
        byte = (vectors[:, w] >> np.uint64(8 * k)) & np.uint64(0xFF)
        fp ^= table[byte.astype(np.intp)]
    return fp


@lru_cache(maxsize=8)
def build_pool(sbox: SBox, max_degree: int, include_constant: bool) -> Pool:
    masks = canonical_masks(sbox.n_in, sbox.n_out, max_degree, include_constant)
    vectors = vector_table(sbox, masks)
    degrees = np.bitwise_count(masks.astype(np.uint64)).astype(np.int64)
    return Pool(sbox, masks, vectors, degrees, linear_fingerprints(vectors))


@dataclass(frozen=True)
class SubsetTable:
    """All ``r``-subsets of the pool, sorted by XOR-fingerprint, with a bitmap
    filter on the low key bits and bucket offsets on the high key bits."""

    keys: np.ndarray
    members: np.ndarray
    bitmap: np.ndarray
    fmask: np.uint64
    offsets: np.ndarray
    qshift: np.uint64

    @property
    def size(self) -> int:
        return len(self.keys)


def _subset_indices(n: int, r: int) -> np.ndarray:
    if r == 1:
        return np.arange(n, dtype=np.int32).reshape(-1, 1)
    if r == 2:
        i, j = np.triu_indices(n, 1)
        return np.stack([i.astype(np.int32), j.astype(np.int32)], axis=1)
    count = comb(n, r)
    flat = np.fromiter(itertools.chain.from_iterable(itertools.combinations(range(n), r)),
                       dtype=np.int32, count=count * r)
    return flat.reshape(count, r)


def build_subset_table(pool: Pool, r: int) -> SubsetTable:
    n = len(pool)
    size = comb(n, r)
    if size > MAX_TABLE_ENTRIES:
        raise ValueError(f"subset table of {size:,} {r}-subsets exceeds the cap of "
                         f"{MAX_TABLE_ENTRIES:,}; lower max_degree or max_terms")
    members = _subset_indices(n, r)
    keys = np.zeros(size, dtype=np.uint64)
    for c in range(r):
        keys ^= pool.fingerprints[members[:, c]]
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    members = np.ascontiguousarray(members[order])
    bits = max(1, size).bit_length()
    fbits = min(30, max(6, bits + 3))
    fmask = np.uint64((1 << fbits) - 1)
    bitmap = np.zeros(1 << (fbits - 6), dtype=np.uint64)
    low = keys & fmask
    np.bitwise_or.at(bitmap, (low >> np.uint64(6)).astype(np.intp),
                     np.left_shift(np.uint64(1), low & np.uint64(63)))
    qbits = max(1, bits - 2)
    qshift = np.uint64(64 - qbits)
    offsets = np.searchsorted(keys >> qshift, np.arange((1 << qbits) + 1, dtype=np.uint64))
    return SubsetTable(keys, members, bitmap, fmask, offsets.astype(np.int64), qshift)


# --- engine --------------------------------------------------------------------

def _split(t: int) -> tuple[int, int]:
    """Enumerated / looked-up member counts for ``t`` members beyond the smallest."""
    left = t // 2
    return left, t - left


def _run_kernel(fn, width: int, *args) -> np.ndarray:
    cap = 256
    while True:
        out = np.empty((cap, width), dtype=np.int64)
        n = fn(*args, out)
        if n >= 0:
            return out[:n]
        cap *= 4


def _relations_from_min(a: int, pool: Pool, k: int, total_bound: int,
                        tables: dict[int, SubsetTable]) -> list[np.ndarray]:
    found = []
    if k >= 1:
        rows = _run_kernel(_kernels.zero_rows_from, k, a, pool.vectors, pool.degrees, total_bound)
        if len(rows):
            found.append(rows)
    for t in range(1, k):
        left, r = _split(t)
        tab = tables[r]
        rows = _run_kernel(_kernels.probe_min_member, k, a, left, pool.vectors,
                           pool.fingerprints, pool.degrees, total_bound, tab.keys, tab.members,
                           tab.bitmap, tab.fmask, tab.offsets, tab.qshift)
        if len(rows):
            found.append(rows)
    return found


def _sorted_rows(chunks: Sequence[np.ndarray], width: int) -> np.ndarray:
    """Stack index rows (padded with -1 on the right) in canonical order."""
    if not chunks:
        return np.empty((0, width), dtype=np.int64)
    rows = np.concatenate(chunks)
    # padding sorts first, so a relation precedes its extensions
    return rows[np.lexsort(rows.T[::-1])]


def find_relations(sbox: SBox, cfg: SearchConfig,
                   progress: Callable[[int, int], None] | None = None) -> SearchResult:
    """All relations of at most ``cfg.max_terms`` members within the degree budgets.

    Returns a canonically sorted :class:`SearchResult`; ``truncated`` is set
    when more than ``cfg.result_limit`` relations exist.
    """
    cfg.validate(sbox)
    pool = build_pool(sbox, cfg.max_degree, cfg.include_constant)
    n = len(pool)
    k = min(cfg.max_terms, n)
    if k == 0:
        return _result([], pool.masks, pool.vectors, np.empty((0, 1), dtype=np.int64), False, n)
    tables = {}
    for t in range(1, k):
        r = _split(t)[1]
        if r not in tables:
            tables[r] = build_subset_table(pool, r)
    total = cfg.total_bound
    limit = cfg.result_limit
    workers = cfg.worker_count
    found: list[np.ndarray] = []
    n_found = 0
    truncated = False

    def work(indices: Sequence[int]) -> list[np.ndarray]:
        chunks = []
        for a in indices:
            chunks.extend(_relations_from_min(a, pool, k, total, tables))
        return chunks

    with ThreadPoolExecutor(max_workers=workers) as executor:
        for start in range(0, n, _BLOCK * workers):
            block = range(start, min(n, start + _BLOCK * workers))
            parts = [block[w::workers] for w in range(workers)]
            for chunks in executor.map(work, parts):
                found.extend(chunks)
                n_found += sum(len(c) for c in chunks)
            if progress is not None:
                progress(block.stop, n)
            if limit is not None and n_found > limit:
                truncated = True
                break
    rows = _sorted_rows(found, k)
    if limit is not None and len(rows) > limit:
        rows = rows[:limit]
        truncated = True
    _check_rows(sbox, pool.masks, rows)
    return _result(pool.monomials, pool.masks, pool.vectors, rows, truncated, n)


def _result(monomials: Sequence[Monomial], masks: np.ndarray, vectors: np.ndarray,
            rows: np.ndarray, truncated: bool, pool_size: int) -> SearchResult:
    minimal = _minimal_flags(vectors, rows, (rows >= 0).sum(axis=1))
    return SearchResult(rows, monomials, masks, minimal, truncated, pool_size)


def _by_length(lengths: np.ndarray):
    """Yield (length, row positions) for each distinct row length."""
    for t in np.unique(lengths).tolist():
        yield t, np.flatnonzero(lengths == t)


def _minimal_flags(vectors: np.ndarray, rows: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """For each row, whether no proper nonempty sub-collection also sums to zero."""
    flags = np.ones(len(rows), dtype=bool)
    for t, positions in _by_length(lengths):
        members = vectors[rows[positions, :t]]  # (R, t, W)
        ok = np.ones(len(positions), dtype=bool)
        for size in range(1, t):
            for subset in itertools.combinations(range(t), size):
                acc = np.bitwise_xor.reduce(members[:, list(subset)], axis=1)
                ok &= acc.any(axis=1)
        flags[positions] = ok
    return flags


def _check_rows(sbox: SBox, masks: np.ndarray, rows: np.ndarray) -> None:
    """Re-verify index rows against the S-box table, bypassing the vector tables."""
    if not len(rows):
        return
    monomials = [Monomial.from_combined(c, sbox.n_in, sbox.n_out) for c in masks.tolist()]
    in_masks = np.array([m.in_mask for m in monomials])[:, None]
    out_masks = np.array([m.out_mask for m in monomials])[:, None]
    states = np.arange(sbox.n_states)[None, :]
    images = np.asarray(sbox.table)[None, :]
    truth = np.packbits(((states & in_masks) == in_masks) & ((images & out_masks) == out_masks),
                        axis=1)
    for t, positions in _by_length((rows >= 0).sum(axis=1)):
        idx = rows[positions, :t]
        if t > 1 and not (np.diff(idx, axis=1) > 0).all():
            raise RuntimeError("relation with repeated member")
        residual = np.bitwise_xor.reduce(truth[idx], axis=1)
        bad = np.flatnonzero(residual.any(axis=1))
        if len(bad):
            text = " + ".join(render(monomials[i]) for i in idx[bad[0]].tolist())
            raise RuntimeError(f"emitted relation does not vanish: {text} = 0")


def relation_residual(sbox: SBox, monomials: Sequence[Monomial]) -> np.ndarray:
    """XOR of the members' values at every state, evaluated straight from the table."""
    states = np.arange(sbox.n_states)
    images = np.asarray(sbox.table)
    acc = np.zeros(sbox.n_states, dtype=bool)
    for m in monomials:
        acc ^= ((states & m.in_mask) == m.in_mask) & ((images & m.out_mask) == m.out_mask)
    return acc


def verify_relations(sbox: SBox, relations: Sequence[Relation]) -> None:
    """Re-check every relation state by state; raises ``RuntimeError`` on failure."""
    truth: dict[Monomial, int] = {}
    for rel in relations:
        if len(set(rel.monomials)) != len(rel.monomials):
            raise RuntimeError(f"relation with repeated member: {rel}")
        acc = 0
        for m in rel.monomials:
            if m not in truth:
                truth[m] = int.from_bytes(np.packbits(relation_residual(sbox, [m])).tobytes(),
                                          "big")
            acc ^= truth[m]
        if acc:
            raise RuntimeError(f"emitted relation does not vanish: {rel}")


# --- brute force ---------------------------------------------------------------

def subset_count(pool_size: int, max_terms: int) -> int:
    return sum(comb(pool_size, t) for t in range(1, max_terms + 1))


def brute_force_oracle(sbox: SBox, cfg: SearchConfig,
                       max_subsets: int = BRUTE_FORCE_CAP) -> SearchResult:
    """Reference answer by direct enumeration of every subset.

    Truth vectors are recomputed state by state, independently of the dense
    tables used by :func:`find_relations`.
    """
    cfg.validate(sbox)
    masks = canonical_masks(sbox.n_in, sbox.n_out, cfg.max_degree, cfg.include_constant)
    monomials = [Monomial.from_combined(int(c), sbox.n_in, sbox.n_out) for c in masks]
    n = len(monomials)
    k = min(cfg.max_terms, n)
    estimate = subset_count(n, k)
    if estimate > max_subsets:
        raise ValueError(f"brute force would visit {estimate:,} subsets "
                         f"(cap {max_subsets:,})")
    words = max(1, sbox.n_states // 64)
    vectors = np.zeros((n, words), dtype=np.uint64)
    for i, m in enumerate(monomials):
        bits = eval_vector(m, sbox).bits
        for w in range(words):
            vectors[i, w] = (bits >> (64 * w)) & 0xFFFFFFFFFFFFFFFF
    degrees = np.array([m.degree for m in monomials], dtype=np.int64)
    rows = _run_kernel(_kernels.brute_force_subsets, max(k, 1), vectors, degrees, k,
                       cfg.total_bound) if k else np.empty((0, 1), dtype=np.int64)
    rows = _sorted_rows([rows], max(k, 1))
    truncated = False
    if cfg.result_limit is not None and len(rows) > cfg.result_limit:
        rows = rows[:cfg.result_limit]
        truncated = True
    return _result(monomials, masks, vectors, rows, truncated, n)


def default_worker_count() -> int:
    try:
        return max(1, int(os.environ.get("SBOXMINER_THREADS", "1")))
    except ValueError:
        return 1
