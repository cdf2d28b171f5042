"""Boolean monomials over the input and output bits of an S-box.

A monomial is stored as two masks laid out like the state bytes: ``Xi``
occupies bit ``n_in - i`` of ``in_mask`` and ``Yj`` bit ``n_out - j`` of
``out_mask``.  Evaluation at state ``s`` is then a pair of mask tests.

The *combined mask* numbers the variables X1..Xn, Y1..Ym as bits 0..n+m-1
and gives every monomial a single integer id.  Canonical order is
``(degree, combined mask)``, which lists ``X5, Y3, Y4, X5Y3, X5Y4, Y3Y4``
in that order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import comb
from typing import Iterator

import numpy as np

from .sbox import SBox, StateIndex

_TOKEN_RE = re.compile(r"([XY])([0-9]+)")


def _reverse_bits(x: int, width: int) -> int:
    out = 0
    for _ in range(width):
        out = (out << 1) | (x & 1)
        x >>= 1
    return out


@dataclass(frozen=True)
class Monomial:
    in_mask: int
    out_mask: int
    n_in: int = 8
    n_out: int = 8

    def __post_init__(self) -> None:
        if not (0 <= self.in_mask < 1 << self.n_in and 0 <= self.out_mask < 1 << self.n_out):
            raise ValueError(f"masks {self.in_mask:#x}/{self.out_mask:#x} exceed "
                             f"{self.n_in}->{self.n_out} dimensions")

    @classmethod
    def constant(cls, n_in: int = 8, n_out: int = 8) -> "Monomial":
        return cls(0, 0, n_in, n_out)

    @classmethod
    def from_combined(cls, combined: int, n_in: int = 8, n_out: int = 8) -> "Monomial":
        return cls(_reverse_bits(combined & ((1 << n_in) - 1), n_in),
                   _reverse_bits(combined >> n_in, n_out), n_in, n_out)

    @classmethod
    def from_variables(cls, variables, n_in: int = 8, n_out: int = 8) -> "Monomial":
        in_mask = out_mask = 0
        for var in variables:
            m = _TOKEN_RE.fullmatch(var)
            if not m:
                raise ValueError(f"malformed variable {var!r}")
            letter, index = m.group(1), int(m.group(2))
            width = n_in if letter == "X" else n_out
            if not 1 <= index <= width:
                raise ValueError(f"variable {var} out of range")
            if letter == "X":
                in_mask |= 1 << (n_in - index)
            else:
                out_mask |= 1 << (n_out - index)
        return cls(in_mask, out_mask, n_in, n_out)

    @property
    def combined(self) -> int:
        return (_reverse_bits(self.in_mask, self.n_in)
                | _reverse_bits(self.out_mask, self.n_out) << self.n_in)

    @cached_property
    def _key(self) -> tuple[int, int]:
        return (self.degree, self.combined)

    def __hash__(self) -> int:
        return hash(self._key)

    @property
    def degree(self) -> int:
        return self.in_mask.bit_count() + self.out_mask.bit_count()

    @property
    def is_constant(self) -> bool:
        return self.in_mask == 0 and self.out_mask == 0

    def sort_key(self) -> tuple[int, int]:
        return self._key

    def __lt__(self, other: "Monomial") -> bool:
        return self.sort_key() < other.sort_key()

    def variables(self) -> list[str]:
        xs = [f"X{i}" for i in range(1, self.n_in + 1) if self.in_mask >> (self.n_in - i) & 1]
        ys = [f"Y{j}" for j in range(1, self.n_out + 1) if self.out_mask >> (self.n_out - j) & 1]
        return xs + ys

    def divides(self, other: "Monomial") -> bool:
        """True if every variable of ``self`` also occurs in ``other``."""
        return (self.in_mask & ~other.in_mask) == 0 and (self.out_mask & ~other.out_mask) == 0

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial(self.in_mask | other.in_mask, self.out_mask | other.out_mask,
                        self.n_in, self.n_out)

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class EvalVector:
    """Truth vector of a monomial: bit ``s`` is its value at state ``s``."""

    bits: int
    n_states: int

    @property
    def weight(self) -> int:
        return self.bits.bit_count()

    def __getitem__(self, s: int) -> int:
        return (self.bits >> s) & 1

    def __and__(self, other: "EvalVector") -> "EvalVector":
        return EvalVector(self.bits & other.bits, self.n_states)

    def __xor__(self, other: "EvalVector") -> "EvalVector":
        return EvalVector(self.bits ^ other.bits, self.n_states)

    def is_zero(self) -> bool:
        return self.bits == 0

    def is_all_ones(self) -> bool:
        return self.bits == (1 << self.n_states) - 1


def render(m: Monomial) -> str:
    """``X5Y3Y4`` style string; the constant renders as ``1``."""
    return "".join(m.variables()) or "1"


def parse(text: str, n_in: int = 8, n_out: int = 8) -> Monomial:
    """Inverse of :func:`render`.

    Indices must strictly increase within each letter and the X block must
    precede the Y block.
    """
    if text == "1":
        return Monomial.constant(n_in, n_out)
    pos = 0
    last = ("X", 0)
    variables = []
    for m in _TOKEN_RE.finditer(text):
        if m.start() != pos:
            raise ValueError(f"malformed monomial {text!r} at offset {pos}")
        letter, digits = m.group(1), m.group(2)
        if digits.startswith("0"):
            raise ValueError(f"malformed index {digits!r} in {text!r}")
        index = int(digits)
        width = n_in if letter == "X" else n_out
        if not 1 <= index <= width:
            raise ValueError(f"variable {letter}{index} out of range in {text!r}")
        if letter == last[0] and index == last[1]:
            raise ValueError(f"duplicate variable {letter}{index} in {text!r}")
        if (letter, index) < last:
            raise ValueError(f"variables out of canonical order in {text!r}")
        last = (letter, index)
        variables.append(f"{letter}{index}")
        pos = m.end()
    if pos != len(text) or not variables:
        raise ValueError(f"malformed monomial {text!r}")
    return Monomial.from_variables(variables, n_in, n_out)


def evaluate(m: Monomial, s: StateIndex | int, sbox: SBox) -> int:
    _check_dims(m, sbox)
    s = s.check(sbox).value if isinstance(s, StateIndex) else StateIndex(s).check(sbox).value
    return int((s & m.in_mask) == m.in_mask and (sbox.table[s] & m.out_mask) == m.out_mask)


def eval_vector(m: Monomial, sbox: SBox) -> EvalVector:
    _check_dims(m, sbox)
    bits = 0
    for s, y in enumerate(sbox.table):
        if (s & m.in_mask) == m.in_mask and (y & m.out_mask) == m.out_mask:
            bits |= 1 << s
    return EvalVector(bits, sbox.n_states)


def _check_dims(m: Monomial, sbox: SBox) -> None:
    if m.n_in != sbox.n_in or m.n_out != sbox.n_out:
        raise ValueError(f"monomial dimensions {m.n_in}->{m.n_out} do not match "
                         f"S-box {sbox.n_in}->{sbox.n_out}")


# --- enumeration ---------------------------------------------------------------

def monomial_count(n_vars: int, max_degree: int, include_constant: bool = True) -> int:
    return sum(comb(n_vars, d) for d in range(0 if include_constant else 1, max_degree + 1))


@lru_cache(maxsize=64)
def _canonical_masks(n_vars: int) -> np.ndarray:
    masks = np.arange(1 << n_vars, dtype=np.int64)
    degrees = popcount(masks)
    order = np.lexsort((masks, degrees))
    out = masks[order]
    out.setflags(write=False)
    return out


def canonical_masks(n_in: int, n_out: int, max_degree: int,
                    include_constant: bool = True) -> np.ndarray:
    """Combined masks of all monomials up to ``max_degree``, canonically ordered."""
    n_vars = n_in + n_out
    if not 0 <= max_degree <= n_vars:
        raise ValueError(f"max_degree must lie in 0..{n_vars}, got {max_degree}")
    start = 0 if include_constant else 1
    stop = monomial_count(n_vars, max_degree, True)
    return _canonical_masks(n_vars)[start:stop]


def enumerate_monomials(n_in: int, n_out: int, max_degree: int,
                        include_constant: bool = True) -> Iterator[Monomial]:
    for c in canonical_masks(n_in, n_out, max_degree, include_constant):
        yield Monomial.from_combined(int(c), n_in, n_out)


def popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(np.asarray(a, dtype=np.uint64)).astype(np.int64)


# --- dense vector tables -------------------------------------------------------

def n_words(sbox: SBox) -> int:
    return max(1, sbox.n_states // 64)


def variable_vectors(sbox: SBox) -> np.ndarray:
    """Truth vectors of the single variables, indexed by combined-mask bit."""
    n_states = sbox.n_states
    words = n_words(sbox)
    out = np.zeros((sbox.n_vars, words), dtype=np.uint64)
    states = np.arange(n_states)
    images = np.asarray(sbox.table)
    for p in range(sbox.n_vars):
        if p < sbox.n_in:
            ones = (states >> (sbox.n_in - 1 - p)) & 1
        else:
            ones = (images >> (sbox.n_out - 1 - (p - sbox.n_in))) & 1
        out[p] = _pack(ones, words)
    return out


def _pack(ones: np.ndarray, words: int) -> np.ndarray:
    packed = np.zeros(words, dtype=np.uint64)
    for s in np.flatnonzero(ones):
        packed[s >> 6] |= np.uint64(1) << np.uint64(s & 63)
    return packed


def full_vector_table(sbox: SBox) -> np.ndarray:
    """Truth vectors of every monomial, row ``c`` for combined mask ``c``.

    Built by the product rule: adding variable ``p`` to a monomial ANDs its
    vector with that variable's vector.
    """
    return _full_vector_table(sbox)


@lru_cache(maxsize=16)
def _full_vector_table(sbox: SBox) -> np.ndarray:
    words = n_words(sbox)
    table = np.empty((1 << sbox.n_vars, words), dtype=np.uint64)
    ones = np.zeros(words, dtype=np.uint64)
    ones[:] = np.uint64(0xFFFFFFFFFFFFFFFF)
    if sbox.n_states < 64:
        ones[0] = np.uint64((1 << sbox.n_states) - 1)
    table[0] = ones
    var = variable_vectors(sbox)
    for p in range(sbox.n_vars):
        half = 1 << p
        np.bitwise_and(table[:half], var[p], out=table[half:2 * half])
    table.setflags(write=False)
    return table


def vector_table(sbox: SBox, masks: np.ndarray) -> np.ndarray:
    """Dense ``(len(masks), words)`` table of truth vectors for the given monomials."""
    return np.ascontiguousarray(full_vector_table(sbox)[np.asarray(masks, dtype=np.int64)])


def row_to_int(row: np.ndarray) -> int:
    return sum(int(w) << (64 * i) for i, w in enumerate(row))


def to_eval_vector(row: np.ndarray, sbox: SBox) -> EvalVector:
    return EvalVector(row_to_int(row), sbox.n_states)
