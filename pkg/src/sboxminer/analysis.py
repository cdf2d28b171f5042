"""Counting utilities, minimum-weight states and rank diagnostics."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple

import numpy as np

from . import _kernels
from .monomials import Monomial, canonical_masks, full_vector_table, popcount, render, vector_table
from .sbox import SBox, one_variables


def _degree_selection(sbox: SBox, max_degree: int | None, exact_degree: int | None) -> np.ndarray:
    """Combined masks of the nonconstant monomials passing a degree filter."""
    if max_degree is not None and exact_degree is not None:
        raise ValueError("give at most one of max_degree and exact_degree")
    top = sbox.n_vars
    if exact_degree is not None:
        if not 0 <= exact_degree <= top:
            raise ValueError(f"exact_degree must lie in 0..{top}")
        masks = canonical_masks(sbox.n_in, sbox.n_out, exact_degree, False)
        return masks[popcount(masks) == exact_degree]
    if max_degree is None:
        max_degree = top
    return canonical_masks(sbox.n_in, sbox.n_out, min(max_degree, top), False)


def vanishing_monomials(sbox: SBox, max_degree: int | None = None,
                        exact_degree: int | None = None) -> list[Monomial]:
    """Nonconstant monomials equal to 0 at every state, in canonical order."""
    masks = _degree_selection(sbox, max_degree, exact_degree)
    table = full_vector_table(sbox)[masks]
    zero = ~table.any(axis=1)
    return [Monomial.from_combined(int(c), sbox.n_in, sbox.n_out) for c in masks[zero]]


def count_vanishing_monomials(sbox: SBox, max_degree: int | None = None,
                              exact_degree: int | None = None) -> int:
    masks = _degree_selection(sbox, max_degree, exact_degree)
    table = full_vector_table(sbox)[masks]
    return int((~table.any(axis=1)).sum())


def constant_one_monomials(sbox: SBox, max_degree: int | None = None) -> list[Monomial]:
    """Nonconstant monomials equal to 1 at every state."""
    masks = _degree_selection(sbox, max_degree, None)
    full = full_vector_table(sbox)
    ones = full[0]
    hit = (full[masks] == ones).all(axis=1)
    return [Monomial.from_combined(int(c), sbox.n_in, sbox.n_out) for c in masks[hit]]


@dataclass(frozen=True)
class StateRow:
    state: int
    variables: tuple[str, ...]

    @property
    def weight(self) -> int:
        return len(self.variables)

    @property
    def count(self) -> int:
        """Nonconstant monomials taking value 1 at this state."""
        return 2 ** self.weight - 1

    def expand(self, n_in: int = 8, n_out: int = 8) -> list[str]:
        """Every nonconstant monomial over the row's variables, canonically ordered."""
        monomials = [Monomial.from_variables(sub, n_in, n_out)
                     for d in range(1, self.weight + 1)
                     for sub in combinations(self.variables, d)]
        return [render(m) for m in sorted(monomials, key=Monomial.sort_key)]

    def as_dict(self, expand: bool = False, n_in: int = 8, n_out: int = 8) -> dict:
        out = {"state": self.state, "label": f"S{self.state}",
               "variables": list(self.variables), "weight": self.weight, "count": self.count}
        if expand:
            out["monomials"] = self.expand(n_in, n_out)
        return out


def state_weights(sbox: SBox) -> np.ndarray:
    states = np.arange(sbox.n_states, dtype=np.uint64)
    images = np.asarray(sbox.table, dtype=np.uint64)
    return popcount(states) + popcount(images)


def states_min_weight(sbox: SBox) -> list[StateRow]:
    """States whose input and output bytes together have the fewest set bits."""
    weights = state_weights(sbox)
    low = int(weights.min())
    return [StateRow(int(s), tuple(one_variables(int(s), sbox)))
            for s in np.flatnonzero(weights == low)]


class RankInfo(NamedTuple):
    rank: int
    kernel_dimension: int


def relation_space_dimension(sbox: SBox, max_degree: int) -> RankInfo:
    """GF(2) rank of the truth vectors of all monomials up to ``max_degree``
    (constant included), and the dimension of the space of linear relations."""
    masks = canonical_masks(sbox.n_in, sbox.n_out, max_degree, True)
    vectors = vector_table(sbox, masks)
    rank = int(_kernels.gf2_rank(vectors))
    return RankInfo(rank, len(masks) - rank)


def weight_one_kernel_count(sbox: SBox, max_degree: int) -> int:
    """Number of unit vectors in the relation space, i.e. columns that are zero."""
    masks = canonical_masks(sbox.n_in, sbox.n_out, max_degree, True)
    return int((~vector_table(sbox, masks).any(axis=1)).sum())


def render_all(monomials: list[Monomial]) -> list[str]:
    return [render(m) for m in monomials]
