"""Published figures for the AES S-box and the checks that reproduce them.

Each check pairs a published value with an independently computed one.  A
disagreement is reported, never hidden: the computed value is what the tool
stands behind, the published one is shown next to it.
"""

from __future__ import annotations

from collections import Counter
from typing import Callable

from .analysis import (
    constant_one_monomials,
    count_vanishing_monomials,
    states_min_weight,
    weight_one_kernel_count,
)
from .report import Check
from .sbox import AES_CANONICAL, SBox
from .search import SearchConfig, SearchResult, find_relations

VANISHING_ALL = 20774
VANISHING_UP_TO_5 = 0
VANISHING_DEGREE_6 = 43

# state -> variables equal to 1 there
MIN_WEIGHT_STATES = {
    0x08: ("X5", "Y3", "Y4"),
    0x09: ("X5", "X8", "Y8"),
    0x30: ("X3", "X4", "Y6"),
    0x40: ("X2", "Y5", "Y8"),
    0x52: ("X2", "X4", "X7"),
}
MIN_WEIGHT_ROWS = {
    0x08: ["X5", "Y3", "Y4", "X5Y3", "X5Y4", "Y3Y4", "X5Y3Y4"],
    0x09: ["X5", "X8", "Y8", "X5X8", "X5Y8", "X8Y8", "X5X8Y8"],
    0x30: ["X3", "X4", "Y6", "X3X4", "X3Y6", "X4Y6", "X3X4Y6"],
    0x40: ["X2", "Y5", "Y8", "X2Y5", "X2Y8", "Y5Y8", "X2Y5Y8"],
    0x52: ["X2", "X4", "X7", "X2X4", "X2X7", "X4X7", "X2X4X7"],
}

# Largest per-monomial degree and term count covered by the nonexistence claim.
NO_RELATION_MAX_DEGREE = 5
NO_RELATION_MAX_TERMS = 5

RELATION_SHAPES = {
    (1, False): "a = 0",
    (2, False): "a + b = 0",
    (2, True): "a + 1 = 0",
    (3, False): "a + b + c = 0",
    (3, True): "a + b + 1 = 0",
    (4, False): "a + b + c + d = 0",
    (4, True): "a + b + c + 1 = 0",
    (5, False): "a + b + c + d + e = 0",
    (5, True): "a + b + c + d + 1 = 0",
}


def published_vanishing(max_degree: int | None, exact_degree: int | None) -> int | None:
    """Published count for a vanishing-monomial query on AES, if there is one."""
    if exact_degree is not None:
        if exact_degree <= 5:
            return 0
        if exact_degree == 6:
            return VANISHING_DEGREE_6
        return None
    if max_degree is None or max_degree >= 16:
        return VANISHING_ALL
    if max_degree <= 5:
        return VANISHING_UP_TO_5
    if max_degree == 6:
        return VANISHING_DEGREE_6
    return None


def published_relation_count(cfg: SearchConfig) -> int | None:
    """Published relation count (always zero) when ``cfg`` lies inside the claim."""
    if cfg.max_degree <= NO_RELATION_MAX_DEGREE and cfg.max_terms <= NO_RELATION_MAX_TERMS:
        return 0
    return None


def is_aes(sbox: SBox) -> bool:
    return sbox.n_in == 8 and sbox.n_out == 8 and sbox.table == AES_CANONICAL


def shape_counts(result: SearchResult) -> Counter:
    return Counter((r.term_count, r.has_constant) for r in result)


def relation_checks(result: SearchResult, cfg: SearchConfig, tag: str) -> list[Check]:
    """One check per relation shape covered by ``cfg``, plus the total."""
    counts = shape_counts(result)
    checks = []
    for (terms, constant), shape in RELATION_SHAPES.items():
        if terms > cfg.max_terms or (constant and not cfg.include_constant):
            continue
        checks.append(Check(f"{tag}_{terms}{'c' if constant else ''}",
                            f"relations of shape {shape}, degree <= {cfg.max_degree}",
                            0, counts.get((terms, constant), 0)))
    checks.append(Check(f"{tag}_total",
                        f"relations with <= {cfg.max_terms} terms, degree <= {cfg.max_degree}, "
                        f"total degree <= {cfg.total_bound}"
                        + (", constant allowed" if cfg.include_constant else ""),
                        0, len(result)))
    return checks


def _entry(sbox: SBox, s: int) -> int | None:
    return sbox.table[s] if s < len(sbox.table) else None


def construction_checks(sbox: SBox) -> list[Check]:
    return [
        Check("aes_table", "table equals the FIPS-197 constants at all 256 entries",
              True, sbox.table == AES_CANONICAL),
        Check("aes_S00", "S(0x00)", 0x63, _entry(sbox, 0x00)),
        Check("aes_S08", "S(0x08), only Y3 and Y4 set", 0x30, _entry(sbox, 0x08)),
        Check("aes_S52", "S(0x52), no output bit set", 0x00, _entry(sbox, 0x52)),
    ]


def counting_checks(sbox: SBox) -> list[Check]:
    rows = states_min_weight(sbox)
    return [
        Check("vanishing_all", "nonconstant monomials vanishing on every state",
              VANISHING_ALL, count_vanishing_monomials(sbox)),
        Check("vanishing_le5", "vanishing monomials of degree <= 5",
              VANISHING_UP_TO_5, count_vanishing_monomials(sbox, max_degree=5)),
        Check("vanishing_eq6", "vanishing monomials of degree exactly 6",
              VANISHING_DEGREE_6, count_vanishing_monomials(sbox, exact_degree=6)),
        Check("kernel_weight1", "unit vectors in the relation space at full degree",
              VANISHING_ALL, weight_one_kernel_count(sbox, sbox.n_vars)),
        Check("constant_one", "nonconstant monomials equal to 1 on every state, any degree",
              0, len(constant_one_monomials(sbox))),
        Check("min_weight_states", "states with the fewest variables equal to 1",
              sorted(MIN_WEIGHT_STATES), [r.state for r in rows]),
        Check("min_weight_w", "combined weight of those states", [3] * 5,
              [r.weight for r in rows]),
        Check("min_weight_count", "monomials equal to 1 at each of those states", [7] * 5,
              [r.count for r in rows]),
        Check("min_weight_rows", "expanded rows of monomials equal to 1",
              True, {r.state: r.expand() for r in rows} == MIN_WEIGHT_ROWS),
    ]


FAST_SWEEPS = [
    ("k4d5", SearchConfig(4, 5, 20, include_constant=True, result_limit=None)),
    ("k5d4", SearchConfig(5, 4, 20, include_constant=True, result_limit=None)),
]
FULL_SWEEPS = [
    ("k5d5", SearchConfig(5, 5, 25, include_constant=True, result_limit=None)),
]


def verification_checks(sbox: SBox, tier: str = "fast", workers: int = 1,
                        progress: Callable[[str, int, int], None] | None = None) -> list[Check]:
    """Every reproduction check for ``tier`` (``fast`` or ``full``)."""
    if tier not in ("fast", "full"):
        raise ValueError(f"unknown tier {tier!r}")
    checks = construction_checks(sbox) + counting_checks(sbox)
    sweeps = FAST_SWEEPS + (FULL_SWEEPS if tier == "full" else [])
    for tag, cfg in sweeps:
        cfg = SearchConfig(cfg.max_terms, cfg.max_degree, cfg.total_degree_bound,
                           cfg.include_constant, None, workers)
        cb = None
        if progress is not None:
            cb = lambda done, total, tag=tag: progress(tag, done, total)  # noqa: E731
        checks += relation_checks(find_relations(sbox, cfg, progress=cb), cfg, tag)
    return checks
