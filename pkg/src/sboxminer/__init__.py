"""Mining sparse low-degree relations between S-box input and output bits."""

__version__ = "0.1.0"

from .analysis import (  # noqa: E402
    constant_one_monomials,
    count_vanishing_monomials,
    relation_space_dimension,
    states_min_weight,
    vanishing_monomials,
)
from .monomials import EvalVector, Monomial, enumerate_monomials, eval_vector, evaluate, parse, render  # noqa: E402
from .sbox import SBox, StateIndex, bit_of_state, build_aes_sbox, gf256_inv, gf256_mul, load_sbox  # noqa: E402
from .search import Relation, SearchConfig, SearchResult, brute_force_oracle, find_relations  # noqa: E402

__all__ = [
    "EvalVector", "Monomial", "Relation", "SBox", "SearchConfig", "SearchResult", "StateIndex",
    "bit_of_state", "brute_force_oracle", "build_aes_sbox", "constant_one_monomials",
    "count_vanishing_monomials", "enumerate_monomials", "eval_vector", "evaluate",
    "find_relations", "gf256_inv", "gf256_mul", "load_sbox", "parse",
    "relation_space_dimension", "render", "states_min_weight", "vanishing_monomials",
]
