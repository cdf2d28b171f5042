import random

import numpy as np
import pytest

from sboxminer.analysis import count_vanishing_monomials
from sboxminer.monomials import parse
from sboxminer.sbox import build_aes_sbox, identity_sbox, random_sbox
from sboxminer.search import (
    Relation,
    SearchConfig,
    brute_force_oracle,
    build_pool,
    find_relations,
    linear_fingerprints,
    relation_residual,
    verify_relations,
)

AES = build_aes_sbox()


def random_boxes(n_bits, count, seed):
    rng = random.Random(seed)
    return [random_sbox(n_bits, n_bits, rng, name=f"r{n_bits}_{i}") for i in range(count)]


def small_configs():
    for k in range(1, 5):
        for d in range(0, 5):
            for const in (False, True):
                yield SearchConfig(k, d, include_constant=const, result_limit=None)
                if k > 1 and d > 1:
                    yield SearchConfig(k, d, d + 1, include_constant=const, result_limit=None)


def keys(result):
    return [r.sort_key() for r in result]


def test_identity_pairs():
    result = find_relations(identity_sbox(8), SearchConfig(2, 1))
    assert [str(r) for r in result] == [f"X{i} + Y{i} = 0" for i in range(1, 9)]
    assert all(r.minimal and r.term_count == 2 and r.total_degree == 2 for r in result)
    assert not result.truncated


def test_oracle_identity3():
    result = brute_force_oracle(identity_sbox(3), SearchConfig(2, 1))
    assert [str(r) for r in result] == ["X1 + Y1 = 0", "X2 + Y2 = 0", "X3 + Y3 = 0"]


def test_oracle_aes_single_terms():
    assert len(brute_force_oracle(AES, SearchConfig(1, 5, include_constant=True))) == 0


def test_oracle_refuses_large():
    with pytest.raises(ValueError, match="subsets"):
        brute_force_oracle(AES, SearchConfig(4, 5), max_subsets=10**6)


@pytest.mark.parametrize("n_bits,count", [(3, 20), (4, 4)])
def test_engine_equals_oracle(n_bits, count):
    # the acceptance suite covers twenty 4-bit boxes; here the grid also varies the total bound
    for sbox in random_boxes(n_bits, count, seed=1000 + n_bits):
        for cfg in small_configs():
            fast = find_relations(sbox, cfg)
            slow = brute_force_oracle(sbox, cfg)
            assert keys(fast) == keys(slow), (sbox.name, cfg)
            assert [r.minimal for r in fast] == [r.minimal for r in slow]


def test_engine_equals_oracle_five_terms():
    for sbox in random_boxes(3, 5, seed=77):
        cfg = SearchConfig(5, 2, include_constant=True, result_limit=None)
        assert keys(find_relations(sbox, cfg)) == keys(brute_force_oracle(sbox, cfg))


def test_engine_equals_oracle_non_square():
    rng = random.Random(9)
    for n_in, n_out in [(4, 2), (3, 5), (5, 3)]:
        sbox = random_sbox(n_in, n_out, rng)
        cfg = SearchConfig(4, 3, include_constant=True, result_limit=None)
        assert keys(find_relations(sbox, cfg)) == keys(brute_force_oracle(sbox, cfg))


def test_soundness_of_every_relation():
    for sbox in random_boxes(4, 3, seed=5):
        result = find_relations(sbox, SearchConfig(4, 3, include_constant=True, result_limit=None))
        assert len(result) > 0
        for rel in result:
            assert not relation_residual(sbox, rel.monomials).any()
            assert len(set(rel.monomials)) == rel.term_count
            assert rel.total_degree == sum(m.degree for m in rel.monomials)
            assert list(rel.monomials) == sorted(rel.monomials, key=lambda m: m.sort_key())


def test_verify_rejects_bogus_relation():
    bogus = Relation((parse("X1"), parse("Y1")))
    with pytest.raises(RuntimeError, match="does not vanish"):
        verify_relations(AES, [bogus])


def test_output_sorted_and_unique():
    sbox = random_boxes(4, 1, seed=11)[0]
    result = find_relations(sbox, SearchConfig(4, 4, include_constant=True, result_limit=None))
    k = keys(result)
    assert k == sorted(k) and len(set(k)) == len(k)


@pytest.mark.parametrize("workers", [2, 8])
def test_worker_count_does_not_change_output(workers):
    sbox = random_boxes(4, 1, seed=21)[0]
    base = SearchConfig(4, 4, include_constant=True, result_limit=None)
    one = find_relations(sbox, base)
    many = find_relations(sbox, SearchConfig(4, 4, include_constant=True, result_limit=None,
                                             worker_count=workers))
    assert [r.as_dict() for r in one] == [r.as_dict() for r in many]


@pytest.mark.parametrize("workers", [1, 3])
def test_truncation_is_a_canonical_prefix(workers):
    sbox = random_boxes(4, 1, seed=31)[0]
    full = find_relations(sbox, SearchConfig(4, 4, include_constant=True, result_limit=None))
    assert len(full) > 40
    cut = find_relations(sbox, SearchConfig(4, 4, include_constant=True, result_limit=40,
                                            worker_count=workers))
    assert cut.truncated and keys(cut) == keys(full)[:40]
    exact = find_relations(sbox, SearchConfig(4, 4, include_constant=True,
                                              result_limit=len(full)))
    assert not exact.truncated and len(exact) == len(full)


def test_monotone_in_all_bounds():
    sbox = random_boxes(4, 1, seed=41)[0]
    grid = [(k, d, t) for k in (2, 3, 4) for d in (2, 3) for t in (d, d + 2, k * d)]
    results = {g: set(keys(find_relations(sbox, SearchConfig(*g, include_constant=True,
                                                               result_limit=None))))
               for g in grid}
    for a in grid:
        for b in grid:
            if all(x <= y for x, y in zip(a, b)):
                assert results[a] <= results[b], (a, b)


def test_single_terms_are_vanishing_monomials():
    for d in (5, 6, 7):
        result = find_relations(AES, SearchConfig(1, d, result_limit=None))
        assert len(result) == count_vanishing_monomials(AES, max_degree=d)
    assert len(find_relations(AES, SearchConfig(1, 6, result_limit=None))) == 43


def test_aes_affine_relations_absent():
    assert len(find_relations(AES, SearchConfig(5, 1, include_constant=True))) == 0


def test_minimal_flag_on_duplicate_vectors():
    sbox = identity_sbox(3)
    result = find_relations(sbox, SearchConfig(4, 1, result_limit=None))
    by_text = {str(r): r.minimal for r in result}
    assert by_text["X1 + Y1 = 0"] is True
    assert by_text["X1 + X2 + Y1 + Y2 = 0"] is False
    assert len(result) == 3 + 3


def test_degenerate_configs():
    with pytest.raises(ValueError):
        find_relations(AES, SearchConfig(0, 1))
    with pytest.raises(ValueError):
        find_relations(AES, SearchConfig(2, 17))
    with pytest.raises(ValueError):
        find_relations(AES, SearchConfig(3, 4, total_degree_bound=3))
    assert len(find_relations(AES, SearchConfig(3, 0))) == 0
    assert len(find_relations(AES, SearchConfig(3, 0, include_constant=True))) == 0
    tiny = identity_sbox(1)
    result = find_relations(tiny, SearchConfig(9, 2, include_constant=True, result_limit=None))
    assert keys(result) == keys(brute_force_oracle(tiny, SearchConfig(
        9, 2, include_constant=True, result_limit=None)))


def test_keys_identify_relations():
    sbox = random_boxes(4, 1, seed=51)[0]
    result = find_relations(sbox, SearchConfig(4, 3, include_constant=True, result_limit=None))
    expected = {tuple(m.combined for m in r.monomials) for r in result}
    assert result.keys() == expected and len(expected) == len(result)
    assert len(result.minimal) == len(result)


def test_fingerprints_are_linear():
    pool = build_pool(AES, 2, True)
    v, fp = pool.vectors, pool.fingerprints
    rng = np.random.default_rng(0)
    for _ in range(100):
        i, j = rng.integers(0, len(pool), size=2)
        combined = linear_fingerprints((v[i] ^ v[j]).reshape(1, -1))[0]
        assert combined == fp[i] ^ fp[j]


def test_relation_dict_shape():
    rel = find_relations(identity_sbox(8), SearchConfig(2, 1))[0]
    assert rel.as_dict() == {"monomials": ["X1", "Y1"], "constant": False, "term_count": 2,
                             "total_degree": 2, "minimal": True}


def test_aes_degree5_pairs_are_real():
    # found by the engine; each pair agrees on every state
    result = find_relations(AES, SearchConfig(2, 5, include_constant=True))
    assert len(result) == 9
    first = result[0]
    assert str(first) == "X1X5X6X8Y3 + X1X6X8Y3Y4 = 0"
    support = [s for s in range(256) if (s & 0b10001101) == 0b10001101 and AES[s] & 0b00100000]
    assert support == [143, 175, 189, 205]
