from fractions import Fraction
from math import factorial, prod

import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from haarlimits.combinatorics import (
    OddSize,
    centralizer_size,
    character,
    class_size,
    compose,
    conjugate,
    coset_type,
    cycle_type,
    dim_gl,
    dim_sn,
    format_partition,
    inverse,
    num_cycles,
    pairing_product_class,
    pairing_to_involution,
    pairings_of,
    parse_partition,
    partitions_of,
)


@pytest.mark.parametrize("n", range(1, 9))
def test_partition_counts(n):
    assert len(partitions_of(n)) == sp.partition(n)


@pytest.mark.parametrize("n", range(1, 7))
def test_class_sizes_sum_to_factorial(n):
    assert sum(class_size(mu) for mu in partitions_of(n)) == factorial(n)
    for mu in partitions_of(n):
        assert class_size(mu) * centralizer_size(mu) == factorial(n)


@pytest.mark.parametrize("n", range(1, 7))
def test_character_orthogonality(n):
    parts = partitions_of(n)
    for lam in parts:
        for nu in parts:
            s = sum(Fraction(character(lam, mu) * character(nu, mu), centralizer_size(mu)) for mu in parts)
            assert s == (1 if lam == nu else 0)


def test_known_characters():
    # S_3: trivial, sign, standard
    assert character((3,), (2, 1)) == 1
    assert character((1, 1, 1), (2, 1)) == -1
    assert character((2, 1), (3,)) == -1
    assert character((2, 1), (1, 1, 1)) == 2
    assert character((2, 2), (2, 2)) == 2


@pytest.mark.parametrize("n", range(1, 7))
def test_dim_sn_matches_character_at_identity(n):
    for lam in partitions_of(n):
        assert dim_sn(lam) == character(lam, (1,) * n)
    assert sum(dim_sn(lam) ** 2 for lam in partitions_of(n)) == factorial(n)


def test_dim_gl_against_weyl_formula():
    # s_lam(1^N) = prod_{i<j} (lam_i - lam_j + j - i) / (j - i) at N = 4
    for lam in partitions_of(4):
        l = list(lam) + [0] * (4 - len(lam))
        ref = prod(Fraction(l[i] - l[j] + j - i, j - i) for i in range(4) for j in range(i + 1, 4))
        assert dim_gl(lam)(4) == ref


@pytest.mark.parametrize("n", range(0, 6))
def test_pairing_count(n):
    ps = pairings_of(2 * n)
    assert len(ps) == prod(range(1, 2 * n, 2))
    assert len(set(ps)) == len(ps)


def test_odd_pairings():
    with pytest.raises(OddSize):
        pairings_of(3)


perms = st.integers(1, 7).flatmap(lambda n: st.permutations(list(range(n))).map(tuple))


@given(perms, st.data())
def test_cycle_type_is_conjugation_invariant(p, data):
    q = tuple(data.draw(st.permutations(list(range(len(p))))))
    conj = compose(compose(q, p), inverse(q))
    assert cycle_type(conj) == cycle_type(p)
    assert sum(cycle_type(p)) == len(p)
    assert num_cycles(p) == len(cycle_type(p))


def test_coset_type_of_identical_pairings():
    for p in pairings_of(6):
        inv = pairing_to_involution(p)
        assert coset_type(inv, inv) == (1, 1, 1)
        assert pairing_product_class(p, p) == (1, 1, 1)


def test_coset_type_distribution():
    # number of pairings at coset type mu from a fixed pairing is |H_n| / z_{2 mu}; here n = 3: 1, 6, 8
    base = pairings_of(6)[0]
    counts = {}
    for p in pairings_of(6):
        mu = pairing_product_class(base, p)
        counts[mu] = counts.get(mu, 0) + 1
    assert counts == {(1, 1, 1): 1, (2, 1): 6, (3,): 8}


def test_partition_text_forms():
    assert format_partition((2, 1, 1)) == "[2,1,1]"
    assert parse_partition("[2,1,1]") == (2, 1, 1)
    assert parse_partition("1^2 2") == (2, 1, 1)
    assert conjugate((3, 1)) == (2, 1, 1)
