from fractions import Fraction
from itertools import permutations
from math import comb

import pytest
import sympy as sp

from haarlimits import goldens
from haarlimits.algebra import RationalFunctionN
from haarlimits.combinatorics import (
    compose,
    cycle_type,
    inverse,
    num_cycles,
    pairing_product_class,
    pairings_of,
    partitions_of,
)
from haarlimits.moments import MomentQuery, moment
from haarlimits.weingarten import (
    TableOrderMismatch,
    contraction_check,
    gram_inverse_class_values,
    normalize_group,
    weingarten_values,
    wg_orthogonal,
    wg_table,
    wg_unitary,
)


def sympy_orthogonal_values(n, N):
    """Independent oracle: invert the pairing Gram matrix with sympy."""
    ps = pairings_of(2 * n)
    G = sp.Matrix(len(ps), len(ps), lambda a, b: N ** len(pairing_product_class(ps[a], ps[b])))
    W = G.inv()
    return {pairing_product_class(ps[0], ps[b]): Fraction(int(sp.fraction(W[0, b])[0]), int(sp.fraction(W[0, b])[1])) for b in range(len(ps))}


def sympy_unitary_values(n, N):
    perms = list(permutations(range(n)))
    G = sp.Matrix(len(perms), len(perms), lambda a, b: N ** num_cycles(compose(inverse(perms[a]), perms[b])))
    W = G.inv()
    out = {}
    for b, t in enumerate(perms):
        num, den = sp.fraction(W[0, b])
        out[cycle_type(compose(inverse(perms[0]), t))] = Fraction(int(num), int(den))
    return out


@pytest.mark.parametrize("n,N", [(1, 3), (2, 4), (2, 7), (3, 5), (3, 8)])
def test_orthogonal_matches_sympy_gram_inverse(n, N):
    assert wg_orthogonal(n).at(N) == sympy_orthogonal_values(n, N)


@pytest.mark.parametrize("n,N", [(1, 2), (2, 3), (3, 4), (3, 6), (4, 5)])
def test_unitary_matches_sympy_gram_inverse(n, N):
    assert wg_unitary(n).at(N) == sympy_unitary_values(n, N)


@pytest.mark.parametrize("group", ["O", "U"])
def test_tables_equal_printed_values(group):
    gold = goldens.weingarten_goldens(group)
    for mu, ref in gold.items():
        assert wg_table(group, sum(mu))[mu] == ref, mu


def test_printed_n2_orthogonal_text():
    t = wg_orthogonal(2)
    assert str(t[(2,)]) == "(-1)/(N^3+N^2-2N)"
    assert str(t[(1, 1)]) == "(N+1)/(N^3+N^2-2N)"


def test_orthogonal_n4_full_gram_at_integer_N():
    # the class-reduced system against the full 105 x 105 exact inverse
    assert wg_orthogonal(4).at(9) == gram_inverse_class_values("O", 4, 9)


def test_order_five_tables_consistent():
    assert wg_unitary(5).at(7) == gram_inverse_class_values("U", 5, 7)
    assert contraction_check(5, wg_orthogonal(5), wg_orthogonal(4))


@pytest.mark.parametrize("group", ["O", "U"])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_contraction_recursion(group, n):
    prev = wg_table(group, n - 1) if n > 1 else None
    assert contraction_check(n, wg_table(group, n), prev)


def test_contraction_detects_wrong_table():
    t = wg_orthogonal(2)
    bad = type(t)("O", 2, {**t.entries, (2,): t[(2,)] * 2})
    rep = contraction_check(2, bad, wg_orthogonal(1))
    assert not rep.passed and rep.violation
    with pytest.raises(TableOrderMismatch):
        contraction_check(3, wg_orthogonal(3), wg_orthogonal(1))


def test_large_N_leading_behaviour():
    # C[mu] ~ prod Moebius-like signs N^{-n-|mu|+l(mu)}: check C[1^n] ~ N^-n
    N = RationalFunctionN.N()
    for group in ("O", "U"):
        for n in range(1, 5):
            f = wg_table(group, n)[(1,) * n] * N**n
            assert f(10**6) == pytest.approx(1, rel=1e-4)


# small N: the Gram matrix is singular and the pseudo-inverse is used


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_O1_moments(n):
    # O(1) = {+1, -1}: every even moment of O_11 equals 1
    assert moment(MomentQuery("O", (1,) * (2 * n), (1,) * (2 * n)), 1) == 1


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_O2_cosine_moments(n):
    # O_11 = cos(theta) with theta uniform on both components: E cos^2n = binom(2n, n) / 4^n
    q = MomentQuery("O", (1,) * (2 * n), (1,) * (2 * n))
    assert moment(q, 2) == Fraction(comb(2 * n, n), 4**n)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_U2_modulus_moments(n):
    # |U_11|^2 is uniform on [0, 1] for U(2): E |U_11|^2n = 1 / (n + 1)
    q = MomentQuery("U", (1,) * n, (1,) * n, (1,) * n, (1,) * n)
    assert moment(q, 2) == Fraction(1, n + 1)
    assert moment(q, 1) == 1


def test_small_N_values_are_class_functions():
    for n, N in [(3, 2), (4, 2), (4, 3)]:
        vals = weingarten_values("O", n, N)
        assert set(vals) == set(partitions_of(n))


def test_group_names():
    assert normalize_group("o") == "O"
    assert normalize_group("unitary") == "U"
    with pytest.raises(ValueError):
        normalize_group("q")


def test_pseudo_inverse_rows_agree_with_full_matrix():
    full = gram_inverse_class_values("O", 3, 2, pseudo=True, full=True)
    assert gram_inverse_class_values("O", 3, 2, pseudo=True) == full


def test_pseudo_inverse_is_moore_penrose():
    from haarlimits.weingarten import _matmul, orthogonal_gram_matrix, pseudo_inverse_symmetric

    G = [[Fraction(x) for x in r] for r in orthogonal_gram_matrix(3, 2)]
    P = pseudo_inverse_symmetric(G)
    assert _matmul(_matmul(G, P), G) == G
    assert _matmul(_matmul(P, G), P) == P
    GP = _matmul(G, P)
    assert GP == [list(r) for r in zip(*GP)]
