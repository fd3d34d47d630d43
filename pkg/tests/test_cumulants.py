import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from haarlimits import goldens
from haarlimits.cumulants import (
    POLARIZED_TAGS,
    MissingMoment,
    MomentVector,
    UnknownTag,
    catalan,
    cumulant_by_name,
    free_cumulant,
    moments_from_cumulants,
    noncrossing_partitions,
    normalize_tag,
    psi,
    psi_eval,
    psi_polarized,
    psi_polarized_eval,
    specialize_hermitian,
)


@pytest.mark.parametrize("n", range(1, 8))
def test_noncrossing_count_is_catalan(n):
    assert len(noncrossing_partitions(n)) == catalan(n)


@pytest.mark.parametrize("q", [1, 2, 3, 4])
def test_psi_matches_printed(q):
    assert psi(q, "A") == goldens.cumulant_golden(str(q))


@pytest.mark.parametrize("tag", sorted(POLARIZED_TAGS))
def test_polarized_matches_printed(tag):
    assert psi_polarized(tag, "A") == goldens.cumulant_golden(tag)


@pytest.mark.parametrize("q", range(1, 7))
def test_closed_formula_equals_noncrossing_recursion(q):
    assert psi(q, "X") == free_cumulant(("X",) * q)


@pytest.mark.parametrize("tag,q", [("2t", 2), ("3t", 3), ("4t", 4), ("4tt", 4), ("4t|t", 4)])
def test_polarized_at_hermitian_point(tag, q):
    assert specialize_hermitian(psi_polarized(tag, "A")) == psi(q, "A")


def test_tag_aliases():
    assert normalize_tag("4t-t") == "4t|t"
    assert cumulant_by_name("4t-t") == cumulant_by_name("4t|t")
    with pytest.raises(UnknownTag):
        normalize_tag("5t")


def _mv(phi):
    return MomentVector({k + 1: v for k, v in enumerate(phi)})


def test_semicircle_cumulants():
    # semicircle moments are Catalan numbers in even degree; only kappa_2 survives
    phi = [catalan(k // 2) if k % 2 == 0 else 0 for k in range(1, 7)]
    vals = [psi_eval(q, _mv(phi)) for q in range(1, 7)]
    assert vals == [0, 1, 0, 0, 0, 0]


def test_free_poisson_cumulants():
    # Marchenko-Pastur with rate 1: moments are Catalan numbers, all free cumulants equal 1
    phi = [catalan(k) for k in range(1, 7)]
    assert [psi_eval(q, _mv(phi)) for q in range(1, 7)] == [1] * 6


def test_bernoulli_pm1():
    # symmetric +-1: free cumulants kappa_2 = 1, kappa_4 = -1, kappa_6 = 2 (signed Catalan)
    phi = [1 if k % 2 == 0 else 0 for k in range(1, 7)]
    assert [psi_eval(q, _mv(phi)) for q in (2, 4, 6)] == [1, -1, 2]


@given(st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=5), min_size=5, max_size=5))
def test_moment_cumulant_roundtrip(kappas):
    k = {i + 1: v for i, v in enumerate(kappas)}
    phi = moments_from_cumulants(k, 5)
    m = MomentVector(phi)
    assert [psi_eval(q, m) for q in range(1, 6)] == kappas


def test_numeric_matrix_polarized():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    m = MomentVector.from_matrix(X, 4, mixed_up_to=4)
    # psi_2t = tr(X X*) - |tr X|^2 is real and nonnegative
    v = psi_polarized_eval("2t", m)
    assert abs(v.imag) < 1e-12 and v.real >= -1e-12
    H = X + X.conj().T
    mh = MomentVector.from_matrix(H, 4, mixed_up_to=4)
    for tag, q in [("4t", 4), ("4tt", 4), ("4t|t", 4)]:
        assert psi_polarized_eval(tag, mh) == pytest.approx(psi_eval(q, mh))


def test_missing_moments():
    with pytest.raises(MissingMoment):
        psi_eval(3, _mv([0, 1]))
    with pytest.raises(MissingMoment):
        psi_polarized_eval("2t", _mv([0, 1]))
