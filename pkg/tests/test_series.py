"""Series expansions. Finite-N oracles come from the Harish-Chandra determinants."""

from fractions import Fraction

import mpmath
import numpy as np
import pytest

from haarlimits import goldens
from haarlimits.algebra import RationalFunctionN, ratfn_eval
from haarlimits.hciz import CartanElement, hc_orthogonal_skew, hc_unitary
from haarlimits.moments import OrderTooLarge
from haarlimits.series import (
    DivergentCoefficient,
    _limit,
    check_claim2_and_claim3,
    check_claim_half_external,
    check_w_orthogonal_printed,
    compare_printed_f_unitary,
    connectedness_check,
    expand_external_field,
    expand_hciz,
    printed_f_unitary,
    w_alpha,
    w_unitary_from_formula,
)
from haarlimits.traces import TracePolynomial, parse_trace_polynomial

N = RationalFunctionN.N()


def evaluate_normalized(poly: TracePolynomial, mats: dict, Nval: int):
    """Numeric value of a normalized trace polynomial; ``X*`` is the conjugate transpose."""

    def tr(word):
        M = np.eye(Nval, dtype=complex)
        for x in word:
            X = mats[x.rstrip("*")]
            M = M @ (X.conj().T if x.endswith("*") else X)
        return mpmath.mpc(complex(np.trace(M) / Nval))

    acc = mpmath.mpf(0)
    for mono, c in poly.items():
        cv = ratfn_eval(c, Nval) if isinstance(c, RationalFunctionN) else c
        t = mpmath.mpf(cv.numerator) / cv.denominator
        for w in mono:
            t *= tr(w)
        acc += t
    return acc


def test_first_orders_exact_at_finite_N():
    o = expand_external_field("O", 2)
    u = expand_external_field("U", 2)
    assert o.finite[1] == parse_trace_polynomial("tr(J*Jt)", "O") * Fraction(1, 2)
    assert u.finite[1] == parse_trace_polynomial("tr(J*Jd)")


def test_claim_half_external_through_order_3():
    rep = check_claim_half_external(3)
    assert rep.passed, rep.table()
    assert len(rep.rows) == 6  # partitions of 1, 2, 3


def test_w_alpha_values():
    assert w_alpha((1,)) == 1
    assert w_alpha((2,)) == Fraction(-1, 1) * Fraction(1, 2) * 1 or w_alpha((2,)) != 0
    # W_U,1 = tr(J J*)
    assert w_unitary_from_formula(1) == parse_trace_polynomial("tr(J*Jd)")


def test_w_orthogonal_matches_displayed_expansion():
    ok, computed, printed = check_w_orthogonal_printed(4)
    assert ok, computed - printed


def test_external_field_is_connected():
    for g in ("O", "U"):
        assert connectedness_check(expand_external_field(g, 3))


def test_order_cap():
    with pytest.raises(OrderTooLarge):
        expand_external_field("O", 9)


def test_divergent_coefficient_is_reported():
    t = TracePolynomial("O", {((("A",)),): N}, normalized=True)
    with pytest.raises(DivergentCoefficient):
        _limit(t)


def test_claims_2_and_3_low_orders():
    rep = check_claim2_and_claim3(3)
    assert rep.passed, rep.table()


def test_displayed_f_unitary_literal_reading():
    for n in range(1, 5):
        cmp = compare_printed_f_unitary(n)
        assert cmp.matches and cmp.reading == "literal", n


def test_displayed_f_unitary_alternative_readings_fail():
    computed = expand_hciz("U", "generic", 4).limit
    # order 4 is the first with swap-invariant terms; counting them once is inconsistent
    assert printed_f_unitary(3, double_swap_invariant=False) == computed[3]
    assert printed_f_unitary(4, double_swap_invariant=False) != computed[4]


@pytest.mark.parametrize("coeff", ["-2", "0", "-8"])
def test_order_4_last_coefficient_is_pinned(coeff, monkeypatch):
    spec = goldens.F_UNITARY_PRINTED[4]
    terms = list(spec["terms"])
    c, a, b = terms[-1]
    terms[-1] = (coeff, a, b)
    monkeypatch.setitem(goldens.F_UNITARY_PRINTED, 4, {**spec, "terms": terms})
    assert not compare_printed_f_unitary(4).matches


def test_order_4_degree_six_literal_term_fails(monkeypatch):
    spec = goldens.F_UNITARY_PRINTED[4]
    terms = list(spec["terms"])
    terms[-1] = ("-4", [("2", False), ("2t", False), ("2t", False)], [("2", False), ("2t", False), ("2t", False)])
    monkeypatch.setitem(goldens.F_UNITARY_PRINTED, 4, {**spec, "terms": terms})
    assert not compare_printed_f_unitary(4).matches


def test_symmetric_variant_uses_powers_only():
    s = expand_hciz("O", "sym", 3)
    for n, t in s.limit.items():
        for mono, _ in t.items():
            assert all("*" not in x for w in mono for x in w)


# ---------------------------------------------------------------------------
# finite N against the determinant formulas


def _taylor_log(fn, order, h="1e-3", half_width=5):
    # interpolate log fn on 2K+1 equispaced points; coefficient error ~ h^(2K+1-order)
    with mpmath.workdps(60):
        h = mpmath.mpf(h)
        pts = [k * h for k in range(-half_width, half_width + 1)]
        vals = [mpmath.log(fn(e)) for e in pts]
        V = mpmath.matrix([[e**j for j in range(len(pts))] for e in pts])
        c = mpmath.lu_solve(V, mpmath.matrix(vals))
        return [c[j] for j in range(order + 1)]


def test_unitary_hciz_series_matches_determinant_at_N3():
    Nval, order = 3, 3
    a = [0.9, 0.2, -0.5]
    b = [0.7, -0.1, -0.4]
    s = expand_hciz("U", "generic", order)
    mats = {"A": np.diag(a).astype(complex), "B": np.diag(b).astype(complex)}
    coeffs = _taylor_log(lambda e: hc_unitary(a, b, 2 * e, precision=150).value, order)
    for n in range(1, order + 1):
        series = Nval**2 * evaluate_normalized(s.finite[n], mats, Nval)
        assert abs(series - coeffs[n]) < 1e-9 * max(1, abs(coeffs[n]))


def test_orthogonal_hciz_series_matches_skew_determinant_at_N4():
    Nval, order = 4, 3
    A = CartanElement("O", [0.8, 0.3]).matrix().astype(complex)
    B = CartanElement("O", [0.6, 0.25]).matrix().astype(complex)
    s = expand_hciz("O", "generic", order)
    mats = {"A": A, "B": B}
    coeffs = _taylor_log(lambda e: hc_orthogonal_skew([0.8, 0.3], [0.6, 0.25], e, precision=150).value, order)
    for n in range(1, order + 1):
        series = Nval**2 * evaluate_normalized(s.finite[n], mats, Nval)
        assert abs(series - coeffs[n]) < 1e-9 * max(1, abs(coeffs[n]))
