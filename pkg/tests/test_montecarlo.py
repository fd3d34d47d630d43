"""Haar sampler and Monte Carlo estimators.

Exact targets here come from elementary facts about Haar measure (entries of
a column are uniform on a sphere), not from the Weingarten module, except in
the battery test which is a cross-check between the two.
"""

import math

import numpy as np
import pytest
from scipy import stats

from haarlimits.moments import MomentQuery, moment
from haarlimits.montecarlo import (
    DEFAULT_CHUNK,
    HaarSampler,
    NonFinite,
    RngExhausted,
    bergere_eynard_all,
    det_sign_balance,
    estimate,
    estimate_bergere_eynard,
    estimate_many,
    estimate_partition_function,
    invariance_check,
    moment_integrand,
    orthogonal_battery,
    sample_orthogonal,
    sample_unitary,
    unitary_battery,
)


def test_same_seed_same_draws_bit_for_bit():
    a = HaarSampler("O", 4, seed=7).batch(50, chunk=3)
    b = HaarSampler("O", 4, seed=7).batch(50, chunk=3)
    assert np.array_equal(a, b)
    c = HaarSampler("O", 4, seed=7, stream=1).batch(50, chunk=3)
    assert not np.array_equal(a, c)


def test_estimates_do_not_depend_on_thread_count():
    s = HaarSampler("U", 3, seed=11)
    f = lambda G: np.abs(G[:, 0, 0]) ** 4
    n = 3 * DEFAULT_CHUNK + 17
    r1 = estimate(f, s, n, threads=1)
    r4 = estimate(f, s, n, threads=4)
    assert r1.mean == r4.mean and r1.stderr == r4.stderr


@pytest.mark.parametrize("group", ["O", "U"])
@pytest.mark.parametrize("N", [1, 2, 5])
def test_samples_are_orthogonal_or_unitary(group, N):
    G = HaarSampler(group, N, seed=1).batch(200)
    eye = np.eye(N)
    err = np.abs(np.conj(np.swapaxes(G, 1, 2)) @ G - eye).max()
    assert err < 1e-12
    if group == "O":
        assert not np.iscomplexobj(G)


def test_single_sample_helpers_check_group():
    assert sample_orthogonal(HaarSampler("O", 3)).shape == (3, 3)
    assert sample_unitary(HaarSampler("U", 3)).dtype == complex
    with pytest.raises(ValueError):
        sample_orthogonal(HaarSampler("U", 3))


def test_o1_is_a_fair_sign():
    G = HaarSampler("O", 1, seed=2).batch(20000)[:, 0, 0]
    assert set(np.unique(G)) == {-1.0, 1.0}
    assert abs((G > 0).mean() - 0.5) < 5 * math.sqrt(0.25 / 20000)


def test_u1_phase_is_uniform():
    G = HaarSampler("U", 1, seed=3).batch(20000)[:, 0, 0]
    ang = (np.angle(G) + np.pi) / (2 * np.pi)
    assert stats.kstest(ang, "uniform").pvalue > 1e-3


def test_raw_qr_is_detectably_biased():
    # numpy's QR makes diag(R) negative for Gaussian input, so raw Q11 is far from mean zero
    s = HaarSampler("O", 3, seed=4)
    raw = s.raw_qr_batch(20000)[:, 0, 0]
    fixed = s.batch(20000)[:, 0, 0]
    se = 1 / math.sqrt(3 * 20000)
    assert abs(raw.mean()) > 20 * se
    assert abs(fixed.mean()) < 5 * se


@pytest.mark.parametrize(
    "group,N,f,exact",
    [
        # a column of O(N) is uniform on S^{N-1}: E x1^2 = 1/N, E x1^2 x2^2 = 1/(N(N+2))
        ("O", 4, lambda G: G[:, 0, 0] ** 2, 1 / 4),
        ("O", 5, lambda G: G[:, 0, 0] ** 2 * G[:, 1, 0] ** 2, 1 / 35),
        # a column of U(N) is uniform on the complex sphere: E |u1|^4 = 2/(N(N+1))
        ("U", 3, lambda G: np.abs(G[:, 0, 0]) ** 4, 1 / 6),
        ("U", 2, lambda G: np.abs(G[:, 0, 0]) ** 2, 1 / 2),
    ],
)
def test_sphere_moments(group, N, f, exact):
    r = estimate(f, HaarSampler(group, N, seed=5), 100_000)
    assert r.agrees(exact)


def test_o5_two_by_two_diagonal_product():
    # E O11^2 O22^2 at N = 5 is 3/70, from the Weingarten table but simple enough to state
    r = estimate(lambda G: G[:, 0, 0] ** 2 * G[:, 1, 1] ** 2, HaarSampler("O", 5, seed=6), 200_000)
    assert r.agrees(3 / 70)
    assert moment(MomentQuery("O", (1, 1, 2, 2), (1, 1, 2, 2)), 5) == pytest.approx(3 / 70, abs=0)


@pytest.mark.parametrize("group,N", [("O", 3), ("U", 3)])
def test_battery_matches_exact_moments(group, N):
    if group == "O":
        qs = [MomentQuery("O", i, j) for i, j in orthogonal_battery(2)]
    else:
        qs = [MomentQuery("U", i, j, k, l) for i, j, k, l in unitary_battery(2)]
    s = HaarSampler(group, N, seed=8)
    fns = [moment_integrand(q) for q in qs]
    res = estimate_many(lambda G: np.stack([f(G) for f in fns], axis=1), s, 100_000)
    for q, r in zip(qs, res):
        exact = float(moment(q, N))
        assert exact != 0
        assert r.agrees(exact), (q, r.mean, exact)


def test_battery_sizes():
    assert len(orthogonal_battery(3)) == 21
    assert len(unitary_battery(3)) == 22


def test_partition_function_at_kappa_zero_is_exactly_one():
    A = np.diag([1.0, -0.5, 0.2])
    r = estimate_partition_function("O", A, A, 0.0, 1000)
    assert r.mean == 1.0 and r.stderr == 0.0
    assert r.agrees(1.0)


def test_partition_function_overflow_is_reported():
    A = np.diag([1.0, -1.0])
    with pytest.raises(NonFinite, match="kappa"):
        estimate_partition_function("U", A, A, 1e4, 1000)


def test_estimate_needs_enough_samples():
    with pytest.raises(ValueError):
        estimate(lambda G: G[:, 0, 0], HaarSampler("O", 2), 50)


def test_rng_budget():
    with pytest.raises(RngExhausted):
        HaarSampler("O", 2).generator(2**32)


def test_bergere_eynard_at_kappa_zero_is_doubly_stochastic():
    A = np.diag([1.0, 0.3, -0.8])
    be = bergere_eynard_all("U", A, A, 0.0, 20000, seed=9)
    for row in be.M:
        for r in row:
            assert r.agrees(1 / 3)
    assert be.sum_rule_ok()
    single = estimate_bergere_eynard(1, 2, A, A, 0.0, "U", 20000, s=HaarSampler("U", 3, seed=9))
    assert single.mean == pytest.approx(be.M[0][1].mean, rel=1e-12)


def test_bergere_eynard_sum_rule_at_positive_kappa():
    A = np.diag([1.0, 0.3, -0.8])
    B = np.diag([0.5, -0.2, 0.4])
    be = bergere_eynard_all("O", A, B, 0.2, 20000, seed=10)
    assert be.sum_rule_ok()


def test_det_sign_balance_and_invariance():
    s = HaarSampler("O", 3, seed=12)
    ok, r = det_sign_balance(s, 20000)
    assert ok
    G0 = HaarSampler("O", 3, seed=99).batch(1)[0]
    rows = invariance_check(s, 20000, G0, [lambda G: G[:, 0, 0] ** 2, lambda G: G[:, 0, 1] * G[:, 1, 0]])
    assert all(ok for ok, _ in rows)


class _RawQR(HaarSampler):
    def batch(self, size, chunk=0):
        return self.raw_qr_batch(size, chunk)


def test_invariance_check_flags_uncorrected_qr():
    G0 = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    f = [lambda G: G[:, 0, 0]]
    assert invariance_check(HaarSampler("O", 3, seed=13), 20000, G0, f)[0][0]
    assert not invariance_check(_RawQR("O", 3, seed=13), 20000, G0, f)[0][0]
