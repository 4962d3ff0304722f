import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tailtilt import distributions as D
from tailtilt import tilt
from tailtilt.errors import (
    DegenerateError,
    DomainError,
    EstimationError,
    NonExistenceError,
    SeparationError,
)
from tailtilt.sample import Sample


def carrier_with_t(tvals, kappa=1.0):
    """Excesses whose statistic T = e / (kappa + e) takes the given values."""
    tv = np.asarray(tvals, dtype=float)
    return Sample(kappa * tv / (1.0 - tv))


def test_suff_stat_values():
    assert tilt.suff_stat(0.0, 2.0) == 0.0
    assert tilt.suff_stat(2.0, 2.0) == 0.5
    assert tilt.suff_stat(6.0, 2.0) == 0.75
    with pytest.raises(DomainError):
        tilt.suff_stat(-1.0, 2.0)
    with pytest.raises(DomainError):
        tilt.SufficientStatistic(0.0)


def test_log_partition_values():
    e = carrier_with_t([0.2, 0.8])
    assert tilt.log_partition(0.0, e, 1.0) == 0.0
    expected = math.log((math.exp(0.2) + math.exp(0.8)) / 2)
    assert tilt.log_partition(1.0, e, 1.0) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(0.544341, abs=1e-6)


def test_log_partition_extreme_eta():
    e = carrier_with_t([0.2, 0.5, 0.8])
    # log-sum-exp limits: psi(eta) ~ eta * max T - log m, eta * min T - log m
    assert tilt.log_partition(700.0, e, 1.0) == pytest.approx(
        700 * 0.8 + math.log(1 + math.exp(-210) + math.exp(-420)) - math.log(3), rel=1e-12)
    assert tilt.log_partition(-700.0, e, 1.0) == pytest.approx(-700 * 0.2 - math.log(3), rel=1e-12)
    assert math.isfinite(tilt.log_partition(1e6, e, 1.0))


@pytest.mark.parametrize("eta", [-2.0, -1.0, 0.0, 1.0, 2.0])
def test_log_partition_derivative(eta, loggamma_pair):
    _, bg = loggamma_pair
    e = bg.excesses(20.0)
    kappa = 20.0
    h = 1e-5
    fd = (tilt.log_partition(eta + h, e, kappa) - tilt.log_partition(eta - h, e, kappa)) / (2 * h)
    mean, _ = tilt.tilted_moments(eta, tilt.suff_stat(e.values, kappa))
    assert fd == pytest.approx(mean, rel=1e-6)


def test_log_partition_convex(loggamma_pair):
    _, bg = loggamma_pair
    e = bg.excesses(15.0)
    etas = np.linspace(-10, 10, 201)
    psi = np.array([tilt.log_partition(a, e, 15.0) for a in etas])
    assert np.all(psi[2:] - 2 * psi[1:-1] + psi[:-2] >= -1e-9)


def test_direct_fit_null():
    e = carrier_with_t([0.1, 0.3, 0.5, 0.9])
    eta, diag = tilt.fit_tilt_direct(e, e, 1.0)
    assert abs(eta) < 1e-10
    assert diag.moment_residual < 1e-10


def test_direct_fit_two_point_closed_form():
    # (0.2 + 0.8 r) / (1 + r) = 0.6 with r = exp(0.6 eta) gives r = 2
    bg = carrier_with_t([0.2, 0.8])
    x = carrier_with_t([0.6])
    eta, diag = tilt.fit_tilt_direct(x, bg, 1.0)
    assert eta == pytest.approx(math.log(2) / 0.6, abs=1e-9)
    assert eta == pytest.approx(1.15525, abs=1e-5)
    assert diag.method is tilt.FitMethod.DIRECT


def test_direct_fit_non_existence():
    bg = carrier_with_t([0.2, 0.5])
    with pytest.raises(NonExistenceError):
        tilt.fit_tilt_direct(carrier_with_t([0.6, 0.7]), bg, 1.0)
    with pytest.raises(NonExistenceError):
        tilt.fit_tilt_direct(carrier_with_t([0.5]), bg, 1.0)


def test_direct_fit_degenerate_carrier():
    with pytest.raises(DegenerateError):
        tilt.fit_tilt_direct(carrier_with_t([0.3]), carrier_with_t([0.4, 0.4]), 1.0)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10**6), shift=st.floats(-0.3, 0.3))
def test_direct_fit_moment_match(seed, shift):
    bg = D.sample(D.GPD(0.4, 1.0), 500, D.SeedSpec(seed, 0))
    x = D.sample(D.GPD(0.4 + shift, 1.0), 80, D.SeedSpec(seed, 1))
    eta, diag = tilt.fit_tilt_direct(x, bg, 2.5)
    target = np.mean(tilt.suff_stat(x.values, 2.5))
    mean, _ = tilt.tilted_moments(eta, tilt.suff_stat(bg.values, 2.5))
    assert abs(mean - target) < 1e-10
    assert diag.moment_residual < 1e-10


def test_logistic_null():
    e = D.sample(D.GPD(0.4, 1.0), 300, D.SeedSpec(1))
    eta, diag = tilt.fit_tilt_logistic(e, e, 2.0)
    assert abs(eta) < 1e-8
    assert diag.method is tilt.FitMethod.LOGISTIC


def test_logistic_matches_statsmodels_free_newton():
    # independent check: maximize the 2-parameter likelihood with scipy
    from scipy import optimize

    x = D.sample(D.GPD(0.5, 1.3), 200, D.SeedSpec(2))
    bg = D.sample(D.GPD(0.5, 1.0), 2000, D.SeedSpec(3))
    tv = np.concatenate([tilt.suff_stat(x.values, 2.0), tilt.suff_stat(bg.values, 2.0)])
    y = np.concatenate([np.ones(x.n), np.zeros(bg.n)])

    def nll(b):
        lin = b[0] + b[1] * tv
        return -np.sum(y * lin - np.logaddexp(0, lin))

    ref = optimize.minimize(nll, [0.0, 0.0], method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 20000})
    eta, _ = tilt.fit_tilt_logistic(x, bg, 2.0)
    assert eta == pytest.approx(ref.x[1], abs=1e-5)


def test_logistic_separation_and_degeneracy():
    with pytest.raises(SeparationError):
        tilt.fit_tilt_logistic(carrier_with_t([0.7, 0.9]), carrier_with_t([0.1, 0.2]), 1.0)
    with pytest.raises(DegenerateError):
        tilt.fit_tilt_logistic(carrier_with_t([0.5, 0.5]), carrier_with_t([0.5]), 1.0)


def test_logistic_approaches_direct_with_n(loggamma_pair):
    x, bg = loggamma_pair
    t = float(np.quantile(bg.values, 0.9))
    xe, be = x.excesses(t), bg.excesses(t)
    direct, _ = tilt.fit_tilt_direct(xe, be, t)
    logistic, _ = tilt.fit_tilt_logistic(xe, be, t)
    assert abs(direct - logistic) < 0.05


def test_build_tail_model_fixed_eta(loggamma_pair):
    x, bg = loggamma_pair
    m = tilt.build_tail_model(x, bg, 20.0, 20.0, eta=0.0)
    assert m.diagnostics.method is tilt.FitMethod.FIXED
    np.testing.assert_allclose(m.weights, 1.0 / m.bg_excesses.n, rtol=1e-12)
    assert m.log_partition == 0.0


def test_build_tail_model_invariants(loggamma_pair):
    x, bg = loggamma_pair
    t = float(np.quantile(bg.values, 0.9))
    m = tilt.build_tail_model(x, bg, t, t)
    assert np.all(m.weights > 0)
    assert abs(m.weights.sum() - 1.0) < 1e-12
    raw = np.exp(m.eta_hat * m.t_values)
    np.testing.assert_allclose(m.weights, raw / raw.sum(), rtol=1e-10)
    assert m.log_partition == pytest.approx(math.log(raw.mean()), rel=1e-12)
    assert m.n_tail_x == x.count_above(t)
    assert m.p2_hat == x.count_above(t) / x.n
    assert np.all(m.bg_excesses.values > 0)


def test_build_tail_model_threshold_above_max(loggamma_pair):
    x, bg = loggamma_pair
    with pytest.raises(EstimationError, match="above the sample maximum"):
        tilt.build_tail_model(x, bg, float(x.values[-1]), 1.0)


def test_tail_cdf(loggamma_pair):
    x, bg = loggamma_pair
    m = tilt.build_tail_model(x, bg, 20.0, 20.0)
    assert m.cdf(-1e-9) == 0.0
    assert m.cdf(m.bg_excesses.values[-1]) == 1.0
    assert m.cdf(np.inf) == 1.0
    grid = np.concatenate([[-1.0], m.bg_excesses.values, np.linspace(0, 500, 300)])
    grid.sort()
    vals = m.cdf(grid)
    assert np.all(np.diff(vals) >= 0)
    # right-continuous: jumps at each excess are included at the point
    e0 = m.bg_excesses.values[0]
    assert m.cdf(e0) == pytest.approx(m.weights[0])
    assert m.cdf(np.nextafter(e0, -np.inf)) == 0.0


def test_tail_cdf_null_is_empirical(loggamma_pair):
    x, bg = loggamma_pair
    m = tilt.build_tail_model(x, bg, 20.0, 20.0, eta=0.0)
    be = m.bg_excesses.values
    pts = np.linspace(0, 300, 101)
    np.testing.assert_allclose(m.cdf(pts), [np.mean(be <= p) for p in pts], atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(c=st.floats(0.01, 100.0))
def test_scale_equivariance(c, loggamma_pair):
    x, bg = loggamma_pair
    t, kappa = 25.0, 30.0
    a = tilt.build_tail_model(x, bg, t, kappa)
    b = tilt.build_tail_model(x.scaled(c), bg.scaled(c), c * t, c * kappa)
    assert b.eta_hat == pytest.approx(a.eta_hat, abs=1e-10)
    assert b.log_partition == pytest.approx(a.log_partition, abs=1e-10)
    np.testing.assert_allclose(b.t_values, a.t_values, atol=1e-10)
    np.testing.assert_allclose(b.weights, a.weights, atol=1e-10)
    pts = np.linspace(0, 200, 50)
    np.testing.assert_allclose(b.cdf(c * pts * (1 + 1e-12)), a.cdf(pts * (1 + 1e-12)), atol=1e-10)


@pytest.mark.parametrize("gamma,sigma0", [(0.45, 1.0), (0.8, 1.0), (0.25, 2.0)])
def test_linear_tilt_remainder_is_quadratic(gamma, sigma0):
    errs = [tilt.linear_tilt_sup_error(gamma, sigma0, sigma0 + d)[0] for d in (0.2, 0.1, 0.05)]
    assert 3 <= errs[0] / errs[1] <= 5
    assert 3 <= errs[1] / errs[2] <= 5


def test_linear_tilt_exact_when_scales_equal():
    err, eta, psi = tilt.linear_tilt_sup_error(0.45, 1.0, 1.0)
    assert err < 1e-12 and abs(eta) < 1e-9 and abs(psi) < 1e-9
