import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tailtilt import distributions as D
from tailtilt import evt
from tailtilt.errors import ArgumentError, DomainError, FitError
from tailtilt.sample import Sample


def brute_force_gh(values, k_min=20, c_crit=1.25):
    """Direct transcription of the Guillou-Hall criterion, one k at a time."""
    x = np.sort(np.asarray(values, dtype=float))
    x = x[x > 0]
    n = len(x)
    assert n >= k_min
    desc = x[::-1]  # desc[i-1] = X_(n-i+1)

    def hill(k):
        return sum(math.log(desc[i]) for i in range(k)) / k - math.log(desc[k])

    def t_stat(k):
        u = [i * (math.log(desc[i - 1]) - math.log(desc[i])) for i in range(1, k + 1)]
        s = sum((k - 2 * i + 1) * u[i - 1] for i in range(1, k + 1))
        h = hill(k)
        return math.sqrt(3.0 / k ** 3) * s / h if h > 0 else 0.0

    ts = {k: t_stat(k) for k in range(1, n)}
    q = {}
    for k in range(1, n):
        h = k // 2
        if k + h > n - 1:
            break
        q[k] = math.sqrt(sum(ts[j] ** 2 for j in range(k - h, k + h + 1)) / (2 * h + 1))
    ks = sorted(q)
    for k in ks:
        if all(q[j] > c_crit for j in ks if j >= k):
            return k, False
    return max(1, n // 10), True


def test_hill_hand_computed():
    assert evt.hill_estimate([1, 2, 4, 8], 3) == pytest.approx(2 * math.log(2), abs=1e-15)
    assert evt.hill_estimate([1, 2, 4, 8], 3) == pytest.approx(1.3863, abs=1e-4)


def test_hill_zero_spacing():
    assert evt.hill_estimate([0.5, 3, 3, 3, 3], 3) == 0.0


def test_hill_argument_checks():
    with pytest.raises(ArgumentError):
        evt.hill_estimate([1, 2, 3], 3)
    with pytest.raises(ArgumentError):
        evt.hill_estimate([1, 2, 3], 0)
    with pytest.raises(DomainError):
        evt.hill_estimate([-1, 2, 3], 2)


def test_hill_pareto_asymptotics():
    x = D.sample(D.Pareto(0.45), 10**5, D.SeedSpec(77))
    k = 5000
    assert abs(evt.hill_estimate(x, k) - 0.45) < 3 * 0.45 / math.sqrt(k)


def test_hill_path_matches_pointwise():
    x = D.sample(D.Pareto(0.45), 200, D.SeedSpec(3))
    path = evt.hill_path(x, 50)
    for k in (1, 7, 50):
        assert path[k - 1] == pytest.approx(evt.hill_estimate(x, k), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(c=st.floats(1e-3, 1e3), seed=st.integers(0, 10**6))
def test_hill_scale_invariant(c, seed):
    x = D.sample(D.Pareto(0.5), 300, D.SeedSpec(seed))
    assert evt.hill_estimate(x.scaled(c), 40) == pytest.approx(evt.hill_estimate(x, 40), abs=1e-10)


@pytest.mark.parametrize("spec,n,seed", [
    (D.Pareto(0.45), 1000, 2001), (D.Pareto(0.45), 1000, 2002),
    (D.LogGamma(4, 0.45), 1000, 5), (D.LogGamma(3, 0.45), 400, 6),
    (D.GPD(0.3, 1.0, 1.0), 300, 7), (D.LogGamma(4, 0.45), 60, 8),
])
def test_guillou_hall_matches_brute_force(spec, n, seed):
    x = D.sample(spec, n, D.SeedSpec(seed))
    res = evt.guillou_hall_scan(x)
    assert (res.k, res.fallback) == brute_force_gh(x.values)


def test_guillou_hall_minimum_size():
    with pytest.raises(ArgumentError):
        evt.guillou_hall_k(np.arange(1.0, 11.0))


def test_guillou_hall_fallback_warns(monkeypatch):
    x = D.sample(D.Pareto(0.45), 200, D.SeedSpec(1))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        res = evt.guillou_hall_scan(x, c_crit=1e9)
    assert res.fallback and res.k == 20
    with pytest.warns(RuntimeWarning):
        assert evt.guillou_hall_k(x, c_crit=1e9) == 20


def test_guillou_hall_k_grows_with_n():
    def mean_k(n):
        ks = []
        for r in range(200):
            x = D.sample(D.LogGamma(4, 0.45), n, D.SeedSpec(404, r))
            ks.append(evt.guillou_hall_scan(x).k)
        return np.mean(ks)

    assert mean_k(4000) > mean_k(1000)


def test_sigma_fit_exponential_closed_form():
    e = D.sample(D.GPD(0.0, 3.0), 500, D.SeedSpec(8))
    assert evt.gpd_fit_sigma(e, 0.0) == pytest.approx(np.mean(e.values), rel=1e-14)


def test_sigma_fit_simulation():
    e = D.sample(D.GPD(0.45, 2.0), 10**5, D.SeedSpec(9))
    s = evt.gpd_fit_sigma(e, 0.45)
    # Fisher information for sigma at known gamma: 1 / (sigma^2 (1 + 2 gamma))
    se = 2.0 * math.sqrt(1 + 2 * 0.45) / math.sqrt(10**5)
    assert abs(s - 2.0) < 3 * se


def test_sigma_fit_single_excess_grid_oracle():
    e = 2.7
    s = evt.gpd_fit_sigma([e], 1.0)
    grid = np.linspace(0.01, 20, 200001)
    ll = np.array([evt.gpd_loglik([e], 1.0, g) for g in grid])
    assert s == pytest.approx(grid[np.argmax(ll)], abs=2e-4)
    score, _ = evt._sigma_score(np.array([e]), 1.0, math.log(s))
    assert abs(score) < 1e-8


@pytest.mark.parametrize("gamma", [-0.3, 0.05, 0.45, 1.3])
def test_sigma_fit_first_order_condition(gamma):
    e = D.sample(D.GPD(0.3, 1.5), 2000, D.SeedSpec(10))
    if gamma < 0:
        e = Sample(e.values[e.values < 4.0])
    s = evt.gpd_fit_sigma(e, gamma)
    score, _ = evt._sigma_score(e.values, gamma, math.log(s))
    assert abs(score) < 1e-8
    ll = evt.gpd_loglik(e, gamma, s)
    assert ll >= evt.gpd_loglik(e, gamma, s * (1 + 1e-3))
    assert ll >= evt.gpd_loglik(e, gamma, s * (1 - 1e-3))


def test_sigma_fit_rejects_all_zero():
    with pytest.raises(FitError):
        evt.gpd_fit_sigma([0.0, 0.0], 0.5)


def test_gpd_ml_simulation():
    e = D.sample(D.GPD(0.45, 1.0), 10**5, D.SeedSpec(11))
    fit = evt.gpd_fit_ml(e)
    m = 10**5
    assert abs(fit.gamma_hat - 0.45) < 3 * (1 + 0.45) / math.sqrt(m)
    assert abs(fit.sigma_hat - 1.0) < 3 * math.sqrt(2 * (1 + 0.45)) / math.sqrt(m)


def test_gpd_ml_beats_reference_grid():
    e = D.sample(D.GPD(0.3, 2.0), 200, D.SeedSpec(12))
    fit = evt.gpd_fit_ml(e)
    gammas = np.linspace(-0.5, 2.0, 50)
    sigmas = np.linspace(0.2, 8.0, 50)
    best = max(evt.gpd_loglik(e, g, s) for g in gammas for s in sigmas)
    assert fit.loglik >= best - 1e-6
    assert fit.loglik == pytest.approx(evt.gpd_loglik(e, fit.gamma_hat, fit.sigma_hat))


def test_gpd_ml_degenerate():
    with pytest.raises(FitError):
        evt.gpd_fit_ml([1.5] * 10)
    with pytest.raises(FitError):
        evt.gpd_fit_ml([1.0, 2.0, 3.0])


def test_threshold_rules():
    bg = Sample([1, 2, 3, 4])
    assert evt.resolve_threshold(evt.Fixed(5.0), [1.0], bg) == 5.0
    assert evt.resolve_threshold(evt.BackgroundQuantile(0.75), [1.0], bg) == pytest.approx(3.25)
    with pytest.raises(ArgumentError):
        evt.BackgroundQuantile(1.0)
    with pytest.raises(ArgumentError):
        evt.Oracle((3.0, 1.0))


@pytest.mark.filterwarnings("ignore:Guillou-Hall criterion never triggered")
def test_guillou_hall_threshold_is_kth_largest():
    x = D.sample(D.Pareto(0.45), 1000, D.SeedSpec(13))
    k = evt.guillou_hall_scan(x).k
    t = evt.resolve_threshold(evt.GuillouHall(), x, x)
    assert t == x.values[-k]
    assert x.count_above(t) == k - 1


@settings(max_examples=40, deadline=None)
@given(q1=st.floats(0.01, 0.99), q2=st.floats(0.01, 0.99))
def test_quantile_threshold_monotone(q1, q2):
    bg = D.sample(D.LogGamma(3, 0.45), 500, D.SeedSpec(14))
    lo, hi = sorted((q1, q2))
    assert (evt.resolve_threshold(evt.BackgroundQuantile(lo), bg, bg)
            <= evt.resolve_threshold(evt.BackgroundQuantile(hi), bg, bg))


def test_kappa_rules():
    bg = D.sample(D.LogGamma(3, 0.45), 1000, D.SeedSpec(15))
    assert evt.resolve_kappa(evt.EqualsThreshold(), bg, 7.3) == 7.3
    assert evt.resolve_kappa(evt.FixedKappa(2.0), bg, 7.3) == 2.0


def test_kappa_sigma_over_gamma_tends_to_t():
    # t + GPD(0.5, 0.5 t) is exact Pareto above t, so sigma_t / (t gamma) = 1
    t = 4.0
    bg = D.sample(D.GPD(0.5, 0.5 * t, t), 10**5, D.SeedSpec(16))
    kappa = evt.resolve_kappa(evt.SigmaOverGamma(), bg, t)
    assert kappa == pytest.approx(t, rel=0.05)


def test_kappa_needs_positive_gamma():
    bg = D.sample(D.GPD(0.3, 1.0), 1000, D.SeedSpec(17))
    with pytest.raises(FitError):
        evt.resolve_kappa(evt.SigmaOverGamma(), bg, 0.5, gamma_hat=-0.1)
