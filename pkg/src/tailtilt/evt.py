"""Extreme-value tooling: Hill estimator, GPD likelihood fits, the
Guillou-Hall choice of k, and the threshold / bandwidth policies."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import optimize

from ._roots import expand_bracket, newton_bisect
from .distributions import GAMMA_EPS
from .errors import ArgumentError, DomainError, FitError, SolverError
from .sample import Sample, SampleLike, as_sample

K_MIN = 20
GH_CRITICAL = 1.25
GPD_ML_MIN_EXCESSES = 5
GPD_GAMMA_BRACKET = (-0.5, 2.0)
SIGMA_SCORE_TOL = 1e-12


@dataclass(frozen=True)
class EvtFit:
    gamma_hat: float
    sigma_hat: float
    k_used: int
    threshold: float
    loglik: float = math.nan


@dataclass(frozen=True)
class GuillouHallResult:
    k: int
    fallback: bool
    q: np.ndarray  # Q_n(k) for k = 1..len(q); NaN where the window does not fit


# threshold rules


@dataclass(frozen=True)
class Fixed:
    t: float


@dataclass(frozen=True)
class BackgroundQuantile:
    q: float

    def __post_init__(self):
        if not 0 < self.q < 1:
            raise ArgumentError(f"quantile level must lie strictly inside (0, 1), got {self.q}")


@dataclass(frozen=True)
class GuillouHall:
    pass


@dataclass(frozen=True)
class Oracle:
    grid: tuple[float, ...]

    def __post_init__(self):
        grid = tuple(float(g) for g in self.grid)
        if not grid:
            raise ArgumentError("oracle grid must be nonempty")
        if any(b < a for a, b in zip(grid, grid[1:])):
            raise ArgumentError("oracle grid must be sorted")
        object.__setattr__(self, "grid", grid)


ThresholdRule = Union[Fixed, BackgroundQuantile, GuillouHall, Oracle]


# bandwidth rules


@dataclass(frozen=True)
class SigmaOverGamma:
    pass


@dataclass(frozen=True)
class EqualsThreshold:
    pass


@dataclass(frozen=True)
class FixedKappa:
    kappa: float

    def __post_init__(self):
        if not self.kappa > 0:
            raise ArgumentError(f"fixed kappa must be positive, got {self.kappa}")


KappaRule = Union[SigmaOverGamma, EqualsThreshold, FixedKappa]


def _top_logs(x: Sample, count: int) -> np.ndarray:
    """log of the ``count`` largest values, largest first."""
    top = x.values[-count:][::-1]
    if top[-1] <= 0:
        raise DomainError("Hill estimation needs strictly positive upper order statistics")
    return np.log(top)


def hill_estimate(x: SampleLike, k: int) -> float:
    """Mean log-spacing of the ``k`` largest values over the (k+1)-th largest."""
    x = as_sample(x)
    n = x.n
    if int(k) != k or not 1 <= k <= n - 1:
        raise ArgumentError(f"k must lie in [1, n-1] = [1, {n - 1}], got {k}")
    k = int(k)
    logs = _top_logs(x, k + 1)
    return float(np.mean(logs[:k]) - logs[k])


def hill_path(x: SampleLike, k_max: int | None = None) -> np.ndarray:
    """Hill estimates for ``k = 1..k_max`` (default ``n - 1``)."""
    x = as_sample(x)
    k_max = x.n - 1 if k_max is None else k_max
    logs = _top_logs(x, k_max + 1)
    k = np.arange(1, k_max + 1)
    return np.cumsum(logs[:k_max]) / k - logs[1:k_max + 1]


def _gh_scores(x: Sample) -> np.ndarray:
    """Guillou-Hall normalized scores T_n(k), k = 1..n-1."""
    n = x.n
    logs = _top_logs(x, n)
    i = np.arange(1, n, dtype=np.float64)
    u = i * (logs[:-1] - logs[1:])
    s0 = np.cumsum(u)
    s1 = np.cumsum(i * u)
    k = i
    # sum_{i<=k} (k - 2i + 1) U_i, and Hill(k) = s0 / k
    num = (k + 1.0) * s0 - 2.0 * s1
    hill = s0 / k
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.sqrt(3.0 / k ** 3) * num / hill
    return np.where(hill > 0, t, 0.0)


def guillou_hall_scan(x: SampleLike, k_min: int = K_MIN,
                      c_crit: float = GH_CRITICAL) -> GuillouHallResult:
    """Guillou-Hall number of upper order statistics.

    ``Q_n(k)`` is the root-mean-square of ``T_n(j)`` over the window
    ``k - floor(k/2) <= j <= k + floor(k/2)``; it is defined while the window
    stays inside ``1..n-1``. The chosen ``k`` is the smallest one from which
    ``Q_n`` stays above ``c_crit`` up to the last defined index.
    """
    x = as_sample(x)
    if x.n < k_min:
        raise ArgumentError(f"Guillou-Hall needs at least {k_min} observations, got {x.n}")
    if x.values[0] <= 0:
        # log-spacings only exist on the positive part
        x = Sample._trusted(x.above(0.0))
        if x.n < k_min:
            raise ArgumentError(f"Guillou-Hall needs at least {k_min} positive observations")
    n = x.n
    t2 = _gh_scores(x) ** 2
    c = np.concatenate(([0.0], np.cumsum(t2)))
    k = np.arange(1, n)
    h = k // 2
    hi = k + h
    valid = hi <= n - 1
    kv, hv = k[valid], h[valid]
    q = np.full(n - 1, np.nan)
    q[valid] = np.sqrt((c[kv + hv] - c[kv - hv - 1]) / (2 * hv + 1))
    qv = q[valid]
    above = qv > c_crit
    if not above[-1]:
        return GuillouHallResult(max(1, n // 10), True, q)
    below = np.flatnonzero(~above)
    k_hat = int(kv[below[-1] + 1]) if below.size else int(kv[0])
    return GuillouHallResult(k_hat, False, q)


def guillou_hall_k(x: SampleLike, k_min: int = K_MIN, c_crit: float = GH_CRITICAL) -> int:
    """Selected ``k``; warns (``RuntimeWarning``) when falling back to n/10."""
    res = guillou_hall_scan(x, k_min, c_crit)
    if res.fallback:
        warnings.warn("Guillou-Hall criterion never triggered; using k = n/10",
                      RuntimeWarning, stacklevel=2)
    return res.k


def _sigma_score(e: np.ndarray, gamma: float, log_sigma: float) -> tuple[float, float]:
    """Mean score of the GPD likelihood in log(sigma), and its derivative."""
    z = e * math.exp(-log_sigma)
    if abs(gamma) < GAMMA_EPS:
        return float(np.mean(z)) - 1.0, -float(np.mean(z))
    d = 1.0 + gamma * z
    r = z / d
    score = (1.0 + gamma) * float(np.mean(r)) - 1.0
    deriv = -(1.0 + gamma) * float(np.mean(r / d))
    return score, deriv


def gpd_fit_sigma(excesses: SampleLike, gamma: float, tol: float = SIGMA_SCORE_TOL) -> float:
    """Maximum-likelihood GPD scale with the tail index held at ``gamma``.

    The mean score in ``log sigma`` is strictly decreasing, so the root is
    found by Newton steps safeguarded by bisection on a bracket in
    ``log sigma``.
    """
    e = np.asarray(as_sample(excesses).values)
    if e.size == 0:
        raise ArgumentError("need at least one excess")
    if e[0] < 0:
        raise DomainError("excesses must be nonnegative")
    if gamma <= -1:
        raise DomainError("gamma must exceed -1 for a regular scale MLE")
    e_max = float(e[-1])
    if e_max <= 0:
        raise FitError("all excesses are zero; scale is not identifiable")
    if abs(gamma) < GAMMA_EPS:
        return float(np.mean(e))
    if gamma > 0 and (1.0 + gamma) / gamma * np.count_nonzero(e) <= e.size:
        raise FitError("too many zero excesses for a finite scale estimate")
    # increasing function of log(sigma): negative mean score
    fd = lambda s: tuple(-v for v in _sigma_score(e, gamma, s))  # noqa: E731
    f = lambda s: fd(s)[0]  # noqa: E731
    if gamma < 0:
        lo_limit = math.log(-gamma * e_max)
        lo = lo_limit + 1e-12 * max(1.0, abs(lo_limit))
        while f(lo) > 0:
            lo = lo_limit + 0.5 * (lo - lo_limit)
            if lo - lo_limit < 1e-300:
                raise SolverError("cannot bracket GPD scale near the support edge")
        hi = max(lo + 1.0, math.log(float(np.mean(e))) + 1.0)
        lo, hi = expand_bracket(f, lo, hi, lo_limit=lo)
    else:
        mid = math.log(float(np.mean(e)))
        lo, hi = expand_bracket(f, mid - 1.0, mid + 1.0)
    s, _, _ = newton_bisect(fd, lo, hi, tol)
    return math.exp(s)


def gpd_loglik(excesses: SampleLike, gamma: float, sigma: float) -> float:
    e = np.asarray(as_sample(excesses).values)
    if sigma <= 0:
        return -math.inf
    z = e / sigma
    if abs(gamma) < GAMMA_EPS:
        return -e.size * math.log(sigma) - float(np.sum(z))
    arg = 1.0 + gamma * z
    if np.any(arg <= 0):
        return -math.inf
    return -e.size * math.log(sigma) - (1.0 + 1.0 / gamma) * float(np.sum(np.log1p(gamma * z)))


def _profile(e: Sample, gamma: float) -> tuple[float, float]:
    try:
        sigma = gpd_fit_sigma(e, gamma)
    except (FitError, SolverError):
        return -math.inf, math.nan
    return gpd_loglik(e, gamma, sigma), sigma


def gpd_fit_ml(excesses: SampleLike, threshold: float = 0.0,
               bracket: tuple[float, float] = GPD_GAMMA_BRACKET,
               n_coarse: int = 61) -> EvtFit:
    """Joint GPD maximum likelihood by profiling out the scale.

    A coarse grid over ``bracket`` locates the best region of the profile
    log-likelihood, which is then refined by bounded Brent search.
    """
    e = as_sample(excesses)
    if e.n < GPD_ML_MIN_EXCESSES:
        raise FitError(f"need at least {GPD_ML_MIN_EXCESSES} excesses, got {e.n}")
    if e.values[0] < 0:
        raise DomainError("excesses must be nonnegative")
    if e.values[-1] == e.values[0]:
        raise FitError("degenerate excesses: all values equal")
    lo, hi = bracket
    grid = np.linspace(lo, hi, n_coarse)
    prof = np.array([_profile(e, g)[0] for g in grid])
    if not np.any(np.isfinite(prof)):
        raise FitError("profile likelihood is -inf on the whole gamma bracket")
    j = int(np.nanargmax(prof))
    a, b = grid[max(j - 1, 0)], grid[min(j + 1, n_coarse - 1)]
    res = optimize.minimize_scalar(lambda g: -_profile(e, g)[0], bounds=(a, b),
                                   method="bounded", options={"xatol": 1e-10})
    g_best, ll_best = grid[j], prof[j]
    if np.isfinite(res.fun) and -res.fun >= ll_best:
        g_best, ll_best = float(res.x), -float(res.fun)
    ll, sigma = _profile(e, g_best)
    return EvtFit(float(g_best), float(sigma), e.n, float(threshold), float(ll))


def empirical_quantile(x: SampleLike, q: float) -> float:
    """Linear interpolation between order statistics at position (n-1) q."""
    v = as_sample(x).values
    return float(np.quantile(v, q, method="linear"))


def resolve_threshold(rule: ThresholdRule, x: SampleLike, bg: SampleLike) -> float:
    if isinstance(rule, Fixed):
        return float(rule.t)
    if isinstance(rule, BackgroundQuantile):
        return empirical_quantile(bg, rule.q)
    if isinstance(rule, GuillouHall):
        x = as_sample(x)
        k = guillou_hall_k(x)
        return float(x.values[x.n - k])
    if isinstance(rule, Oracle):
        raise ArgumentError("oracle thresholds are resolved by the simulation harness")
    raise ArgumentError(f"unknown threshold rule {rule!r}")


def background_tail_index(bg: SampleLike) -> tuple[float, int]:
    """Hill estimate on the background with Guillou-Hall k (top 1% fallback)."""
    bg = as_sample(bg)
    res = guillou_hall_scan(bg)
    k = res.k if not res.fallback else max(1, bg.n // 100)
    return hill_estimate(bg, k), k


def resolve_kappa(rule: KappaRule, bg: SampleLike, t: float,
                  gamma_hat: float | None = None) -> float:
    """Bandwidth of the sufficient statistic.

    ``gamma_hat`` may be passed to reuse a background Hill estimate across
    thresholds; it is computed from ``bg`` otherwise.
    """
    if isinstance(rule, EqualsThreshold):
        if not t > 0:
            raise FitError(f"kappa = t requires a positive threshold, got {t}")
        return float(t)
    if isinstance(rule, FixedKappa):
        return float(rule.kappa)
    if isinstance(rule, SigmaOverGamma):
        bg = as_sample(bg)
        exc = bg.excesses(t)
        if exc.n < K_MIN:
            raise FitError(f"need at least {K_MIN} background exceedances of t={t:g}, got {exc.n}")
        if gamma_hat is None:
            gamma_hat, _ = background_tail_index(bg)
        if not gamma_hat > 0:
            raise FitError(f"background tail index estimate {gamma_hat:.4g} is not positive")
        sigma = gpd_fit_sigma(exc, gamma_hat)
        return sigma / gamma_hat
    raise ArgumentError(f"unknown kappa rule {rule!r}")
