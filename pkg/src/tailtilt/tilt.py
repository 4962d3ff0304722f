"""Exponential tilt of an empirical background tail.

The tail law of the sample of interest above a threshold ``t`` is modelled
as ``dG = exp(eta * T - psi(eta)) dG0`` where ``G0`` is the empirical law of
the background excesses and ``T(x) = x / (kappa + x)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from ._roots import expand_bracket, newton_bisect
from .distributions import gpd_log_density_ratio
from .errors import (
    ArgumentError,
    DegenerateError,
    DomainError,
    EstimationError,
    NonExistenceError,
    SeparationError,
    SolverError,
)
from .evt import K_MIN
from .sample import Sample, SampleLike, as_sample

MOMENT_TOL = 1e-10
LOGISTIC_TOL = 1e-10


class FitMethod(str, enum.Enum):
    DIRECT = "direct"
    LOGISTIC = "logistic"
    FIXED = "fixed"  # eta supplied by the caller


@dataclass(frozen=True)
class SufficientStatistic:
    kappa: float

    def __post_init__(self):
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise DomainError(f"kappa must be positive and finite, got {self.kappa}")

    def __call__(self, x):
        return suff_stat(x, self.kappa)


@dataclass(frozen=True)
class FitDiagnostics:
    moment_residual: float
    iterations: int
    method: FitMethod


@dataclass(frozen=True, eq=False)
class TiltedTailModel:
    """Fitted tail: background excesses above ``threshold`` with tilt weights."""

    threshold: float
    stat: SufficientStatistic
    eta_hat: float
    log_partition: float
    bg_excesses: Sample
    weights: np.ndarray
    n_tail_x: int
    p2_hat: float
    diagnostics: FitDiagnostics

    @property
    def kappa(self) -> float:
        return self.stat.kappa

    @property
    def tail_values(self) -> np.ndarray:
        """Background tail points ``t + excess`` (absolute scale)."""
        return self.threshold + self.bg_excesses.values

    @property
    def t_values(self) -> np.ndarray:
        return suff_stat(self.bg_excesses.values, self.kappa)

    def cdf(self, x):
        return tail_cdf(self, x)


def suff_stat(x, kappa: float):
    """``T(x) = x / (kappa + x)`` for excesses ``x >= 0``."""
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    xa = np.asarray(x, dtype=np.float64)
    if np.any(xa < 0):
        raise DomainError("sufficient statistic is defined for nonnegative excesses")
    out = xa / (kappa + xa)
    return float(out) if out.ndim == 0 else out


def _log_mean_exp(a: np.ndarray) -> float:
    m = float(np.max(a))
    return m + math.log(float(np.mean(np.exp(a - m))))


def _tilt_weights(eta: float, tvals: np.ndarray) -> tuple[np.ndarray, float]:
    """Normalized tilt weights and ``psi(eta)``."""
    a = eta * tvals
    m = float(np.max(a))
    w = np.exp(a - m)
    s = float(np.sum(w))
    psi = m + math.log(s / tvals.size)
    return w / s, psi


def log_partition(eta: float, excesses: SampleLike, kappa: float) -> float:
    """``log mean exp(eta * T(e_i))`` over the carrier excesses."""
    e = np.asarray(as_sample(excesses).values)
    if e.size == 0:
        raise ArgumentError("carrier must be nonempty")
    return _log_mean_exp(eta * suff_stat(e, kappa))


def tilted_moments(eta: float, tvals: np.ndarray) -> tuple[float, float]:
    """Mean and variance of T under the ``eta``-tilt of the empirical carrier."""
    w, _ = _tilt_weights(eta, tvals)
    mean = float(np.dot(w, tvals))
    var = float(np.dot(w, (tvals - mean) ** 2))
    return mean, var


def _solve_moment_match(target: float, tvals: np.ndarray,
                        tol: float = MOMENT_TOL) -> tuple[float, float, int]:
    lo_t, hi_t = float(np.min(tvals)), float(np.max(tvals))
    if hi_t - lo_t <= 0:
        raise DegenerateError("carrier sufficient statistic is constant")
    if not lo_t < target < hi_t:
        raise NonExistenceError(
            f"target mean {target:.6g} of T lies outside the open carrier range "
            f"({lo_t:.6g}, {hi_t:.6g}); no tilt matches it")

    def fd(eta):
        m, v = tilted_moments(eta, tvals)
        return m - target, v

    span = max(hi_t - lo_t, 1e-300)
    lo, hi = expand_bracket(lambda e: fd(e)[0], -1.0 / span, 1.0 / span)
    eta, resid, it = newton_bisect(fd, lo, hi, tol, x0=0.0 if lo <= 0 <= hi else None)
    return eta, resid, it


def fit_tilt_direct(x_excesses: SampleLike, bg_excesses: SampleLike,
                    kappa: float) -> tuple[float, FitDiagnostics]:
    """Tilt parameter matching the sample mean of T to its tilted carrier mean.

    ``eta -> E_eta[T]`` is increasing (its derivative is ``Var_eta(T)``), so
    the root is unique when it exists.
    """
    xe = np.asarray(as_sample(x_excesses).values)
    be = np.asarray(as_sample(bg_excesses).values)
    if xe.size == 0 or be.size == 0:
        raise ArgumentError("both excess sets must be nonempty")
    target = float(np.mean(suff_stat(xe, kappa)))
    eta, resid, it = _solve_moment_match(target, suff_stat(be, kappa))
    return eta, FitDiagnostics(abs(resid), it, FitMethod.DIRECT)


def _logistic_loglik(beta: np.ndarray, tv: np.ndarray, y: np.ndarray) -> float:
    lin = beta[0] + beta[1] * tv
    return float(np.sum(y * lin - np.logaddexp(0.0, lin)))


def fit_tilt_logistic(x_excesses: SampleLike, bg_excesses: SampleLike, kappa: float,
                      tol: float = LOGISTIC_TOL, max_iter: int = 100) -> tuple[float, FitDiagnostics]:
    """Slope of a logistic regression of the label (1 = sample of interest,
    0 = background) on ``T(excess)`` with an intercept, fitted by IRLS."""
    xt = suff_stat(np.asarray(as_sample(x_excesses).values), kappa)
    bt = suff_stat(np.asarray(as_sample(bg_excesses).values), kappa)
    if xt.size == 0 or bt.size == 0:
        raise ArgumentError("both excess sets must be nonempty")
    tv = np.concatenate([xt, bt])
    if tv.max() - tv.min() <= 0:
        raise DegenerateError("all T values identical; slope is not identifiable")
    if xt.min() > bt.max() or xt.max() < bt.min():
        raise SeparationError(
            "classes are perfectly separated in T; raise the threshold or use the direct fitter")
    y = np.concatenate([np.ones(xt.size), np.zeros(bt.size)])
    p0 = xt.size / tv.size
    beta = np.array([math.log(p0 / (1.0 - p0)), 0.0])
    ll = _logistic_loglik(beta, tv, y)
    for it in range(1, max_iter + 1):
        p = 0.5 * (1.0 + np.tanh(0.5 * (beta[0] + beta[1] * tv)))
        w = p * (1.0 - p)
        r = y - p
        grad = np.array([r.sum(), np.dot(r, tv)])
        h = np.array([[w.sum(), np.dot(w, tv)],
                      [np.dot(w, tv), np.dot(w, tv * tv)]])
        step = np.linalg.solve(h, grad)
        # step halving keeps the likelihood monotone
        for _ in range(50):
            cand = beta + step
            ll_new = _logistic_loglik(cand, tv, y)
            if ll_new >= ll - 1e-12 * abs(ll):
                break
            step *= 0.5
        beta, change, ll = cand, abs(ll_new - ll), ll_new
        if change < tol:
            # residual of the tilt moment condition at the fitted slope
            m, _ = tilted_moments(float(beta[1]), bt)
            return float(beta[1]), FitDiagnostics(abs(m - float(np.mean(xt))), it,
                                                   FitMethod.LOGISTIC)
    raise SolverError("IRLS did not converge", iterations=max_iter)


def build_tail_model(x: SampleLike, bg: SampleLike, t: float, kappa: float,
                     method: FitMethod | str = FitMethod.DIRECT,
                     eta: float | None = None, min_bg_exceedances: int = K_MIN) -> TiltedTailModel:
    """Fit the tilted tail law above ``t``.

    Tail membership is strict (``> t``). Passing ``eta`` skips fitting and
    uses that tilt (``method`` is then recorded as ``FIXED``).
    """
    x, bg = as_sample(x), as_sample(bg)
    stat = SufficientStatistic(kappa)
    xe, be = x.excesses(t), bg.excesses(t)
    if xe.n == 0:
        raise EstimationError(f"threshold {t:g} is above the sample maximum; no exceedances")
    if be.n < min_bg_exceedances:
        raise EstimationError(
            f"need at least {min_bg_exceedances} background exceedances of {t:g}, got {be.n}")
    if eta is not None:
        diag = FitDiagnostics(math.nan, 0, FitMethod.FIXED)
        eta_hat = float(eta)
    else:
        method = FitMethod(method)
        if method is FitMethod.DIRECT:
            eta_hat, diag = fit_tilt_direct(xe, be, kappa)
        elif method is FitMethod.LOGISTIC:
            eta_hat, diag = fit_tilt_logistic(xe, be, kappa)
        else:
            raise ArgumentError("FIXED method requires eta")
    w, psi = _tilt_weights(eta_hat, stat(be.values))
    return TiltedTailModel(
        threshold=float(t), stat=stat, eta_hat=eta_hat, log_partition=psi,
        bg_excesses=be, weights=w, n_tail_x=xe.n, p2_hat=xe.n / x.n, diagnostics=diag)


def tail_cdf(model: TiltedTailModel, x):
    """Weighted step CDF of the excess: total weight of excesses ``<= x``."""
    cum = np.concatenate(([0.0], np.cumsum(model.weights)))
    cum[-1] = 1.0
    idx = np.searchsorted(model.bg_excesses.values, x, side="right")
    out = cum[idx]
    return float(out) if np.ndim(out) == 0 else out


def linear_tilt_sup_error(gamma: float, sigma0: float, sigma: float,
                          grid_size: int = 4001) -> tuple[float, float, float]:
    """Best uniform approximation of the GPD log density ratio by a linear
    function of ``T`` with ``kappa = sigma0 / gamma``.

    Returns ``(sup_error, eta, psi)`` minimizing
    ``sup_{x >= 0} |log lambda(x) - (eta T(x) - psi)|``; solved as a linear
    program on a grid in ``T in [0, 1]`` (``T = 1`` is the ``x -> inf`` limit).
    """
    if not gamma > 0:
        raise DomainError("requires a positive tail index")
    kappa = sigma0 / gamma
    tau = np.linspace(0.0, 1.0, grid_size)
    x = kappa * tau[:-1] / (1.0 - tau[:-1])
    f = np.empty_like(tau)
    f[:-1] = gpd_log_density_ratio(gamma, sigma, sigma0, x)
    f[-1] = (math.log(sigma) - math.log(sigma0)) / gamma
    # variables (eta, psi, e): minimize e s.t. |f - eta tau + psi| <= e
    ones = np.ones_like(tau)
    a_ub = np.vstack([
        np.column_stack([-tau, ones, -ones]),
        np.column_stack([tau, -ones, -ones]),
    ])
    b_ub = np.concatenate([-f, f])
    res = optimize.linprog([0.0, 0.0, 1.0], A_ub=a_ub, b_ub=b_ub,
                           bounds=[(None, None), (None, None), (0, None)], method="highs")
    if not res.success:
        raise SolverError(f"linear program failed: {res.message}")
    eta, psi, err = res.x
    return float(err), float(eta), float(psi)
