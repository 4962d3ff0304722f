"""Mean estimators: the tilted-tail estimator with its plug-in asymptotic
variance, and the baselines (threshold and k Winsorization, parametric GPD
tail, sample mean)."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, DegenerateError, InfiniteMeanError
from .evt import EvtFit, gpd_fit_ml
from .sample import SampleLike, as_sample
from .tilt import FitDiagnostics, FitMethod, TiltedTailModel, build_tail_model


class Estimator(str, enum.Enum):
    SEMIPARAMETRIC = "semiparametric"
    WINSORIZED_T = "winsorized-t"
    WINSORIZED_K = "winsorized-k"
    PARETO = "pareto"
    SAMPLE = "sample"


@dataclass(frozen=True)
class MeanEstimate:
    mu_hat: float
    method: Estimator
    threshold: float = math.nan
    var_hat: float | None = None
    kappa: float | None = None
    diagnostics: FitDiagnostics | None = None
    model: TiltedTailModel | None = None
    evt_fit: EvtFit | None = None

    def interval(self, z: float = 1.96) -> tuple[float, float]:
        """``mu_hat -/+ z * sqrt(var_hat)``; asymptotic, semiparametric only."""
        if self.var_hat is None:
            raise ArgumentError(f"{self.method.value} estimates carry no variance")
        half = z * math.sqrt(self.var_hat)
        return self.mu_hat - half, self.mu_hat + half

    def to_dict(self) -> dict:
        out = {"muHat": self.mu_hat, "method": self.method.value}
        if self.var_hat is not None:
            out["varHat"] = self.var_hat
        if not math.isnan(self.threshold):
            out["t"] = self.threshold
        if self.kappa is not None:
            out["kappa"] = self.kappa
        if self.evt_fit is not None:
            out["gammaHat"] = self.evt_fit.gamma_hat
            out["sigmaHat"] = self.evt_fit.sigma_hat
        return out


@dataclass(frozen=True)
class PluginMoments:
    """Moments of the fitted law: empirical below ``t``, tilted above it."""

    f_body: float
    body_mean: float
    body_var: float
    tail_mean: float
    tail_var: float
    cov_tx: float
    var_t: float

    @property
    def p2(self) -> float:
        return 1.0 - self.f_body

    def scaled_asymptotic_variance(self) -> float:
        """``n`` times the asymptotic variance of the tilted-tail estimator."""
        f, p = self.f_body, self.p2
        out = f * self.body_var + f * p * (self.tail_mean - self.body_mean) ** 2
        if p > 0:
            if self.var_t <= 0:
                raise DegenerateError("sufficient statistic has zero variance in the tail")
            out += p * self.cov_tx ** 2 / self.var_t
        return max(out, 0.0)

    def scaled_sample_mean_variance(self) -> float:
        """``n`` times the variance of the sample mean under the fitted law."""
        f, p = self.f_body, self.p2
        return (f * self.body_var + p * self.tail_var
                + f * p * (self.tail_mean - self.body_mean) ** 2)

    @property
    def tail_corr2(self) -> float:
        return self.cov_tx ** 2 / (self.var_t * self.tail_var)


def plugin_moments(x: SampleLike, model: TiltedTailModel,
                   stat_values: np.ndarray | None = None) -> PluginMoments:
    """Plug-in moments entering the asymptotic variance.

    ``stat_values`` replaces the per-point sufficient statistic of the
    background tail (used to check identities with other statistics).
    """
    x = as_sample(x)
    body = x.at_most(model.threshold)
    w = model.weights
    y = model.tail_values
    tv = model.t_values if stat_values is None else np.asarray(stat_values, dtype=np.float64)
    body_mean = float(np.mean(body)) if body.size else 0.0
    body_var = float(np.var(body)) if body.size else 0.0
    tail_mean = float(np.dot(w, y))
    t_mean = float(np.dot(w, tv))
    dy, dt = y - tail_mean, tv - t_mean
    return PluginMoments(
        f_body=1.0 - model.p2_hat, body_mean=body_mean, body_var=body_var,
        tail_mean=tail_mean, tail_var=float(np.dot(w, dy * dy)),
        cov_tx=float(np.dot(w, dy * dt)), var_t=float(np.dot(w, dt * dt)))


def semiparametric_variance(x: SampleLike, model: TiltedTailModel) -> float:
    """Plug-in asymptotic variance of the tilted-tail mean estimator."""
    x = as_sample(x)
    n_body = x.n - x.count_above(model.threshold)
    if n_body < 2 and model.p2_hat < 1:
        raise DegenerateError(f"need at least 2 observations at or below t, got {n_body}")
    if model.p2_hat > 0 and np.unique(model.t_values).size < 2:
        raise DegenerateError("need at least 2 distinct tail values of T")
    return plugin_moments(x, model).scaled_asymptotic_variance() / x.n


def mean_from_model(x: SampleLike, model: TiltedTailModel) -> float:
    x = as_sample(x)
    body = x.at_most(model.threshold)
    return float(np.sum(body)) / x.n + model.p2_hat * float(np.dot(model.weights, model.tail_values))


def semiparametric_mean(x: SampleLike, bg: SampleLike, t: float, kappa: float,
                        method: FitMethod | str = FitMethod.DIRECT,
                        eta: float | None = None, with_variance: bool = True) -> MeanEstimate:
    """Mean of the fitted law: empirical body plus tilted background tail.

    The tail term averages the background tail values ``Y_i`` (not their
    excesses) with the tilt weights.
    """
    x = as_sample(x)
    model = build_tail_model(x, bg, t, kappa, method, eta=eta)
    var = semiparametric_variance(x, model) if with_variance else None
    return MeanEstimate(
        mu_hat=mean_from_model(x, model), method=Estimator.SEMIPARAMETRIC,
        threshold=float(t), var_hat=var, kappa=float(kappa),
        diagnostics=model.diagnostics, model=model)


def winsorized_mean_threshold(x: SampleLike, t: float) -> MeanEstimate:
    x = as_sample(x)
    if x.n == 0:
        raise ArgumentError("sample must be nonempty")
    mu = float(np.mean(np.minimum(x.values, t)))
    return MeanEstimate(mu_hat=mu, method=Estimator.WINSORIZED_T, threshold=float(t))


def winsorized_mean_k(x: SampleLike, k: int) -> MeanEstimate:
    """Cap the ``k`` largest values at the (k+1)-th largest value."""
    x = as_sample(x)
    if int(k) != k or not 1 <= k <= x.n - 1:
        raise ArgumentError(f"k must lie in [1, n-1] = [1, {x.n - 1}], got {k}")
    cap = float(x.values[x.n - int(k) - 1])
    mu = float(np.mean(np.minimum(x.values, cap)))
    return MeanEstimate(mu_hat=mu, method=Estimator.WINSORIZED_K, threshold=cap)


def pareto_tail_mean(x: SampleLike, t: float) -> MeanEstimate:
    """Empirical body plus the mean of a GPD fitted to the excesses of ``t``."""
    x = as_sample(x)
    exc = x.excesses(t)
    fit = gpd_fit_ml(exc, threshold=t)
    if fit.gamma_hat >= 1:
        raise InfiniteMeanError(
            f"fitted tail index {fit.gamma_hat:.4g} >= 1: the tail mean is infinite")
    body = x.at_most(t)
    p2 = exc.n / x.n
    mu = float(np.sum(body)) / x.n + p2 * (t + fit.sigma_hat / (1.0 - fit.gamma_hat))
    return MeanEstimate(mu_hat=mu, method=Estimator.PARETO, threshold=float(t), evt_fit=fit)


def sample_mean(x: SampleLike) -> MeanEstimate:
    x = as_sample(x)
    if x.n == 0:
        raise ArgumentError("sample must be nonempty")
    return MeanEstimate(mu_hat=float(np.mean(x.values)), method=Estimator.SAMPLE)
