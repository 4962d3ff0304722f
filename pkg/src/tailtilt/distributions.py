"""Distribution families used by the simulations: log-gamma, generalized
Pareto (GPD) and exact Pareto.

Random draws go through :class:`SeedSpec`, which keys a counter-based
Philox generator on ``(master_seed, stream_id, lane)``. The same key always
gives the same stream, independent of which process or in which order the
draw happens.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
import numpy.typing as npt

from .errors import DomainError
from .sample import Sample

# below this |gamma| the GPD is evaluated through its exponential limit
GAMMA_EPS = 1e-8

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class LogGamma:
    """``exp(s * G)`` with ``G ~ Gamma(shape=k, scale=1)``; tail index ``s``."""

    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0 and math.isfinite(self.shape)):
            raise DomainError(f"LogGamma shape must be positive, got {self.shape}")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise DomainError(f"LogGamma scale must be positive, got {self.scale}")


@dataclass(frozen=True)
class GPD:
    """Generalized Pareto with tail index ``gamma``, scale ``sigma`` and
    location ``loc`` (the threshold)."""

    gamma: float
    sigma: float
    loc: float = 0.0

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise DomainError(f"GPD sigma must be positive, got {self.sigma}")
        if not (math.isfinite(self.gamma) and math.isfinite(self.loc)):
            raise DomainError("GPD gamma and loc must be finite")


@dataclass(frozen=True)
class Pareto:
    """Exact Pareto: ``pr(X > x) = (x / x_m) ** (-1 / gamma)`` for ``x >= x_m``."""

    gamma: float
    x_m: float = 1.0

    def __post_init__(self):
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise DomainError(f"Pareto gamma must be positive, got {self.gamma}")
        if not (self.x_m > 0 and math.isfinite(self.x_m)):
            raise DomainError(f"Pareto x_m must be positive, got {self.x_m}")


DistSpec = Union[LogGamma, GPD, Pareto]


@dataclass(frozen=True)
class SeedSpec:
    """Key of one reproducible random stream.

    ``lane`` separates independent draws inside one replication (for
    instance the sample of interest and the background).
    """

    master_seed: int
    stream_id: int = 0
    lane: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            self.master_seed & _U64,
            spawn_key=(self.stream_id & _U64, self.lane & _U64),
        )
        return np.random.Generator(np.random.Philox(seq))

    def with_lane(self, lane: int) -> SeedSpec:
        return SeedSpec(self.master_seed, self.stream_id, lane)


def dist_from_dict(d: dict) -> DistSpec:
    """Build a DistSpec from ``{"family": ..., <params>}``."""
    d = dict(d)
    family = str(d.pop("family", "")).lower()
    try:
        if family in ("loggamma", "log-gamma", "log_gamma"):
            return LogGamma(float(d.pop("shape")), float(d.pop("scale")))
        if family == "gpd":
            return GPD(float(d.pop("gamma")), float(d.pop("sigma")), float(d.pop("loc", 0.0)))
        if family == "pareto":
            return Pareto(float(d.pop("gamma")), float(d.pop("x_m", 1.0)))
    except KeyError as exc:
        raise DomainError(f"missing parameter {exc.args[0]!r} for family {family!r}") from None
    raise DomainError(f"unknown distribution family {family!r}")


def dist_to_dict(spec: DistSpec) -> dict:
    if isinstance(spec, LogGamma):
        return {"family": "loggamma", "shape": spec.shape, "scale": spec.scale}
    if isinstance(spec, GPD):
        return {"family": "gpd", "gamma": spec.gamma, "sigma": spec.sigma, "loc": spec.loc}
    return {"family": "pareto", "gamma": spec.gamma, "x_m": spec.x_m}


def gpd_ppf(gamma: float, sigma: float, u: npt.ArrayLike) -> np.ndarray:
    """Inverse of :func:`gpd_cdf` (excess scale, location 0)."""
    u = np.asarray(u, dtype=np.float64)
    if sigma <= 0:
        raise DomainError(f"GPD sigma must be positive, got {sigma}")
    log_surv = np.log1p(-u)
    if abs(gamma) < GAMMA_EPS:
        return -sigma * log_surv * (1.0 - 0.5 * gamma * log_surv)
    return sigma * np.expm1(-gamma * log_surv) / gamma


def gpd_cdf(gamma: float, sigma: float, x: npt.ArrayLike) -> np.ndarray | float:
    """``1 - (1 + gamma x / sigma) ** (-1 / gamma)`` for excesses ``x >= 0``.

    Uses the exponential limit when ``|gamma| < 1e-8``.
    """
    if sigma <= 0:
        raise DomainError(f"GPD sigma must be positive, got {sigma}")
    xa = np.asarray(x, dtype=np.float64)
    if np.any(xa < 0):
        raise DomainError("GPD cdf is defined for nonnegative excesses only")
    if gamma < 0 and np.any(xa > -sigma / gamma):
        raise DomainError(f"x outside GPD support [0, {-sigma / gamma:g}]")
    z = xa / sigma
    if abs(gamma) < GAMMA_EPS:
        # first-order correction keeps the cdf smooth across the branch
        out = -np.expm1(-z + 0.5 * gamma * z * z)
    else:
        out = -np.expm1(-np.log1p(gamma * z) / gamma)
    return float(out) if out.ndim == 0 else out


def gpd_logpdf(gamma: float, sigma: float, x: npt.ArrayLike) -> np.ndarray:
    """Log density of the GPD at excesses ``x`` (``-inf`` off support)."""
    x = np.asarray(x, dtype=np.float64)
    z = x / sigma
    if abs(gamma) < GAMMA_EPS:
        out = -math.log(sigma) - z
    else:
        arg = 1.0 + gamma * z
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -math.log(sigma) - (1.0 + 1.0 / gamma) * np.log1p(gamma * z)
        out = np.where(arg > 0, out, -np.inf)
    return np.where(x >= 0, out, -np.inf)


def gpd_log_density_ratio(gamma: float, sigma: float, sigma0: float,
                          x: npt.ArrayLike) -> np.ndarray:
    """``log dH_{gamma,sigma}/dH_{gamma,sigma0}`` at excess ``x``."""
    return gpd_logpdf(gamma, sigma, x) - gpd_logpdf(gamma, sigma0, x)


def _uniforms(seed: SeedSpec, n: int) -> np.ndarray:
    return seed.generator().random(n)


def sample(spec: DistSpec, n: int, seed: SeedSpec) -> Sample:
    """Draw ``n`` i.i.d. values from ``spec`` on the stream ``seed``."""
    if int(n) != n or n < 1:
        raise DomainError(f"sample size must be a positive integer, got {n}")
    n = int(n)
    source = f"{spec!r}@{seed.master_seed}/{seed.stream_id}/{seed.lane}"
    if isinstance(spec, LogGamma):
        # numpy's standard_gamma is the Marsaglia-Tsang squeeze/rejection
        # sampler (with the k < 1 boost), valid for every shape > 0
        g = seed.generator().standard_gamma(spec.shape, size=n)
        values = np.exp(spec.scale * g)
    elif isinstance(spec, GPD):
        values = spec.loc + gpd_ppf(spec.gamma, spec.sigma, _uniforms(seed, n))
    elif isinstance(spec, Pareto):
        values = spec.x_m * np.exp(-spec.gamma * np.log1p(-_uniforms(seed, n)))
    else:
        raise DomainError(f"unsupported distribution {spec!r}")
    values.sort()
    return Sample._trusted(values, source)


def analytic_mean(spec: DistSpec) -> float:
    if isinstance(spec, LogGamma):
        if spec.scale >= 1:
            raise DomainError("LogGamma mean requires scale < 1")
        return (1.0 - spec.scale) ** (-spec.shape)
    if isinstance(spec, GPD):
        if spec.gamma >= 1:
            raise DomainError("GPD mean requires gamma < 1")
        return spec.loc + spec.sigma / (1.0 - spec.gamma)
    if isinstance(spec, Pareto):
        if spec.gamma >= 1:
            raise DomainError("Pareto mean requires gamma < 1")
        return spec.x_m / (1.0 - spec.gamma)
    raise DomainError(f"unsupported distribution {spec!r}")


def analytic_variance(spec: DistSpec) -> float:
    if isinstance(spec, LogGamma):
        s, k = spec.scale, spec.shape
        if s >= 0.5:
            raise DomainError("LogGamma variance requires scale < 1/2")
        return (1.0 - 2.0 * s) ** (-k) - (1.0 - s) ** (-2.0 * k)
    if isinstance(spec, GPD):
        g = spec.gamma
        if g >= 0.5:
            raise DomainError("GPD variance requires gamma < 1/2")
        return spec.sigma ** 2 / ((1.0 - g) ** 2 * (1.0 - 2.0 * g))
    if isinstance(spec, Pareto):
        g = spec.gamma
        if g >= 0.5:
            raise DomainError("Pareto variance requires gamma < 1/2")
        return spec.x_m ** 2 * g * g / ((1.0 - g) ** 2 * (1.0 - 2.0 * g))
    raise DomainError(f"unsupported distribution {spec!r}")


def survival(spec: DistSpec, x: float) -> float:
    """``pr(X > x)`` under ``spec``."""
    from scipy import special

    if isinstance(spec, LogGamma):
        if x <= 0:
            return 1.0
        return float(special.gammaincc(spec.shape, math.log(x) / spec.scale)) if x > 1 else 1.0
    if isinstance(spec, GPD):
        if x <= spec.loc:
            return 1.0
        g, z = spec.gamma, (x - spec.loc) / spec.sigma
        if g < 0 and z >= -1.0 / g:
            return 0.0
        if abs(g) < GAMMA_EPS:
            return math.exp(-z)
        return math.exp(-math.log1p(g * z) / g)
    if x <= spec.x_m:
        return 1.0
    return (x / spec.x_m) ** (-1.0 / spec.gamma)


def quantile(spec: DistSpec, q: float) -> float:
    """Population ``q``-quantile under ``spec``."""
    from scipy import special

    if not 0 < q < 1:
        raise DomainError("quantile level must lie in (0, 1)")
    if isinstance(spec, LogGamma):
        return math.exp(spec.scale * float(special.gammaincinv(spec.shape, q)))
    if isinstance(spec, GPD):
        return spec.loc + float(gpd_ppf(spec.gamma, spec.sigma, q))
    return spec.x_m * (1.0 - q) ** (-spec.gamma)
