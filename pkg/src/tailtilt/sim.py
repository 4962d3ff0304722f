"""Monte Carlo harness: scenarios, threshold sweeps, oracle thresholds and
the resample-from-population protocol.

Each replication ``r`` draws its data from streams keyed by
``(master_seed, r)``, so results do not depend on how replications are
split across worker processes, and every method and every threshold of a
sweep sees the same draws.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Union

import jsonschema
import numpy as np

from . import distributions as dist
from .errors import ArgumentError, ConfigError, IngestionError, TailTiltError
from .estimators import (
    Estimator,
    pareto_tail_mean,
    sample_mean,
    semiparametric_mean,
    winsorized_mean_k,
    winsorized_mean_threshold,
)
from .evt import (
    BackgroundQuantile,
    EqualsThreshold,
    Fixed,
    FixedKappa,
    GuillouHall,
    KappaRule,
    Oracle,
    SigmaOverGamma,
    ThresholdRule,
    background_tail_index,
    resolve_kappa,
    resolve_threshold,
)
from .io import read_values
from .sample import Sample
from .tilt import FitMethod

FIXED_BACKGROUND_STREAM = (1 << 64) - 1
X_LANE, BG_LANE = 0, 1


@dataclass(frozen=True, eq=False)
class PopulationFile:
    """Finite population read from a one-column data file."""

    path: str
    negate: bool = False
    values: np.ndarray | None = field(default=None, repr=False)

    def load(self) -> np.ndarray:
        if self.values is None:
            object.__setattr__(self, "values", read_values(self.path, negate=self.negate))
        return self.values

    @classmethod
    def from_array(cls, values, name: str = "<array>") -> PopulationFile:
        v = np.asarray(values, dtype=np.float64).ravel()
        if v.size == 0 or not np.all(np.isfinite(v)):
            raise IngestionError("population must be nonempty and finite")
        return cls(name, False, v)


Source = Union[dist.LogGamma, dist.GPD, dist.Pareto, PopulationFile]


@dataclass(frozen=True)
class MethodSpec:
    estimator: Estimator
    threshold: ThresholdRule | None = None
    kappa: KappaRule = SigmaOverGamma()
    fitter: FitMethod = FitMethod.DIRECT
    k: int | None = None
    label: str = ""

    def __post_init__(self):
        est = Estimator(self.estimator)
        object.__setattr__(self, "estimator", est)
        object.__setattr__(self, "fitter", FitMethod(self.fitter))
        if est in (Estimator.SEMIPARAMETRIC, Estimator.WINSORIZED_T, Estimator.PARETO):
            if self.threshold is None:
                raise ArgumentError(f"{est.value} needs a threshold rule")
        if est is Estimator.WINSORIZED_K and (self.k is None or self.k < 1):
            raise ArgumentError("winsorized-k needs k >= 1")
        if not self.label:
            object.__setattr__(self, "label", self.default_label())

    @property
    def threshold_dependent(self) -> bool:
        return self.threshold is not None

    def default_label(self) -> str:
        if self.estimator is Estimator.WINSORIZED_K:
            return f"winsorized (k={self.k})"
        if self.estimator is Estimator.SAMPLE:
            return "sample mean"
        name = {Estimator.SEMIPARAMETRIC: "semiparametric", Estimator.WINSORIZED_T: "winsorized",
                Estimator.PARETO: "pareto tail"}[self.estimator]
        return f"{name} ({threshold_label(self.threshold)})"


def threshold_label(rule: ThresholdRule) -> str:
    if isinstance(rule, Fixed):
        return f"t={rule.t:g}"
    if isinstance(rule, BackgroundQuantile):
        return f"t={rule.q:g} quantile"
    if isinstance(rule, GuillouHall):
        return "guillou-hall"
    return "oracle t"


@dataclass(frozen=True)
class ScenarioConfig:
    x: Source
    bg: Source
    n: int
    N: int
    reps: int
    methods: tuple[MethodSpec, ...]
    master_seed: int = 0
    redraw_background: bool = True
    true_mean: float | None = None

    def __post_init__(self):
        if self.reps < 2:
            raise ConfigError("reps must be at least 2", "reps")
        if self.n < 1:
            raise ConfigError("n must be positive", "n")
        if self.N < 1:
            raise ConfigError("N must be positive", "N")
        if not self.methods:
            raise ConfigError("at least one method is required", "methods")
        labels = [m.label for m in self.methods]
        if len(set(labels)) != len(labels):
            raise ConfigError("method labels must be unique", "methods")
        object.__setattr__(self, "methods", tuple(self.methods))

    def resolved_true_mean(self) -> float:
        if self.true_mean is not None:
            return float(self.true_mean)
        if isinstance(self.x, PopulationFile):
            return float(np.mean(self.x.load()))
        return dist.analytic_mean(self.x)


@dataclass(frozen=True)
class Summary:
    """Bias/variance/MSE of one set of replicate estimates."""

    variance: float
    bias2: float
    mse: float
    se_variance: float
    se_bias2: float
    se_mse: float
    failures: int
    successes: int
    mean_error: float = math.nan
    se_mean_error: float = math.nan


@dataclass(frozen=True)
class Row:
    method: str
    threshold: float
    summary: Summary

    def as_dict(self) -> dict[str, Any]:
        s = self.summary
        return {"method": self.method, "threshold": self.threshold, "variance": s.variance,
                "bias2": s.bias2, "mse": s.mse, "se_variance": s.se_variance,
                "se_bias2": s.se_bias2, "se_mse": s.se_mse, "failures": s.failures}


@dataclass(frozen=True)
class ReplicateTable:
    """Per-replication outputs of one method; columns are threshold points."""

    points: np.ndarray  # grid thresholds, or NaN for data-driven ones
    estimates: np.ndarray  # (reps, points); NaN marks a failure
    thresholds: np.ndarray  # threshold actually used
    var_hat: np.ndarray
    eta_hat: np.ndarray


@dataclass(frozen=True)
class ScenarioResult:
    rows: list[Row]
    true_mean: float
    config: dict[str, Any]
    replicates: dict[str, ReplicateTable] = field(default_factory=dict, repr=False)
    curves: dict[str, list[Summary]] = field(default_factory=dict, repr=False)

    def row(self, method: str) -> Row:
        for r in self.rows:
            if r.method == method:
                return r
        raise ArgumentError(f"no row for method {method!r}")

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["method", "threshold", "variance", "bias2", "mse",
                "se_variance", "se_bias2", "se_mse", "failures"]
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: _fmt(v) for k, v in r.as_dict().items()})
        return buf.getvalue()

    def to_json_dict(self) -> dict[str, Any]:
        return {"trueMean": self.true_mean, "config": self.config,
                "rows": [{k: _json_num(v) for k, v in r.as_dict().items()} for r in self.rows]}


@dataclass(frozen=True)
class SweepResult:
    grid: np.ndarray
    curves: dict[str, list[Summary]]
    true_mean: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,method,bias2,var,mse,se_mse\n")
        for label, curve in self.curves.items():
            for t, s in zip(self.grid, curve):
                buf.write(",".join([_fmt(float(t)), _csv_field(label), _fmt(s.bias2),
                                    _fmt(s.variance), _fmt(s.mse), _fmt(s.se_mse)]) + "\n")
        return buf.getvalue()


def _csv_field(s: str) -> str:
    return f'"{s}"' if any(c in s for c in ',"\n') else s


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v)) if math.isfinite(v) else "nan"


def _json_num(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


# aggregation


def summarize(estimates: np.ndarray, true_mean: float) -> Summary:
    """Variance, squared bias and MSE against ``true_mean`` with standard
    errors: moment-based for the variance, jackknife for bias^2 and MSE."""
    est = np.asarray(estimates, dtype=np.float64)
    ok = est[np.isfinite(est)]
    failures = int(est.size - ok.size)
    r = ok.size
    if r < 2:
        nan = math.nan
        return Summary(nan, nan, nan, nan, nan, nan, failures, r)
    e = ok - true_mean
    e_bar = float(np.mean(e))
    d = e - e_bar
    variance = float(np.mean(d * d))
    bias2 = e_bar * e_bar
    mse = float(np.mean(e * e))
    m4 = float(np.mean(d ** 4))
    se_var = math.sqrt(max(m4 - variance * variance, 0.0) / r)
    loo = (r * e_bar - e) / (r - 1)
    th = loo * loo
    se_bias2 = math.sqrt((r - 1) / r * float(np.sum((th - th.mean()) ** 2)))
    se_mse = float(np.std(e * e, ddof=1)) / math.sqrt(r)
    return Summary(variance, bias2, mse, se_var, se_bias2, se_mse, failures, r,
                   e_bar, float(np.std(e, ddof=1)) / math.sqrt(r))


def oracle_index(curve: list[Summary]) -> int:
    """Index of minimal MSE; ties go to the first (smallest) threshold."""
    mses = np.array([s.mse for s in curve], dtype=np.float64)
    if not np.any(np.isfinite(mses)):
        return 0
    return int(np.nanargmin(mses))


def oracle_threshold(sweep: SweepResult, method: str) -> float:
    if method not in sweep.curves:
        raise ArgumentError(f"method {method!r} is not in the sweep")
    return float(sweep.grid[oracle_index(sweep.curves[method])])


# replication engine


def _draw(source: Source, size: int, seed: dist.SeedSpec) -> Sample:
    if isinstance(source, PopulationFile):
        pop = source.load()
        idx = seed.generator().integers(0, pop.size, size=size)
        v = pop[idx]
        v.sort()
        return Sample._trusted(v, f"resample({source.path})")
    return dist.sample(source, size, seed)


class _Replication:
    """Data of one replication plus lazily computed shared quantities."""

    def __init__(self, cfg: ScenarioConfig, r: int, fixed_bg: Sample | None):
        seed = dist.SeedSpec(cfg.master_seed, r)
        self.x = _draw(cfg.x, cfg.n, seed.with_lane(X_LANE))
        self.bg = fixed_bg if fixed_bg is not None else _draw(cfg.bg, cfg.N, seed.with_lane(BG_LANE))
        self._bg_gamma: float | None = None
        self._gh_t: float | None = None

    def bg_gamma(self) -> float:
        if self._bg_gamma is None:
            self._bg_gamma = background_tail_index(self.bg)[0]
        return self._bg_gamma

    def threshold(self, rule: ThresholdRule) -> float:
        if isinstance(rule, GuillouHall):
            if self._gh_t is None:
                self._gh_t = resolve_threshold(rule, self.x, self.bg)
            return self._gh_t
        return resolve_threshold(rule, self.x, self.bg)


def _points(m: MethodSpec) -> list[ThresholdRule | None]:
    if isinstance(m.threshold, Oracle):
        return [Fixed(t) for t in m.threshold.grid]
    return [m.threshold]


def _evaluate(m: MethodSpec, rule: ThresholdRule | None, rep: _Replication):
    """(estimate, threshold used, variance estimate, eta) for one point."""
    nan = math.nan
    if m.estimator is Estimator.SAMPLE:
        return sample_mean(rep.x).mu_hat, nan, nan, nan
    if m.estimator is Estimator.WINSORIZED_K:
        est = winsorized_mean_k(rep.x, m.k)
        return est.mu_hat, est.threshold, nan, nan
    t = rep.threshold(rule)
    if m.estimator is Estimator.WINSORIZED_T:
        return winsorized_mean_threshold(rep.x, t).mu_hat, t, nan, nan
    if m.estimator is Estimator.PARETO:
        return pareto_tail_mean(rep.x, t).mu_hat, t, nan, nan
    gamma = rep.bg_gamma() if isinstance(m.kappa, SigmaOverGamma) else None
    kappa = resolve_kappa(m.kappa, rep.bg, t, gamma_hat=gamma)
    est = semiparametric_mean(rep.x, rep.bg, t, kappa, m.fitter)
    return est.mu_hat, t, est.var_hat, est.model.eta_hat


def _run_block(cfg: ScenarioConfig, reps: range, fixed_bg: Sample | None) -> dict[str, np.ndarray]:
    out = {m.label: np.full((len(reps), len(_points(m)), 4), np.nan) for m in cfg.methods}
    with warnings.catch_warnings():
        # Guillou-Hall fallbacks are expected across many replications
        warnings.simplefilter("ignore", RuntimeWarning)
        _fill_block(cfg, reps, fixed_bg, out)
    return out


def _fill_block(cfg, reps, fixed_bg, out):
    for i, r in enumerate(reps):
        rep = _Replication(cfg, r, fixed_bg)
        for m in cfg.methods:
            for j, rule in enumerate(_points(m)):
                try:
                    out[m.label][i, j] = _evaluate(m, rule, rep)
                except TailTiltError:
                    pass  # counted as a failure
                except (FloatingPointError, ZeroDivisionError, OverflowError):
                    pass


_WORKER_CTX: dict[str, Any] = {}


def _worker_init(cfg: ScenarioConfig, fixed_bg: Sample | None):
    _WORKER_CTX["cfg"] = cfg
    _WORKER_CTX["bg"] = fixed_bg


def _worker_block(bounds: tuple[int, int]):
    return bounds, _run_block(_WORKER_CTX["cfg"], range(*bounds), _WORKER_CTX["bg"])


def worker_count(requested: int | None = None) -> int:
    """Number of worker processes: explicit request, else ``TAILTILT_THREADS``,
    else 1. Affects speed only."""
    if requested is None:
        env = os.environ.get("TAILTILT_THREADS", "").strip()
        requested = int(env) if env.isdigit() else 1
    return max(1, min(int(requested), os.cpu_count() or 1))


def simulate_replicates(cfg: ScenarioConfig, workers: int | None = None) -> dict[str, ReplicateTable]:
    fixed_bg = None
    if not cfg.redraw_background:
        fixed_bg = _draw(cfg.bg, cfg.N, dist.SeedSpec(cfg.master_seed, FIXED_BACKGROUND_STREAM, BG_LANE))
    workers = worker_count(workers)
    slots = {m.label: np.full((cfg.reps, len(_points(m)), 4), np.nan) for m in cfg.methods}
    if workers == 1:
        res = _run_block(cfg, range(cfg.reps), fixed_bg)
        for k in slots:
            slots[k][:] = res[k]
    else:
        size = max(1, math.ceil(cfg.reps / (4 * workers)))
        blocks = [(a, min(a + size, cfg.reps)) for a in range(0, cfg.reps, size)]
        with ProcessPoolExecutor(workers, initializer=_worker_init, initargs=(cfg, fixed_bg)) as ex:
            for (a, b), res in ex.map(_worker_block, blocks):
                for k in slots:
                    slots[k][a:b] = res[k]
    tables = {}
    for m in cfg.methods:
        arr = slots[m.label]
        pts = np.array([rule.t if isinstance(rule, Fixed) else math.nan for rule in _points(m)])
        tables[m.label] = ReplicateTable(pts, arr[:, :, 0], arr[:, :, 1], arr[:, :, 2], arr[:, :, 3])
    return tables


def run_scenario(cfg: ScenarioConfig, workers: int | None = None) -> ScenarioResult:
    """Bias^2, variance and MSE of every configured method.

    Oracle-threshold methods are evaluated on their whole grid and reported
    at the grid point with the smallest measured MSE.
    """
    mu = cfg.resolved_true_mean()
    tables = simulate_replicates(cfg, workers)
    rows, curves = [], {}
    for m in cfg.methods:
        tab = tables[m.label]
        curve = [summarize(tab.estimates[:, j], mu) for j in range(tab.points.size)]
        j = oracle_index(curve) if isinstance(m.threshold, Oracle) else 0
        if isinstance(m.threshold, Oracle):
            curves[m.label] = curve
            t_used = float(tab.points[j])
        else:
            used = tab.thresholds[:, 0]
            t_used = float(np.nanmean(used)) if np.any(np.isfinite(used)) else math.nan
        rows.append(Row(m.label, t_used, curve[j]))
    return ScenarioResult(rows, mu, config_to_dict(cfg), tables, curves)


def threshold_sweep(cfg: ScenarioConfig, grid, workers: int | None = None) -> SweepResult:
    """Curves of bias^2 / variance / MSE over ``grid`` for every
    threshold-dependent method, all grid points sharing the same draws."""
    grid = tuple(float(g) for g in grid)
    rule = Oracle(grid)
    methods = tuple(replace(m, threshold=rule) for m in cfg.methods if m.threshold_dependent)
    if not methods:
        raise ArgumentError("no threshold-dependent methods to sweep")
    res = run_scenario(replace(cfg, methods=methods), workers)
    return SweepResult(np.array(grid), res.curves, res.true_mean)


def resample_experiment(x_pop: PopulationFile, bg_pop: PopulationFile, n: int, N: int,
                        reps: int, methods, master_seed: int = 0,
                        redraw_background: bool = True, workers: int | None = None) -> ScenarioResult:
    """Resample ``n`` and ``N`` points with replacement from two finite
    populations per replication; the truth is the mean of ``x_pop``."""
    for p in (x_pop, bg_pop):
        if p.load().size == 0:
            raise IngestionError(f"population {p.path} is empty")
    cfg = ScenarioConfig(x_pop, bg_pop, n, N, reps, tuple(methods), master_seed,
                         redraw_background, None)
    return run_scenario(cfg, workers)


# config (de)serialization

_RULE = {"type": "string", "pattern": r"^(fixed:[-+0-9.eE]+|quantile:[0-9.eE-]+|gh|oracle:.+)$"}
_SOURCE = {
    "oneOf": [
        {"type": "object", "required": ["family"],
         "properties": {"family": {"enum": ["loggamma", "gpd", "pareto"]},
                        "shape": {"type": "number", "exclusiveMinimum": 0},
                        "scale": {"type": "number", "exclusiveMinimum": 0},
                        "gamma": {"type": "number"},
                        "sigma": {"type": "number", "exclusiveMinimum": 0},
                        "loc": {"type": "number"},
                        "x_m": {"type": "number", "exclusiveMinimum": 0}},
         "additionalProperties": False},
        {"type": "object", "required": ["population"],
         "properties": {"population": {"type": "string"}, "negate": {"type": "boolean"}},
         "additionalProperties": False},
    ]
}
CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["x", "bg", "n", "N", "reps", "methods"],
    "additionalProperties": False,
    "properties": {
        "x": _SOURCE,
        "bg": _SOURCE,
        "n": {"type": "integer", "minimum": 1},
        "N": {"type": "integer", "minimum": 1},
        "reps": {"type": "integer", "minimum": 2},
        "masterSeed": {"type": "integer", "minimum": 0},
        "redrawBackground": {"type": "boolean"},
        "trueMean": {"type": ["number", "null"]},
        "methods": {
            "type": "array", "minItems": 1,
            "items": {
                "type": "object", "required": ["estimator"], "additionalProperties": False,
                "properties": {
                    "estimator": {"enum": [e.value for e in Estimator]},
                    "label": {"type": "string"},
                    "threshold": {"oneOf": [_RULE, {"type": "object", "required": ["oracle"],
                                                    "additionalProperties": False,
                                                    "properties": {"oracle": {
                                                        "type": "array", "minItems": 1,
                                                        "items": {"type": "number"}}}}]},
                    "kappa": {"type": "string", "pattern": r"^(sg|t|fixed:[-+0-9.eE]+)$"},
                    "fitter": {"enum": ["direct", "logistic"]},
                    "k": {"type": "integer", "minimum": 1},
                },
            },
        },
    },
}


def parse_grid(spec: str) -> tuple[float, ...]:
    """``"a,b,c"`` or ``"lo:hi:steps"`` (linear, inclusive) or
    ``"geom:lo:hi:steps"`` (log-spaced, inclusive)."""
    s = spec.strip()
    try:
        if s.startswith("geom:"):
            lo, hi, steps = s[5:].split(":")
            grid = np.geomspace(float(lo), float(hi), int(steps))
        elif ":" in s:
            lo, hi, steps = s.split(":")
            grid = np.linspace(float(lo), float(hi), int(steps))
        else:
            grid = [float(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise ArgumentError(f"malformed grid {spec!r}") from None
    grid = tuple(float(g) for g in grid)
    if not grid or not all(math.isfinite(g) for g in grid):
        raise ArgumentError(f"malformed grid {spec!r}")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ArgumentError(f"grid must be sorted: {spec!r}")
    return grid


def parse_threshold_rule(spec) -> ThresholdRule:
    if isinstance(spec, dict):
        return Oracle(tuple(spec["oracle"]))
    s = str(spec).strip().lower()
    try:
        if s == "gh":
            return GuillouHall()
        if s.startswith("fixed:"):
            return Fixed(float(s[6:]))
        if s.startswith("quantile:"):
            return BackgroundQuantile(float(s[9:]))
        if s.startswith("oracle:"):
            return Oracle(parse_grid(s[7:]))
    except ValueError:
        pass
    raise ArgumentError(f"malformed threshold rule {spec!r}")


def parse_kappa_rule(spec: str) -> KappaRule:
    s = str(spec).strip().lower()
    if s == "sg":
        return SigmaOverGamma()
    if s == "t":
        return EqualsThreshold()
    if s.startswith("fixed:"):
        try:
            return FixedKappa(float(s[6:]))
        except ValueError:
            pass
    raise ArgumentError(f"malformed kappa rule {spec!r}")


def threshold_rule_to_json(rule: ThresholdRule | None):
    if rule is None:
        return None
    if isinstance(rule, Fixed):
        return f"fixed:{rule.t!r}"
    if isinstance(rule, BackgroundQuantile):
        return f"quantile:{rule.q!r}"
    if isinstance(rule, GuillouHall):
        return "gh"
    return {"oracle": list(rule.grid)}


def kappa_rule_to_json(rule: KappaRule) -> str:
    if isinstance(rule, SigmaOverGamma):
        return "sg"
    if isinstance(rule, EqualsThreshold):
        return "t"
    return f"fixed:{rule.kappa!r}"


def _source_from_json(d: dict, base: Path | None) -> Source:
    if "population" in d:
        p = Path(d["population"])
        if base is not None and not p.is_absolute():
            p = base / p
        return PopulationFile(str(p), bool(d.get("negate", False)))
    return dist.dist_from_dict(d)


def _source_to_json(s: Source) -> dict:
    if isinstance(s, PopulationFile):
        return {"population": s.path, "negate": s.negate}
    return dist.dist_to_dict(s)


def config_from_dict(d: dict, base_dir: str | Path | None = None) -> ScenarioConfig:
    """Validate against :data:`CONFIG_SCHEMA` and build a config.

    Relative population paths resolve against ``base_dir``.
    """
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(d), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "".join(f"[{p}]" if isinstance(p, int) else (f".{p}" if i else p)
                       for i, p in enumerate(err.absolute_path)) or "<root>"
        raise ConfigError(err.message, path)
    base = Path(base_dir) if base_dir is not None else None
    methods = []
    for i, md in enumerate(d["methods"]):
        try:
            est = Estimator(md["estimator"])
            rule = parse_threshold_rule(md["threshold"]) if "threshold" in md else None
            methods.append(MethodSpec(
                estimator=est, threshold=rule,
                kappa=parse_kappa_rule(md.get("kappa", "sg")),
                fitter=FitMethod(md.get("fitter", "direct")),
                k=md.get("k"), label=md.get("label", "")))
        except (ArgumentError, ValueError) as exc:
            raise ConfigError(str(exc), f"methods[{i}]") from None
    try:
        x = _source_from_json(d["x"], base)
        bg = _source_from_json(d["bg"], base)
    except TailTiltError as exc:
        raise ConfigError(str(exc), "x/bg") from None
    return ScenarioConfig(
        x=x, bg=bg, n=d["n"], N=d["N"], reps=d["reps"], methods=tuple(methods),
        master_seed=d.get("masterSeed", 0), redraw_background=d.get("redrawBackground", True),
        true_mean=d.get("trueMean"))


def config_to_dict(cfg: ScenarioConfig) -> dict:
    """Fully resolved config (defaults filled in)."""
    methods = []
    for m in cfg.methods:
        md: dict[str, Any] = {"estimator": m.estimator.value, "label": m.label}
        if m.threshold is not None:
            md["threshold"] = threshold_rule_to_json(m.threshold)
        if m.estimator is Estimator.SEMIPARAMETRIC:
            md["kappa"] = kappa_rule_to_json(m.kappa)
            md["fitter"] = m.fitter.value
        if m.k is not None:
            md["k"] = m.k
        methods.append(md)
    return {"x": _source_to_json(cfg.x), "bg": _source_to_json(cfg.bg), "n": cfg.n, "N": cfg.N,
            "reps": cfg.reps, "masterSeed": cfg.master_seed,
            "redrawBackground": cfg.redraw_background, "trueMean": cfg.resolved_true_mean(),
            "methods": methods}


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        d = json.loads(path.read_text())
    except FileNotFoundError:
        raise IngestionError(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    return config_from_dict(d, path.parent)


def bundled_config_path(name: str) -> Path:
    """Path of a config shipped in ``tailtilt/scenarios`` (e.g. ``table1``)."""
    p = Path(__file__).parent / "scenarios" / (name if name.endswith(".json") else name + ".json")
    if not p.exists():
        raise IngestionError(f"no bundled scenario {name!r}")
    return p
