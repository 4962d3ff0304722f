"""``tailtilt`` command line: ``fit``, ``mean``, ``simulate``, ``sweep``.

Reports go to stdout as JSON (CSV for sweeps). Failures print a JSON object
``{"error": ..., "message": ...}`` on stderr and exit with 2 for usage,
config and input errors or 3 for estimation errors.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import warnings
from pathlib import Path

from . import __version__
from . import sim
from .errors import ConfigError, TailTiltError, UsageError
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
    GuillouHall,
    Oracle,
    guillou_hall_scan,
    resolve_kappa,
    resolve_threshold,
)
from .io import read_values
from .sample import Sample
from .tilt import FitMethod, build_tail_model

EXIT_OK, EXIT_USAGE, EXIT_ESTIMATION = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _load(path: str, negate: bool) -> Sample:
    return Sample(read_values(path, negate=negate), source=path)


def _finite(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _emit(doc: dict, out) -> None:
    out.write(json.dumps(doc, indent=2, sort_keys=False, default=_finite) + "\n")


def _resolve_t_kappa(args, x: Sample, bg: Sample, report: dict) -> tuple[float, float]:
    rule = sim.parse_threshold_rule(args.threshold)
    if isinstance(rule, Oracle):
        raise UsageError("oracle thresholds are only available in simulate/sweep")
    t = resolve_threshold(rule, x, bg)
    if isinstance(rule, GuillouHall):
        scan = guillou_hall_scan(x)
        report["kHat"] = scan.k
        report["kFallback"] = scan.fallback
    kappa = resolve_kappa(sim.parse_kappa_rule(args.kappa), bg, t)
    return t, kappa


def cmd_fit(args, out) -> int:
    x, bg = _load(args.x, args.negate), _load(args.bg, args.negate)
    report: dict = {}
    t, kappa = _resolve_t_kappa(args, x, bg, report)
    model = build_tail_model(x, bg, t, kappa, FitMethod(args.fitter))
    d = model.diagnostics
    report.update({
        "t": t, "kappa": kappa, "etaHat": model.eta_hat, "psi": model.log_partition,
        "p2Hat": model.p2_hat,
        "counts": {"n": x.n, "N": bg.n, "xExceedances": model.n_tail_x,
                   "bgExceedances": model.bg_excesses.n},
        "diagnostics": {"momentResidual": d.moment_residual, "iterations": d.iterations,
                        "method": d.method.value},
    })
    _emit(report, out)
    return EXIT_OK


def cmd_mean(args, out) -> int:
    method = Estimator(args.method)
    x = _load(args.x, args.negate)
    report: dict = {}
    if method is Estimator.SAMPLE:
        est = sample_mean(x)
    elif method is Estimator.WINSORIZED_K:
        if args.k is None:
            raise UsageError("--method winsorized-k requires --k")
        est = winsorized_mean_k(x, args.k)
    else:
        if args.threshold is None:
            raise UsageError(f"--method {method.value} requires --threshold")
        needs_bg = method is Estimator.SEMIPARAMETRIC
        rule = sim.parse_threshold_rule(args.threshold)
        if args.bg is None and (needs_bg or isinstance(rule, BackgroundQuantile)):
            raise UsageError(f"--method {method.value} with this threshold requires --bg")
        bg = _load(args.bg, args.negate) if args.bg is not None else x
        if needs_bg:
            t, kappa = _resolve_t_kappa(args, x, bg, report)
            est = semiparametric_mean(x, bg, t, kappa, FitMethod(args.fitter))
        else:
            if isinstance(rule, Oracle):
                raise UsageError("oracle thresholds are only available in simulate/sweep")
            t = resolve_threshold(rule, x, bg)
            est = (winsorized_mean_threshold(x, t) if method is Estimator.WINSORIZED_T
                   else pareto_tail_mean(x, t))
    report = {**est.to_dict(), **report}
    _emit(report, out)
    return EXIT_OK


def _config(args) -> sim.ScenarioConfig:
    if args.config.startswith("bundled:"):
        cfg = sim.load_config(sim.bundled_config_path(args.config[len("bundled:"):]))
    else:
        cfg = sim.load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.reps is not None:
        changes["reps"] = args.reps
    # replace() reruns validation, so --reps 1 is rejected like the config
    return dataclasses.replace(cfg, **changes) if changes else cfg


def cmd_simulate(args, out) -> int:
    cfg = _config(args)
    res = sim.run_scenario(cfg, args.workers)
    if args.csv:
        Path(args.csv).write_text(res.to_csv())
    doc = res.to_json_dict()
    if args.json:
        Path(args.json).write_text(json.dumps(doc, indent=2) + "\n")
    _emit(doc, out)
    return EXIT_OK


def cmd_sweep(args, out) -> int:
    grid = sim.parse_grid(args.grid)
    cfg = _config(args)
    text = sim.threshold_sweep(cfg, grid, args.workers).to_csv()
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tailtilt", description="Heavy-tailed mean estimation by tilting "
                "a background tail.")
    p.add_argument("--version", action="version", version=f"tailtilt {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def policy(sp, threshold_required):
        sp.add_argument("--threshold", required=threshold_required,
                        help="fixed:v | quantile:q (of the background) | gh")
        sp.add_argument("--kappa", default="sg", help="sg (sigma/gamma) | t | fixed:v")
        sp.add_argument("--fitter", default="direct", choices=["direct", "logistic"])
        sp.add_argument("--negate", action="store_true",
                        help="negate all values (estimates a heavy left tail)")

    f = sub.add_parser("fit", help="fit the tilted tail model and report its parameters")
    f.add_argument("--x", required=True)
    f.add_argument("--bg", required=True)
    policy(f, True)
    f.set_defaults(func=cmd_fit)

    m = sub.add_parser("mean", help="estimate the mean of --x")
    m.add_argument("--x", required=True)
    m.add_argument("--bg")
    m.add_argument("--method", default="semiparametric", choices=[e.value for e in Estimator])
    m.add_argument("--k", type=int)
    policy(m, False)
    m.set_defaults(func=cmd_mean)

    for name, func, helptext in (("simulate", cmd_simulate, "run a scenario config"),
                                 ("sweep", cmd_sweep, "bias/variance/MSE curves over a grid")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("config", help="config path, or bundled:<name> (e.g. bundled:table1)")
        s.add_argument("--seed", type=int, help="override masterSeed")
        s.add_argument("--reps", type=int, help="override reps")
        s.add_argument("--workers", type=int, help="worker processes (default TAILTILT_THREADS)")
        if name == "simulate":
            s.add_argument("--csv", help="also write the result table as CSV")
            s.add_argument("--json", help="also write the JSON report to a file")
        else:
            s.add_argument("--grid", required=True, help="a,b,c | lo:hi:steps | geom:lo:hi:steps")
            s.add_argument("--out", help="write CSV here instead of stdout")
        s.set_defaults(func=func)
    return p


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", RuntimeWarning)
            code = args.func(args, out)
        for w in caught:
            err.write(json.dumps({"warning": str(w.message)}) + "\n")
        return code
    except TailTiltError as exc:
        doc = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ConfigError) and exc.path:
            doc["path"] = exc.path
        err.write(json.dumps(doc) + "\n")
        return EXIT_USAGE if isinstance(exc, UsageError) else EXIT_ESTIMATION
    except ValueError as exc:
        # enum conversions of user strings
        err.write(json.dumps({"error": "UsageError", "message": str(exc)}) + "\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
