"""Command-line interface.

Every subcommand is a thin wrapper: numbers printed here are exactly the
numbers the corresponding library call returns, formatted with '%.10g' (CSV
and the human report) or Python's repr (JSON).  The decimal separator is
always '.', independent of locale.

Exit codes: 0 success, 2 for usage/parse problems, 3 for numerical
failures (a fit or a whole comparison that did not converge).

Dataset files are CSV with a header: a `time` column of positive decimals
and an optional `status` column of 0/1 flags (0 = right-censored).  Without
a status column the data are treated as complete.  `--demo aircraft`
substitutes the embedded aircraft-device reliability table (194 units, 11
censored).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from ._aircraft import aircraft_data
from .baselines import MODEL_IDS, fit_baseline
from .fit_censored import fit_acmle, fit_boot_censored, fit_mle_censored
from .fit_complete import (LifetimeData, FitReport, fit_boot, fit_cmle,
                           fit_mle)
from .iwl_core import IwlParams, hazard, sample
from .nonparam import kaplan_meier, ttt_curve
from .simlab import ExperimentConfig, run_experiment

__all__ = ["main", "read_dataset", "parse_config"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def read_dataset(path: str) -> LifetimeData:
    """Load a CSV dataset; raises ValueError on any malformation."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty file")
        field_map = {f.strip(): f for f in reader.fieldnames}
        if "time" not in field_map:
            raise ValueError(f"{path}: missing required column 'time'")
        time_key = field_map["time"]
        status_key = field_map.get("status")
        times = []
        status = []
        for lineno, row in enumerate(reader, start=2):
            raw = (row.get(time_key) or "").strip()
            try:
                t = float(raw)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad time {raw!r}") from None
            if not t > 0:
                raise ValueError(f"{path}:{lineno}: time must be positive")
            times.append(t)
            if status_key is not None:
                s = (row.get(status_key) or "").strip()
                if s not in ("0", "1"):
                    raise ValueError(
                        f"{path}:{lineno}: status must be 0 or 1, got {s!r}")
                status.append(int(s))
            else:
                status.append(1)
    if not times:
        raise ValueError(f"{path}: no data rows")
    return LifetimeData(np.array(times, dtype=np.float64),
                        np.array(status, dtype=np.int64))


def _load(args) -> LifetimeData:
    if args.demo is not None:
        if args.path is not None:
            raise ValueError("give either a dataset path or --demo, not both")
        return aircraft_data()
    if args.path is None:
        raise ValueError("need a dataset path or --demo aircraft")
    return read_dataset(args.path)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _curve_csv(curve, xname: str, yname: str) -> str:
    lines = [f"{xname},{yname}"]
    lines += [f"{x:.10g},{y:.10g}" for x, y in curve.points]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands


def _cmd_sample(args) -> int:
    theta = IwlParams(args.phi, args.lam)  # validates positivity
    if args.n < 1:
        raise ValueError("--n must be >= 1")
    draws = sample(theta, args.n, np.random.default_rng(args.seed))
    _emit("time\n" + "".join(f"{t:.10g}\n" for t in draws), args.out)
    return EXIT_OK


def _fit_report(data: LifetimeData, method: str, boot_reps: int,
                ci_level: float, seed: int) -> FitReport:
    censored = data.d < data.n
    if method == "mle":
        return (fit_mle_censored(data, ci_level) if censored
                else fit_mle(data, ci_level))
    if method == "cmle":
        # on censored data the corrected fit is the approximate variant,
        # and the report says so in its method field
        return (fit_acmle(data, ci_level) if censored
                else fit_cmle(data, ci_level))
    rng = np.random.default_rng(seed)
    return (fit_boot_censored(data, boot_reps, rng, ci_level) if censored
            else fit_boot(data, boot_reps, rng, ci_level))


def _cmd_fit(args) -> int:
    data = _load(args)
    report = _fit_report(data, args.method, args.boot_reps, args.ci_level,
                         args.seed)
    aic = -2.0 * report.loglik + 4.0
    if args.json:
        payload = {
            "method": report.method,
            "phi": report.estimates.phi,
            "lambda": report.estimates.lam,
            "se_phi": report.std_errors[0],
            "se_lambda": report.std_errors[1],
            "ci_phi": list(report.ci[0]),
            "ci_lambda": list(report.ci[1]),
            "loglik": report.loglik,
            "aic": aic,
            "converged": report.converged,
        }
        print(json.dumps(payload))
        return EXIT_OK
    level = f"{100.0 * report.ci_level:.10g}%"
    rows = [
        ("method", report.method),
        ("phi", f"{report.estimates.phi:.10g}"),
        ("se_phi", f"{report.std_errors[0]:.10g}"),
        ("lambda", f"{report.estimates.lam:.10g}"),
        ("se_lambda", f"{report.std_errors[1]:.10g}"),
        (f"ci_phi_{level}", f"({report.ci[0][0]:.10g}, {report.ci[0][1]:.10g})"),
        (f"ci_lambda_{level}",
         f"({report.ci[1][0]:.10g}, {report.ci[1][1]:.10g})"),
        ("loglik", f"{report.loglik:.10g}"),
        ("aic", f"{aic:.10g}"),
        ("converged", "yes" if report.converged else "no"),
    ]
    width = max(len(k) for k, _ in rows)
    for key, value in rows:
        print(f"{key:<{width}}  {value}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    data = _load(args)
    wanted = ([m.strip() for m in args.models.split(",")]
              if args.models else list(MODEL_IDS))
    for m in wanted:
        if m not in MODEL_IDS:
            raise ValueError(f"unknown model {m!r}; choose from "
                             + ", ".join(MODEL_IDS))
    fits = []
    for m in wanted:
        try:
            fits.append(fit_baseline(m, data))
        except RuntimeError as exc:
            _err(f"compare: {m} failed: {exc}")
    if not fits:
        _err("compare: no model converged")
        return EXIT_NUMERIC
    fits.sort(key=lambda f: f.criteria["AIC"])
    best = fits[0].model_id
    if args.json:
        payload = [{
            "model": f.model_id,
            "params": {n: v for n, v in zip(f.param_names, f.params)},
            "loglik": f.loglik,
            "criteria": f.criteria,
            "best": f.model_id == best,
        } for f in fits]
        print(json.dumps(payload))
        return EXIT_OK
    print("model,loglik,AIC,AICC,HQIC,CAIC,best")
    for f in fits:
        c = f.criteria
        print(f"{f.model_id},{f.loglik:.10g},{c['AIC']:.10g},"
              f"{c['AICC']:.10g},{c['HQIC']:.10g},{c['CAIC']:.10g},"
              f"{1 if f.model_id == best else 0}")
    return EXIT_OK


def _cmd_km(args) -> int:
    _emit(_curve_csv(kaplan_meier(_load(args)), "time", "survival"), None)
    return EXIT_OK


def _cmd_ttt(args) -> int:
    _emit(_curve_csv(ttt_curve(_load(args)), "proportion", "ttt"), None)
    return EXIT_OK


def _cmd_hazard(args) -> int:
    theta = IwlParams(args.phi, args.lam)
    if not 0.0 < args.tmin < args.tmax:
        raise ValueError("need 0 < --tmin < --tmax")
    if args.points < 2:
        raise ValueError("--points must be >= 2")
    grid = np.linspace(args.tmin, args.tmax, args.points)
    values = hazard(theta, grid)
    lines = ["time,hazard"]
    lines += [f"{t:.10g},{h:.10g}" for t, h in zip(grid, values)]
    _emit("\n".join(lines) + "\n", None)
    return EXIT_OK


_CONFIG_KEYS = ("phi", "lambda", "n_grid", "reps", "methods", "boot_b",
                "censor_target", "ci_level", "master_seed")


def parse_config(path: str) -> ExperimentConfig:
    """key=value lines with '#' comments, mirroring ExperimentConfig."""
    raw = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            if key in raw:
                raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
            raw[key] = value
    for required in ("phi", "lambda", "n_grid", "reps"):
        if required not in raw:
            raise ValueError(f"{path}: missing required key {required!r}")
    try:
        return ExperimentConfig(
            theta_true=IwlParams(float(raw["phi"]), float(raw["lambda"])),
            n_grid=tuple(int(tok) for tok in raw["n_grid"].split(",")),
            reps=int(raw["reps"]),
            methods=tuple(raw["methods"].split(","))
            if "methods" in raw else ("MLE", "CMLE", "BOOT"),
            boot_b=int(raw.get("boot_b", 1000)),
            censor_target=float(raw.get("censor_target", 0.0)),
            ci_level=float(raw.get("ci_level", 0.95)),
            master_seed=int(raw.get("master_seed", 0)),
        )
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def _cmd_simulate(args) -> int:
    config = parse_config(args.config)
    result = run_experiment(config)
    _emit(result.to_csv(), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument wiring


def _add_dataset_args(sub):
    sub.add_argument("path", nargs="?", default=None,
                     help="CSV dataset (columns: time[, status])")
    sub.add_argument("--demo", choices=("aircraft",), default=None,
                     help="use the embedded aircraft dataset")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iwlindley",
        description="Inverse weighted Lindley lifetimes: sampling, fitting, "
                    "model comparison, diagnostics, simulation.")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("sample", help="draw from the distribution")
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--lambda", type=float, required=True, dest="lam")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(run=_cmd_sample)

    p = subs.add_parser("fit", help="fit the model to a dataset")
    _add_dataset_args(p)
    p.add_argument("--method", choices=("mle", "cmle", "boot"), default="mle")
    p.add_argument("--boot-reps", type=int, default=1000)
    p.add_argument("--ci-level", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0,
                   help="bootstrap resampling seed")
    p.add_argument("--json", action="store_true")
    p.set_defaults(run=_cmd_fit)

    p = subs.add_parser("compare", help="rank candidate models by criteria")
    _add_dataset_args(p)
    p.add_argument("--models", default=None,
                   help=f"comma list from: {','.join(MODEL_IDS)}")
    p.add_argument("--json", action="store_true")
    p.set_defaults(run=_cmd_compare)

    p = subs.add_parser("km", help="Kaplan-Meier survival points")
    _add_dataset_args(p)
    p.set_defaults(run=_cmd_km)

    p = subs.add_parser("ttt", help="TTT transform points")
    _add_dataset_args(p)
    p.set_defaults(run=_cmd_ttt)

    p = subs.add_parser("hazard", help="hazard values on a time grid")
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--lambda", type=float, required=True, dest="lam")
    p.add_argument("--tmin", type=float, required=True)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--points", type=int, default=100)
    p.set_defaults(run=_cmd_hazard)

    p = subs.add_parser("simulate", help="run a Monte Carlo experiment")
    p.add_argument("--config", required=True,
                   help="key=value file (see parse_config)")
    p.add_argument("--out", default=None)
    p.set_defaults(run=_cmd_simulate)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.run(args)
    except (ValueError, OSError) as exc:
        _err(f"iwlindley {args.command}: {exc}")
        return EXIT_USAGE
    except RuntimeError as exc:
        _err(f"iwlindley {args.command}: {exc}")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
