"""Monte Carlo experiment engine for the estimator comparison.

For each cell (sample size x method) the engine draws `reps` independent
datasets, fits them, and aggregates

    MRE  = (1/N) sum  theta_hat / theta
    RMSE = (1/N) sum (theta_hat - theta)^2 / theta^2

per parameter together with the Wald-interval coverage frequency, where N
counts the replicates whose fit succeeded.  Replicates that fail (solver
error, too few events after censoring, unusable standard errors) are
excluded from the averages and reported in the `failures` column; a cell
whose failure rate passes 20% aborts the run, since its averages would no
longer mean much.

Seeding: replicate `rep` at sample size `n` uses
``SeedSequence(master_seed, spawn_key=(n, rep))`` split into a data stream
and a bootstrap stream.  Every replicate is therefore reproducible on its
own, independent of execution order, and a parallel driver may partition
the replicate range and merge the per-cell sums; this implementation runs
them sequentially.

Censoring times are exponential.  Their rate is calibrated once per
(theta, target) by solving 1 - E[exp(-mu T)] = target, the expectation
estimated from a fixed 10^5-draw sample, then cached.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .fit_censored import fit_acmle, fit_boot_censored, fit_mle_censored
from .fit_complete import LifetimeData, fit_boot, fit_cmle, fit_mle
from .iwl_core import IwlParams, sample

__all__ = ["ExperimentConfig", "SimResult", "SimRow", "gen_censored_sample",
           "run_experiment"]

_METHOD_ORDER = ("MLE", "CMLE", "BOOT")
_CAL_DRAWS = 100_000
_CAL_SEED = 0x51AB5EED
_rate_cache: dict = {}


@dataclass(frozen=True)
class ExperimentConfig:
    theta_true: IwlParams
    n_grid: tuple
    reps: int
    methods: tuple = _METHOD_ORDER
    boot_b: int = 1000
    censor_target: float = 0.0
    ci_level: float = 0.95
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "n_grid",
                           tuple(int(n) for n in self.n_grid))
        if not self.n_grid or any(n < 5 for n in self.n_grid):
            raise ValueError("ExperimentConfig: n_grid entries must be >= 5")
        if self.reps < 1:
            raise ValueError("ExperimentConfig: reps must be >= 1")
        methods = tuple(str(m).upper() for m in self.methods)
        if not methods or any(m not in _METHOD_ORDER for m in methods):
            raise ValueError(
                "ExperimentConfig: methods must be a nonempty subset of "
                + "/".join(_METHOD_ORDER))
        object.__setattr__(self, "methods", methods)
        if "BOOT" in methods and self.boot_b < 100:
            raise ValueError("ExperimentConfig: boot_b must be >= 100")
        if not 0.0 <= self.censor_target < 1.0:
            raise ValueError("ExperimentConfig: censor_target must be in [0, 1)")
        if not 0.0 < self.ci_level < 1.0:
            raise ValueError("ExperimentConfig: ci_level must be in (0, 1)")
        if int(self.master_seed) < 0:
            raise ValueError("ExperimentConfig: master_seed must be >= 0")


@dataclass(frozen=True)
class SimRow:
    """Aggregates for one (sample size, method, parameter) cell."""

    n: int
    method: str
    parameter: str
    mre: float
    rmse: float
    coverage: float
    failures: int

    def __post_init__(self):
        if not 0.0 <= self.coverage <= 1.0:
            raise ValueError("SimRow: coverage must be in [0, 1]")
        if self.rmse < 0.0 or self.failures < 0:
            raise ValueError("SimRow: rmse and failures must be nonnegative")


@dataclass(frozen=True)
class SimResult:
    config: ExperimentConfig
    rows: tuple

    def to_csv(self) -> str:
        lines = ["n,method,parameter,mre,rmse,coverage,failures"]
        for r in self.rows:
            lines.append(f"{r.n},{r.method},{r.parameter},{r.mre:.10g},"
                         f"{r.rmse:.10g},{r.coverage:.10g},{r.failures}")
        return "\n".join(lines) + "\n"


def _censor_rate(theta: IwlParams, target: float) -> float:
    key = (theta.phi, theta.lam, round(target, 12))
    hit = _rate_cache.get(key)
    if hit is not None:
        return hit
    rng = np.random.default_rng(np.random.SeedSequence(_CAL_SEED))
    draws = sample(theta, _CAL_DRAWS, rng)

    def frac(mu):
        return 1.0 - float(np.mean(np.exp(-mu * draws)))

    lo, hi = 1e-12, 1e12
    if not frac(lo) <= target <= frac(hi):
        raise RuntimeError(
            f"gen_censored_sample: censoring target {target} unreachable "
            "with exponential censoring times")
    llo, lhi = math.log(lo), math.log(hi)
    for _ in range(100):
        mid = 0.5 * (llo + lhi)
        if frac(math.exp(mid)) < target:
            llo = mid
        else:
            lhi = mid
    mu = math.exp(0.5 * (llo + lhi))
    _rate_cache[key] = mu
    return mu


def gen_censored_sample(theta: IwlParams, n: int, censor_target: float,
                        rng: np.random.Generator) -> LifetimeData:
    """Draw n lifetimes, censor roughly the requested fraction.

    T comes from the model, C independently from the calibrated exponential;
    the observation is (min(T, C), indicator T <= C).  A zero target skips
    censoring entirely.
    """
    if not 0.0 <= censor_target < 1.0:
        raise ValueError("gen_censored_sample: censor_target must be in [0, 1)")
    t = sample(theta, n, rng)
    if censor_target == 0.0:
        return LifetimeData.complete(t)
    mu = _censor_rate(theta, censor_target)
    c = rng.exponential(1.0 / mu, n)
    status = (t <= c).astype(np.int64)
    return LifetimeData(np.minimum(t, c), status)


class _Accum:
    __slots__ = ("rel", "sq", "cover", "ok", "fail")

    def __init__(self):
        self.rel = [0.0, 0.0]
        self.sq = [0.0, 0.0]
        self.cover = [0, 0]
        self.ok = 0
        self.fail = 0

    def add(self, report, theta):
        est = (report.estimates.phi, report.estimates.lam)
        true = (theta.phi, theta.lam)
        for i in range(2):
            rel = est[i] / true[i]
            self.rel[i] += rel
            self.sq[i] += (rel - 1.0) ** 2
            lo, hi = report.ci[i]
            if lo <= true[i] <= hi:
                self.cover[i] += 1
        self.ok += 1


def _fit_once(method, data, config, boot_seed, censored):
    if method == "MLE":
        return (fit_mle_censored(data, config.ci_level) if censored
                else fit_mle(data, config.ci_level))
    if method == "CMLE":
        return (fit_acmle(data, config.ci_level) if censored
                else fit_cmle(data, config.ci_level))
    boot_rng = np.random.default_rng(boot_seed)
    if censored:
        return fit_boot_censored(data, config.boot_b, boot_rng,
                                 config.ci_level)
    return fit_boot(data, config.boot_b, boot_rng, config.ci_level)


def _usable(report):
    values = [report.estimates.phi, report.estimates.lam,
              *report.std_errors]
    for lo, hi in report.ci:
        values += [lo, hi]
    return all(math.isfinite(v) for v in values)


def run_experiment(config: ExperimentConfig) -> SimResult:
    """Run the full grid; see the module docstring for the protocol."""
    theta = config.theta_true
    censored = config.censor_target > 0.0
    methods = [m for m in _METHOD_ORDER if m in config.methods]
    rows = []
    for n in config.n_grid:
        acc = {m: _Accum() for m in methods}
        for rep in range(config.reps):
            ss = np.random.SeedSequence(config.master_seed,
                                        spawn_key=(n, rep))
            data_seed, boot_seed = ss.spawn(2)
            data = gen_censored_sample(theta, n, config.censor_target,
                                       np.random.default_rng(data_seed))
            for m in methods:
                with warnings.catch_warnings():
                    warnings.filterwarnings("ignore", category=RuntimeWarning)
                    try:
                        report = _fit_once(m, data, config, boot_seed,
                                           censored)
                    except (RuntimeError, ValueError):
                        acc[m].fail += 1
                        continue
                if _usable(report):
                    acc[m].add(report, theta)
                else:
                    acc[m].fail += 1
        for m in methods:
            a = acc[m]
            if a.fail > 0.2 * config.reps:
                raise RuntimeError(
                    f"run_experiment: cell n={n} method={m} failed "
                    f"{a.fail}/{config.reps} replicates; aborting")
            label = "ACMLE" if (m == "CMLE" and censored) else m
            for i, pname in enumerate(("phi", "lambda")):
                rows.append(SimRow(
                    n=n, method=label, parameter=pname,
                    mre=a.rel[i] / a.ok,
                    rmse=a.sq[i] / a.ok,
                    coverage=a.cover[i] / a.ok,
                    failures=a.fail,
                ))
    return SimResult(config=config, rows=tuple(rows))
