"""Maximum likelihood for complete (uncensored) samples.

The profile trick makes this a one-dimensional problem: for fixed shape the
scale score is a quadratic in lam with exactly one positive root, so the
shape is found by bracketed Brent iteration on the profiled score and the
scale follows in closed form.  On top of the MLE sit two bias-reduction
schemes: the analytic Cox-Snell correction built from closed-form cumulants
of the log-likelihood derivatives, and the nonparametric bootstrap
correction 2*theta_hat - mean(resampled estimates).

Data enters as `LifetimeData`, which also serves the censored module; the
operations here require every observation to be an event (d = n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._accel import maybe_jit
from . import specfun as sf
from .iwl_core import IwlParams

__all__ = [
    "LifetimeData",
    "FitReport",
    "BiasMatrices",
    "loglik",
    "profile_lambda",
    "fit_mle",
    "fisher_info",
    "bias_matrices",
    "fit_cmle",
    "fit_boot",
]

_EPS = 2.220446049250313e-16
_PHI_TOL = 1e-10


@dataclass(frozen=True)
class LifetimeData:
    """Observed lifetimes with event flags.

    ``status[i]`` is 1 when ``times[i]`` is an observed failure and 0 when
    the subject was censored at that time.  ``n`` and ``d`` (total count and
    event count) are derived during construction.
    """

    times: np.ndarray
    status: np.ndarray
    n: int = field(init=False)
    d: int = field(init=False)

    def __post_init__(self):
        times = np.ascontiguousarray(np.asarray(self.times, dtype=np.float64))
        status = np.ascontiguousarray(np.asarray(self.status, dtype=np.int64))
        if times.ndim != 1 or status.ndim != 1:
            raise ValueError("LifetimeData: times and status must be one-dimensional")
        if times.shape[0] != status.shape[0]:
            raise ValueError("LifetimeData: times and status lengths differ")
        if times.shape[0] == 0:
            raise ValueError("LifetimeData: empty sample")
        if not np.all(np.isfinite(times)) or np.any(times <= 0.0):
            raise ValueError("LifetimeData: times must be positive and finite")
        if not np.all((status == 0) | (status == 1)):
            raise ValueError("LifetimeData: status flags must be 0 or 1")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "status", status)
        object.__setattr__(self, "n", int(times.shape[0]))
        object.__setattr__(self, "d", int(status.sum()))

    @classmethod
    def complete(cls, times) -> "LifetimeData":
        """All-events data (no censoring)."""
        times = np.asarray(times, dtype=np.float64)
        return cls(times=times, status=np.ones(times.shape[0], dtype=np.int64))


@dataclass(frozen=True)
class FitReport:
    """One fitted parameter pair with its uncertainty summary.

    ``method`` is MLE, CMLE, BOOT or ACMLE.  ``iterations`` counts solver
    iterations for the direct fits and successful replicates for BOOT.
    ``fallback_to_mle`` marks a corrected fit whose correction was abandoned
    because it left the parameter space; ``dropped_replicates`` counts
    bootstrap resamples whose inner fit failed.
    """

    estimates: IwlParams
    std_errors: tuple
    ci: tuple
    ci_level: float
    loglik: float
    method: str
    converged: bool
    iterations: int
    fallback_to_mle: bool = False
    dropped_replicates: int = 0


@dataclass(frozen=True)
class BiasMatrices:
    """Cox-Snell ingredients: K (2x2), A = [A1 | A2] (2x4), and the bias vector."""

    K: np.ndarray
    A: np.ndarray
    bias_vec: np.ndarray


# ---------------------------------------------------------------------------
# normal quantile, used for Wald intervals here and in the censored module


def _normal_quantile(p: float) -> float:
    """Inverse standard normal CDF: rational approximation plus one Halley
    step through erfc, giving close to full double accuracy."""
    if not 0.0 < p < 1.0:
        raise ValueError("normal quantile: p must be in (0, 1)")
    a = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
         1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
    b = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
         6.680131188771972e+01, -1.328068155288572e+01)
    c = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
         -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
    d = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
         3.754408661907416e+00)
    p_low = 0.02425
    if p < p_low:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    elif p <= 1.0 - p_low:
        q = p - 0.5
        r = q * q
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / \
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    else:
        q = math.sqrt(-2.0 * math.log1p(-p))
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    err = 0.5 * math.erfc(-x / math.sqrt(2.0)) - p
    u = err * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


# ---------------------------------------------------------------------------
# kernels


@maybe_jit
def _data_sums(times):
    # explicit accumulation: identical results on the jit and fallback paths;
    # the log1p sum is parameter-free but enters the likelihood value
    s_inv = 0.0
    s_log = 0.0
    s_lp1 = 0.0
    for i in range(times.shape[0]):
        s_inv += 1.0 / times[i]
        s_log += math.log(times[i])
        s_lp1 += math.log1p(1.0 / times[i])
    return s_inv, s_log, s_lp1


@maybe_jit
def _loglik_value(phi, lam, n, sum_inv, sum_log, sum_lp1):
    return (n * (phi + 1.0) * math.log(lam) - n * math.log(lam + phi)
            - n * sf.log_gamma(phi) - lam * sum_inv - (phi + 1.0) * sum_log
            + sum_lp1)


@maybe_jit
def _profile_lambda_kernel(phi, xi):
    # positive root of xi*lam^2 + phi*(xi-1)*lam - phi*(phi+1) = 0
    half_b = 0.5 * phi * (xi - 1.0)
    disc = half_b * half_b + xi * (phi * phi + phi)
    return (-half_b + math.sqrt(disc)) / xi


@maybe_jit
def _phi_score(phi, xi, mean_log):
    # profiled shape score divided by n
    lam = _profile_lambda_kernel(phi, xi)
    return math.log(lam) - 1.0 / (lam + phi) - sf.digamma(phi) - mean_log


@maybe_jit
def _solve_phi(xi, mean_log):
    """Root of the profiled score: bracket from 1 by doubling/halving
    (the score runs from +inf at 0+ to a negative limit), then Brent.

    Returns (phi, iterations, status): status 0 converged, 1 no bracket
    found, 2 iteration cap hit.
    """
    f0 = _phi_score(1.0, xi, mean_log)
    if f0 == 0.0:
        return 1.0, 1, 0
    lo = 1.0
    hi = 1.0
    flo = f0
    fhi = f0
    if f0 > 0.0:
        for _ in range(120):
            hi *= 2.0
            fhi = _phi_score(hi, xi, mean_log)
            if fhi <= 0.0:
                break
            lo = hi
            flo = fhi
        if fhi > 0.0:
            return hi, 0, 1
    else:
        for _ in range(120):
            lo *= 0.5
            flo = _phi_score(lo, xi, mean_log)
            if flo >= 0.0:
                break
            hi = lo
            fhi = flo
        if flo < 0.0:
            return lo, 0, 1

    # Brent-Dekker on [lo, hi]
    a = lo
    b = hi
    c = hi
    fa = flo
    fb = fhi
    fc = fhi
    d = 0.0
    e = 0.0
    for it in range(200):
        if (fb > 0.0 and fc > 0.0) or (fb < 0.0 and fc < 0.0):
            c = a
            fc = fa
            d = b - a
            e = d
        if abs(fc) < abs(fb):
            a = b
            b = c
            c = a
            fa = fb
            fb = fc
            fc = fa
        tol1 = 2.0 * _EPS * abs(b) + 0.5 * _PHI_TOL
        xm = 0.5 * (c - b)
        if abs(xm) <= tol1 or fb == 0.0:
            return b, it + 1, 0
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * xm * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            p = abs(p)
            if 2.0 * p < min(3.0 * xm * q - abs(tol1 * q), abs(e * q)):
                e = d
                d = p / q
            else:
                d = xm
                e = d
        else:
            d = xm
            e = d
        a = b
        fa = fb
        if abs(d) > tol1:
            b += d
        else:
            b += tol1 if xm > 0.0 else -tol1
        fb = _phi_score(b, xi, mean_log)
    return b, 200, 2


@maybe_jit
def _fisher_entries(phi, lam):
    # per-observation information entries, (phi,phi) (phi,lam) (lam,lam)
    s = lam + phi
    inv_s2 = 1.0 / (s * s)
    return (sf.trigamma(phi) - inv_s2,
            -1.0 / lam - inv_s2,
            (phi + 1.0) / (lam * lam) - inv_s2)


# ---------------------------------------------------------------------------
# public operations


def loglik(theta: IwlParams, data: LifetimeData) -> float:
    """Complete-data log-likelihood.

    n(phi+1) log lam - n log(lam+phi) - n log Gamma(phi)
    - lam * sum(1/t) - (phi+1) * sum(log t) + sum(log(1+1/t));
    requires every flag = 1.
    """
    if data.d != data.n:
        raise ValueError("loglik: complete-data operation requires all events (d = n)")
    s_inv, s_log, s_lp1 = _data_sums(data.times)
    return _loglik_value(theta.phi, theta.lam, float(data.n), s_inv, s_log, s_lp1)


def profile_lambda(phi: float, xi: float) -> float:
    """Scale that zeroes the lam score at fixed shape, with xi = mean(1/t).

    The positive root of xi lam^2 + phi(xi-1) lam - phi(phi+1) = 0; the
    discriminant strictly exceeds the squared linear term, so the root is
    always positive.
    """
    phi = float(phi)
    xi = float(xi)
    if not (phi > 0.0 and math.isfinite(phi)):
        raise ValueError("profile_lambda: phi must be positive and finite")
    if not (xi > 0.0 and math.isfinite(xi)):
        raise ValueError("profile_lambda: xi must be positive and finite")
    return float(_profile_lambda_kernel(phi, xi))


def _require_complete(data: LifetimeData):
    if data.n < 3:
        raise ValueError("fit: need at least 3 observations")
    if data.d != data.n:
        raise ValueError("fit: complete-data fit requires all events (d = n)")
    if float(np.min(data.times)) == float(np.max(data.times)):
        raise ValueError("fit: degenerate sample, all times equal")


def _wald(est, se, level):
    z = _normal_quantile(0.5 + level / 2.0)
    return ((est[0] - z * se[0], est[0] + z * se[0]),
            (est[1] - z * se[1], est[1] + z * se[1]))


def _solve_mle(times):
    """Shared solver core: returns (theta, iterations) or raises."""
    s_inv, s_log, _ = _data_sums(times)
    n = times.shape[0]
    xi = s_inv / n
    mean_log = s_log / n
    # For large shape the profiled score behaves like 1/(2 phi) - gap with
    # gap = log(AM/GM of 1/t) >= 0, zero iff all times are equal.  A gap at
    # rounding-noise level puts the root past phi ~ 1e8, where the score is
    # pure cancellation error: refuse rather than return a noise root.
    gap = math.log(xi) + mean_log
    if gap <= 1e-8:
        raise RuntimeError(
            "fit_mle: sample spread too small to identify the shape "
            f"(log AM/GM of reciprocals = {gap:.3g}); the estimate diverges")
    phi, iters, status = _solve_phi(xi, mean_log)
    if status == 1:
        raise RuntimeError(
            "fit_mle: no sign change found for the shape score "
            f"(xi={xi:.6g}, mean log t={mean_log:.6g}); data may be "
            "numerically degenerate")
    if status == 2:
        raise RuntimeError(
            f"fit_mle: shape solve did not converge in 200 iterations "
            f"(last phi={phi:.6g})")
    lam = _profile_lambda_kernel(phi, xi)
    return IwlParams(phi, lam), iters


def fit_mle(data: LifetimeData, ci_level: float = 0.95) -> FitReport:
    """Maximum-likelihood fit for complete data.

    The shape solves the profiled score equation by bracketed Brent
    iteration (tolerance 1e-10 on phi); the scale follows from
    `profile_lambda`.  Standard errors come from the inverse Fisher
    information at the estimate and the intervals are symmetric Wald.
    """
    _require_complete(data)
    theta, iters = _solve_mle(data.times)
    info = fisher_info(theta, data.n)
    cov = np.linalg.inv(info)
    se = (math.sqrt(cov[0, 0]), math.sqrt(cov[1, 1]))
    est = (theta.phi, theta.lam)
    return FitReport(
        estimates=theta,
        std_errors=se,
        ci=_wald(est, se, ci_level),
        ci_level=ci_level,
        loglik=loglik(theta, data),
        method="MLE",
        converged=True,
        iterations=iters,
    )


def fisher_info(theta: IwlParams, n: int) -> np.ndarray:
    """Expected information for n observations, parameter order (phi, lam).

    Second derivatives of the log-likelihood are non-random here, so the
    observed and expected information coincide.  Assembled positive
    definite: [[psi'(phi) - 1/s^2, -1/lam - 1/s^2],
               [-1/lam - 1/s^2, (phi+1)/lam^2 - 1/s^2]] * n with s = lam+phi.
    """
    n = int(n)
    if n < 1:
        raise ValueError("fisher_info: n must be at least 1")
    i11, i12, i22 = _fisher_entries(theta.phi, theta.lam)
    info = n * np.array([[i11, i12], [i12, i22]])
    det = info[0, 0] * info[1, 1] - info[0, 1] * info[1, 0]
    if not (det > 0.0 and math.isfinite(det)):
        raise ValueError("fisher_info: information matrix is singular at theta")
    return info


def bias_matrices(theta: IwlParams, n: int) -> BiasMatrices:
    """Closed-form Cox-Snell matrices and the O(1/n) bias vector.

    Because the second derivatives carry no data, the mixed cumulants
    collapse to a_ij^(l) = h_ijl / 2, so A = (n/2) [H1 | H2] with H_l the
    matrix of third derivatives with one index pinned to l.  The bias is
    K^{-1} A vec(K^{-1}) with vec stacking columns.
    """
    n = int(n)
    if n < 1:
        raise ValueError("bias_matrices: n must be at least 1")
    phi, lam = theta.phi, theta.lam
    s = lam + phi
    inv_s3 = 1.0 / (s * s * s)
    h111 = -2.0 * inv_s3 - sf.tetragamma(phi)
    h112 = -2.0 * inv_s3
    h122 = -1.0 / (lam * lam) - 2.0 * inv_s3
    h222 = 2.0 * (phi + 1.0) / (lam * lam * lam) - 2.0 * inv_s3
    kmat = fisher_info(theta, n)
    a1 = 0.5 * n * np.array([[h111, h112], [h112, h122]])
    a2 = 0.5 * n * np.array([[h112, h122], [h122, h222]])
    amat = np.hstack([a1, a2])
    kinv = np.linalg.inv(kmat)
    bias = kinv @ amat @ kinv.reshape(-1, 1, order="F").ravel()
    return BiasMatrices(K=kmat, A=amat, bias_vec=bias)


def fit_cmle(data: LifetimeData, ci_level: float = 0.95) -> FitReport:
    """Cox-Snell bias-corrected MLE: subtract the plug-in bias vector.

    If the correction pushes a component out of the parameter space the
    report falls back to the uncorrected MLE and says so.
    """
    base = fit_mle(data, ci_level=ci_level)
    bias = bias_matrices(base.estimates, data.n).bias_vec
    phi = base.estimates.phi - bias[0]
    lam = base.estimates.lam - bias[1]
    if phi <= 0.0 or lam <= 0.0:
        return FitReport(
            estimates=base.estimates,
            std_errors=base.std_errors,
            ci=base.ci,
            ci_level=ci_level,
            loglik=base.loglik,
            method="CMLE",
            converged=base.converged,
            iterations=base.iterations,
            fallback_to_mle=True,
        )
    theta = IwlParams(phi, lam)
    cov = np.linalg.inv(fisher_info(theta, data.n))
    se = (math.sqrt(cov[0, 0]), math.sqrt(cov[1, 1]))
    return FitReport(
        estimates=theta,
        std_errors=se,
        ci=_wald((phi, lam), se, ci_level),
        ci_level=ci_level,
        loglik=loglik(theta, data),
        method="CMLE",
        converged=base.converged,
        iterations=base.iterations,
    )


def fit_boot(data: LifetimeData, B: int = 1000, rng: np.random.Generator = None,
             ci_level: float = 0.95) -> FitReport:
    """Bootstrap bias-corrected MLE: 2*theta_hat - mean over B resamples.

    Observations are resampled i.i.d. with replacement; replicates whose
    inner fit fails are dropped and counted, and more than 10% failures
    aborts.  Standard errors are the replicate standard deviations, with
    Wald intervals around the corrected estimate.
    """
    B = int(B)
    if B < 100:
        raise ValueError("fit_boot: B must be at least 100")
    if not isinstance(rng, np.random.Generator):
        raise TypeError("fit_boot: rng must be a numpy.random.Generator")
    base = fit_mle(data, ci_level=ci_level)
    reps = np.empty((B, 2))
    failures = 0
    used = 0
    for _ in range(B):
        idx = rng.integers(0, data.n, size=data.n)
        try:
            theta_b, _ = _solve_mle(data.times[idx])
        except (RuntimeError, ValueError):
            failures += 1
            continue
        reps[used, 0] = theta_b.phi
        reps[used, 1] = theta_b.lam
        used += 1
    if failures > B // 10:
        raise RuntimeError(
            f"fit_boot: {failures} of {B} bootstrap replicates failed to fit")
    reps = reps[:used]
    boot_mean = reps.mean(axis=0)
    phi = 2.0 * base.estimates.phi - boot_mean[0]
    lam = 2.0 * base.estimates.lam - boot_mean[1]
    se = (float(reps[:, 0].std(ddof=1)), float(reps[:, 1].std(ddof=1)))
    if phi <= 0.0 or lam <= 0.0:
        return FitReport(
            estimates=base.estimates,
            std_errors=se,
            ci=_wald((base.estimates.phi, base.estimates.lam), se, ci_level),
            ci_level=ci_level,
            loglik=base.loglik,
            method="BOOT",
            converged=base.converged,
            iterations=used,
            fallback_to_mle=True,
            dropped_replicates=failures,
        )
    theta = IwlParams(phi, lam)
    return FitReport(
        estimates=theta,
        std_errors=se,
        ci=_wald((phi, lam), se, ci_level),
        ci_level=ci_level,
        loglik=loglik(theta, data),
        method="BOOT",
        converged=base.converged,
        iterations=used,
        dropped_replicates=failures,
    )
