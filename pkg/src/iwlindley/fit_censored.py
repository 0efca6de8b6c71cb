"""Maximum likelihood under random censoring.

Censored observations contribute their survival probability to the
likelihood, so the profile trick from the complete-data module no longer
applies and the fit runs as a two-dimensional quasi-Newton ascent in
log-parameter space with an analytic score.  The censored score terms need
the shape derivative of the lower incomplete gamma; they are assembled in
the same two regimes as the survival function itself so that neither side
loses precision to cancellation.

Bias reduction mirrors the complete-data module: an approximate analytic
correction that plugs the complete-data cumulant matrices into the censored
estimate, and the bootstrap correction with joint resampling of the
time/flag pairs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._accel import maybe_jit
from . import specfun as sf
from .fit_complete import (
    FitReport,
    LifetimeData,
    _solve_mle,
    _wald,
    bias_matrices,
)
from .iwl_core import IwlParams, _log_pdf_kernel, _log_survival_kernel

__all__ = [
    "CensoredScore",
    "loglik_censored",
    "score_censored",
    "fit_mle_censored",
    "fit_acmle",
    "fit_boot_censored",
]

# exp(-745) is the last double above 0; censored terms are clamped here so a
# wild line-search proposal yields a very bad finite value instead of -inf
_LOG_SURV_FLOOR = -745.0
_GRAD_TOL = 1e-8
_STEP_TOL = 1e-10
_MAX_ITER = 500


@dataclass(frozen=True)
class CensoredScore:
    """Gradient of the censored log-likelihood, components by parameter."""

    d_lambda: float
    d_phi: float


# ---------------------------------------------------------------------------
# kernels


@maybe_jit
def _cens_loglik_kernel(phi, lam, times, status):
    total = 0.0
    clamped = 0
    for i in range(times.shape[0]):
        if status[i] == 1:
            total += _log_pdf_kernel(phi, lam, times[i])
        else:
            ls = _log_survival_kernel(phi, lam, times[i])
            if ls < _LOG_SURV_FLOOR:
                ls = _LOG_SURV_FLOOR
                clamped += 1
            total += ls
    return total, clamped


@maybe_jit
def _cens_score_kernel(phi, lam, times, status):
    # event terms are the complete-data per-observation score; censored terms
    # differentiate log S = log C - log(lam+phi) - log Gamma(phi) with
    # C = (lam+phi) gamma(phi, x) - x^phi e^-x at x = lam/t.  For x < phi+1
    # everything is expressed relative to x^phi e^-x / Gamma(phi) using the
    # power-series sums, which keeps the small-survival regime exact.
    s = lam + phi
    psi = sf.digamma(phi)
    log_lam = math.log(lam)
    d_phi = 0.0
    d_lam = 0.0
    for i in range(times.shape[0]):
        t = times[i]
        if status[i] == 1:
            d_phi += log_lam - 1.0 / s - psi - math.log(t)
            d_lam += (phi + 1.0) / lam - 1.0 / s - 1.0 / t
        else:
            x = lam / t
            log_x = math.log(x)
            if x < phi + 1.0:
                gser, tser = sf._dshape_series(phi, x)
                # = s*gser - 1 >= lam/phi, assembled cancellation-free
                bracket = lam * gser + sf._gser_tail(phi, x)
                d_lam += (gser + (lam + x) / lam) / bracket - 1.0 / s
                d_phi += (gser - s * tser) / bracket + log_x - 1.0 / s - psi
            else:
                p = sf.reg_lower_inc_gamma(phi, x)
                e = math.exp(phi * log_x - x - sf.log_gamma(phi))
                c = s * p - e  # = S * (lam+phi), order 1 in this regime
                d_lam += (p + e * (lam + x) / lam) / c - 1.0 / s
                dshape = sf._reg_dshape(phi, x) + p * psi
                d_phi += (p + s * dshape - e * log_x) / c - 1.0 / s - psi
    return d_phi, d_lam


@maybe_jit
def _neg_loglik_u(u0, u1, times, status):
    # a wild line-search candidate must come back as a bad value, not a
    # domain error from the special functions
    if abs(u0) > 690.0 or abs(u1) > 690.0:
        return math.inf
    value, _ = _cens_loglik_kernel(math.exp(u0), math.exp(u1), times, status)
    return -value


@maybe_jit
def _neg_grad_u(u0, u1, times, status):
    if abs(u0) > 690.0 or abs(u1) > 690.0:
        return math.nan, math.nan
    phi = math.exp(u0)
    lam = math.exp(u1)
    d_phi, d_lam = _cens_score_kernel(phi, lam, times, status)
    return -phi * d_phi, -lam * d_lam


@maybe_jit
def _bfgs_kernel(times, status, phi0, lam0):
    # minimize the negative log-likelihood over u = (log phi, log lam);
    # returns (phi, lam, iterations, code) with code 0 converged,
    # 1 iteration cap, 2 stalled away from a stationary point.
    #
    # Two phases.  BFGS with Armijo backtracking takes the iterate into the
    # attraction basin, but near the optimum the remaining objective
    # improvement drops below float resolution of f while the gradient is
    # still ~1e-6, so the line search saturates before the 1e-8 gradient
    # target.  A Newton polish on the gradient itself (finite-difference
    # Jacobian of the analytic score) finishes the job: the score's noise
    # floor is far lower than the objective's.
    u0 = math.log(phi0)
    u1 = math.log(lam0)
    f = _neg_loglik_u(u0, u1, times, status)
    g0, g1 = _neg_grad_u(u0, u1, times, status)
    h00 = 1.0
    h01 = 0.0
    h11 = 1.0
    code = 1  # 1 = ran out of iterations, downgraded to 2 on early stall
    iters = 0
    first = True
    for it in range(_MAX_ITER):
        iters = it + 1
        gnorm = math.sqrt(g0 * g0 + g1 * g1)
        if gnorm < 1e-6:
            code = 2
            break  # close enough for the polish phase
        p0 = -(h00 * g0 + h01 * g1)
        p1 = -(h01 * g0 + h11 * g1)
        slope = g0 * p0 + g1 * p1
        if slope >= 0.0:
            # curvature estimate went bad: restart from steepest descent
            h00 = 1.0
            h01 = 0.0
            h11 = 1.0
            first = True
            p0 = -g0
            p1 = -g1
            slope = -gnorm * gnorm
        step = 1.0
        n0 = u0
        n1 = u1
        fn = f
        ok = False
        for _ in range(60):
            n0 = u0 + step * p0
            n1 = u1 + step * p1
            fn = _neg_loglik_u(n0, n1, times, status)
            # strict decrease: once improvements drop below the resolution
            # of f the Armijo bound rounds to f itself, which must read as
            # saturation rather than acceptance
            if fn <= f + 1e-4 * step * slope and fn < f and math.isfinite(fn):
                ok = True
                break
            step *= 0.5
        if not ok:
            code = 2
            break  # objective saturated; hand over to the polish
        s0 = n0 - u0
        s1 = n1 - u1
        gn0, gn1 = _neg_grad_u(n0, n1, times, status)
        y0 = gn0 - g0
        y1 = gn1 - g1
        sy = s0 * y0 + s1 * y1
        if first and sy > 0.0:
            scale = sy / (y0 * y0 + y1 * y1)
            h00 = scale
            h11 = scale
            h01 = 0.0
            first = False
        if sy > 1e-12 * math.sqrt((s0 * s0 + s1 * s1) * (y0 * y0 + y1 * y1)):
            rho = 1.0 / sy
            w0 = h00 * y0 + h01 * y1
            w1 = h01 * y0 + h11 * y1
            c1 = rho * rho * (y0 * w0 + y1 * w1) + rho
            h00 = h00 - 2.0 * rho * s0 * w0 + c1 * s0 * s0
            h01 = h01 - rho * (s0 * w1 + s1 * w0) + c1 * s0 * s1
            h11 = h11 - 2.0 * rho * s1 * w1 + c1 * s1 * s1
        u0 = n0
        u1 = n1
        f = fn
        g0 = gn0
        g1 = gn1
    # Newton polish: solve grad = 0 with a central-difference Jacobian.
    # The analytic score is a sequential sum, so its rounding floor grows
    # with the term count; past ~1e3 observations the absolute gradient
    # target sits below that floor and the gate has to scale with n.
    gtol = max(_GRAD_TOL, 3e-11 * times.shape[0])
    fd = 1e-6
    for _ in range(25):
        g0, g1 = _neg_grad_u(u0, u1, times, status)
        gnorm = math.sqrt(g0 * g0 + g1 * g1)
        ap0, ap1 = _neg_grad_u(u0 + fd, u1, times, status)
        am0, am1 = _neg_grad_u(u0 - fd, u1, times, status)
        bp0, bp1 = _neg_grad_u(u0, u1 + fd, times, status)
        bm0, bm1 = _neg_grad_u(u0, u1 - fd, times, status)
        j00 = (ap0 - am0) / (2.0 * fd)
        j01 = 0.25 * ((ap1 - am1) + (bp0 - bm0)) / fd  # symmetrized cross
        j11 = (bp1 - bm1) / (2.0 * fd)
        det = j00 * j11 - j01 * j01
        if not (det > 0.0 and j00 > 0.0 and math.isfinite(det)):
            break  # not in a convex neighborhood; keep the phase-1 reason
        d0 = -(j11 * g0 - j01 * g1) / det
        d1 = -(j00 * g1 - j01 * g0) / det
        dnorm = math.sqrt(d0 * d0 + d1 * d1)
        if dnorm > 0.5:
            # polish entered too far out for a full Newton step
            scale = 0.5 / dnorm
            d0 *= scale
            d1 *= scale
            dnorm = 0.5
        u0 += d0
        u1 += d1
        iters += 1
        if gnorm < gtol and dnorm < _STEP_TOL:
            code = 0
            break
    return math.exp(u0), math.exp(u1), iters, code


# ---------------------------------------------------------------------------
# public operations


def loglik_censored(theta: IwlParams, data: LifetimeData) -> float:
    """Log-likelihood for right-censored data.

    Events contribute log f(t), censored observations log S(t).  A censored
    term whose survival underflows is clamped at the floor of the double
    range with a warning; this only happens for parameter values far from
    any reasonable fit.
    """
    value, clamped = _cens_loglik_kernel(theta.phi, theta.lam,
                                         data.times, data.status)
    if clamped:
        warnings.warn(
            f"loglik_censored: survival underflow at {int(clamped)} censored "
            f"point(s); those terms were clamped at {_LOG_SURV_FLOOR}",
            RuntimeWarning, stacklevel=2)
    return float(value)


def score_censored(theta: IwlParams, data: LifetimeData) -> CensoredScore:
    """Analytic gradient of `loglik_censored` at theta."""
    d_phi, d_lam = _cens_score_kernel(theta.phi, theta.lam,
                                      data.times, data.status)
    return CensoredScore(d_lambda=float(d_lam), d_phi=float(d_phi))


def _require_censorable(data: LifetimeData):
    if data.n < 3:
        raise ValueError("fit: need at least 3 observations")
    if data.d < 2:
        raise ValueError("fit: need at least 2 observed events")


def _start_point(times):
    # complete-data solve with censored times treated as events lands close
    # enough; degenerate samples fall back to a crude location guess
    try:
        theta, _ = _solve_mle(times)
        return theta.phi, theta.lam
    except RuntimeError:
        return 1.0, float(np.median(times))


def _observed_info(theta: IwlParams, data: LifetimeData) -> np.ndarray:
    # central differences of the analytic score, one order cheaper in error
    # than second differences of the log-likelihood
    base = np.array([theta.phi, theta.lam])
    hess = np.empty((2, 2))
    for i in range(2):
        h = 1e-5 * max(1.0, abs(base[i]))
        hi = base.copy()
        lo = base.copy()
        hi[i] += h
        lo[i] -= h
        sp = score_censored(IwlParams(hi[0], hi[1]), data)
        sm = score_censored(IwlParams(lo[0], lo[1]), data)
        hess[i, 0] = (sp.d_phi - sm.d_phi) / (2.0 * h)
        hess[i, 1] = (sp.d_lambda - sm.d_lambda) / (2.0 * h)
    hess = 0.5 * (hess + hess.T)
    return -hess


def _se_ci(theta: IwlParams, data: LifetimeData, ci_level: float):
    info = _observed_info(theta, data)
    det = info[0, 0] * info[1, 1] - info[0, 1] * info[1, 0]
    if not (math.isfinite(det) and det > 0.0 and info[0, 0] > 0.0):
        warnings.warn(
            "observed information is not positive definite at the estimate; "
            "standard errors unavailable", RuntimeWarning, stacklevel=3)
        nan = float("nan")
        return (nan, nan), ((nan, nan), (nan, nan))
    cov = np.linalg.inv(info)
    se = (math.sqrt(cov[0, 0]), math.sqrt(cov[1, 1]))
    return se, _wald((theta.phi, theta.lam), se, ci_level)


def fit_mle_censored(data: LifetimeData, ci_level: float = 0.95) -> FitReport:
    """Maximum-likelihood fit for right-censored data.

    Quasi-Newton ascent in (log phi, log lam) with the analytic score;
    convergence requires gradient norm below 1e-8 and step below 1e-10.
    Standard errors come from the inverse of the numerically differentiated
    observed information at the estimate, Wald intervals around that.
    """
    _require_censorable(data)
    phi0, lam0 = _start_point(data.times)
    phi, lam, iters, code = _bfgs_kernel(data.times, data.status, phi0, lam0)
    if code != 0:
        sc = score_censored(IwlParams(phi, lam), data)
        reason = ("no convergence in "
                  f"{_MAX_ITER} iterations" if code == 1
                  else "line search stalled away from a stationary point")
        raise RuntimeError(
            f"fit_mle_censored: {reason}; last iterate phi={phi:.6g}, "
            f"lam={lam:.6g}, score=({sc.d_phi:.3g}, {sc.d_lambda:.3g})")
    theta = IwlParams(phi, lam)
    se, ci = _se_ci(theta, data, ci_level)
    return FitReport(
        estimates=theta,
        std_errors=se,
        ci=ci,
        ci_level=ci_level,
        loglik=loglik_censored(theta, data),
        method="MLE",
        converged=True,
        iterations=iters,
    )


def fit_acmle(data: LifetimeData, ci_level: float = 0.95) -> FitReport:
    """Approximate analytic bias correction for censored fits.

    Subtracts the complete-data bias vector (total n) evaluated at the
    censored estimate.  Because those cumulant matrices ignore the censoring
    mechanism, the result is an approximation: it removes most of the
    first-order bias but is not second-order unbiased the way the
    complete-data correction is.  Falls back to the uncorrected estimate if
    the correction leaves the parameter space.
    """
    base = fit_mle_censored(data, ci_level=ci_level)
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
            method="ACMLE",
            converged=base.converged,
            iterations=base.iterations,
            fallback_to_mle=True,
        )
    theta = IwlParams(phi, lam)
    se, ci = _se_ci(theta, data, ci_level)
    return FitReport(
        estimates=theta,
        std_errors=se,
        ci=ci,
        ci_level=ci_level,
        loglik=loglik_censored(theta, data),
        method="ACMLE",
        converged=base.converged,
        iterations=base.iterations,
    )


def fit_boot_censored(data: LifetimeData, B: int = 1000,
                      rng: np.random.Generator = None,
                      ci_level: float = 0.95) -> FitReport:
    """Bootstrap bias correction with joint (time, flag) resampling.

    As the complete-data bootstrap, but each replicate refits the censored
    likelihood; resamples with fewer than two events are dropped and counted
    with the other inner-fit failures.
    """
    B = int(B)
    if B < 100:
        raise ValueError("fit_boot_censored: B must be at least 100")
    if not isinstance(rng, np.random.Generator):
        raise TypeError("fit_boot_censored: rng must be a numpy.random.Generator")
    base = fit_mle_censored(data, ci_level=ci_level)
    reps = np.empty((B, 2))
    failures = 0
    used = 0
    for _ in range(B):
        idx = rng.integers(0, data.n, size=data.n)
        t_b = data.times[idx]
        s_b = data.status[idx]
        if int(s_b.sum()) < 2:
            failures += 1
            continue
        phi0, lam0 = _start_point(t_b)
        phi_b, lam_b, _, code = _bfgs_kernel(t_b, s_b, phi0, lam0)
        if code != 0 or not (math.isfinite(phi_b) and math.isfinite(lam_b)):
            failures += 1
            continue
        reps[used, 0] = phi_b
        reps[used, 1] = lam_b
        used += 1
    if failures > B // 10:
        raise RuntimeError(
            f"fit_boot_censored: {failures} of {B} bootstrap replicates "
            "failed to fit")
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
        loglik=loglik_censored(theta, data),
        method="BOOT",
        converged=base.converged,
        iterations=used,
        dropped_replicates=failures,
    )
