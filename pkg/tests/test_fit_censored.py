import math
import warnings

import numpy as np
import pytest

from iwlindley import fit_censored as fc
from iwlindley import fit_complete as fit
from iwlindley import iwl_core as ic
from iwlindley.fit_complete import LifetimeData
from iwlindley.iwl_core import IwlParams


TRUTH = IwlParams(2.0, 4.0)
CENSOR_SCALE = 7.3  # exponential censoring, ~30% at (2, 4)


def censored_sample(rng, n, theta=TRUTH, scale=CENSOR_SCALE):
    lifetimes = ic.sample(theta, n, rng)
    cutoffs = rng.exponential(scale, size=n)
    return LifetimeData(times=np.minimum(lifetimes, cutoffs),
                        status=(lifetimes <= cutoffs).astype(np.int64))


class TestLoglikCensored:
    def test_single_censored_observation(self):
        # S(1 | 1, 1) = (2 gamma(1,1) - e^{-1}) / 2 = (2 - 3 e^{-1}) / 2
        data = LifetimeData(times=[1.0], status=[0])
        got = fc.loglik_censored(IwlParams(1.0, 1.0), data)
        ref = math.log(2.0 - 3.0 * math.exp(-1.0)) - math.log(2.0)
        assert got == pytest.approx(ref, rel=1e-14)

    def test_reduces_to_complete(self):
        rng = np.random.default_rng(5)
        data = LifetimeData.complete(ic.sample(TRUTH, 120, rng))
        th = IwlParams(1.8, 3.5)
        assert fc.loglik_censored(th, data) == pytest.approx(
            fit.loglik(th, data), abs=1e-10)

    def test_matches_pointwise_terms(self):
        rng = np.random.default_rng(6)
        data = censored_sample(rng, 60)
        th = IwlParams(2.4, 3.1)
        ref = 0.0
        for t, flag in zip(data.times, data.status):
            if flag:
                ref += math.log(float(ic.pdf(th, t)))
            else:
                ref += math.log(float(ic.survival(th, t)))
        assert fc.loglik_censored(th, data) == pytest.approx(ref, abs=1e-10)

    def test_permutation_and_partition(self):
        rng = np.random.default_rng(10)
        data = censored_sample(rng, 40)
        th = IwlParams(1.1, 2.2)
        perm = rng.permutation(40)
        shuffled = LifetimeData(times=data.times[perm], status=data.status[perm])
        assert fc.loglik_censored(th, shuffled) == pytest.approx(
            fc.loglik_censored(th, data), rel=1e-13)
        left = LifetimeData(times=data.times[:17], status=data.status[:17])
        right = LifetimeData(times=data.times[17:], status=data.status[17:])
        assert (fc.loglik_censored(th, left) + fc.loglik_censored(th, right)
                == pytest.approx(fc.loglik_censored(th, data), rel=1e-13))

    def test_underflow_clamps_and_warns(self):
        data = LifetimeData(times=[1e6], status=[0])
        with pytest.warns(RuntimeWarning, match="underflow"):
            got = fc.loglik_censored(IwlParams(50.0, 0.1), data)
        assert got == -745.0

    def test_all_censored_is_legal(self):
        data = LifetimeData(times=[1.0, 2.0], status=[0, 0])
        th = IwlParams(1.0, 1.0)
        ref = float(np.sum(np.log(ic.survival(th, data.times))))
        assert fc.loglik_censored(th, data) == pytest.approx(ref, rel=1e-12)


class TestScoreCensored:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        h = 1e-6
        for _ in range(20):
            phi = rng.uniform(0.3, 8.0)
            lam = rng.uniform(0.3, 8.0)
            t = rng.uniform(0.05, 12.0, size=30)
            s = (rng.random(30) < 0.7).astype(np.int64)
            s[:2] = 1
            data = LifetimeData(times=t, status=s)
            sc = fc.score_censored(IwlParams(phi, lam), data)
            fd_phi = (fc.loglik_censored(IwlParams(phi + h, lam), data)
                      - fc.loglik_censored(IwlParams(phi - h, lam), data)) / (2 * h)
            fd_lam = (fc.loglik_censored(IwlParams(phi, lam + h), data)
                      - fc.loglik_censored(IwlParams(phi, lam - h), data)) / (2 * h)
            assert sc.d_phi == pytest.approx(fd_phi, rel=1e-5, abs=1e-5), (phi, lam)
            assert sc.d_lambda == pytest.approx(fd_lam, rel=1e-5, abs=1e-5), (phi, lam)

    def test_both_survival_regimes(self):
        # censored points on both sides of the x = phi+1 split
        th = IwlParams(2.0, 4.0)
        h = 1e-7
        for t_c in (0.5, 50.0):  # x = 8 (above) and x = 0.08 (below)
            data = LifetimeData(times=[1.0, 2.0, t_c], status=[1, 1, 0])
            sc = fc.score_censored(th, data)
            fd_phi = (fc.loglik_censored(IwlParams(th.phi + h, th.lam), data)
                      - fc.loglik_censored(IwlParams(th.phi - h, th.lam), data)) / (2 * h)
            fd_lam = (fc.loglik_censored(IwlParams(th.phi, th.lam + h), data)
                      - fc.loglik_censored(IwlParams(th.phi, th.lam - h), data)) / (2 * h)
            assert sc.d_phi == pytest.approx(fd_phi, rel=1e-6), t_c
            assert sc.d_lambda == pytest.approx(fd_lam, rel=1e-6), t_c

    def test_reduces_to_complete_score(self):
        rng = np.random.default_rng(4)
        times = ic.sample(TRUTH, 50, rng)
        data = LifetimeData.complete(times)
        phi, lam = 1.6, 2.7
        sc = fc.score_censored(IwlParams(phi, lam), data)
        s = lam + phi
        n = data.n
        s_inv, s_log, _ = fit._data_sums(data.times)
        import mpmath as mp
        ref_phi = (n * math.log(lam) - n / s - n * float(mp.digamma(phi)) - s_log)
        ref_lam = (n * (phi + 1.0) / lam - n / s - s_inv)
        assert sc.d_phi == pytest.approx(ref_phi, rel=1e-12)
        assert sc.d_lambda == pytest.approx(ref_lam, rel=1e-12)


class TestFitMleCensored:
    def test_first_order_conditions(self):
        rng = np.random.default_rng(20)
        for _ in range(3):
            data = censored_sample(rng, 150)
            rep = fc.fit_mle_censored(data)
            sc = fc.score_censored(rep.estimates, data)
            assert abs(sc.d_phi) < 1e-6
            assert abs(sc.d_lambda) < 1e-6

    def test_consistency(self):
        rng = np.random.default_rng(7)
        data = censored_sample(rng, 20000)
        rep = fc.fit_mle_censored(data)
        assert abs(rep.estimates.phi - TRUTH.phi) <= 3.0 * rep.std_errors[0]
        assert abs(rep.estimates.lam - TRUTH.lam) <= 3.0 * rep.std_errors[1]

    def test_zero_censoring_reduction(self):
        rng = np.random.default_rng(21)
        data = LifetimeData.complete(ic.sample(TRUTH, 80, rng))
        a = fc.fit_mle_censored(data)
        b = fit.fit_mle(data)
        assert a.estimates.phi == pytest.approx(b.estimates.phi, abs=1e-6)
        assert a.estimates.lam == pytest.approx(b.estimates.lam, abs=1e-6)

    def test_report_invariants(self):
        rng = np.random.default_rng(22)
        data = censored_sample(rng, 100)
        rep = fc.fit_mle_censored(data)
        assert rep.method == "MLE" and rep.converged
        assert rep.ci[0][0] < rep.ci[0][1] and rep.ci[1][0] < rep.ci[1][1]
        assert all(math.isfinite(v) and v > 0 for v in rep.std_errors)
        assert rep.loglik == pytest.approx(
            fc.loglik_censored(rep.estimates, data), abs=1e-9)

    def test_deterministic(self):
        rng = np.random.default_rng(23)
        data = censored_sample(rng, 60)
        assert fc.fit_mle_censored(data).estimates == fc.fit_mle_censored(data).estimates

    def test_rejects_undersized_data(self):
        with pytest.raises(ValueError):
            fc.fit_mle_censored(LifetimeData(times=[1.0, 2.0], status=[1, 1]))
        with pytest.raises(ValueError):
            fc.fit_mle_censored(
                LifetimeData(times=[1.0, 2.0, 3.0], status=[1, 0, 0]))


class TestFitAcmle:
    def test_zero_censoring_matches_cmle(self):
        rng = np.random.default_rng(30)
        data = LifetimeData.complete(ic.sample(TRUTH, 70, rng))
        a = fc.fit_acmle(data)
        b = fit.fit_cmle(data)
        assert a.estimates.phi == pytest.approx(b.estimates.phi, abs=1e-9)
        assert a.estimates.lam == pytest.approx(b.estimates.lam, abs=1e-9)
        assert a.method == "ACMLE"

    def test_reduces_bias_under_censoring(self):
        rng = np.random.default_rng(88)
        reps = 400
        mre_mle = np.zeros(2)
        mre_acmle = np.zeros(2)
        kept = 0
        for _ in range(reps):
            data = censored_sample(rng, 30)
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    m = fc.fit_mle_censored(data)
                    a = fc.fit_acmle(data)
            except RuntimeError:
                continue
            mre_mle += (m.estimates.phi / TRUTH.phi, m.estimates.lam / TRUTH.lam)
            mre_acmle += (a.estimates.phi / TRUTH.phi, a.estimates.lam / TRUTH.lam)
            kept += 1
        mre_mle /= kept
        mre_acmle /= kept
        assert np.all(np.abs(mre_acmle - 1.0) < np.abs(mre_mle - 1.0))

    def test_correction_shrinks_with_n(self):
        rng = np.random.default_rng(9)
        means = []
        for n in (20, 60, 120):
            mags = []
            for _ in range(50):
                data = censored_sample(rng, n)
                try:
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore")
                        m = fc.fit_mle_censored(data)
                        a = fc.fit_acmle(data)
                except RuntimeError:
                    continue
                if a.fallback_to_mle:
                    continue
                mags.append(math.hypot(a.estimates.phi - m.estimates.phi,
                                       a.estimates.lam - m.estimates.lam))
            means.append(np.mean(mags))
        assert means[0] > means[1] > means[2]

    def test_positivity_fallback(self):
        rng = np.random.default_rng(13)
        t = ic.sample(IwlParams(0.4, 0.3), 4, rng)
        s = np.ones(4, dtype=np.int64)
        s[np.argsort(t)[-1]] = 0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rep = fc.fit_acmle(LifetimeData(times=t, status=s))
        assert rep.fallback_to_mle
        assert rep.method == "ACMLE"


class TestFitBootCensored:
    def test_deterministic_per_seed(self):
        rng = np.random.default_rng(40)
        data = censored_sample(rng, 40)
        a = fc.fit_boot_censored(data, B=120, rng=np.random.default_rng(11))
        b = fc.fit_boot_censored(data, B=120, rng=np.random.default_rng(11))
        assert a.estimates == b.estimates
        assert a.std_errors == b.std_errors

    def test_zero_censoring_reduces_to_complete_boot(self):
        rng = np.random.default_rng(41)
        data = LifetimeData.complete(ic.sample(TRUTH, 80, rng))
        a = fc.fit_boot_censored(data, B=150, rng=np.random.default_rng(9))
        b = fit.fit_boot(data, B=150, rng=np.random.default_rng(9))
        assert a.estimates.phi == pytest.approx(b.estimates.phi, abs=1e-8)
        assert a.estimates.lam == pytest.approx(b.estimates.lam, abs=1e-8)
        assert a.dropped_replicates == b.dropped_replicates == 0

    def test_sign_agreement_with_analytic_correction(self):
        rng = np.random.default_rng(2024)
        agree = np.zeros(2)
        total = 0
        for _ in range(200):
            data = censored_sample(rng, 40)
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    base = fc.fit_mle_censored(data)
                    boot = fc.fit_boot_censored(data, B=120, rng=rng)
            except RuntimeError:
                continue
            if boot.fallback_to_mle:
                continue
            boot_corr = np.array([boot.estimates.phi - base.estimates.phi,
                                  boot.estimates.lam - base.estimates.lam])
            analytic_corr = -fit.bias_matrices(base.estimates, data.n).bias_vec
            agree += np.sign(boot_corr) == np.sign(analytic_corr)
            total += 1
        assert total > 150
        assert np.all(agree > total / 2)

    def test_low_event_resamples_counted_as_failures(self):
        # only 2 of 6 observations are events, so resamples frequently carry
        # fewer than two and the failure guard must trip
        data = LifetimeData(times=[1.0, 2.5, 0.7, 4.0, 1.8, 3.1],
                            status=[1, 1, 0, 0, 0, 0])
        with pytest.raises(RuntimeError, match="failed to fit"):
            fc.fit_boot_censored(data, B=100, rng=np.random.default_rng(2))

    def test_rejects_small_b_and_bad_rng(self):
        rng = np.random.default_rng(42)
        data = censored_sample(rng, 30)
        with pytest.raises(ValueError):
            fc.fit_boot_censored(data, B=50, rng=np.random.default_rng(1))
        with pytest.raises(TypeError):
            fc.fit_boot_censored(data, B=100, rng=123)
