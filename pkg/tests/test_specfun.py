import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from iwlindley import specfun as sf

mp.mp.dps = 40


def rel_err(got, ref):
    return abs(got - ref) / max(abs(ref), 1e-300)


class TestLogGamma:
    def test_known_values(self):
        assert sf.log_gamma(1.0) == pytest.approx(0.0, abs=1e-15)
        assert sf.log_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-14)

    def test_high_precision_grid(self):
        for x in [1e-3, 0.02, 0.37, 1.0, 2.5, 10.5, 41.0, 513.7, 1e4, 1e6]:
            ref = float(mp.loggamma(x))
            assert rel_err(sf.log_gamma(x), ref) <= 1e-13, x

    @pytest.mark.parametrize("bad", [0.0, -1.0, -0.5, math.inf, math.nan])
    def test_domain(self, bad):
        with pytest.raises(ValueError):
            sf.log_gamma(bad)


class TestPolygammas:
    def test_known_values(self):
        euler = 0.5772156649015329
        assert sf.digamma(1.0) == pytest.approx(-euler, rel=1e-13)
        assert sf.trigamma(1.0) == pytest.approx(math.pi ** 2 / 6, rel=1e-13)
        assert sf.tetragamma(1.0) == pytest.approx(-2 * float(mp.zeta(3)), rel=1e-13)

    @pytest.mark.parametrize("fn,order", [(sf.digamma, 0), (sf.trigamma, 1), (sf.tetragamma, 2)])
    def test_high_precision_grid(self, fn, order):
        for x in [1e-3, 0.01, 0.2, 0.9, 1.0, 3.7, 13.99, 14.0, 14.01, 77.0, 1e4, 1e6]:
            ref = float(mp.polygamma(order, x)) if order else float(mp.digamma(x))
            assert rel_err(fn(x), ref) <= 1e-12, (order, x)

    def test_digamma_recurrence(self):
        for x in np.linspace(0.1, 100.0, 97):
            lhs = sf.digamma(x + 1.0)
            rhs = sf.digamma(x) + 1.0 / x
            assert abs(lhs - rhs) <= 1e-13 * max(1.0, abs(rhs))

    @given(st.floats(min_value=0.05, max_value=500.0))
    @settings(max_examples=60, deadline=None)
    def test_trigamma_recurrence(self, x):
        assert sf.trigamma(x) - sf.trigamma(x + 1.0) == pytest.approx(1.0 / x ** 2, rel=1e-10)

    @pytest.mark.parametrize("fn", [sf.digamma, sf.trigamma, sf.tetragamma])
    def test_domain(self, fn):
        for bad in [0.0, -2.0, math.nan]:
            with pytest.raises(ValueError):
                fn(bad)


class TestIncompleteGamma:
    def test_shape_one_closed_form(self):
        for x in [0.0, 0.1, 1.0, 3.0, 20.0]:
            assert sf.lower_inc_gamma(1.0, x) == pytest.approx(-math.expm1(-x), abs=1e-15)

    def test_empty_integral(self):
        assert sf.lower_inc_gamma(3.2, 0.0) == 0.0
        assert sf.upper_inc_gamma(3.2, 0.0) == pytest.approx(math.exp(math.lgamma(3.2)), rel=1e-14)

    def test_quadrature_oracle(self):
        ref, _ = quad(lambda w: w ** 1.5 * math.exp(-w), 0.0, 1.3, epsabs=1e-14)
        assert sf.lower_inc_gamma(2.5, 1.3) == pytest.approx(ref, abs=1e-12)

    def test_against_mpmath(self):
        for a in [0.05, 0.3, 1.0, 2.5, 8.0, 33.0, 140.0]:
            for x in [0.01, 0.5, a * 0.7 + 0.1, a, a + 1.0, 2 * a + 5.0]:
                refP = float(mp.gammainc(a, 0, x, regularized=True))
                refQ = float(mp.gammainc(a, x, mp.inf, regularized=True))
                assert rel_err(sf.reg_lower_inc_gamma(a, x), refP) <= 1e-12, (a, x)
                # complement of a near-one P loses relative accuracy; bound absolutely
                assert abs(sf.reg_upper_inc_gamma(a, x) - refQ) <= 1e-13, (a, x)
                if refQ > 1e-8:
                    assert rel_err(sf.reg_upper_inc_gamma(a, x), refQ) <= 1e-10, (a, x)

    def test_complement_identity(self):
        for a in [0.05, 0.4, 1.0, 3.7, 19.0, 101.0]:
            for x in [0.0, 0.02, 0.9, a, a + 1.0, 4 * a + 9.0]:
                total = sf.lower_inc_gamma(a, x) + sf.upper_inc_gamma(a, x)
                assert rel_err(total, math.exp(sf.log_gamma(a))) <= 1e-13, (a, x)

    @given(st.floats(min_value=0.05, max_value=150.0), st.floats(min_value=0.0, max_value=400.0))
    @settings(max_examples=120, deadline=None)
    def test_complement_identity_property(self, a, x):
        total = sf.lower_inc_gamma(a, x) + sf.upper_inc_gamma(a, x)
        assert rel_err(total, math.exp(sf.log_gamma(a))) <= 1e-13

    @given(st.floats(min_value=0.1, max_value=50.0), st.floats(min_value=0.0, max_value=80.0),
           st.floats(min_value=1e-3, max_value=10.0))
    @settings(max_examples=80, deadline=None)
    def test_monotone_in_x(self, a, x, dx):
        assert sf.lower_inc_gamma(a, x + dx) >= sf.lower_inc_gamma(a, x)

    def test_limit_to_gamma(self):
        for a in [0.3, 2.0, 9.0]:
            assert sf.lower_inc_gamma(a, 60.0 + 10 * a) == pytest.approx(
                math.exp(math.lgamma(a)), rel=1e-13)

    def test_domain(self):
        with pytest.raises(ValueError):
            sf.lower_inc_gamma(0.0, 1.0)
        with pytest.raises(ValueError):
            sf.lower_inc_gamma(-1.0, 1.0)
        with pytest.raises(ValueError):
            sf.upper_inc_gamma(1.0, -0.1)
        with pytest.raises(ValueError):
            sf.reg_lower_inc_gamma(1.0, math.nan)


class TestDgammaDshape:
    def test_zero_at_origin(self):
        for a in [0.2, 1.0, 7.5]:
            assert sf.dgamma_dshape(a, 0.0) == 0.0

    @pytest.mark.parametrize("a,x", [(1.0, 2.0), (3.0, 1.0)])
    def test_quadrature_fd_oracle(self, a, x):
        # derivative of the quadrature-evaluated integral, central difference
        h = 1e-6
        def lig(shape):
            val, _ = quad(lambda w: w ** (shape - 1.0) * math.exp(-w), 0.0, x,
                          epsabs=1e-14, epsrel=1e-13)
            return val
        ref = (lig(a + h) - lig(a - h)) / (2 * h)
        assert sf.dgamma_dshape(a, x) == pytest.approx(ref, rel=1e-7)

    def test_matches_fd_of_lower_inc_gamma(self):
        for a in [0.2, 0.7, 2.0, 5.5, 11.0, 20.0]:
            for x in [0.01, 0.3, 1.7, 6.0, 24.0, 50.0]:
                h = 1e-6 * max(1.0, a)
                fd = (sf.lower_inc_gamma(a + h, x) - sf.lower_inc_gamma(a - h, x)) / (2 * h)
                assert sf.dgamma_dshape(a, x) == pytest.approx(fd, rel=1e-6, abs=1e-12), (a, x)

    def test_reg_variant_consistent(self):
        # dP/da must equal (dgamma/da - P * Gamma'(a)) / Gamma(a); the two
        # routes use different finite-difference bases for x >= a+1, so the
        # agreement floor is the FD roundoff, not machine epsilon
        for a in [0.4, 1.3, 6.0]:
            for x in [0.2, 1.0, 4.0, 9.0]:
                gam = math.exp(math.lgamma(a))
                expect = sf.dgamma_dshape(a, x) / gam - \
                    sf.reg_lower_inc_gamma(a, x) * sf.digamma(a)
                assert sf._reg_dshape(a, x) == pytest.approx(expect, rel=1e-6, abs=1e-7)

    def test_domain(self):
        with pytest.raises(ValueError):
            sf.dgamma_dshape(-0.5, 1.0)
        with pytest.raises(ValueError):
            sf.dgamma_dshape(1.0, -1.0)
