import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from ouprice.core import (
    CumulantPair,
    Model,
    OrnsteinUhlenbeckParams,
    WienerBachelierParams,
    cumulants,
    one_minus_exp_neg2,
    ou_calibrate_x0,
    ou_density,
    ou_law,
    ou_log_mgf,
    ou_mgf,
    ou_transition_density,
    short_time_cumulant_gap,
    short_time_gap_slope,
    wb_density,
    wb_law,
    wb_log_mgf,
    wb_mgf,
)
from ouprice.errors import DomainError, RangeError

from oracles import numeric_cumulants, quad_expect

# Reference values computed with mpmath at 40 digits.
WB_PDF_AT_0_1 = 1.8762017345846893736
OU_PEAK = 0.42902855338146897887
OU_MEAN_UNIT = -0.43233235838169365405
OU_VAR_UNIT = 0.86466471676338730811
OU_MGF_LAM2 = 2.3742099197276875888
WB_MGF_LAM2 = 1.1502737988572272681

rates = st.floats(-0.1, 0.2)
sigmas = st.floats(0.05, 2.0)
qs = st.floats(0.1, 5.0)
times = st.floats(0.01, 10.0)


class TestParams:
    def test_rejects_bad_sigma(self):
        with pytest.raises(DomainError):
            WienerBachelierParams(0.05, 0.0)
        with pytest.raises(DomainError):
            OrnsteinUhlenbeckParams(0.05, -1.0, 1.0)

    def test_rejects_bad_q(self):
        with pytest.raises(DomainError):
            OrnsteinUhlenbeckParams(0.0, 1.0, 0.0)

    def test_rejects_nonfinite_rate(self):
        with pytest.raises(DomainError):
            WienerBachelierParams(math.nan, 0.2)

    def test_negative_rate_allowed(self):
        assert OrnsteinUhlenbeckParams(-0.02, 1.0, 1.0).model is Model.OU


class TestWBDensity:
    def test_peak_at_mean(self):
        p = WienerBachelierParams(0.0, 1.0)
        assert wb_density(p, -0.5, 1.0) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-15)

    def test_normalized(self):
        p = WienerBachelierParams(0.05, 0.2)
        total, _ = integrate.quad(lambda x: wb_density(p, x, 1.0), -40, 40, points=[0.03], epsabs=1e-14, limit=200)
        assert total == pytest.approx(1.0, abs=1e-10)

    def test_against_gaussian_pdf(self):
        p = WienerBachelierParams(0.05, 0.2)
        assert wb_density(p, 0.1, 1.0) == pytest.approx(WB_PDF_AT_0_1, rel=1e-14)

    def test_vectorized(self):
        p = WienerBachelierParams(0.05, 0.2)
        xs = np.linspace(-1, 1, 7)
        np.testing.assert_allclose(wb_density(p, xs, 2.0), [wb_density(p, x, 2.0) for x in xs], rtol=1e-15)

    @pytest.mark.parametrize("t", [0.0, -1.0])
    def test_rejects_nonpositive_time(self, t):
        with pytest.raises(DomainError):
            wb_density(WienerBachelierParams(0.0, 1.0), 0.0, t)

    def test_law_fields(self):
        d = wb_law(WienerBachelierParams(0.05, 0.2), 2.0)
        assert d.mean == pytest.approx((0.05 - 0.02) * 2.0, rel=1e-15)
        assert d.variance == pytest.approx(0.08, rel=1e-15)


class TestOUDensity:
    def test_normalized(self):
        p = OrnsteinUhlenbeckParams(0.0, 1.0, 1.0)
        d = ou_law(p, 1.0)
        total = quad_expect(lambda x: 1.0, lambda x: ou_density(p, x, 1.0), d.mean, d.std)
        assert total == pytest.approx(1.0, abs=1e-10)

    def test_long_time_variance(self):
        p = OrnsteinUhlenbeckParams(0.0, 1.3, 1.0)
        assert ou_law(p, 50.0).variance == pytest.approx(1.3**2, abs=1e-10)

    def test_peak(self):
        p = OrnsteinUhlenbeckParams(0.0, 1.0, 1.0)
        assert ou_density(p, OU_MEAN_UNIT, 1.0) == pytest.approx(OU_PEAK, rel=1e-14)

    def test_mean_matches_sinh_expression(self):
        # mean = r q t - sigma^2 e^{-qt} sinh(qt)
        for r, s, q, t in [(0.05, 0.3, 2.0, 0.7), (-0.02, 1.5, 0.2, 9.0), (0.0, 1.0, 1.0, 1.0)]:
            d = ou_law(OrnsteinUhlenbeckParams(r, s, q), t)
            direct = r * q * t - s**2 * math.exp(-q * t) * math.sinh(q * t)
            assert d.mean == pytest.approx(direct, rel=1e-14, abs=1e-16)
            assert d.variance == pytest.approx(s**2 * (1 - math.exp(-2 * q * t)), rel=1e-14)

    def test_rejects_zero_time(self):
        with pytest.raises(DomainError):
            ou_density(OrnsteinUhlenbeckParams(0.0, 1.0, 1.0), 0.0, 0.0)


class TestTransitionDensity:
    def test_centered_start_peaks_at_zero(self):
        p = OrnsteinUhlenbeckParams(0.3, 0.7, 2.5)
        xs = np.linspace(-2, 2, 401)
        assert xs[np.argmax(ou_transition_density(p, xs, 0.0, 0.8))] == pytest.approx(0.0, abs=1e-12)

    def test_mean(self):
        p = OrnsteinUhlenbeckParams(0.0, 1.0, 1.0)
        sd = math.sqrt(1 - math.exp(-2))
        mean = quad_expect(lambda x: x, lambda x: ou_transition_density(p, x, 2.0, 1.0), 2 * math.exp(-1), sd)
        assert mean == pytest.approx(0.7357588823428847, rel=1e-12)

    @pytest.mark.parametrize("r,s,q,t", [(0.05, 0.2, 1.0, 1.0), (0.0, 1.0, 1.0, 1.0), (-0.03, 0.8, 3.0, 0.4)])
    def test_calibrated_start_gives_pricing_density(self, r, s, q, t):
        p = OrnsteinUhlenbeckParams(r, s, q)
        x0 = ou_calibrate_x0(p, t)
        d = ou_law(p, t)
        xs = np.linspace(d.mean - 6 * d.std, d.mean + 6 * d.std, 257)
        np.testing.assert_allclose(ou_transition_density(p, xs, x0, t), ou_density(p, xs, t), rtol=1e-11)


class TestCalibrateX0:
    def test_zero_time(self):
        assert ou_calibrate_x0(OrnsteinUhlenbeckParams(0.1, 0.5, 2.0), 0.0) == 0.0

    def test_unit_params(self):
        assert ou_calibrate_x0(OrnsteinUhlenbeckParams(0.0, 1.0, 1.0), 1.0) == pytest.approx(
            -1.1752011936438014, rel=1e-14
        )

    def test_matches_sinh_expression(self):
        r, s, q, t = 0.07, 0.4, 1.7, 2.2
        expected = r * q * t * math.exp(q * t) - s**2 * math.sinh(q * t)
        assert ou_calibrate_x0(OrnsteinUhlenbeckParams(r, s, q), t) == pytest.approx(expected, rel=1e-13)

    @pytest.mark.parametrize("r,s,q,t,S0", [(0.05, 0.2, 1.0, 1.0, 100.0), (0.0, 1.0, 1.0, 1.0, 1.0), (0.1, 0.5, 0.3, 4.0, 50.0)])
    def test_recovers_forward(self, r, s, q, t, S0):
        p = OrnsteinUhlenbeckParams(r, s, q)
        x0 = ou_calibrate_x0(p, t)
        v = s**2 * (1 - math.exp(-2 * q * t))
        centre = x0 * math.exp(-q * t) + v
        forward = quad_expect(lambda x: S0 * math.exp(x), lambda x: ou_transition_density(p, x, x0, t), centre, math.sqrt(v))
        assert forward == pytest.approx(S0 * math.exp(r * q * t), rel=1e-10)

    def test_overflow_refused(self):
        with pytest.raises(RangeError):
            ou_calibrate_x0(OrnsteinUhlenbeckParams(0.0, 1.0, 10.0), 71.0)


class TestMGF:
    def test_wb_at_zero(self):
        assert wb_mgf(WienerBachelierParams(0.05, 0.3), 0.0, 2.0) == 1.0

    def test_wb_at_one(self):
        assert wb_mgf(WienerBachelierParams(0.05, 0.7), 1.0, 2.0) == pytest.approx(math.exp(0.1), rel=1e-15)

    def test_wb_lambda_two(self):
        p = WienerBachelierParams(0.05, 0.2)
        assert wb_mgf(p, 2.0, 1.0) == pytest.approx(math.exp(0.14), rel=1e-15)
        assert math.exp(0.14) == pytest.approx(WB_MGF_LAM2, rel=1e-15)

    def test_ou_at_zero(self):
        assert ou_mgf(OrnsteinUhlenbeckParams(0.05, 0.3, 2.0), 0.0, 1.5) == 1.0

    def test_ou_martingale_normalization(self):
        assert ou_mgf(OrnsteinUhlenbeckParams(0.0, 0.9, 3.0), 1.0, 1.5) == pytest.approx(1.0, abs=1e-15)

    def test_ou_lambda_two(self):
        p = OrnsteinUhlenbeckParams(0.0, 1.0, 1.0)
        assert ou_mgf(p, 2.0, 1.0) == pytest.approx(OU_MGF_LAM2, rel=1e-14)
        assert ou_mgf(p, 2.0, 1.0) == pytest.approx(math.exp(2 * math.exp(-1) * math.sinh(1)), rel=1e-14)

    def test_t_zero_allowed(self):
        assert ou_mgf(OrnsteinUhlenbeckParams(0.1, 1.0, 1.0), 1.7, 0.0) == 1.0
        assert wb_mgf(WienerBachelierParams(0.1, 1.0), 1.7, 0.0) == 1.0


class TestCumulants:
    def test_wb(self):
        c = cumulants(WienerBachelierParams(0.05, 0.2), 1.0)
        assert c.s1 == pytest.approx(0.03, rel=1e-14)
        assert c.s2 == pytest.approx(0.04, rel=1e-14)

    def test_ou(self):
        c = cumulants(OrnsteinUhlenbeckParams(0.0, 1.0, 1.0), 1.0)
        assert c.s1 == pytest.approx(OU_MEAN_UNIT, rel=1e-14)
        assert c.s2 == pytest.approx(OU_VAR_UNIT, rel=1e-14)

    @pytest.mark.parametrize("p", [WienerBachelierParams(0.05, 0.2), OrnsteinUhlenbeckParams(0.05, 0.2, 3.0)])
    def test_zero_time(self, p):
        assert cumulants(p, 0.0) == CumulantPair(0.0, 0.0)

    @given(qt=st.floats(1e-300, 700.0))
    def test_sinh_identity(self, qt):
        lhs = math.exp(-qt) * math.sinh(qt)
        assert lhs == pytest.approx(0.5 * one_minus_exp_neg2(qt), rel=4e-16, abs=0)

    def test_tiny_qt_expansion(self):
        for qt in (1e-9, 3e-12, 1e-20):
            assert one_minus_exp_neg2(qt) == pytest.approx(-math.expm1(-2 * qt), rel=1e-15)


class TestShortTimeGap:
    def test_q_one_lambda_one_vanishes(self):
        wb, ou = WienerBachelierParams(0.07, 0.3), OrnsteinUhlenbeckParams(0.07, 0.3, 1.0)
        for t in (1e-2, 1e-3, 1e-4):
            assert abs(short_time_cumulant_gap(wb, ou, 1.0, t)) <= 10 * t**2

    def test_zero_rate_lambda_one(self):
        wb, ou = WienerBachelierParams(0.0, 1.0), OrnsteinUhlenbeckParams(0.0, 1.0, 2.0)
        assert abs(short_time_cumulant_gap(wb, ou, 1.0, 1e-4)) <= 1e-8

    def test_slope(self):
        wb, ou = WienerBachelierParams(0.05, 0.2), OrnsteinUhlenbeckParams(0.05, 0.2, 2.0)
        expected = 0.5 * 0.05 + 0.04 * (-0.5) * 1.5 * 0.5
        assert short_time_gap_slope(ou, 0.5) == pytest.approx(expected, rel=1e-14)
        assert short_time_cumulant_gap(wb, ou, 0.5, 1e-4) / 1e-4 == pytest.approx(expected, rel=0.01)

    def test_slope_by_difference_of_log_mgfs(self):
        # Independent route: subtract the two log-MGFs and extrapolate the slope.
        wb, ou = WienerBachelierParams(0.05, 0.2), OrnsteinUhlenbeckParams(0.05, 0.2, 2.0)

        def slope(t):
            return (ou_log_mgf(ou, 0.5, t) - wb_log_mgf(wb, 0.5, t)) / t

        richardson = 2 * slope(1e-3) - slope(2e-3)
        assert richardson == pytest.approx(short_time_gap_slope(ou, 0.5), rel=1e-4)

    def test_mismatched_params(self):
        with pytest.raises(DomainError):
            short_time_cumulant_gap(WienerBachelierParams(0.05, 0.2), OrnsteinUhlenbeckParams(0.04, 0.2, 2.0), 0.5, 1e-3)
        with pytest.raises(DomainError):
            short_time_cumulant_gap(WienerBachelierParams(0.05, 0.2), OrnsteinUhlenbeckParams(0.05, 0.3, 2.0), 0.5, 1e-3)


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(r=rates, s=sigmas, q=qs, t=times)
    def test_normalization(self, r, s, q, t):
        for d, pdf in (
            (wb_law(WienerBachelierParams(r, s), t), lambda x: wb_density(WienerBachelierParams(r, s), x, t)),
            (ou_law(OrnsteinUhlenbeckParams(r, s, q), t), lambda x: ou_density(OrnsteinUhlenbeckParams(r, s, q), x, t)),
        ):
            assert quad_expect(lambda x: 1.0, pdf, d.mean, d.std) == pytest.approx(1.0, abs=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(r=rates, s=sigmas, q=qs, t=times)
    def test_martingale(self, r, s, q, t):
        wb, ou = WienerBachelierParams(r, s), OrnsteinUhlenbeckParams(r, s, q)
        d = wb_law(wb, t)
        fwd = quad_expect(math.exp, lambda x: wb_density(wb, x, t), d.mean + d.variance, d.std)
        assert fwd == pytest.approx(math.exp(r * t), rel=1e-8)
        d = ou_law(ou, t)
        fwd = quad_expect(math.exp, lambda x: ou_density(ou, x, t), d.mean + d.variance, d.std)
        assert fwd == pytest.approx(math.exp(r * q * t), rel=1e-8)

    @settings(max_examples=60, deadline=None)
    @given(r=rates, s=sigmas, q=qs, t=times, lam=st.floats(-2.0, 2.0))
    def test_mgf_matches_quadrature(self, r, s, q, t, lam):
        wb, ou = WienerBachelierParams(r, s), OrnsteinUhlenbeckParams(r, s, q)
        d = wb_law(wb, t)
        num = quad_expect(lambda x: math.exp(lam * x), lambda x: wb_density(wb, x, t), d.mean + lam * d.variance, d.std)
        assert num == pytest.approx(wb_mgf(wb, lam, t), rel=1e-8)
        d = ou_law(ou, t)
        num = quad_expect(lambda x: math.exp(lam * x), lambda x: ou_density(ou, x, t), d.mean + lam * d.variance, d.std)
        assert num == pytest.approx(ou_mgf(ou, lam, t), rel=1e-8)

    @settings(max_examples=100, deadline=None)
    @given(r=rates, s=sigmas, q=qs, t=times)
    def test_cumulants_from_log_mgf(self, r, s, q, t):
        for p, lm in ((WienerBachelierParams(r, s), wb_log_mgf), (OrnsteinUhlenbeckParams(r, s, q), ou_log_mgf)):
            k1, k2, k3 = numeric_cumulants(lambda lam: lm(p, lam, t))
            c = cumulants(p, t)
            assert k1 == pytest.approx(c.s1, abs=1e-5)
            assert k2 == pytest.approx(c.s2, abs=1e-5)
            assert abs(k3) <= 1e-4
