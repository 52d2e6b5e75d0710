"""Integral-form rates, their closed-form cross-checks and limiting cases."""

import math

import numpy as np
import pytest
from scipy import integrate

from cran_duplex.analysis import analytic
from cran_duplex.analysis.analytic import (
    CLOSED_FORM,
    INTEGRAL_FORM,
    _mixture_complement,
    poisson_window,
)
from cran_duplex.analysis.closed_forms import galf
from cran_duplex.config.params import normalize
from cran_duplex.errors import DomainError, TruncationError

TOL = 1e-6


class TestPoissonWindow:
    def test_empty_for_zero_mean(self):
        window = poisson_window(0.0, TOL)
        assert window.empty
        assert window.as_diagnostics()["tail_mass"] == 0.0

    def test_covers_mass(self):
        window = poisson_window(15.7, TOL)
        assert window.counts[0] >= 1
        assert 1.0 - window.covered <= TOL / 10.0

    def test_too_wide(self):
        with pytest.raises(TruncationError):
            poisson_window(1e13, TOL)

    def test_mixture_sum_is_thinned_exponential(self):
        # sum_N P(N) (1 - (1 - q)^N) = 1 - exp(-mu q)
        mu = 12.0
        window = poisson_window(mu, 1e-10)
        for q in (0.0, 0.01, 0.3, 1.0):
            np.testing.assert_allclose(
                _mixture_complement(q, window.counts, window.weights), -math.expm1(-mu * q), atol=1e-10
            )

    def test_nearest_mixture_pdf_mass(self, make_params):
        params = make_params()
        total, _ = integrate.quad(lambda r: analytic.nearest_dl_mixture_pdf(r, params), 0.0, params.radius, limit=200)
        np.testing.assert_allclose(total, -math.expm1(-params.mu_dl), rtol=1e-6)


class TestTransforms:
    def test_li_transform(self, make_params):
        params = make_params(p_u=10.0, sigma_li=0.5)
        mgf = analytic.mgf_li(params)
        assert mgf(0.0) == 1.0
        assert mgf.mean == 5.0
        np.testing.assert_allclose(mgf(2.0), 1.0 / 11.0)
        assert analytic.mgf_li(params.updated(sigma_li=0.0)).mean == 0.0

    def test_li_transform_without_cancellation(self, scenario):
        no_cancel = scenario.updated(sigma_li_dbm=scenario.p_u_dbm)
        np.testing.assert_allclose(analytic.mgf_li(no_cancel).mean, normalize(no_cancel).p_u)
        at_floor = scenario.updated(sigma_li_dbm=scenario.noise_dbm)
        np.testing.assert_allclose(analytic.mgf_li(at_floor).mean, 1.0)

    def test_per_point_transform_is_decreasing(self, make_params):
        mgf = analytic.mgf_per_point_dl(make_params())
        values = [mgf(s) for s in (0.0, 1e-2, 1.0, 1e2, 1e4)]
        assert values[0] == 1.0
        assert all(a > b for a, b in zip(values, values[1:]))
        assert all(0.0 < v <= 1.0 for v in values)

    @pytest.mark.parametrize("m", [2, 3, 6])
    def test_mrc_transform_methods_agree(self, make_params, m):
        params = make_params(m_antennas=m)
        quad = analytic.mgf_interference_mrc(params, "quadrature")
        hyper = analytic.mgf_interference_mrc(params, "hypergeometric")
        meijer = analytic.mgf_interference_mrc(params, "meijer")
        for s in (0.0, 0.1, 5.0, 300.0):
            np.testing.assert_allclose(quad(s), hyper(s), rtol=1e-7)
            np.testing.assert_allclose(quad.one_minus(s), hyper.one_minus(s), rtol=1e-7, atol=1e-15)
            np.testing.assert_allclose(meijer(s), hyper(s), rtol=5e-3)

    def test_mrc_transform_single_antenna(self, make_params):
        mgf = analytic.mgf_interference_mrc(make_params(m_antennas=1))
        np.testing.assert_allclose(mgf(3.0), 0.25)

    def test_unknown_mrc_method(self, make_params):
        with pytest.raises(DomainError):
            analytic.mgf_interference_mrc(make_params(), "series")


class TestAraDownlink:
    def test_upper_bound_dominates(self, make_params):
        params = make_params()
        exact = analytic.dl_rate_ara_exact(params, TOL).value
        upper = analytic.dl_rate_ara_upper(params, TOL).value
        assert upper >= exact > 0.0

    def test_more_rrhs_help(self, make_params):
        params = make_params()
        rates = [analytic.dl_rate_ara_given_count(params, n, TOL).value for n in (0, 1, 4)]
        assert rates[0] == 0.0
        assert rates[0] < rates[1] < rates[2]

    def test_li_hurts(self, make_params):
        quiet = analytic.dl_rate_ara_exact(make_params(sigma_li=0.0), TOL).value
        loud = analytic.dl_rate_ara_exact(make_params(sigma_li=10.0), TOL).value
        assert loud < quiet

    def test_total_power_split(self, make_params):
        per_rrh = analytic.dl_rate_ara_exact(make_params(), TOL)
        total = analytic.dl_rate_ara_exact(make_params(ara_power_split="total"), TOL)
        assert total.value < per_rrh.value
        assert total.diagnostics["power_split"] == "total"
        with pytest.raises(DomainError):
            analytic.dl_rate_ara_upper(make_params(ara_power_split="total"), TOL)

    def test_no_dl_power(self, make_params):
        assert analytic.dl_rate_ara_exact(make_params(p_b=0.0), TOL).value == 0.0

    def test_singular_series_cross_check(self, make_params):
        params = make_params(epsilon=0.0, sigma_li=1e-3)
        constant = galf(params.m_antennas, params.delta, params.dl_density)
        # P_b chosen so that galf * P_b^delta = -0.5, well inside the convergent range
        params = params.updated(p_b=(0.5 / abs(constant)) ** (1.0 / params.delta))
        result = analytic.dl_rate_ara_singular(params, TOL, series=True)
        np.testing.assert_allclose(result.diagnostics["series_value"], result.value, rtol=5e-3)

    def test_singular_series_divergence_is_reported(self, make_params):
        params = make_params(epsilon=0.0, p_b=1e9)
        result = analytic.dl_rate_ara_singular(params, TOL, series=True)
        assert result.value > 0
        assert "series_error" in result.diagnostics


class TestSraDownlink:
    def test_closed_form_matches_integral(self, make_params):
        params = make_params(m_antennas=2)
        integral = analytic.dl_rate_sra(params, TOL, INTEGRAL_FORM)
        closed = analytic.dl_rate_sra(params, TOL, CLOSED_FORM)
        assert closed.method == CLOSED_FORM
        np.testing.assert_allclose(closed.value, integral.value, rtol=5e-3)

    def test_below_ara(self, make_params):
        params = make_params()
        assert analytic.dl_rate_sra(params, TOL).value <= analytic.dl_rate_ara_exact(params, TOL).value

    def test_unknown_method(self, make_params):
        with pytest.raises(DomainError):
            analytic.dl_rate_sra(make_params(), TOL, "series")


class TestSraUplink:
    def test_zf_ignores_dl_power_and_li(self, make_params):
        base = analytic.ul_rate_sra_zf(make_params(), TOL).value
        assert analytic.ul_rate_sra_zf(make_params(p_b=1e9, sigma_li=1e3), TOL).value == base

    @pytest.mark.parametrize("alpha", [3.0, 4.0, 2.5])
    def test_zf_meijer_matches_integral(self, make_params, alpha):
        params = make_params(alpha=alpha, p_u=1e5)
        integral = analytic.ul_rate_sra_zf(params, TOL, INTEGRAL_FORM).value
        closed = analytic.ul_rate_sra_zf(params, TOL, CLOSED_FORM).value
        np.testing.assert_allclose(closed, integral, rtol=5e-3)

    def test_zf_needs_two_antennas(self, make_params):
        with pytest.raises(DomainError):
            analytic.ul_rate_sra_zf(make_params(m_antennas=1), TOL)

    def test_mrc_without_dl_power_is_nearest_link(self, make_params):
        params = make_params(p_b=0.0, tau=0.0)
        mrc = analytic.ul_rate_sra_mrc(params, TOL).value
        hd = analytic.hd_rates_sra(params, TOL)
        np.testing.assert_allclose(mrc, hd.ul, rtol=1e-12)

    def test_mrc_degrades_with_dl_power(self, make_params):
        low = analytic.ul_rate_sra_mrc(make_params(p_b=1.0), TOL).value
        high = analytic.ul_rate_sra_mrc(make_params(p_b=1e6), TOL).value
        assert high < low

    def test_mrc_transform_methods_give_same_rate(self, make_params):
        params = make_params(m_antennas=3)
        quad = analytic.ul_rate_sra_mrc(params, TOL, "quadrature").value
        hyper = analytic.ul_rate_sra_mrc(params, TOL, "hypergeometric").value
        np.testing.assert_allclose(quad, hyper, rtol=1e-4)

    @pytest.mark.parametrize("alpha", [3.0, 4.0])
    def test_mrc_meijer_matches_integral(self, make_params, alpha):
        params = make_params(m_antennas=2, alpha=alpha)
        integral = analytic.ul_rate_sra_mrc(params, TOL, method=INTEGRAL_FORM)
        closed = analytic.ul_rate_sra_mrc(params, TOL, "meijer", method=CLOSED_FORM)
        assert closed.method == CLOSED_FORM
        assert closed.diagnostics["alpha_ratio"] == (int(alpha), 1)
        np.testing.assert_allclose(closed.value, integral.value, rtol=5e-3)

    def test_mrc_closed_form_needs_rational_alpha(self, make_params):
        with pytest.raises(DomainError):
            analytic.ul_rate_sra_mrc(make_params(alpha=math.pi), TOL, method=CLOSED_FORM)
        with pytest.raises(DomainError):
            analytic.ul_rate_sra_mrc(make_params(), TOL, method="series")


class TestHalfDuplex:
    def test_symmetric_slots(self, make_params):
        params = make_params(p_b=1e3, p_u=1e3, p_dl=0.5, tau=0.5)
        for result in (analytic.hd_rate_ara(params, TOL), analytic.hd_rates_sra(params, TOL)):
            np.testing.assert_allclose(result.ul, result.dl, rtol=1e-9)
            np.testing.assert_allclose(result.value, result.ul + result.dl)

    def test_tau_extremes(self, make_params):
        dl_only = analytic.hd_rates_sra(make_params(tau=1.0), TOL)
        assert dl_only.ul == 0.0 and dl_only.dl > 0.0
        ul_only = analytic.hd_rate_ara(make_params(tau=0.0), TOL)
        assert ul_only.dl == 0.0 and ul_only.ul > 0.0

    def test_ara_beats_sra(self, make_params):
        params = make_params()
        assert analytic.hd_rate_ara(params, TOL).value >= analytic.hd_rates_sra(params, TOL).value


class TestAdaptiveRadius:
    def test_saturates(self, make_params):
        params = make_params(alpha=4.0, radius=50.0, sigma_li=0.0)
        radius, rate = analytic.adaptive_radius(params, 1e-5, rel_change=0.02)
        assert radius >= 50.0
        assert rate > 0.0

    def test_gives_up(self, make_params):
        with pytest.raises(TruncationError):
            analytic.adaptive_radius(make_params(radius=10.0), 1e-5, rel_change=1e-12, max_doublings=1)
