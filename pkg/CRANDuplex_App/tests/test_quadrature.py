import math

import numpy as np
import pytest
from scipy import integrate, special

from cran_duplex.errors import IntegrandError
from cran_duplex.numerics.quadrature import (
    MgfFn,
    hamdi_rate,
    integrate_finite,
    integrate_finite_vec,
    integrate_semi_infinite,
)

# E[ln(1 + X)] for X ~ Exp(1) is e * E_1(1)
EXP1_RATE = math.e * special.exp1(1.0)


def exponential_mgf(scale: float, with_mean: bool = True) -> MgfFn:
    return MgfFn(
        lambda z: 1.0 / (1.0 + scale * z),
        lambda z: scale * z / (1.0 + scale * z),
        mean=scale if with_mean else None,
        scale=scale,
    )


class TestIntegrators:
    def test_finite(self):
        np.testing.assert_allclose(integrate_finite(math.sin, 0.0, math.pi), 2.0, rtol=1e-10)

    def test_endpoint_singularity(self):
        np.testing.assert_allclose(integrate_finite(lambda x: x**-0.5, 0.0, 1.0), 2.0, rtol=1e-8)

    def test_degenerate_and_reversed_interval(self):
        assert integrate_finite(math.exp, 1.0, 1.0) == 0.0
        with pytest.raises(ValueError):
            integrate_finite(math.exp, 1.0, 0.0)

    def test_semi_infinite(self):
        np.testing.assert_allclose(integrate_semi_infinite(lambda x: math.exp(-2.0 * x)), 0.5, rtol=1e-10)

    def test_vector(self):
        powers = np.array([1.0, 2.0, 3.0])
        value = integrate_finite_vec(lambda x: x**powers, 0.0, 1.0)
        np.testing.assert_allclose(value, 1.0 / (powers + 1.0), rtol=1e-10)


class TestMgfFn:
    def test_complement_default(self):
        mgf = MgfFn(lambda z: math.exp(-z))
        np.testing.assert_allclose(mgf.one_minus(0.5), 1.0 - math.exp(-0.5))

    def test_from_complement(self):
        mgf = MgfFn.from_complement(lambda z: -math.expm1(-z), mean=1.0)
        np.testing.assert_allclose(mgf(2.0), math.exp(-2.0))
        assert mgf.mean == 1.0

    def test_degenerate_zero(self):
        zero = MgfFn.degenerate_zero()
        assert zero(3.0) == 1.0 and zero.one_minus(3.0) == 0.0 and zero.mean == 0.0


class TestRateIntegral:
    def test_exponential_reference(self):
        value = hamdi_rate(exponential_mgf(1.0), MgfFn.degenerate_zero())
        np.testing.assert_allclose(value, EXP1_RATE, atol=1e-6)
        np.testing.assert_allclose(value, 0.596347, atol=1e-6)

    def test_heavy_tail_path_agrees(self):
        # same X, but integrated down to the origin without using its mean
        value = hamdi_rate(exponential_mgf(1.0, with_mean=False), MgfFn.degenerate_zero())
        np.testing.assert_allclose(value, EXP1_RATE, atol=1e-6)

    def test_high_snr(self):
        # E[ln(1 + a X)] = e^(1/a) E_1(1/a)
        a = 1e6
        expected = math.exp(1.0 / a) * special.exp1(1.0 / a)
        np.testing.assert_allclose(hamdi_rate(exponential_mgf(a), MgfFn.degenerate_zero()), expected, rtol=1e-7)

    def test_with_interference(self):
        a, c = 5.0, 2.0

        def direct(y, x):
            return math.log1p(x / (y + 1.0)) * math.exp(-x / a) / a * math.exp(-y / c) / c

        expected, _ = integrate.dblquad(direct, 0.0, np.inf, 0.0, np.inf, epsabs=1e-11)
        value = hamdi_rate(exponential_mgf(a), exponential_mgf(c))
        np.testing.assert_allclose(value, expected, rtol=1e-6)

    def test_interference_lowers_rate(self):
        clean = hamdi_rate(exponential_mgf(10.0), MgfFn.degenerate_zero())
        noisy = hamdi_rate(exponential_mgf(10.0), exponential_mgf(3.0))
        assert noisy < clean

    def test_zero_signal(self):
        assert hamdi_rate(MgfFn.degenerate_zero(), exponential_mgf(1.0)) == 0.0

    def test_bad_integrand(self):
        broken = MgfFn(lambda z: float("nan"), lambda z: float("nan"), mean=1.0)
        with pytest.raises(IntegrandError):
            hamdi_rate(broken, MgfFn.degenerate_zero())
