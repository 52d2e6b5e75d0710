"""
Adaptive 1-D integration and the MGF rate integral.

hamdi_rate evaluates E[ln(1 + X/(Y+1))] = integral_0^inf M_Y(z)(1 - M_X(z)) e^-z / z dz
after the substitution z = e^u, which turns the 1/z weight into du and spreads
the many decades an SNR-scale X covers evenly over the integration interval.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

from ..errors import IntegrandError, QuadratureError

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
NESTED_TOL = 1e-6
SERIES_THRESHOLD = 1e-6
QUAD_LIMIT = 500
ABS_FLOOR = 1e-14

# e^-z is below 1e-26 past this point
Z_MAX = 60.0


def _checked_quad(f, a, b, tol, points=None, abs_tol=ABS_FLOOR):
    kwargs = {"epsabs": abs_tol, "epsrel": tol, "limit": QUAD_LIMIT, "full_output": 1}
    if points is not None and math.isfinite(a) and math.isfinite(b):
        inner = sorted(p for p in points if a < p < b)
        if inner:
            kwargs["points"] = inner
    result = integrate.quad(f, a, b, **kwargs)
    value, error = result[0], result[1]
    if len(result) > 3 and error > 10.0 * max(abs_tol, tol * abs(value)):
        raise QuadratureError(f"quad on [{a}, {b}] did not converge: {result[3]}", value, error)
    return value


def integrate_finite(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    points: Optional[Sequence[float]] = None,
) -> float:
    """Adaptive Gauss-Kronrod on [a, b]; integrable endpoint singularities are fine."""
    if not a < b:
        if a == b:
            return 0.0
        raise ValueError(f"integrate_finite needs a < b, got [{a}, {b}]")
    return _checked_quad(f, a, b, tol, points=points)


def integrate_semi_infinite(
    f: Callable[[float], float], tol: float = DEFAULT_TOL, lower: float = 0.0
) -> float:
    """integral_lower^inf f, f decaying at infinity."""
    return _checked_quad(f, lower, math.inf, tol)


def integrate_finite_vec(
    f: Callable[[float], np.ndarray],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    points: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """Array-valued integral on [a, b]; tol applies to the largest component."""
    inner = sorted(p for p in (points or ()) if a < p < b) or None
    value, error, info = integrate.quad_vec(
        f, a, b, epsabs=ABS_FLOOR, epsrel=tol, norm="max", limit=QUAD_LIMIT, points=inner, full_output=True
    )
    if info.status != 0:
        raise QuadratureError(f"quad_vec on [{a}, {b}]: {info.message}", float(np.max(np.abs(value))), float(error))
    return np.asarray(value)


@dataclass(frozen=True)
class MgfFn:
    """
    z -> E[e^{-zX}] for a nonnegative X.

    complement evaluates 1 - M(z) without cancellation when given; mean is
    E[X] when finite (None for heavy tails); scale is a typical magnitude of X
    used to place the bulk of the rate integral.
    """

    fn: Callable[[float], float]
    complement: Optional[Callable[[float], float]] = None
    mean: Optional[float] = None
    scale: Optional[float] = None

    def __call__(self, z: float) -> float:
        return self.fn(z)

    def one_minus(self, z: float) -> float:
        if self.complement is not None:
            return self.complement(z)
        return 1.0 - self.fn(z)

    @classmethod
    def from_complement(
        cls,
        complement: Callable[[float], float],
        mean: Optional[float] = None,
        scale: Optional[float] = None,
    ) -> "MgfFn":
        return cls(lambda z: 1.0 - complement(z), complement, mean, scale)

    @classmethod
    def degenerate_zero(cls) -> "MgfFn":
        """X = 0 almost surely."""
        return cls(lambda z: 1.0, lambda z: 0.0, 0.0, None)


def hamdi_rate(
    mx: MgfFn,
    my: MgfFn,
    tol: float = DEFAULT_TOL,
    z0: float = SERIES_THRESHOLD,
) -> float:
    """
    E[ln(1 + X/(Y+1))] in nats for independent X, Y >= 0.

    Below z0 the integrand is replaced by its series (1 - M_X(z))/z -> E[X];
    z0 shrinks so that z0 * E[X] stays below tol.  Without a finite mean the
    origin is integrated directly, the integrand being integrable there.
    """
    if mx.mean == 0.0:
        return 0.0

    def integrand(u: float) -> float:
        z = math.exp(u)
        try:
            value = my(z) * mx.one_minus(z) * math.exp(-z)
        except (ArithmeticError, ValueError) as exc:
            raise IntegrandError(f"MGF evaluation failed: {exc}", z) from exc
        if not math.isfinite(value):
            raise IntegrandError("MGF evaluation is not finite", z)
        return value

    u_top = math.log(Z_MAX)
    bulk = mx.scale if mx.scale else mx.mean
    hints = [0.0]
    if bulk and math.isfinite(bulk) and bulk > 0:
        hints.append(-math.log(bulk))
    if my.mean and math.isfinite(my.mean) and my.mean > 0:
        hints.append(-math.log(my.mean))

    if mx.mean is not None and math.isfinite(mx.mean):
        z_lo = min(z0, tol / mx.mean)
        head = mx.mean * z_lo
        body = integrate_finite(integrand, math.log(z_lo), u_top, tol, points=hints)
        return head + body

    u_split = min(hints) - 12.0
    tail = _checked_quad(integrand, -math.inf, u_split, tol)
    body = integrate_finite(integrand, u_split, u_top, tol, points=hints)
    return tail + body
