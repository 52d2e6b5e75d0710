"""
Gamma-family special functions and a Meijer G evaluator.

The Gamma functions wrap scipy.special; the exponential integral has its own
continued-fraction / series implementation so the exponentially scaled form
e^x E_n(x) is available without overflow.  meijer_g integrates the
Mellin-Barnes representation along a vertical contour with mpmath and is
only used to cross-check closed forms. MeijerGKernel evaluates one G-function
at many arguments with scipy on a fixed Gauss-Legendre grid.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple, Union

import mpmath
import numpy as np
from scipy import special

from ..errors import DomainError, MeijerGDegeneracyError, SeriesDivergenceError

logger = logging.getLogger(__name__)

EULER_GAMMA = 0.5772156649015329

# E_n: continued fraction above this argument, power series at or below it.
EN_SWITCHOVER = 1.0
_EN_EPS = 1e-16
_EN_MAXIT = 10_000
_FPMIN = 1e-300


def ln_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if not x > 0:
        raise DomainError(f"ln_gamma needs x > 0, got {x!r}")
    return float(special.gammaln(x))


def upper_inc_gamma(a: float, x: float) -> float:
    """Gamma(a, x) = integral_x^inf t^(a-1) e^-t dt for a > 0, x >= 0."""
    if not a > 0 or not x >= 0:
        raise DomainError(f"upper_inc_gamma needs a > 0 and x >= 0, got a={a!r}, x={x!r}")
    if x == 0:
        return float(special.gamma(a))
    return float(special.gammaincc(a, x) * special.gamma(a))


def exp_integral_en_scaled(n: int, x: float) -> float:
    """e^x E_n(x); finite for every x > 0 even when E_n underflows."""
    if int(n) != n or n < 1 or not x > 0:
        raise DomainError(f"exp_integral_en needs integer n >= 1 and x > 0, got n={n!r}, x={x!r}")
    n = int(n)
    nm1 = n - 1

    if x > EN_SWITCHOVER:
        # modified Lentz evaluation of the continued fraction
        b = x + n
        c = 1.0 / _FPMIN
        d = 1.0 / b
        h = d
        for i in range(1, _EN_MAXIT + 1):
            an = -i * (nm1 + i)
            b += 2.0
            d = 1.0 / (an * d + b)
            c = b + an / c
            step = c * d
            h *= step
            if abs(step - 1.0) < _EN_EPS:
                return h
        raise SeriesDivergenceError(f"E_{n}({x}) continued fraction did not converge")

    ans = 1.0 / nm1 if nm1 else -math.log(x) - EULER_GAMMA
    fact = 1.0
    for i in range(1, _EN_MAXIT + 1):
        fact *= -x / i
        if i != nm1:
            term = -fact / (i - nm1)
        else:
            psi = -EULER_GAMMA + sum(1.0 / k for k in range(1, nm1 + 1))
            term = fact * (-math.log(x) + psi)
        ans += term
        if abs(term) < abs(ans) * _EN_EPS:
            return ans * math.exp(x)
    raise SeriesDivergenceError(f"E_{n}({x}) series did not converge")


def exp_integral_en(n: int, x: float) -> float:
    """E_n(x) = integral_1^inf e^(-xt) / t^n dt."""
    return exp_integral_en_scaled(n, x) * math.exp(-x)


def laplace_pole_moment(s: float, c: float) -> float:
    """
    integral_0^inf z^(s-1) e^-z / (1 + c z) dz for s > 0, c >= 0.

    Equals Gamma(s) when c = 0 and c^-s Gamma(s) e^(1/c) Gamma(1-s, 1/c) otherwise.
    """
    if not s > 0 or not c >= 0:
        raise DomainError(f"laplace_pole_moment needs s > 0 and c >= 0, got s={s!r}, c={c!r}")
    if c == 0:
        return math.exp(special.gammaln(s))
    with mpmath.workdps(30):
        inv = mpmath.mpf(1) / c
        value = (
            mpmath.power(c, -s)
            * mpmath.gamma(s)
            * mpmath.exp(inv)
            * mpmath.gammainc(1 - s, inv)
        )
        return float(value)


# --- MEIJER G ---


def delta_list(a: int, b: float) -> List[float]:
    """Delta(a, b) = [b/a, (b+1)/a, ..., (b+a-1)/a]."""
    if int(a) != a or a < 1:
        raise DomainError(f"Delta(a, b) needs a positive integer a, got {a!r}")
    return [(b + k) / a for k in range(int(a))]


@dataclass(frozen=True)
class MeijerGSpec:
    """G^{m,n}_{p,q}(argument | a_params; b_params)."""

    m: int
    n: int
    a_params: Tuple[float, ...]
    b_params: Tuple[float, ...]
    argument: float

    @property
    def p(self) -> int:
        return len(self.a_params)

    @property
    def q(self) -> int:
        return len(self.b_params)

    def validate(self) -> None:
        if not 0 <= self.m <= self.q or not 0 <= self.n <= self.p:
            raise DomainError(
                f"orders (m={self.m}, n={self.n}) do not fit p={self.p}, q={self.q}"
            )
        if not self.argument > 0:
            raise DomainError(f"Meijer G argument must be positive, got {self.argument!r}")

    def contour_abscissa(self) -> float:
        """Real part of a vertical contour separating the two pole families."""
        left = max((a - 1.0 for a in self.a_params[: self.n]), default=-math.inf)
        right = min((b for b in self.b_params[: self.m]), default=math.inf)
        if not left < right:
            raise MeijerGDegeneracyError(
                f"poles collide: no vertical contour between {left!r} and {right!r}"
            )
        if math.isinf(left) and math.isinf(right):
            return 0.0
        if math.isinf(left):
            return right - 0.5
        if math.isinf(right):
            return left + 0.5
        return 0.5 * (left + right)

    def decay_rate(self) -> float:
        """m + n - (p + q)/2; the integrand decays like exp(-pi * rate * |t|)."""
        return self.m + self.n - 0.5 * (self.p + self.q)


def meijer_g(spec: MeijerGSpec, dps: int = 25) -> float:
    """
    Evaluate a real Meijer G-function by Mellin-Barnes contour integration.

    G = (1/2 pi i) integral_L  prod_{j<=m} Gamma(b_j - s) prod_{j<=n} Gamma(1 - a_j + s)
        / (prod_{j>m} Gamma(1 - b_j + s) prod_{j>n} Gamma(a_j - s)) x^s ds

    along Re s = c.  Pole collisions and contours without exponential decay
    raise MeijerGDegeneracyError instead of returning an approximation.
    """
    spec.validate()
    rate = spec.decay_rate()
    if rate <= 0:
        raise MeijerGDegeneracyError(
            f"m + n - (p + q)/2 = {rate} <= 0: the vertical contour does not converge"
        )
    c = spec.contour_abscissa()

    a_num = spec.a_params[: spec.n]
    a_den = spec.a_params[spec.n :]
    b_num = spec.b_params[: spec.m]
    b_den = spec.b_params[spec.m :]

    with mpmath.workdps(dps):
        log_x = mpmath.log(mpmath.mpf(spec.argument))

        def integrand(t):
            s = mpmath.mpc(c, t)
            log_val = s * log_x
            for b in b_num:
                log_val += mpmath.loggamma(b - s)
            for a in a_num:
                log_val += mpmath.loggamma(1 - a + s)
            for b in b_den:
                log_val -= mpmath.loggamma(1 - b + s)
            for a in a_den:
                log_val -= mpmath.loggamma(a - s)
            return mpmath.re(mpmath.exp(log_val))

        # conjugate symmetry: integrate t >= 0 and double
        span = 40.0 / (math.pi * rate) + 2.0
        pieces = int(min(400, 8 + span * (abs(float(log_x)) + 1.0)))
        nodes = list(mpmath.linspace(0, span, pieces + 1)) + [mpmath.inf]
        value = mpmath.quad(integrand, nodes) / mpmath.pi

    result = float(value)
    if not np.isfinite(result):
        raise MeijerGDegeneracyError(f"contour integral returned {result!r}")
    return result


def meijer_g_from_lists(
    m: int, n: int, a_params: Sequence[float], b_params: Sequence[float], argument: float
) -> float:
    return meijer_g(MeijerGSpec(m, n, tuple(a_params), tuple(b_params), argument))


# --- VECTORIZED CONTOUR ---

GL_POINTS = 24
_LOG_BUCKET = 8.0


class MeijerGKernel:
    """
    G^{m,n}_{p,q}(x | a; b) for fixed parameters and many arguments x.

    Along the contour s = c + it the Gamma products do not depend on x, so
    they are tabulated once on a panelled Gauss-Legendre grid in t and each
    evaluation is a weighted sum of exp(log_gamma + s ln x).  Grids are sized
    by |ln x| and cached per bucket of 8 nats.
    """

    def __init__(self, m: int, n: int, a_params: Sequence[float], b_params: Sequence[float]):
        self.spec = MeijerGSpec(m, n, tuple(float(a) for a in a_params), tuple(float(b) for b in b_params), 1.0)
        self.spec.validate()
        self.rate = self.spec.decay_rate()
        if self.rate <= 0:
            raise MeijerGDegeneracyError(
                f"m + n - (p + q)/2 = {self.rate} <= 0: the vertical contour does not converge"
            )
        self.c = self.spec.contour_abscissa()
        self._grids: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}

    def _log_gamma_product(self, s: np.ndarray) -> np.ndarray:
        spec = self.spec
        total = np.zeros_like(s)
        for b in spec.b_params[: spec.m]:
            total += special.loggamma(b - s)
        for a in spec.a_params[: spec.n]:
            total += special.loggamma(1.0 - a + s)
        for b in spec.b_params[spec.m :]:
            total -= special.loggamma(1.0 - b + s)
        for a in spec.a_params[spec.n :]:
            total -= special.loggamma(a - s)
        return total

    def _grid(self, bucket: int) -> Tuple[np.ndarray, np.ndarray]:
        if bucket not in self._grids:
            # past span the integrand is below e^-50 of its size near t = 0
            span = 50.0 / (math.pi * self.rate) + 2.0
            panels = 8 + int(math.ceil(span * (bucket * _LOG_BUCKET + 1.0)))
            nodes, weights = np.polynomial.legendre.leggauss(GL_POINTS)
            edges = np.linspace(0.0, span, panels + 1)
            half = 0.5 * np.diff(edges)
            mid = 0.5 * (edges[1:] + edges[:-1])
            t = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
            w = (half[:, None] * weights[None, :]).ravel()
            s = self.c + 1j * t
            self._grids[bucket] = (s, np.log(w) + self._log_gamma_product(s))
        return self._grids[bucket]

    def at_log(self, log_x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """G evaluated at x = exp(log_x); avoids forming x when it would overflow."""
        log_x = np.asarray(log_x, dtype=float)
        if not np.all(np.isfinite(log_x)):
            raise DomainError("Meijer G argument must be positive and finite")
        flat = np.atleast_1d(log_x).ravel()
        bucket = int(math.ceil(float(np.max(np.abs(flat))) / _LOG_BUCKET))
        s, log_terms = self._grid(bucket)
        # conjugate symmetry: (1 / 2 pi) over the full line = (1 / pi) Re over t >= 0
        values = np.exp(log_terms[None, :] + np.outer(flat, s)).real.sum(axis=1) / math.pi
        if not np.all(np.isfinite(values)):
            raise MeijerGDegeneracyError("contour sum is not finite")
        if log_x.ndim == 0:
            return float(values[0])
        return values.reshape(log_x.shape)

    def __call__(self, x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        x = np.asarray(x, dtype=float)
        if not np.all(x > 0):
            raise DomainError("Meijer G argument must be positive")
        return self.at_log(np.log(x))
