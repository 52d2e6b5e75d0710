"""
Series and closed-form rate expressions.

None of these is a primary computation path: each reproduces an
integral-form result of analysis.analytic and is compared against it.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy import special

from ..config.params import NormalizedParams
from ..errors import DomainError, PoleCoincidenceError, SeriesDivergenceError
from ..numerics.quadrature import MgfFn
from ..numerics.specfun import (
    MeijerGKernel,
    MeijerGSpec,
    delta_list,
    exp_integral_en_scaled,
    laplace_pole_moment,
    ln_gamma,
    meijer_g,
)

logger = logging.getLogger(__name__)

# relative gap |b - c| / max(b, c) below which partial fractions lose all digits
POLE_RTOL = 1e-3

SERIES_MAX_TERMS = 60
SERIES_QUIET_TERMS = 3
_MACHINE_EPS = 1e-16
_LOG_2PI = math.log(2.0 * math.pi)


def galf(m_antennas: int, delta: float, density: float) -> float:
    """
    delta pi lambda Gamma(M + delta) Gamma(-delta) / Gamma(M).

    Exponent constant of a singular-path-loss PPP sum with Gamma(M, 1) gains:
    E[exp(-s I)] = exp(galf * s^delta).  Negative for 0 < delta < 1.
    """
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta!r}")
    if density == 0:
        return 0.0
    ratio = math.exp(ln_gamma(m_antennas + delta) - ln_gamma(m_antennas))
    return delta * math.pi * density * ratio * float(special.gamma(-delta))


# --- SRA DOWNLINK ---


def sra_dl_conditional_rate(b: float, c: float, m_antennas: int) -> float:
    """
    E[ln(1 + b G / (1 + c H))] for G ~ Gamma(M, 1), H ~ Exp(1).

    Partial fractions of the transform of c H + b G give
        sum_k (1 + B_k/b) e^(1/b) E_k(1/b) + B_0 e^(1/c) E_1(1/c)
    with B_k/b = (c/(b-c)) (-c/(b-c))^(M-k) and B_0 = (1 - b/c)^-M - 1.

    Raises:
        PoleCoincidenceError: b and c too close for the partial fractions
    """
    if not b > 0 or not c >= 0 or m_antennas < 1:
        raise DomainError(f"need b > 0, c >= 0, M >= 1; got b={b!r}, c={c!r}, M={m_antennas!r}")
    beta = 1.0 / b
    if c == 0:
        return sum(exp_integral_en_scaled(k, beta) for k in range(1, m_antennas + 1))
    if abs(b - c) <= POLE_RTOL * max(b, c):
        raise PoleCoincidenceError(f"signal scale b={b!r} and LI scale c={c!r} coincide")

    ratio = c / (b - c)
    total = 0.0
    for k in range(1, m_antennas + 1):
        total += (1.0 + ratio * (-ratio) ** (m_antennas - k)) * exp_integral_en_scaled(k, beta)
    b0 = (1.0 - b / c) ** (-m_antennas) - 1.0
    return total + b0 * exp_integral_en_scaled(1, 1.0 / c)


# --- SINGULAR PATH LOSS SERIES ---


@dataclass(frozen=True)
class SeriesResult:
    value: float
    terms: int
    last_term: float


def ara_singular_series(gain: float, delta: float, c: float, tol: float) -> SeriesResult:
    """
    -sum_{k>=1} gain^k / k! * integral_0^inf z^(delta k - 1) e^-z / (1 + c z) dz

    where gain = galf * P^delta.  Kahan-summed; stops once three consecutive
    terms fall below tol * |partial sum|.

    Raises:
        SeriesDivergenceError: no convergence within 60 terms, or the
            partial sums cancelled below double precision
    """
    if gain == 0:
        return SeriesResult(0.0, 0, 0.0)
    log_gain = math.log(abs(gain))
    sign = -1.0 if gain < 0 else 1.0

    total = 0.0
    carry = 0.0
    largest = 0.0
    quiet = 0
    for k in range(1, SERIES_MAX_TERMS + 1):
        magnitude = math.exp(k * log_gain - special.gammaln(k + 1))
        term = -(sign**k) * magnitude * laplace_pole_moment(delta * k, c)

        y = term - carry
        t = total + y
        carry = (t - total) - y
        total = t

        largest = max(largest, abs(term))
        if abs(term) < tol * abs(total):
            quiet += 1
        else:
            quiet = 0
        if quiet >= SERIES_QUIET_TERMS:
            if largest * _MACHINE_EPS > tol * abs(total):
                raise SeriesDivergenceError(
                    f"partial sums cancelled: largest term {largest:.3e} vs sum {total:.3e}"
                )
            return SeriesResult(total, k, term)

    raise SeriesDivergenceError(
        f"series did not converge in {SERIES_MAX_TERMS} terms (|gain| = {abs(gain):.3e})"
    )


def hd_ara_series(params: NormalizedParams, tol: float) -> Tuple[float, float]:
    """(tau * DL term, (1 - tau) * UL term) of the HD ARA rate, series form."""
    p = params
    dl = ul = 0.0
    if p.tau > 0:
        gain = galf(p.m_antennas, p.delta, p.dl_density) * p.p_b**p.delta
        dl = p.tau * ara_singular_series(gain, p.delta, 0.0, tol).value
    if p.tau < 1:
        gain = galf(p.m_antennas, p.delta, p.ul_density) * p.p_u**p.delta
        ul = (1.0 - p.tau) * ara_singular_series(gain, p.delta, 0.0, tol).value
    return dl, ul



# --- SRA UPLINK, MEIJER-G FORMS ---


@dataclass(frozen=True)
class NearestLinkConstants:
    """
    Constants of the Meijer-G forms for W = P_u r^-alpha Gamma(k, 1), r the
    distance to the nearest point of a PPP of density lambda_u, alpha = m/n.

    varsigma = (1 / (2n P_u))^(2n) (m / (pi lambda_u))^m
    zeta     = sqrt(m) (2n)^(k - 1/2) (2 pi)^(1 - (m + 2n)/2) / Gamma(k)
    mu       = 2 zeta sqrt(n pi) / (2 pi)^n
    kappa    = zeta (2 pi)^(1 - 2n)
    All are kept as logarithms.
    """

    m: int
    n: int
    k: int
    log_varsigma: float

    @classmethod
    def build(cls, p_u: float, ul_density: float, k: int, alpha_ratio: Tuple[int, int]) -> "NearestLinkConstants":
        m, n = alpha_ratio
        if k < 1:
            raise DomainError(f"need at least one degree of freedom, got {k!r}")
        if not p_u > 0 or not ul_density > 0:
            raise DomainError("Meijer-G forms need positive UL power and density")
        if not m > 2 * n >= 2 or math.gcd(m, n) != 1:
            raise DomainError(f"alpha = {m}/{n} must be a reduced ratio above 2")
        two_n = 2 * n
        log_varsigma = -two_n * math.log(two_n * p_u) + m * (math.log(m) - math.log(math.pi * ul_density))
        return cls(m, n, k, log_varsigma)

    @property
    def log_zeta(self) -> float:
        two_n = 2 * self.n
        return (
            0.5 * math.log(self.m)
            + (self.k - 0.5) * math.log(two_n)
            + (1.0 - 0.5 * (self.m + two_n)) * _LOG_2PI
            - ln_gamma(self.k)
        )

    @property
    def log_mu(self) -> float:
        return self.log_zeta + math.log(2.0) + 0.5 * math.log(self.n * math.pi) - self.n * _LOG_2PI

    @property
    def log_kappa(self) -> float:
        return self.log_zeta + (1 - 2 * self.n) * _LOG_2PI

    @property
    def link_gain(self) -> float:
        """P_u (pi lambda_u)^(alpha/2), recovered from varsigma."""
        return math.exp((self.m * math.log(self.m) - self.log_varsigma) / (2 * self.n)) / (2 * self.n)


def ul_signal_cdf(w, constants: NearestLinkConstants):
    """
    F_W(w) = 1 - zeta G^{2n+1, m}_{m+1, 2n+1}(varsigma w^(2n) | Delta(m, 0), 1; Delta(2n, k), 0).

    w may be a scalar or an array of positive values.
    """
    c = constants
    kernel = _signal_cdf_kernel(c.m, c.n, c.k)
    log_w = np.log(np.asarray(w, dtype=float))
    return 1.0 - math.exp(c.log_zeta) * kernel.at_log(c.log_varsigma + 2 * c.n * log_w)


def mgf_ul_signal_meijer(constants: NearestLinkConstants) -> MgfFn:
    """
    Transform of W with 1 - M_W(z) = mu G^{2n+1, m+2n}_{m+2n+1, 2n+1}(
    varsigma (2n / z)^(2n) | Delta(2n, 0), Delta(m, 0), 1; Delta(2n, k), 0).
    """
    c = constants
    kernel = _signal_transform_kernel(c.m, c.n, c.k)
    two_n = 2 * c.n
    mu = math.exp(c.log_mu)

    def complement(z):
        if z <= 0:
            return 0.0
        return mu * kernel.at_log(c.log_varsigma + two_n * (math.log(two_n) - math.log(z)))

    return MgfFn.from_complement(complement, mean=None, scale=c.link_gain * c.k)


def interference_cdf(z, m_antennas: int):
    """F_{Z_i}(z) = Gamma(M) G^{3,1}_{3,4}(z | 1, M, M; 1, 1, M, 0) for one MRC/MRT leakage term."""
    kernel, _ = _interference_kernels(m_antennas)
    return math.exp(ln_gamma(m_antennas)) * kernel(z)


def interference_transform(s, m_antennas: int):
    """M_{Z_i}(s) = Gamma(M) G^{3,2}_{4,4}(1/s | 0, 1, M, M; 1, 1, M, 0)."""
    _, kernel = _interference_kernels(m_antennas)
    log_s = np.log(np.asarray(s, dtype=float))
    return math.exp(ln_gamma(m_antennas)) * kernel.at_log(-log_s)


@lru_cache(maxsize=None)
def _signal_cdf_kernel(m: int, n: int, k: int) -> MeijerGKernel:
    a = delta_list(m, 0) + [1.0]
    b = delta_list(2 * n, k) + [0.0]
    return MeijerGKernel(2 * n + 1, m, a, b)


@lru_cache(maxsize=None)
def _signal_transform_kernel(m: int, n: int, k: int) -> MeijerGKernel:
    a = delta_list(2 * n, 0) + delta_list(m, 0) + [1.0]
    b = delta_list(2 * n, k) + [0.0]
    return MeijerGKernel(2 * n + 1, m + 2 * n, a, b)


@lru_cache(maxsize=None)
def _interference_kernels(m_antennas: int) -> Tuple[MeijerGKernel, MeijerGKernel]:
    if m_antennas < 1:
        raise DomainError(f"m_antennas must be >= 1, got {m_antennas!r}")
    big_m = float(m_antennas)
    cdf = MeijerGKernel(3, 1, (1.0, big_m, big_m), (1.0, 1.0, big_m, 0.0))
    transform = MeijerGKernel(3, 2, (0.0, 1.0, big_m, big_m), (1.0, 1.0, big_m, 0.0))
    return cdf, transform


def ul_rate_sra_zf_meijer(
    p_u: float, ul_density: float, m_antennas: int, alpha_ratio: Tuple[int, int]
) -> float:
    """
    ZF uplink rate, alpha = m/n, as one Meijer G-function:

        kappa G^{4n+1, m+2n}_{m+2n+1, 4n+1}(varsigma | Delta(m, 0), Delta(2n, 0), 1;
                                                      Delta(2n, M-1), Delta(2n, 0), 0)

    with the constants of NearestLinkConstants for M - 1 degrees of freedom.
    """
    if m_antennas < 2:
        raise DomainError("ZF requires M > 1")
    c = NearestLinkConstants.build(p_u, ul_density, m_antennas - 1, alpha_ratio)
    two_n = 2 * c.n
    spec = MeijerGSpec(
        m=2 * two_n + 1,
        n=c.m + two_n,
        a_params=tuple(delta_list(c.m, 0) + delta_list(two_n, 0) + [1.0]),
        b_params=tuple(delta_list(two_n, c.k) + delta_list(two_n, 0) + [0.0]),
        argument=math.exp(c.log_varsigma),
    )
    return math.exp(c.log_kappa) * meijer_g(spec)
