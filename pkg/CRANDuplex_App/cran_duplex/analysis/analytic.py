"""
Semi-analytical UL / DL rates through the MGF rate integral.

Every rate here is hamdi_rate(M_X, M_Y) for a suitable pair of transforms.
Where the conditional rate would be averaged over a count N_d or a distance
r, the average is taken inside the transform instead: the rate integral is
linear in 1 - M_X, so one outer integral replaces a whole family of them.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import mpmath
import numpy as np
from scipy import stats

from ..config.params import normalize
from ..errors import DomainError, PoleCoincidenceError, SeriesDivergenceError, TruncationError
from ..network.geometry import pair_distance_pdf
from ..numerics.quadrature import (
    NESTED_TOL,
    MgfFn,
    hamdi_rate,
    integrate_finite,
    integrate_finite_vec,
)
from . import closed_forms
from .closed_forms import galf

logger = logging.getLogger(__name__)

INTEGRAL_FORM = "integral-form"
SERIES = "series"
CLOSED_FORM = "closed-form"
MRC_TRANSFORM_METHODS = ("quadrature", "hypergeometric", "meijer")

MAX_POISSON_TERMS = 200_000
RADIUS_REL_CHANGE = 0.005
MAX_RADIUS_DOUBLINGS = 8

# Exp(1) mass beyond this point is below 2e-22
T_MAX = 50.0


@dataclass(frozen=True)
class AnalyticResult:
    """Rate in nats/s/Hz, how it was computed, and what was truncated."""

    value: float
    method: str
    diagnostics: Dict[str, object] = field(default_factory=dict)
    ul: Optional[float] = None
    dl: Optional[float] = None

    def as_row(self) -> Dict[str, object]:
        return {"method": self.method, "value": self.value, "ul_rate": self.ul, "dl_rate": self.dl}


def _inner(tol: float) -> float:
    return tol / 10.0


def _loss(r, params):
    return 1.0 / (params.epsilon + r**params.alpha)


def _radial_break(s: float, params) -> Optional[float]:
    """Distance at which s * l(r) = 1, if any."""
    excess = s - params.epsilon
    return excess ** (1.0 / params.alpha) if excess > 0 else None


def _typical_gain(power: float, density: float, alpha: float) -> float:
    """P (pi lambda)^(alpha/2): the link gain at the typical nearest distance."""
    return power * (math.pi * density) ** (alpha / 2.0)


def _gamma_complement(s, m_antennas):
    """1 - (1 + s)^-M without cancellation."""
    return -math.expm1(-m_antennas * math.log1p(s))


def _require_per_rrh(params, name: str) -> None:
    if params.ara_power_split != "per-rrh":
        raise DomainError(f"{name} assumes per-RRH power; total split is covered by dl_rate_ara_exact")


# --- POISSON OUTER SUM ---


@dataclass(frozen=True)
class PoissonWindow:
    """Counts N >= 1 carrying all but tol/10 of the Poisson mass, with their weights."""

    counts: np.ndarray
    weights: np.ndarray
    covered: float

    @property
    def empty(self) -> bool:
        return self.counts.size == 0

    def as_diagnostics(self) -> Dict[str, object]:
        if self.empty:
            return {"n_cutoff": (0, 0), "tail_mass": 1.0 - self.covered}
        return {"n_cutoff": (int(self.counts[0]), int(self.counts[-1])), "tail_mass": 1.0 - self.covered}


def poisson_window(mu: float, tol: float) -> PoissonWindow:
    """
    Truncate sum_N P(N) f(N) to the quantiles tol/20 and 1 - tol/20.

    N = 0 always contributes exactly zero and counts as covered.

    Raises:
        TruncationError: window wider than MAX_POISSON_TERMS or short of 1 - tol/10
    """
    if not mu >= 0 or not math.isfinite(mu):
        raise DomainError(f"Poisson mean must be finite and non-negative, got {mu!r}")
    if mu == 0:
        return PoissonWindow(np.zeros(0, dtype=int), np.zeros(0), 1.0)

    lo = max(1, int(stats.poisson.ppf(tol / 20.0, mu)))
    hi = max(lo, int(stats.poisson.isf(tol / 20.0, mu)))
    if hi - lo + 1 > MAX_POISSON_TERMS:
        raise TruncationError(f"Poisson({mu:.4g}) window needs {hi - lo + 1} terms")

    counts = np.arange(lo, hi + 1)
    weights = stats.poisson.pmf(counts, mu)
    covered = float(np.sum(weights) + stats.poisson.pmf(0, mu))
    if covered < 1.0 - tol / 10.0:
        raise TruncationError(f"Poisson({mu:.4g}) window covers only {covered:.12f} of the mass")
    return PoissonWindow(counts, weights, covered)


def _mixture_complement(q, counts: np.ndarray, weights: np.ndarray) -> float:
    """sum_N w_N (1 - (1 - q_N)^N) with q scalar or one value per N."""
    q = np.clip(q, 0.0, 1.0)
    with np.errstate(divide="ignore"):
        return float(np.sum(weights * -np.expm1(counts * np.log1p(-q))))


def _mixture_pdf(window: PoissonWindow, radius: float) -> Callable:
    counts, weights = window.counts, window.weights

    def pdf(r):
        r_arr = np.asarray(r, dtype=float)
        q = (r_arr / radius) ** 2
        inside = (r_arr >= 0) & (r_arr <= radius)
        shape = np.power(np.clip(1.0 - q, 0.0, None)[..., None], counts - 1)
        value = np.sum(weights * 2.0 * counts * shape, axis=-1) * r_arr / radius**2
        out = np.where(inside, value, 0.0)
        return float(out) if out.ndim == 0 else out

    return pdf


def nearest_dl_mixture_pdf(r, params, tol: float = NESTED_TOL):
    """
    sum_{N>=1} P(N_d = N) f(r | N): density of the nearest DL RRH distance,
    with the N_d = 0 mass left out (it integrates to 1 - e^-mu_d).
    """
    p = normalize(params)
    return _mixture_pdf(poisson_window(p.mu_dl, tol), p.radius)(r)


# --- TRANSFORMS ---


def mgf_li(params) -> MgfFn:
    """M_Y(z) = 1 / (1 + P_u sigma_LI z) for the residual loopback term Y = P_u |h_LI|^2."""
    p = normalize(params)
    scale = p.p_u * p.sigma_li
    if scale == 0:
        return MgfFn.degenerate_zero()
    return MgfFn(
        lambda z: 1.0 / (1.0 + scale * z),
        lambda z: scale * z / (1.0 + scale * z),
        mean=scale,
        scale=scale,
    )


def _per_point_complement(s: float, params, tol: float) -> float:
    """1 - E_r[(1 + s l(r))^-M] for r the radius of a uniform point in the disc."""
    if s == 0:
        return 0.0
    m, radius = params.m_antennas, params.radius

    def f(r):
        return 2.0 * r / radius**2 * _gamma_complement(s * _loss(r, params), m)

    r_star = _radial_break(s, params)
    return integrate_finite(f, 0.0, radius, tol, points=[r_star] if r_star else None)


def _per_point_complement_vec(s_values: np.ndarray, params, tol: float) -> np.ndarray:
    m, radius = params.m_antennas, params.radius

    def f(r):
        return 2.0 * r / radius**2 * -np.expm1(-m * np.log1p(s_values * _loss(r, params)))

    r_star = _radial_break(float(np.median(s_values)), params)
    return integrate_finite_vec(f, 0.0, radius, tol, points=[r_star] if r_star else None)


def _mean_loss_disc(params, tol: float) -> Optional[float]:
    """E[l(r)] over a uniform point of the disc; None (infinite) for singular loss."""
    if params.singular:
        return None
    radius = params.radius
    knee = params.epsilon ** (1.0 / params.alpha)
    return integrate_finite(lambda r: 2.0 * r / radius**2 * _loss(r, params), 0.0, radius, tol, points=[knee])


def mgf_per_point_dl(params, tol: float = NESTED_TOL) -> MgfFn:
    """
    M_{X_l}(s) = E_r[(1 + s / (eps + r^alpha))^-M], the transform of one DL
    RRH's received gain before the P_b factor.

    Args:
        params: SystemParams or NormalizedParams
        tol: relative tolerance of the radial quadrature

    Returns:
        MgfFn: with E[X_l] = M E[l(r)] as mean when the loss is non-singular
    """
    p = normalize(params)
    mean_loss = _mean_loss_disc(p, tol)
    mean = p.m_antennas * mean_loss if mean_loss is not None else None
    return MgfFn.from_complement(lambda s: _per_point_complement(s, p, tol), mean=mean, scale=mean)


def _gamma_mgf(b: float, m_antennas: int) -> MgfFn:
    """X = b * Gamma(M, 1)."""
    return MgfFn(
        lambda z: (1.0 + b * z) ** (-m_antennas),
        lambda z: _gamma_complement(b * z, m_antennas),
        mean=b * m_antennas,
        scale=b * m_antennas,
    )


def _nearest_link_complement(z: float, gain: float, k: int, alpha: float, tol: float) -> float:
    """
    1 - E_t[(1 + z gain t^(-alpha/2))^-k] with t ~ Exp(1).

    With pi lambda r^2 = t the nearest PPP point's loss r^-alpha becomes
    (pi lambda)^(alpha/2) t^(-alpha/2).  Integrated over ln t.
    """
    x = z * gain
    if x == 0:
        return 0.0
    half = alpha / 2.0
    t_star = min(x ** (1.0 / half), T_MAX)
    u_lo = min(math.log(t_star), 0.0) - 30.0

    def f(u):
        t = math.exp(u)
        return -math.expm1(-k * math.log1p(x * t**-half)) * math.exp(u - t)

    # below e^u_lo the bracket is 1 to working precision
    head = -math.expm1(-math.exp(u_lo))
    return head + integrate_finite(f, u_lo, math.log(T_MAX), tol, points=[math.log(t_star), 0.0])


def mgf_nearest_link(gain: float, k: int, alpha: float, tol: float = NESTED_TOL) -> MgfFn:
    """Transform of gain * t^(-alpha/2) * Gamma(k, 1): heavy tailed, so no mean."""
    return MgfFn.from_complement(
        lambda z: _nearest_link_complement(z, gain, k, alpha, tol), mean=None, scale=gain * k
    )


def mgf_interference_mrc(params, method: str = "quadrature", tol: float = NESTED_TOL) -> MgfFn:
    """
    Per-antenna MRC/MRT interference transform M_{Z_i}(s) = E_V[1 / (1 + s V)],
    V ~ Beta(1, M - 1) the power of one entry of a unit-norm M-vector.

    method "quadrature" integrates over V; "hypergeometric" evaluates the
    same quantity as 2F1(1, 1; M; -s) with mpmath; "meijer" sums the
    G^{3,2}_{4,4} contour of closed_forms.interference_transform.
    """
    m = normalize(params).m_antennas
    if method not in MRC_TRANSFORM_METHODS:
        raise DomainError(f"unknown MRC transform method {method!r}")
    if m == 1:
        return MgfFn(lambda s: 1.0 / (1.0 + s), lambda s: s / (1.0 + s), mean=1.0, scale=1.0)

    if method == "meijer":

        def fn(s):
            return closed_forms.interference_transform(s, m) if s > 0 else 1.0

        def complement(s):
            return 1.0 - closed_forms.interference_transform(s, m) if s > 0 else 0.0

    elif method == "hypergeometric":

        def fn(s):
            return float(mpmath.hyp2f1(1, 1, m, -s)) if s > 0 else 1.0

        def complement(s):
            # 1 - 2F1(1, 1; M; -s) = (s / M) 2F1(1, 2; M + 1; -s)
            return float(s / m * mpmath.hyp2f1(1, 2, m + 1, -s)) if s > 0 else 0.0

    else:

        def fn(s):
            if s == 0:
                return 1.0
            return integrate_finite(lambda v: (m - 1) * (1 - v) ** (m - 2) / (1.0 + s * v), 0.0, 1.0, tol)

        def complement(s):
            if s == 0:
                return 0.0
            return integrate_finite(
                lambda v: (m - 1) * (1 - v) ** (m - 2) * s * v / (1.0 + s * v), 0.0, 1.0, tol
            )

    return MgfFn(fn, complement, mean=1.0 / m, scale=1.0 / m)


# --- ARA DOWNLINK ---


def dl_rate_ara_given_count(params, n_dl: int, tol: float = NESTED_TOL) -> AnalyticResult:
    """DL rate with exactly n_dl DL RRHs placed uniformly in the disc."""
    p = normalize(params)
    if n_dl < 0:
        raise DomainError(f"RRH count must be non-negative, got {n_dl}")
    if n_dl == 0 or p.p_b == 0:
        return AnalyticResult(0.0, INTEGRAL_FORM, {"n_dl": n_dl, "tol": tol})
    power = p.p_b / n_dl if p.ara_power_split == "total" else p.p_b
    per_point = mgf_per_point_dl(p, _inner(tol))

    def complement(z):
        return _mixture_complement(per_point.one_minus(power * z), np.array([n_dl]), np.array([1.0]))

    mean = None if per_point.mean is None else n_dl * power * per_point.mean
    mx = MgfFn.from_complement(complement, mean=mean, scale=mean or power)
    return AnalyticResult(hamdi_rate(mx, mgf_li(p), tol), INTEGRAL_FORM, {"n_dl": n_dl, "tol": tol})


def dl_rate_ara_exact(params, tol: float = NESTED_TOL) -> AnalyticResult:
    """
    ARA downlink rate sum_{N_d>=1} P(N_d) E[ln(1 + X/(Y+1)) | N_d].

    Given N_d the DL gains are i.i.d., so 1 - M_X(z) = 1 - M_{X_l}(P_b z)^N_d
    (P_b / N_d under the total power split), and the Poisson mixture of
    these complements enters a single rate integral.

    Raises:
        TruncationError: the Poisson window could not be closed
    """
    p = normalize(params)
    window = poisson_window(p.mu_dl, tol)
    diagnostics = {"tol": tol, "power_split": p.ara_power_split, **window.as_diagnostics()}
    if window.empty or p.p_b == 0:
        return AnalyticResult(0.0, INTEGRAL_FORM, diagnostics)

    inner = _inner(tol)
    m = p.m_antennas
    counts, weights = window.counts, window.weights
    mean_loss = _mean_loss_disc(p, inner)

    if p.ara_power_split == "total":

        def complement(z):
            q = _per_point_complement_vec(p.p_b * z / counts, p, inner)
            return _mixture_complement(q, counts, weights)

        mean = None if mean_loss is None else float(np.sum(weights)) * p.p_b * m * mean_loss
    else:

        def complement(z):
            return _mixture_complement(_per_point_complement(p.p_b * z, p, inner), counts, weights)

        mean = None if mean_loss is None else float(np.sum(weights * counts)) * p.p_b * m * mean_loss

    scale = mean or _typical_gain(p.p_b * m, p.dl_density, p.alpha)
    mx = MgfFn.from_complement(complement, mean=mean, scale=scale)
    value = hamdi_rate(mx, mgf_li(p), tol)
    logger.debug("ARA DL exact: %.6f nats (window %s)", value, diagnostics["n_cutoff"])
    return AnalyticResult(value, INTEGRAL_FORM, diagnostics)


def _pgfl_integral(s: float, params, tol: float) -> float:
    """integral_0^inf (1 - (1 + s / (eps + x^alpha))^-M) x dx."""
    if s == 0:
        return 0.0
    m, alpha, eps = params.m_antennas, params.alpha, params.epsilon
    x_star = _radial_break(s, params)
    knee = eps ** (1.0 / alpha)
    ref = max(x_star or 0.0, knee)
    x_hi = 1e3 * max(ref, 1.0)
    v_lo = math.log(ref) - 15.0

    def f(v):
        x = math.exp(v)
        return _gamma_complement(s * _loss(x, params), m) * x * x

    breaks = [math.log(b) for b in (x_star, knee) if b]
    body = integrate_finite(f, v_lo, math.log(x_hi), tol, points=breaks)
    head_value = _gamma_complement(s / eps, m) if eps > 0 else 1.0
    head = 0.5 * math.exp(2.0 * v_lo) * head_value
    # past x_hi the bracket is M s x^-alpha to relative order s x_hi^-alpha
    tail = m * s * x_hi ** (2.0 - alpha) / (alpha - 2.0)
    return head + body + tail


def dl_rate_ara_upper(params, tol: float = NESTED_TOL) -> AnalyticResult:
    """
    Infinite-plane bound: 1 - M_X(z) = 1 - exp(-2 pi p lambda integral_0^inf
    (1 - (1 + z P_b / (eps + x^alpha))^-M) x dx).

    Extending the disc to the plane only adds DL RRHs, so the result bounds
    dl_rate_ara_exact from above.
    """
    p = normalize(params)
    _require_per_rrh(p, "dl_rate_ara_upper")
    diagnostics = {"tol": tol}
    if p.p_b == 0 or p.dl_density == 0:
        return AnalyticResult(0.0, INTEGRAL_FORM, diagnostics)

    inner = _inner(tol)
    intensity = 2.0 * math.pi * p.dl_density

    def complement(z):
        return -math.expm1(-intensity * _pgfl_integral(p.p_b * z, p, inner))

    mean = None
    if not p.singular:
        radial = p.epsilon ** (p.delta - 1.0) * (math.pi / p.alpha) / math.sin(math.pi * p.delta)
        mean = intensity * p.p_b * p.m_antennas * radial
    scale = mean or _typical_gain(p.p_b * p.m_antennas, p.dl_density, p.alpha)
    mx = MgfFn.from_complement(complement, mean=mean, scale=scale)
    return AnalyticResult(hamdi_rate(mx, mgf_li(p), tol), INTEGRAL_FORM, diagnostics)


def _singular_rate(power: float, density: float, m_antennas: int, delta: float, my: MgfFn, tol: float) -> float:
    """Rate integral with 1 - M_X(z) = 1 - exp(galf * (P z)^delta)."""
    constant = galf(m_antennas, delta, density)
    if constant == 0 or power == 0:
        return 0.0

    def complement(z):
        return -math.expm1(constant * (power * z) ** delta)

    mx = MgfFn.from_complement(complement, mean=None, scale=power * abs(constant) ** (1.0 / delta))
    return hamdi_rate(mx, my, tol)


def dl_rate_ara_singular(params, tol: float = NESTED_TOL, series: bool = False) -> AnalyticResult:
    """
    ARA downlink rate under singular path loss (epsilon treated as 0) over
    the infinite plane.

    Args:
        params: SystemParams or NormalizedParams
        tol: relative tolerance
        series: also evaluate the alternating series; its value, term count
            or divergence message land in diagnostics

    Returns:
        AnalyticResult: always the integral-form value
    """
    p = normalize(params)
    _require_per_rrh(p, "dl_rate_ara_singular")
    constant = galf(p.m_antennas, p.delta, p.dl_density)
    diagnostics = {"tol": tol, "galf": constant}
    value = _singular_rate(p.p_b, p.dl_density, p.m_antennas, p.delta, mgf_li(p), tol)

    if series:
        try:
            result = closed_forms.ara_singular_series(
                constant * p.p_b**p.delta, p.delta, p.p_u * p.sigma_li, tol
            )
            diagnostics.update(series_value=result.value, series_terms=result.terms)
        except SeriesDivergenceError as exc:
            logger.info("Singular series skipped: %s", exc)
            diagnostics["series_error"] = str(exc)
    return AnalyticResult(value, INTEGRAL_FORM, diagnostics)


# --- SRA DOWNLINK ---


def dl_rate_sra(params, tol: float = NESTED_TOL, method: str = INTEGRAL_FORM) -> AnalyticResult:
    """
    SRA downlink rate with MRT from the nearest DL RRH.

    integral-form: 1 - M_X(z) = integral_0^R (1 - (1 + z P_b l(r))^-M) g(r) dr
    with g the Poisson mixture of nearest-distance laws.
    closed-form: integral_0^R rate(r) g(r) dr with the exponential-integral
    conditional rate; nodes where the partial fractions break down are
    evaluated by the rate integral instead and counted in diagnostics.
    """
    if method not in (INTEGRAL_FORM, CLOSED_FORM):
        raise DomainError(f"unknown SRA DL method {method!r}")
    p = normalize(params)
    window = poisson_window(p.mu_dl, tol)
    diagnostics = {"tol": tol, **window.as_diagnostics()}
    if window.empty or p.p_b == 0:
        return AnalyticResult(0.0, method, diagnostics)

    inner = _inner(tol)
    m, radius = p.m_antennas, p.radius
    g = _mixture_pdf(window, radius)
    my = mgf_li(p)
    mode = 1.0 / math.sqrt(2.0 * math.pi * p.dl_density)

    if method == CLOSED_FORM:
        c = p.p_u * p.sigma_li
        fallbacks = []

        def rate_at(r):
            b = p.p_b * _loss(r, p)
            try:
                return closed_forms.sra_dl_conditional_rate(b, c, m)
            except PoleCoincidenceError:
                fallbacks.append(r)
                return hamdi_rate(_gamma_mgf(b, m), my, inner)

        pole = _radial_break(p.p_b / c, p) if c > 0 else None
        value = integrate_finite(
            lambda r: rate_at(r) * g(r), 0.0, radius, tol, points=[b for b in (mode, pole) if b]
        )
        diagnostics["pole_fallbacks"] = len(fallbacks)
        return AnalyticResult(value, CLOSED_FORM, diagnostics)

    def complement(z):
        s = p.p_b * z
        r_star = _radial_break(s, p)
        return integrate_finite(
            lambda r: _gamma_complement(s * _loss(r, p), m) * g(r),
            0.0,
            radius,
            inner,
            points=[b for b in (r_star, mode) if b],
        )

    mean = None
    if not p.singular:
        knee = p.epsilon ** (1.0 / p.alpha)
        mean = p.p_b * m * integrate_finite(lambda r: _loss(r, p) * g(r), 0.0, radius, inner, points=[knee, mode])
    scale = mean or _typical_gain(p.p_b * m, p.dl_density, p.alpha)
    mx = MgfFn.from_complement(complement, mean=mean, scale=scale)
    return AnalyticResult(hamdi_rate(mx, my, tol), INTEGRAL_FORM, diagnostics)


# --- SRA UPLINK ---


def _nearest_link_rate(power: float, density: float, k: int, alpha: float, my: MgfFn, tol: float) -> float:
    """E[ln(1 + X/(Y+1))], X the gain of the nearest PPP point with k degrees of freedom."""
    if power == 0 or density == 0:
        return 0.0
    mx = mgf_nearest_link(_typical_gain(power, density, alpha), k, alpha, _inner(tol))
    return hamdi_rate(mx, my, tol)


def _pair_interference_mgf(params, per_unit: MgfFn, tol: float) -> MgfFn:
    """M_Z(z) = integral_0^2R M_{Z_i}(P_b r^-alpha z)^M f_pair(r) dr."""
    m, alpha, radius = params.m_antennas, params.alpha, params.radius

    def complement(z):
        s = params.p_b * z
        if s == 0:
            return 0.0

        def f(r):
            inner = per_unit(s * r**-alpha)
            bracket = -math.expm1(m * math.log(inner)) if inner > 0 else 1.0
            return bracket * pair_distance_pdf(r, radius)

        return integrate_finite(f, 0.0, 2.0 * radius, tol, points=[s ** (1.0 / alpha)])

    return MgfFn.from_complement(complement, mean=None, scale=None)


def _exact_alpha_ratio(p) -> Tuple[int, int]:
    m, n = p.alpha_ratio
    if not math.isclose(m / n, p.alpha, rel_tol=1e-12):
        raise DomainError(f"alpha = {p.alpha!r} has no exact m/n form with n <= 16")
    return m, n


def ul_rate_sra_mrc(
    params, tol: float = NESTED_TOL, mgf_method: str = "quadrature", method: str = INTEGRAL_FORM
) -> AnalyticResult:
    """
    SRA uplink rate with MRC at the nearest UL RRH and MRT at the nearest DL RRH.

    X (signal) is the nearest-UL link with M degrees of freedom; Y (DL
    leakage) sums M per-antenna terms at a UL-DL distance drawn from the
    pair-distance law, each term taken independent of the others.

    Args:
        mgf_method: how the per-antenna leakage transform is evaluated.
        method: INTEGRAL_FORM, or CLOSED_FORM to take X's transform from its
            Meijer-G form (alpha must be a ratio m/n).
    """
    if method not in (INTEGRAL_FORM, CLOSED_FORM):
        raise DomainError(f"unknown MRC method {method!r}")
    p = normalize(params)
    diagnostics = {"tol": tol, "mgf_method": mgf_method}
    if p.p_u == 0 or p.ul_density == 0:
        return AnalyticResult(0.0, method, diagnostics)

    if method == CLOSED_FORM:
        diagnostics["alpha_ratio"] = _exact_alpha_ratio(p)

    inner = _inner(tol)
    if p.p_b == 0 or p.dl_density == 0:
        my = MgfFn.degenerate_zero()
    else:
        per_unit = mgf_interference_mrc(p, mgf_method, _inner(inner))
        my = _pair_interference_mgf(p, per_unit, inner)

    if method == CLOSED_FORM:
        constants = closed_forms.NearestLinkConstants.build(
            p.p_u, p.ul_density, p.m_antennas, diagnostics["alpha_ratio"]
        )
        value = hamdi_rate(closed_forms.mgf_ul_signal_meijer(constants), my, tol)
        return AnalyticResult(value, CLOSED_FORM, diagnostics)

    value = _nearest_link_rate(p.p_u, p.ul_density, p.m_antennas, p.alpha, my, tol)
    return AnalyticResult(value, INTEGRAL_FORM, diagnostics)


def ul_rate_sra_zf(params, tol: float = NESTED_TOL, method: str = INTEGRAL_FORM) -> AnalyticResult:
    """
    SRA uplink rate with ZF at the nearest UL RRH.

    The nulled DL leakage leaves SNR = P_u r^-alpha ||A g||^2 with
    ||A g||^2 ~ Gamma(M - 1, 1); only P_u, M, alpha, lambda and p_dl are read.
    """
    if method not in (INTEGRAL_FORM, CLOSED_FORM):
        raise DomainError(f"unknown ZF method {method!r}")
    p = normalize(params)
    if p.m_antennas < 2:
        raise DomainError("ZF requires M > 1")
    diagnostics = {"tol": tol}
    if p.p_u == 0 or p.ul_density == 0:
        return AnalyticResult(0.0, method, diagnostics)

    if method == CLOSED_FORM:
        ratio = _exact_alpha_ratio(p)
        value = closed_forms.ul_rate_sra_zf_meijer(p.p_u, p.ul_density, p.m_antennas, ratio)
        diagnostics["alpha_ratio"] = ratio
        return AnalyticResult(value, CLOSED_FORM, diagnostics)

    value = _nearest_link_rate(p.p_u, p.ul_density, p.m_antennas - 1, p.alpha, MgfFn.degenerate_zero(), tol)
    return AnalyticResult(value, INTEGRAL_FORM, diagnostics)


# --- HALF DUPLEX ---


def hd_rate_ara(params, tol: float = NESTED_TOL, series: bool = False) -> AnalyticResult:
    """
    tau * DL + (1 - tau) * UL, each slot the LI-free singular-loss ARA rate
    with (P_b, p lambda) or (P_u, (1 - p) lambda).
    """
    p = normalize(params)
    _require_per_rrh(p, "hd_rate_ara")
    none = MgfFn.degenerate_zero()
    dl = ul = 0.0
    if p.tau > 0:
        dl = p.tau * _singular_rate(p.p_b, p.dl_density, p.m_antennas, p.delta, none, tol)
    if p.tau < 1:
        ul = (1.0 - p.tau) * _singular_rate(p.p_u, p.ul_density, p.m_antennas, p.delta, none, tol)

    diagnostics = {
        "tol": tol,
        "galf": galf(p.m_antennas, p.delta, p.dl_density),
        "galfu": galf(p.m_antennas, p.delta, p.ul_density),
    }
    if series:
        try:
            dl_series, ul_series = closed_forms.hd_ara_series(p, tol)
            diagnostics["series_value"] = dl_series + ul_series
        except SeriesDivergenceError as exc:
            diagnostics["series_error"] = str(exc)
    return AnalyticResult(dl + ul, INTEGRAL_FORM, diagnostics, ul=ul, dl=dl)


def hd_rates_sra(params, tol: float = NESTED_TOL) -> AnalyticResult:
    """
    HD SRA: each slot is an interference-free nearest-RRH link with M degrees
    of freedom, DL at density p lambda and power P_b, UL at (1 - p) lambda and
    P_u; weighted by tau and 1 - tau.
    """
    p = normalize(params)
    none = MgfFn.degenerate_zero()
    dl = ul = 0.0
    if p.tau > 0:
        dl = p.tau * _nearest_link_rate(p.p_b, p.dl_density, p.m_antennas, p.alpha, none, tol)
    if p.tau < 1:
        ul = (1.0 - p.tau) * _nearest_link_rate(p.p_u, p.ul_density, p.m_antennas, p.alpha, none, tol)
    return AnalyticResult(dl + ul, INTEGRAL_FORM, {"tol": tol}, ul=ul, dl=dl)


# --- DISC SIZE ---


def adaptive_radius(
    params, tol: float = NESTED_TOL, rel_change: float = RADIUS_REL_CHANGE, max_doublings: int = MAX_RADIUS_DOUBLINGS
) -> Tuple[float, float]:
    """
    Double R until the ARA DL rate moves by less than rel_change.

    Returns:
        (radius, rate): the first radius whose doubling left the rate within rel_change
    """
    p = normalize(params)
    radius = p.radius
    previous = dl_rate_ara_exact(p, tol).value
    for _ in range(max_doublings):
        current = dl_rate_ara_exact(p.updated(radius=2.0 * radius), tol).value
        if abs(current - previous) <= rel_change * max(abs(current), 1e-300):
            logger.info("ARA DL rate saturated at R = %g m (%.6f nats)", radius, previous)
            return radius, previous
        radius *= 2.0
        previous = current
    raise TruncationError(f"ARA DL rate still moving after {max_doublings} doublings of R")
