"""
MRT / MRC / ZF beamformers and the SINR of every link for one point pattern.

All functions broadcast over leading axes: a LinkRealization carries a batch
of B fading draws and each SINR comes back with shape (B,).
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..config.params import NormalizedParams
from ..errors import DomainError, NoAssociationError
from .channel import FadingDraw, path_loss
from .geometry import PointPattern, nearest

logger = logging.getLogger(__name__)

COMBINERS_SRA = ("mrc", "zf")
COMBINERS_ARA = ("mrc", "zf-nearest")


def _norm(x: np.ndarray) -> np.ndarray:
    return np.linalg.norm(x, axis=-1)


def mrt(h: np.ndarray) -> np.ndarray:
    """w = h / ||h|| along the last axis."""
    h = np.asarray(h)
    norms = _norm(h)
    if np.any(norms == 0):
        raise DomainError("MRT of a zero channel vector")
    return h / norms[..., None]


def zf_receive(g: np.ndarray, h_cross: np.ndarray) -> np.ndarray:
    """
    Unit combiner w = A g / ||A g||, A = I - v v^H / ||v||^2 with v = H_ud h_q.

    w^H v = 0, so the DL RRH's transmission is nulled at the cost of one
    degree of freedom.
    """
    g = np.asarray(g)
    v = np.asarray(h_cross)
    if g.shape[-1] < 2:
        raise DomainError("ZF requires M > 1")
    v_power = np.sum(np.abs(v) ** 2, axis=-1)
    if np.any(v_power == 0):
        raise DomainError("ZF against a zero interference direction")
    coeff = np.sum(np.conj(v) * g, axis=-1) / v_power
    projected = g - coeff[..., None] * v
    norms = _norm(projected)
    if np.any(norms == 0):
        raise DomainError("ZF projection of the channel vanished")
    return projected / norms[..., None]


def _inner_power(w: np.ndarray, x: np.ndarray) -> np.ndarray:
    """|w^H x|^2 along the last axis."""
    return np.abs(np.sum(np.conj(w) * x, axis=-1)) ** 2


@dataclass(frozen=True)
class LinkRealization:
    """
    A point pattern, a batch of fading draws over it, and the scenario.

    pair_distance replaces the geometric UL-DL separation of the SRA pair
    when the separation is sampled independently of the association.
    """

    pattern: PointPattern
    fading: FadingDraw
    params: NormalizedParams
    pair_distance: Optional[float] = None

    def __post_init__(self):
        f = self.fading
        if f.dl_vectors.shape[-2] != self.pattern.n_dl or f.ul_vectors.shape[-2] != self.pattern.n_ul:
            raise DomainError("fading dimensions do not match the point pattern")
        if f.m != self.params.m_antennas:
            raise DomainError("fading vectors do not have M entries")

    @property
    def batch(self) -> int:
        return self.fading.batch

    def loss(self, distance):
        return path_loss(distance, self.params.epsilon, self.params.alpha)

    def dl_power(self) -> float:
        """Per-RRH DL power of the ARA scheme."""
        if self.params.ara_power_split == "total" and self.pattern.n_dl > 0:
            return self.params.p_b / self.pattern.n_dl
        return self.params.p_b

    def li_term(self) -> np.ndarray:
        return self.params.p_u * np.abs(self.fading.li_coeff) ** 2


# --- DOWNLINK ---


def sinr_dl_ara(rz: LinkRealization) -> np.ndarray:
    """sum_i P_b l(x_i) |h_i^H w_i|^2 / (P_u |h_LI|^2 + 1) with MRT at every DL RRH."""
    if rz.pattern.n_dl == 0:
        return np.zeros(rz.batch)
    h = rz.fading.dl_vectors
    gains = _inner_power(mrt(h), h)
    signal = rz.dl_power() * np.sum(rz.loss(rz.pattern.dl_distances()) * gains, axis=-1)
    return signal / (rz.li_term() + 1.0)


def sinr_dl_sra(rz: LinkRealization) -> np.ndarray:
    """Nearest DL RRH only, transmitting with full P_b."""
    if rz.pattern.n_dl == 0:
        return np.zeros(rz.batch)
    q, d_q = nearest(rz.pattern.dl_points)
    h_q = rz.fading.dl_vectors[:, q]
    signal = rz.params.p_b * rz.loss(d_q) * _inner_power(mrt(h_q), h_q)
    return signal / (rz.li_term() + 1.0)


# --- UPLINK ---


def sra_pair(pattern: PointPattern):
    """(p, q): nearest UL RRH and nearest DL RRH (q is None without DL RRHs)."""
    if pattern.n_ul == 0:
        raise NoAssociationError("no UL association")
    p, _ = nearest(pattern.ul_points)
    q = nearest(pattern.dl_points)[0] if pattern.n_dl > 0 else None
    return p, q


def sinr_ul_sra(rz: LinkRealization, combiner: str = "mrc") -> np.ndarray:
    """
    SINR at the BBU with the nearest UL RRH p and nearest DL RRH q.

    MRC: P_u l(x_p) ||g_p||^2 / (P_b l(x_p, x_q) |w^H H_ud w_t,q|^2 + 1)
    ZF:  P_u l(x_p) ||A g_p||^2, the nulled interference term dropped.
    """
    if combiner not in COMBINERS_SRA:
        raise DomainError(f"unknown SRA combiner {combiner!r}")
    p, q = sra_pair(rz.pattern)
    g_p = rz.fading.ul_vectors[:, p]
    x_p = rz.pattern.ul_points[p]
    signal_gain = rz.params.p_u * rz.loss(np.hypot(*x_p))

    if q is None:
        # nothing to null: both combiners reduce to MRC
        return signal_gain * _inner_power(mrt(g_p), g_p)

    h_q = rz.fading.dl_vectors[:, q]
    H_pq = rz.fading.cross_for(p, q)
    w_t = mrt(h_q)

    if combiner == "zf":
        w = zf_receive(g_p, np.einsum("bij,bj->bi", H_pq, h_q))
        return signal_gain * _inner_power(w, g_p)

    w = mrt(g_p)
    if rz.pair_distance is not None:
        d_pq = rz.pair_distance
    else:
        d_pq = float(np.hypot(*(x_p - rz.pattern.dl_points[q])))
    interference = rz.params.p_b * rz.loss(d_pq) * _inner_power(w, np.einsum("bij,bj->bi", H_pq, w_t))
    return signal_gain * _inner_power(w, g_p) / (interference + 1.0)


def _nearest_dl_per_ul(pattern: PointPattern) -> np.ndarray:
    diff = pattern.ul_points[:, None, :] - pattern.dl_points[None, :, :]
    return np.argmin(np.hypot(diff[..., 0], diff[..., 1]), axis=1)


def nearest_pairs(pattern: PointPattern) -> np.ndarray:
    """(j, nearest DL RRH to UL RRH j) for every UL RRH, shape (N_u, 2)."""
    q = _nearest_dl_per_ul(pattern)
    return np.column_stack((np.arange(pattern.n_ul), q))


def sinr_ul_ara(rz: LinkRealization, combiner: str = "mrc") -> np.ndarray:
    """
    sum_j P_u l(x_j) |w_j^H g_j|^2 / (I_ud + 1), every UL RRH combining with a
    unit-norm w_j.  zf-nearest nulls, per UL RRH, only its nearest DL RRH.

    A unit w_j drawn independently of H_ud^{ji} sees w_j^H H_ud^{ji} w_t,i
    ~ CN(0, 1), so every pair that is not nulled uses the scalar leakage draw;
    full matrices are needed only for the nulled pairs.
    """
    if combiner not in COMBINERS_ARA:
        raise DomainError(f"unknown ARA combiner {combiner!r}")
    pattern = rz.pattern
    if pattern.n_ul == 0:
        raise NoAssociationError("no UL association")

    g = rz.fading.ul_vectors
    ul_loss = rz.loss(pattern.ul_distances())

    if pattern.n_dl == 0:
        return rz.params.p_u * np.sum(ul_loss * _inner_power(mrt(g), g), axis=-1)

    leak = rz.fading.leak_gains()
    if combiner == "zf-nearest":
        q = _nearest_dl_per_ul(pattern)
        rows = np.arange(pattern.n_ul)
        H = np.stack([rz.fading.cross_for(j, q[j]) for j in rows], axis=1)
        v = np.einsum("bjac,bjc->bja", H, rz.fading.dl_vectors[:, q])
        w = zf_receive(g, v)
        leak = leak.copy()
        leak[:, rows, q] = 0.0
    else:
        w = mrt(g)

    signal = rz.params.p_u * np.sum(ul_loss * _inner_power(w, g), axis=-1)
    diff = pattern.ul_points[:, None, :] - pattern.dl_points[None, :, :]
    cross_loss = rz.loss(np.hypot(diff[..., 0], diff[..., 1]))
    interference = rz.dl_power() * np.sum(cross_loss * leak, axis=(-2, -1))
    return signal / (interference + 1.0)


# --- HALF DUPLEX ---


def snr_hd(rz: LinkRealization, direction: str, association: str = "ara") -> np.ndarray:
    """
    Interference-free SNR of a half-duplex slot: no LI, no UL-DL leakage.

    association "sra" keeps only the nearest RRH of the slot's direction.
    """
    if direction not in ("ul", "dl") or association not in ("ara", "sra"):
        raise DomainError(f"unknown HD link {direction!r}/{association!r}")

    if direction == "dl":
        points, vectors = rz.pattern.dl_points, rz.fading.dl_vectors
        power = rz.dl_power() if association == "ara" else rz.params.p_b
    else:
        points, vectors = rz.pattern.ul_points, rz.fading.ul_vectors
        power = rz.params.p_u

    if len(points) == 0:
        return np.zeros(rz.batch)
    distances = np.hypot(points[:, 0], points[:, 1])
    if association == "sra":
        k, _ = nearest(points)
        distances = distances[k : k + 1]
        vectors = vectors[:, k : k + 1]
    gains = _inner_power(mrt(vectors), vectors)
    return power * np.sum(rz.loss(distances) * gains, axis=-1)
