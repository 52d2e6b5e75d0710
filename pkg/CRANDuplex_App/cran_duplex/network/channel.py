"""
Small-scale fading, residual loopback interference and path loss.

Every draw takes a leading batch shape so one call produces all fading
realizations of a point pattern.  DL vectors, UL vectors, UL-DL matrices and
the LI coefficient come from separate generators; switching scheme (which
changes how many matrices are needed) never shifts the other draws.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..errors import DomainError
from .geometry import PointPattern

logger = logging.getLogger(__name__)

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


def draw_cn_vector(m: int, rng: np.random.Generator, size: Tuple[int, ...] = ()) -> np.ndarray:
    """Entries i.i.d. CN(0, 1); shape size + (m,)."""
    if m < 1:
        raise DomainError(f"vector dimension must be >= 1, got {m}")
    shape = tuple(size) + (m,)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * _INV_SQRT2


def draw_li(sigma_li: float, rng: np.random.Generator, size: Tuple[int, ...] = ()) -> np.ndarray:
    """Residual LI coefficient h_LI ~ CN(0, sigma_li); exactly 0 when sigma_li = 0."""
    if sigma_li < 0:
        raise DomainError(f"LI power must be non-negative, got {sigma_li}")
    unit = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) * _INV_SQRT2
    return np.sqrt(sigma_li) * unit


def path_loss(distance, epsilon: float, alpha: float):
    """l(d) = 1 / (epsilon + d^alpha)."""
    d = np.asarray(distance, dtype=float)
    if np.any(d < 0):
        raise DomainError("distance must be non-negative")
    if epsilon == 0 and np.any(d == 0):
        raise DomainError("singular path loss is unbounded at distance 0")
    gain = 1.0 / (epsilon + d**alpha)
    return float(gain) if gain.ndim == 0 else gain


class FadingStreams(NamedTuple):
    dl: np.random.Generator
    ul: np.random.Generator
    cross: np.random.Generator
    li: np.random.Generator


@dataclass(frozen=True)
class FadingDraw:
    """
    A batch of small-scale realizations for one point pattern.

    dl_vectors (B, N_d, M) and ul_vectors (B, N_u, M) hold h_i and g_j;
    cross_matrices (B, K, M, M) hold H_ud for the K (UL j, DL i) pairs listed
    in cross_pairs; leak_coeff (B, N_u, N_d) holds the scalar UL-DL leakage
    w_j^H H_ud w_t,i for receivers drawn independently of H_ud; li_coeff (B,)
    holds h_LI.
    """

    dl_vectors: np.ndarray
    ul_vectors: np.ndarray
    li_coeff: np.ndarray
    cross_matrices: Optional[np.ndarray] = None
    cross_pairs: Optional[np.ndarray] = None
    leak_coeff: Optional[np.ndarray] = None

    @property
    def batch(self) -> int:
        return self.li_coeff.shape[0]

    @property
    def m(self) -> int:
        return self.dl_vectors.shape[-1]

    def cross_for(self, j: int, i: int) -> np.ndarray:
        """H_ud between UL RRH j and DL RRH i, shape (B, M, M)."""
        if self.cross_pairs is None:
            raise DomainError("no UL-DL matrices were drawn for this realization")
        hits = np.flatnonzero((self.cross_pairs[:, 0] == j) & (self.cross_pairs[:, 1] == i))
        if hits.size == 0:
            raise DomainError(f"UL-DL matrix ({j}, {i}) was not drawn")
        return self.cross_matrices[:, hits[0]]

    def leak_gains(self) -> np.ndarray:
        """|w_j^H H_ud w_t,i|^2 for every pair, shape (B, N_u, N_d)."""
        if self.leak_coeff is None:
            raise DomainError("no scalar leakage was drawn for this realization")
        return np.abs(self.leak_coeff) ** 2


def draw_fading(
    pattern: PointPattern,
    m: int,
    sigma_li: float,
    streams: FadingStreams,
    batch: int = 1,
    pairs: Optional[Sequence[Tuple[int, int]]] = None,
    leakage: bool = False,
) -> FadingDraw:
    """
    Draw `batch` fading realizations for the pattern.

    pairs selects which UL-DL matrices to draw (None: none); leakage adds one
    CN(0, 1) leakage scalar per UL-DL pair, drawn after the matrices.
    """
    size = (batch,)
    dl = draw_cn_vector(m, streams.dl, size + (pattern.n_dl,))
    ul = draw_cn_vector(m, streams.ul, size + (pattern.n_ul,))
    li = draw_li(sigma_li, streams.li, size)

    cross = None
    pair_index = None
    if pairs is not None and len(pairs) > 0:
        pair_index = np.asarray(pairs, dtype=int).reshape(-1, 2)
        cross = draw_cn_vector(m, streams.cross, size + (len(pair_index), m))

    leak = None
    if leakage:
        leak = draw_cn_vector(pattern.n_dl, streams.cross, size + (pattern.n_ul,)) if pattern.n_dl else None

    return FadingDraw(dl, ul, li, cross, pair_index, leak)
