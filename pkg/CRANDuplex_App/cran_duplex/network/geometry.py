"""
RRH deployment in the disc b(o, R) and the distance laws the analytic engine uses.

The user sits at the origin; every distance is measured to it except the
UL-DL RRH separation.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import pandas as pd

from ..errors import NoAssociationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PointPattern:
    """One spatial realization: DL and UL RRH coordinates, shape (N, 2) each."""

    dl_points: np.ndarray
    ul_points: np.ndarray
    radius: float

    @property
    def n_dl(self) -> int:
        return len(self.dl_points)

    @property
    def n_ul(self) -> int:
        return len(self.ul_points)

    def dl_distances(self) -> np.ndarray:
        return np.hypot(self.dl_points[:, 0], self.dl_points[:, 1])

    def ul_distances(self) -> np.ndarray:
        return np.hypot(self.ul_points[:, 0], self.ul_points[:, 1])


def sample_uniform_disc(count: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    """count i.i.d. uniform points in the disc, shape (count, 2)."""
    r = radius * np.sqrt(rng.random(count))
    theta = 2.0 * np.pi * rng.random(count)
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


def sample_ppp_disc(density: float, radius: float, rng: np.random.Generator) -> np.ndarray:
    """Homogeneous PPP restricted to the disc: Poisson(pi lambda R^2) uniform points."""
    if density < 0 or radius <= 0:
        raise ValueError(f"need density >= 0 and radius > 0, got {density}, {radius}")
    count = rng.poisson(np.pi * density * radius**2) if density > 0 else 0
    return sample_uniform_disc(count, radius, rng)


def thin(points: np.ndarray, p: float, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Independent Bernoulli(p) marking: (DL points, UL points)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"thinning probability must lie in [0, 1], got {p}")
    # uniforms are drawn for every p so sweeps over p share the same marks
    is_dl = rng.random(len(points)) < p
    return points[is_dl], points[~is_dl]


def sample_pattern(density: float, p_dl: float, radius: float, rng: np.random.Generator) -> PointPattern:
    points = sample_ppp_disc(density, radius, rng)
    dl, ul = thin(points, p_dl, rng)
    return PointPattern(dl, ul, radius)


def nearest(points: np.ndarray, origin=(0.0, 0.0)) -> Tuple[int, float]:
    """Index and distance of the point closest to origin; ties go to the lowest index."""
    if len(points) == 0:
        raise NoAssociationError("no RRH of this type")
    distances = np.hypot(points[:, 0] - origin[0], points[:, 1] - origin[1])
    index = int(np.argmin(distances))
    return index, float(distances[index])


# --- DISTANCE LAWS ---


def nearest_distance_pdf_cond(r, n: int, radius: float):
    """
    pdf of the nearest of n uniform points in the disc:
    (2n/r)(1 - (r/R)^2)^(n-1)(r/R)^2 on [0, R], zero elsewhere.
    """
    r = np.asarray(r, dtype=float)
    q = (r / radius) ** 2
    inside = (r >= 0) & (r <= radius)
    with np.errstate(invalid="ignore"):
        density = 2.0 * n * r / radius**2 * np.power(np.clip(1.0 - q, 0.0, None), n - 1)
    out = np.where(inside, density, 0.0)
    return float(out) if out.ndim == 0 else out


def pair_distance_pdf(r, radius: float):
    """
    pdf of the distance between two independent uniform points in the disc:
    (4r / (pi R^2)) [acos(r/2R) - (r/2R) sqrt(1 - (r/2R)^2)] on (0, 2R).
    """
    r = np.asarray(r, dtype=float)
    x = np.clip(r / (2.0 * radius), 0.0, 1.0)
    density = 4.0 * r / (np.pi * radius**2) * (np.arccos(x) - x * np.sqrt(1.0 - x**2))
    out = np.where((r > 0) & (r < 2.0 * radius), density, 0.0)
    return float(out) if out.ndim == 0 else out


def nearest_distance_pdf_ppp(r, density: float):
    """Infinite-plane nearest-neighbour law 2 pi lambda r exp(-pi lambda r^2)."""
    if not density > 0:
        raise ValueError(f"nearest-neighbour law needs a positive density, got {density}")
    r = np.asarray(r, dtype=float)
    out = np.where(r >= 0, 2.0 * np.pi * density * r * np.exp(-np.pi * density * r**2), 0.0)
    return float(out) if out.ndim == 0 else out


# --- REPLAY ---


def pattern_to_frame(pattern: PointPattern) -> pd.DataFrame:
    """CSV-ready rows (type, x, y)."""
    frames = [
        pd.DataFrame({"type": kind, "x": pts[:, 0], "y": pts[:, 1]})
        for kind, pts in (("dl", pattern.dl_points), ("ul", pattern.ul_points))
    ]
    return pd.concat(frames, ignore_index=True)


def pattern_from_frame(frame: pd.DataFrame, radius: float) -> PointPattern:
    def pick(kind):
        rows = frame[frame["type"] == kind]
        return rows[["x", "y"]].to_numpy(dtype=float).reshape(-1, 2)

    return PointPattern(pick("dl"), pick("ul"), radius)
