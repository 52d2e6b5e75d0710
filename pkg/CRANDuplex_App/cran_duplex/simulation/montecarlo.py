"""
Monte Carlo estimation of spatially averaged UL / DL / sum rates.

Two-level averaging: n_spatial point patterns, n_fading fading draws per
pattern.  Every pattern owns RNG streams derived from (seed, pattern index,
purpose), so any thread count produces bitwise-identical estimates.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Dict, Iterable, Optional, Sequence

import numpy as np
import pandas as pd

from ..config.params import NormalizedParams, SystemParams, normalize, threads_from_env
from ..errors import ConfigError, DomainError, NoAssociationError
from ..network import beamforming as bf
from ..network.channel import FadingStreams, draw_fading
from ..network.geometry import sample_pattern, sample_uniform_disc

logger = logging.getLogger(__name__)

DEFAULT_N_SPATIAL = 2000
DEFAULT_N_FADING = 100

# purpose tags mixed into every stream seed
_TAGS = {"geometry": 1, "dl": 2, "ul": 3, "cross": 4, "li": 5, "pair": 6}

# complex UL-DL draws held at once
_CROSS_BUDGET = 2_000_000

LINKS = ("both", "ul", "dl")

SWEEP_VARIABLES = {
    "sigma_li": "sigma_li_dbm",
    "p_u": "p_u_dbm",
    "p_b": "p_b_dbm",
    "p_dl": "p_dl",
    "radius": "radius",
    "lambda": "density",
}


@dataclass(frozen=True)
class Scheme:
    """Association x processing x duplex mode."""

    association: str = "sra"  # ara | sra
    processing: str = "zf"  # mrc | zf (zf means zf-nearest under ARA)
    duplex: str = "fd"  # fd | hd
    ul_pair_geometry: str = "nearest"  # nearest | uniform

    def __post_init__(self):
        if self.association not in ("ara", "sra"):
            raise ConfigError(f"unknown association {self.association!r}", "association")
        if self.processing not in ("mrc", "zf"):
            raise ConfigError(f"unknown processing {self.processing!r}", "processing")
        if self.duplex not in ("fd", "hd"):
            raise ConfigError(f"unknown duplex mode {self.duplex!r}", "duplex")
        if self.ul_pair_geometry not in ("nearest", "uniform"):
            raise ConfigError(f"unknown pair geometry {self.ul_pair_geometry!r}", "ul_pair_geometry")

    @property
    def descriptor(self) -> str:
        if self.duplex == "hd":
            return f"{self.association.upper()}-HD"
        processing = "ZF/MRT" if self.processing == "zf" else "MRC/MRT"
        tag = f"{self.association.upper()}-{processing}-FD"
        if self.ul_pair_geometry == "uniform":
            tag += "-uniform-pair"
        return tag

    def check(self, params: NormalizedParams) -> None:
        if self.duplex == "fd" and self.processing == "zf" and params.m_antennas < 2:
            raise ConfigError("ZF requires M > 1", "m_antennas")


@dataclass(frozen=True)
class RateEstimate:
    """Mean rate in nats/s/Hz with its batch-means standard error."""

    mean: float
    std_error: float
    n_spatial: int
    n_fading: int
    scheme: str
    seed: int
    link: str


@dataclass(frozen=True)
class SchemeRates:
    """UL, DL and sum estimates of one run; a link left out of the run is None."""

    ul: Optional[RateEstimate]
    dl: Optional[RateEstimate]
    total: Optional[RateEstimate]
    scheme: str
    n_spatial: int
    n_fading: int
    seed: int

    def as_row(self) -> Dict[str, object]:
        def pick(estimate, attr):
            return getattr(estimate, attr) if estimate is not None else float("nan")

        return {
            "scheme": self.scheme,
            "ul_rate": pick(self.ul, "mean"),
            "dl_rate": pick(self.dl, "mean"),
            "sum_rate": pick(self.total, "mean"),
            "ul_stderr": pick(self.ul, "std_error"),
            "dl_stderr": pick(self.dl, "std_error"),
            "sum_stderr": pick(self.total, "std_error"),
            "n_spatial": self.n_spatial,
            "n_fading": self.n_fading,
            "seed": self.seed,
        }


def stream(seed: int, index: int, purpose: str) -> np.random.Generator:
    """Generator keyed by hash(seed, realization index, purpose)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index), _TAGS[purpose]]))


class MonteCarloEstimator:
    """
    Rate estimator for one scenario and scheme.

    Patterns are processed on a thread pool; per-pattern means come back in
    pattern order and are reduced on a fixed-shape array.
    """

    def __init__(
        self,
        params,
        scheme: Scheme,
        n_spatial: int = DEFAULT_N_SPATIAL,
        n_fading: int = DEFAULT_N_FADING,
        seed: int = 0,
        threads: Optional[int] = None,
        links: str = "both",
        verbose: bool = False,
        status_callback: Optional[Callable[[dict], None]] = None,
    ):
        if n_spatial < 1 or n_fading < 1:
            raise ConfigError("n_spatial and n_fading must be >= 1", "budget")
        if links not in LINKS:
            raise ConfigError(f"links must be one of {', '.join(LINKS)}", "links")
        self.params = normalize(params)
        self.scheme = scheme
        self.scheme.check(self.params)
        self.n_spatial = int(n_spatial)
        self.n_fading = int(n_fading)
        self.seed = int(seed)
        self.threads = threads or threads_from_env()
        self.links = links
        self.verbose = verbose
        self.status_callback = status_callback

    def _update_status(self, message: str, progress: int = None):
        if self.status_callback:
            self.status_callback({"message": message, "progress": progress, "timestamp": time.time()})
        if self.verbose:
            if progress is not None:
                logger.info("[%s%%] %s", progress, message)
            else:
                logger.info("- %s", message)

    @property
    def wants_ul(self) -> bool:
        return self.links in ("both", "ul")

    @property
    def wants_dl(self) -> bool:
        return self.links in ("both", "dl")

    # --- one pattern ---

    def _cross_layout(self, pattern):
        """(UL-DL matrix pairs, draw scalar leakage?) for the scheme's UL SINR."""
        s = self.scheme
        if not self.wants_ul or s.duplex == "hd" or pattern.n_ul == 0 or pattern.n_dl == 0:
            return None, False
        if s.association == "sra":
            return [bf.sra_pair(pattern)], False
        if s.processing == "zf":
            return bf.nearest_pairs(pattern), True
        return None, True

    def _chunk(self, pattern, pairs, leakage: bool) -> int:
        per_draw = 0
        if pairs is not None:
            per_draw += len(pairs) * self.params.m_antennas**2
        if leakage:
            per_draw += pattern.n_ul * pattern.n_dl
        if per_draw == 0:
            return self.n_fading
        return max(1, min(self.n_fading, _CROSS_BUDGET // per_draw))

    def _ul_rates(self, rz: bf.LinkRealization) -> np.ndarray:
        s = self.scheme
        if s.duplex == "hd":
            return (1.0 - self.params.tau) * np.log1p(bf.snr_hd(rz, "ul", s.association))
        try:
            if s.association == "ara":
                combiner = "zf-nearest" if s.processing == "zf" else "mrc"
                return np.log1p(bf.sinr_ul_ara(rz, combiner))
            return np.log1p(bf.sinr_ul_sra(rz, s.processing))
        except NoAssociationError:
            return np.zeros(rz.batch)

    def _dl_rates(self, rz: bf.LinkRealization) -> np.ndarray:
        s = self.scheme
        if s.duplex == "hd":
            return self.params.tau * np.log1p(bf.snr_hd(rz, "dl", s.association))
        if s.association == "ara":
            return np.log1p(bf.sinr_dl_ara(rz))
        return np.log1p(bf.sinr_dl_sra(rz))

    def _pattern_means(self, index: int):
        prm = self.params
        pattern = sample_pattern(prm.density, prm.p_dl, prm.radius, stream(self.seed, index, "geometry"))
        streams = FadingStreams(
            dl=stream(self.seed, index, "dl"),
            ul=stream(self.seed, index, "ul"),
            cross=stream(self.seed, index, "cross"),
            li=stream(self.seed, index, "li"),
        )
        pair_distance = None
        if self.scheme.ul_pair_geometry == "uniform":
            ends = sample_uniform_disc(2, prm.radius, stream(self.seed, index, "pair"))
            pair_distance = float(np.hypot(*(ends[0] - ends[1])))

        pairs, leakage = self._cross_layout(pattern)
        chunk = self._chunk(pattern, pairs, leakage)
        ul_sum = 0.0
        dl_sum = 0.0
        done = 0
        while done < self.n_fading:
            batch = min(chunk, self.n_fading - done)
            fading = draw_fading(pattern, prm.m_antennas, prm.sigma_li, streams, batch, pairs, leakage)
            rz = bf.LinkRealization(pattern, fading, prm, pair_distance)
            if self.wants_ul:
                ul_sum += float(np.sum(self._ul_rates(rz)))
            if self.wants_dl:
                dl_sum += float(np.sum(self._dl_rates(rz)))
            done += batch
        return ul_sum / self.n_fading, dl_sum / self.n_fading

    # --- all patterns ---

    def _summarize(self, samples: np.ndarray, link: str) -> RateEstimate:
        n = len(samples)
        mean = float(np.mean(samples))
        std_error = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return RateEstimate(mean, std_error, n, self.n_fading, self.scheme.descriptor, self.seed, link)

    def run(self) -> SchemeRates:
        descriptor = self.scheme.descriptor
        self._update_status(f"Estimating {descriptor}: {self.n_spatial} patterns x {self.n_fading} draws", 0)

        checkpoint = max(1, self.n_spatial // 10)
        means = []
        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            for k, result in enumerate(executor.map(self._pattern_means, range(self.n_spatial)), start=1):
                means.append(result)
                if k % checkpoint == 0 and k < self.n_spatial:
                    self._update_status(f"{descriptor}: {k}/{self.n_spatial} patterns", int(100 * k / self.n_spatial))

        per_pattern = np.asarray(means, dtype=float).reshape(self.n_spatial, 2)
        ul, dl = per_pattern[:, 0], per_pattern[:, 1]
        rates = SchemeRates(
            ul=self._summarize(ul, "ul") if self.wants_ul else None,
            dl=self._summarize(dl, "dl") if self.wants_dl else None,
            total=self._summarize(ul + dl, "sum") if self.links == "both" else None,
            scheme=descriptor,
            n_spatial=self.n_spatial,
            n_fading=self.n_fading,
            seed=self.seed,
        )
        row = rates.as_row()
        self._update_status(f"{descriptor}: UL {row['ul_rate']:.4f}, DL {row['dl_rate']:.4f} nats/s/Hz", 100)
        return rates


def estimate_rate(
    params,
    scheme: Scheme,
    n_spatial: int = DEFAULT_N_SPATIAL,
    n_fading: int = DEFAULT_N_FADING,
    seed: int = 0,
    threads: Optional[int] = None,
    links: str = "both",
    verbose: bool = False,
    status_callback=None,
) -> SchemeRates:
    """
    Average UL, DL and sum rates of a scheme.

    Args:
        params: SystemParams or NormalizedParams
        scheme: association / processing / duplex combination
        n_spatial: point patterns
        n_fading: fading draws per pattern
        seed: root seed
        links: "both", or "ul" / "dl" to skip the other link entirely

    Returns:
        SchemeRates: UL, DL and sum RateEstimate; empty associations count as rate 0
    """
    return MonteCarloEstimator(
        params, scheme, n_spatial, n_fading, seed, threads, links, verbose, status_callback
    ).run()


def _check_grid(grid: Sequence[float]) -> np.ndarray:
    values = np.asarray(list(grid), dtype=float)
    if values.size == 0:
        raise ConfigError("sweep grid is empty", "grid")
    steps = np.diff(values)
    if values.size > 1 and not (np.all(steps > 0) or np.all(steps < 0)):
        raise ConfigError("sweep grid must be strictly monotone", "grid")
    return values


def sweep(
    params: SystemParams,
    scheme: Scheme,
    variable: str,
    grid: Iterable[float],
    n_spatial: int = DEFAULT_N_SPATIAL,
    n_fading: int = DEFAULT_N_FADING,
    seed: int = 0,
    threads: Optional[int] = None,
    links: str = "both",
    verbose: bool = False,
    status_callback=None,
) -> pd.DataFrame:
    """
    One estimate per grid value, all with the same seed.

    Shared seeds give common random numbers: patterns, fading and LI draws are
    identical across grid points whenever the swept variable leaves the draw
    shapes unchanged (powers and p_dl).
    """
    if variable not in SWEEP_VARIABLES:
        raise ConfigError(f"cannot sweep {variable!r}; choose from {', '.join(SWEEP_VARIABLES)}", variable)
    if not isinstance(params, SystemParams):
        raise DomainError("sweeps operate on SystemParams so dBm grids stay at the boundary")
    values = _check_grid(grid)
    field_name = SWEEP_VARIABLES[variable]

    rows = []
    for value in values:
        point = params.updated(**{field_name: float(value)})
        if verbose:
            logger.info("- %s = %g", variable, value)
        rates = estimate_rate(point, scheme, n_spatial, n_fading, seed, threads, links, verbose, status_callback)
        row = {"variable": variable, "value": float(value), "method": "mc"}
        row.update(rates.as_row())
        rows.append(row)
    return pd.DataFrame(rows)


def rates_as_dict(rates: SchemeRates) -> Dict[str, Optional[dict]]:
    pairs = (("ul", rates.ul), ("dl", rates.dl), ("sum", rates.total))
    return {name: asdict(estimate) if estimate is not None else None for name, estimate in pairs}
