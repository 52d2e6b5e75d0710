"""
Figure Experiments
Rate-vs-LI, UL-rate-vs-user-power and rate-region tables, plus a single
point query, each as one DataFrame with a metadata block for the CSV header
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from .. import __version__
from ..analysis import analytic
from ..config.params import SystemParams, load_params, with_overrides
from ..errors import ConfigError, DomainError, MeijerGDegeneracyError
from ..numerics.quadrature import NESTED_TOL
from ..simulation.montecarlo import (
    DEFAULT_N_FADING,
    DEFAULT_N_SPATIAL,
    Scheme,
    estimate_rate,
    sweep,
)
from ..utils.gain_report import calculate_gains, summarize_region

logger = logging.getLogger(__name__)

EXPERIMENTS = ("fig1", "fig2", "fig3", "validate", "point")

FAST_DIVISOR = 10
FAST_MIN_SPATIAL = 10

# --- GRIDS ---
FIG1_P_U_DBM = (23.0, 10.0)
FIG1_SIGMA_START_DBM = -50.0
FIG1_SIGMA_STEP_DB = 10.0
FIG2_P_B_DBM = (23.0, 46.0)
FIG2_ALPHAS = ("3", "4")
FIG2_P_U_GRID_DBM = tuple(np.arange(0.0, 31.0, 5.0))
FIG3_P_GRID = tuple(np.round(np.linspace(0.0, 1.0, 11), 10))
FIG3_SETTINGS = (
    "m_antennas=3",
    "alpha=3",
    "p_b_dbm=23",
    "p_u_dbm=23",
    "sigma_li_dbm=-30",
    "ara_power_split=per-rrh",
)

ARA_DL = Scheme("ara", "mrc")
SRA_DL = Scheme("sra", "mrc")


@dataclass(frozen=True)
class ExperimentSpec:
    """One CLI invocation: which experiment, on which scenario, at what budget."""

    experiment: str
    config_path: Optional[str] = None
    out_path: Optional[str] = None
    overrides: Tuple[str, ...] = ()
    seed: int = 0
    n_spatial: int = DEFAULT_N_SPATIAL
    n_fading: int = DEFAULT_N_FADING
    fast: bool = False
    threads: Optional[int] = None
    tolerance_scale: float = 1.0
    analytic_tol: float = NESTED_TOL
    verbose: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}", "experiment")
        if self.n_spatial < 1 or self.n_fading < 1:
            raise ConfigError("budget must be at least 1x1", "budget")
        if not self.tolerance_scale >= 0:
            raise ConfigError("tolerance scale must be non-negative", "tolerance_scale")
        object.__setattr__(self, "overrides", tuple(self.overrides))

    def base_params(self) -> SystemParams:
        """Scenario file (or the evaluation defaults) with --set overrides applied."""
        params = load_params(self.config_path) if self.config_path else SystemParams.reference_scenario()
        if self.overrides:
            params = with_overrides(params, self.overrides)
        return params

    def budget(self) -> Tuple[int, int]:
        """(n_spatial, n_fading), shrunk tenfold in fast mode."""
        if self.fast:
            return max(FAST_MIN_SPATIAL, self.n_spatial // FAST_DIVISOR), self.n_fading
        return self.n_spatial, self.n_fading

    @property
    def tolerance_factor(self) -> float:
        # stderr grows as sqrt of the budget cut
        return self.tolerance_scale * (math.sqrt(FAST_DIVISOR) if self.fast else 1.0)

    def metadata(self, params: SystemParams) -> Dict[str, object]:
        n_spatial, n_fading = self.budget()
        meta = {
            "experiment": self.experiment,
            "version": __version__,
            "seed": self.seed,
            "n_spatial": n_spatial,
            "n_fading": n_fading,
            "fast": self.fast,
            "analytic_tol": self.analytic_tol,
            "overrides": " ".join(self.overrides) or "none",
        }
        meta.update({f"config.{key}": value for key, value in params.as_metadata().items()})
        return meta


@dataclass
class ExperimentResult:
    frame: pd.DataFrame
    metadata: Dict[str, object] = field(default_factory=dict)
    passed: bool = True


def sigma_li_grid(p_u_dbm: float) -> List[float]:
    """-50 dBm in 10 dB steps, closed at P_u (no cancellation)."""
    grid = list(np.arange(FIG1_SIGMA_START_DBM, p_u_dbm, FIG1_SIGMA_STEP_DB))
    return [float(v) for v in grid] + [float(p_u_dbm)]


class ExperimentRunner:
    """
    Runs the figure experiments for one ExperimentSpec.

    Monte Carlo curves are swept with a shared seed so every curve is a
    common-random-numbers family; analytic values are computed per grid point.
    """

    def __init__(self, spec: ExperimentSpec, status_callback: Optional[Callable[[dict], None]] = None):
        self.spec = spec
        self.params = spec.base_params()
        self.n_spatial, self.n_fading = spec.budget()
        self.tol = spec.analytic_tol
        self.verbose = spec.verbose
        self.status_callback = status_callback

    def _update_status(self, message: str, progress: int = None):
        if self.status_callback:
            self.status_callback({"message": message, "progress": progress, "timestamp": time.time()})
        if self.verbose:
            if progress is not None:
                logger.info("[%s%%] %s", progress, message)
            else:
                logger.info("- %s", message)

    def _sweep(self, params: SystemParams, scheme: Scheme, variable: str, grid, links: str = "both") -> pd.DataFrame:
        return sweep(
            params,
            scheme,
            variable,
            grid,
            self.n_spatial,
            self.n_fading,
            self.spec.seed,
            self.spec.threads,
            links,
            self.verbose,
        )

    def _result(self, frame: pd.DataFrame, params: SystemParams) -> ExperimentResult:
        metadata = self.spec.metadata(params)
        if "method" in frame.columns:
            metadata["methods"] = ",".join(pd.unique(frame["method"]))
        return ExperimentResult(frame.reset_index(drop=True), metadata)

    # --- FIG 1: DL RATE VS LI POWER ---

    def run_fig1(self) -> ExperimentResult:
        rows = []
        cases = len(FIG1_P_U_DBM)
        for k, p_u_dbm in enumerate(FIG1_P_U_DBM):
            params = self.params.updated(p_u_dbm=p_u_dbm)
            grid = sigma_li_grid(p_u_dbm)
            self._update_status(f"fig1, P_u = {p_u_dbm:g} dBm: Monte Carlo", int(100 * k / cases))

            for label, scheme in (("ARA", ARA_DL), ("SRA", SRA_DL)):
                mc = self._sweep(params, scheme, "sigma_li", grid, links="dl")
                for _, point in mc.iterrows():
                    rows.append(self._fig1_row(point["value"], label, "mc", p_u_dbm, point["dl_rate"], point["dl_stderr"]))

            self._update_status(f"fig1, P_u = {p_u_dbm:g} dBm: analytic", int(100 * (k + 0.5) / cases))
            for sigma in grid:
                point = params.updated(sigma_li_dbm=sigma)
                rows.append(
                    self._fig1_row(sigma, "ARA", "analytic", p_u_dbm, analytic.dl_rate_ara_exact(point, self.tol).value)
                )
                rows.append(self._fig1_row(sigma, "SRA", "analytic", p_u_dbm, analytic.dl_rate_sra(point, self.tol).value))
                if point.ara_power_split == "per-rrh":
                    upper = analytic.dl_rate_ara_upper(point, self.tol).value
                    rows.append(self._fig1_row(sigma, "ARA", "upper-bound", p_u_dbm, upper))

        self._update_status("fig1 done", 100)
        return self._result(pd.DataFrame(rows), self.params)

    @staticmethod
    def _fig1_row(sigma, scheme, method, p_u_dbm, rate, stderr=float("nan")) -> dict:
        return {
            "sigma_li_dbm": float(sigma),
            "scheme": scheme,
            "method": method,
            "p_u_dbm": float(p_u_dbm),
            "dl_rate": float(rate),
            "stderr": float(stderr),
        }

    # --- FIG 2: SRA UL RATE VS USER POWER ---

    def run_fig2(self) -> ExperimentResult:
        rows = []
        cases = [(a, p_b) for a in FIG2_ALPHAS for p_b in FIG2_P_B_DBM]
        for k, (alpha, p_b_dbm) in enumerate(cases):
            params = with_overrides(self.params, [f"alpha={alpha}", f"p_b_dbm={p_b_dbm}"])
            self._update_status(f"fig2, alpha = {alpha}, P_b = {p_b_dbm:g} dBm", int(100 * k / len(cases)))

            mc_curves = (
                ("MRC/MRT", "mc", Scheme("sra", "mrc")),
                ("MRC/MRT", "mc-uniform-pair", Scheme("sra", "mrc", ul_pair_geometry="uniform")),
                ("ZF/MRT", "mc", Scheme("sra", "zf")),
            )
            for label, method, scheme in mc_curves:
                mc = self._sweep(params, scheme, "p_u", FIG2_P_U_GRID_DBM, links="ul")
                for _, point in mc.iterrows():
                    rows.append(
                        self._fig2_row(params, point["value"], label, method, point["ul_rate"], point["ul_stderr"])
                    )

            for p_u_dbm in FIG2_P_U_GRID_DBM:
                point = params.updated(p_u_dbm=float(p_u_dbm))
                mrc = analytic.ul_rate_sra_mrc(point, self.tol).value
                zf = analytic.ul_rate_sra_zf(point, self.tol).value
                rows.append(self._fig2_row(params, p_u_dbm, "MRC/MRT", "analytic", mrc))
                rows.append(self._fig2_row(params, p_u_dbm, "ZF/MRT", "analytic", zf))
                closed = self._zf_closed_form(point)
                if closed is not None:
                    rows.append(self._fig2_row(params, p_u_dbm, "ZF/MRT", "closed-form", closed))

        self._update_status("fig2 done", 100)
        return self._result(pd.DataFrame(rows), self.params)

    def _zf_closed_form(self, params: SystemParams) -> Optional[float]:
        try:
            return analytic.ul_rate_sra_zf(params, self.tol, method=analytic.CLOSED_FORM).value
        except (MeijerGDegeneracyError, DomainError) as exc:
            logger.info("ZF closed form skipped at P_u = %g dBm: %s", params.p_u_dbm, exc)
            return None

    @staticmethod
    def _fig2_row(params, p_u_dbm, scheme, method, rate, stderr=float("nan")) -> dict:
        return {
            "alpha": params.alpha,
            "p_b_dbm": params.p_b_dbm,
            "p_u_dbm": float(p_u_dbm),
            "scheme": scheme,
            "method": method,
            "ul_rate": float(rate),
            "stderr": float(stderr),
        }

    # --- FIG 3: RATE REGION ---

    def fig3_schemes(self) -> List[Tuple[str, Scheme, str]]:
        """(label, scheme, ARA power split) of every rate-region curve."""
        return [
            ("SRA-ZF/MRT-FD", Scheme("sra", "zf"), "per-rrh"),
            ("SRA-MRC/MRT-FD", Scheme("sra", "mrc"), "per-rrh"),
            ("ARA-MRC/MRT-FD", Scheme("ara", "mrc"), "per-rrh"),
            ("ARA-ZF/MRT-FD", Scheme("ara", "zf"), "per-rrh"),
            ("ARA-MRC/MRT-FD-total-power", Scheme("ara", "mrc"), "total"),
            ("SRA-HD", Scheme("sra", "zf", "hd"), "per-rrh"),
            ("ARA-HD", Scheme("ara", "mrc", "hd"), "per-rrh"),
        ]

    def fig3_params(self) -> SystemParams:
        return with_overrides(self.params, FIG3_SETTINGS)

    def run_fig3(self) -> ExperimentResult:
        params = self.fig3_params()
        schemes = self.fig3_schemes()
        frames = []
        for k, (label, scheme, split) in enumerate(schemes):
            self._update_status(f"fig3, {label}", int(100 * k / (len(schemes) + 1)))
            mc = self._sweep(params.updated(ara_power_split=split), scheme, "p_dl", FIG3_P_GRID)
            mc["scheme"] = label
            frames.append(mc)

        self._update_status("fig3, analytic curves", int(100 * len(schemes) / (len(schemes) + 1)))
        frames.append(pd.DataFrame(self._fig3_analytic(params)))
        region = pd.concat(frames, ignore_index=True)

        gains = calculate_gains(region[region["method"] == "mc"])
        fairness = {}
        for method, part in region.groupby("method", sort=False):
            for _, row in summarize_region(part).iterrows():
                fairness[(method, row["scheme"])] = row["max_min_rate"]
        region["max_min_rate"] = [fairness[(m, s)] for m, s in zip(region["method"], region["scheme"])]
        is_mc = region["method"] == "mc"
        region["gain_over_hd_pct"] = np.where(is_mc, gains["gain_over_hd_pct"], np.nan)
        region["gain_over_ara_pct"] = np.where(is_mc, gains["gain_over_ara_pct"], np.nan)

        result = self._result(region, params)
        result.metadata["gain_over_hd_pct"] = gains["gain_over_hd_pct"]
        result.metadata["gain_over_ara_pct"] = gains["gain_over_ara_pct"]
        self._update_status(
            f"fig3 done: FD SRA-ZF gains {gains['gain_over_hd_pct']}% over HD, {gains['gain_over_ara_pct']}% over ARA",
            100,
        )
        return result

    def _fig3_analytic(self, params: SystemParams) -> List[dict]:
        """Analytic region points for every scheme the engine covers (no ARA FD uplink)."""
        rows = []
        for p in FIG3_P_GRID:
            point = params.updated(p_dl=float(p))
            dl_sra = analytic.dl_rate_sra(point, self.tol).value
            curves = {
                "SRA-ZF/MRT-FD": (analytic.ul_rate_sra_zf(point, self.tol).value, dl_sra),
                "SRA-MRC/MRT-FD": (analytic.ul_rate_sra_mrc(point, self.tol).value, dl_sra),
            }
            hd_sra = analytic.hd_rates_sra(point, self.tol)
            hd_ara = analytic.hd_rate_ara(point, self.tol)
            curves["SRA-HD"] = (hd_sra.ul, hd_sra.dl)
            curves["ARA-HD"] = (hd_ara.ul, hd_ara.dl)
            for label, (ul, dl) in curves.items():
                rows.append(
                    {
                        "variable": "p_dl",
                        "value": float(p),
                        "method": "analytic",
                        "scheme": label,
                        "ul_rate": ul,
                        "dl_rate": dl,
                        "sum_rate": ul + dl,
                    }
                )
        return rows

    # --- SINGLE POINT ---

    def run_point(self) -> ExperimentResult:
        params = self.params
        rows = []
        schemes = [
            Scheme("sra", "zf"),
            Scheme("sra", "mrc"),
            Scheme("sra", "mrc", ul_pair_geometry="uniform"),
            Scheme("ara", "mrc"),
            Scheme("ara", "zf"),
            Scheme("sra", "zf", "hd"),
            Scheme("ara", "mrc", "hd"),
        ]
        if params.m_antennas < 2:
            schemes = [s for s in schemes if s.processing != "zf" or s.duplex == "hd"]
        for k, scheme in enumerate(schemes):
            self._update_status(f"Point query: {scheme.descriptor}", int(50 * k / len(schemes)))
            rates = estimate_rate(
                params, scheme, self.n_spatial, self.n_fading, self.spec.seed, self.spec.threads, verbose=self.verbose
            )
            row = {"method": "mc"}
            row.update(rates.as_row())
            rows.append(row)

        self._update_status("Point query: analytic rates", 50)
        for scheme, method, ul, dl in self._point_analytic(params):
            rows.append(self._analytic_row(scheme, method, ul, dl))
        self._update_status("Point query done", 100)
        return self._result(pd.DataFrame(rows), params)

    def _point_analytic(self, params: SystemParams):
        """(scheme, method, ul, dl) for every analytic path valid at this point."""
        tol = self.tol
        per_rrh = params.ara_power_split == "per-rrh"
        yield "ARA", "analytic", None, analytic.dl_rate_ara_exact(params, tol).value
        if per_rrh:
            yield "ARA", "upper-bound", None, analytic.dl_rate_ara_upper(params, tol).value
            yield "ARA", "singular", None, analytic.dl_rate_ara_singular(params, tol).value
        yield "SRA", "analytic", None, analytic.dl_rate_sra(params, tol).value
        yield "SRA", "closed-form", None, analytic.dl_rate_sra(params, tol, method=analytic.CLOSED_FORM).value
        yield "SRA-MRC/MRT", "analytic", analytic.ul_rate_sra_mrc(params, tol).value, None
        if params.m_antennas >= 2:
            yield "SRA-ZF/MRT", "analytic", analytic.ul_rate_sra_zf(params, tol).value, None
            closed = self._zf_closed_form(params)
            if closed is not None:
                yield "SRA-ZF/MRT", "closed-form", closed, None
        hd_sra = analytic.hd_rates_sra(params, tol)
        yield "SRA-HD", "analytic", hd_sra.ul, hd_sra.dl
        if per_rrh:
            hd_ara = analytic.hd_rate_ara(params, tol)
            yield "ARA-HD", "analytic", hd_ara.ul, hd_ara.dl

    @staticmethod
    def _analytic_row(scheme, method, ul, dl) -> dict:
        nan = float("nan")
        ul = nan if ul is None else float(ul)
        dl = nan if dl is None else float(dl)
        total = ul + dl if not (math.isnan(ul) or math.isnan(dl)) else nan
        return {"method": method, "scheme": scheme, "ul_rate": ul, "dl_rate": dl, "sum_rate": total}


def run_fig1(spec: ExperimentSpec, status_callback=None) -> ExperimentResult:
    return ExperimentRunner(spec, status_callback).run_fig1()


def run_fig2(spec: ExperimentSpec, status_callback=None) -> ExperimentResult:
    return ExperimentRunner(spec, status_callback).run_fig2()


def run_fig3(spec: ExperimentSpec, status_callback=None) -> ExperimentResult:
    return ExperimentRunner(spec, status_callback).run_fig3()


def run_point(spec: ExperimentSpec, status_callback=None) -> ExperimentResult:
    return ExperimentRunner(spec, status_callback).run_point()
