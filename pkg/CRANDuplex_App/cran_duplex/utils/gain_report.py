"""
Rate Region Report
Sum-rate gains of full duplex over half duplex and max-min fairness per
scheme, computed from a sweep over the DL fraction p
"""

import pandas as pd

from ..errors import DomainError


def summarize_region(region: pd.DataFrame) -> pd.DataFrame:
    """
    Peak sum rate and max-min rate of every scheme in a rate-region sweep.

    Args:
        region (DataFrame): rows with scheme, value (p), ul_rate, dl_rate, sum_rate

    Returns:
        DataFrame: one row per scheme with best_p, best_sum_rate, fair_p, max_min_rate
    """
    missing = {"scheme", "value", "ul_rate", "dl_rate", "sum_rate"} - set(region.columns)
    if missing:
        raise DomainError(f"rate region is missing columns: {', '.join(sorted(missing))}")

    rows = []
    for scheme, points in region.groupby("scheme", sort=False):
        # --- THROUGHPUT ---
        best = points.loc[points["sum_rate"].idxmax()]

        # --- FAIRNESS ---
        # max over p of min(UL, DL); zero when a region hugs an axis
        worst_link = points[["ul_rate", "dl_rate"]].min(axis=1)
        fair = points.loc[worst_link.idxmax()]

        rows.append(
            {
                "scheme": scheme,
                "best_p": float(best["value"]),
                "best_sum_rate": float(best["sum_rate"]),
                "fair_p": float(fair["value"]),
                "max_min_rate": float(worst_link.max()),
            }
        )
    return pd.DataFrame(rows)


def _gain_pct(rate: float, baseline: float) -> float:
    if baseline <= 0:
        return float("inf") if rate > 0 else 0.0
    return round(100.0 * (rate - baseline) / baseline, 2)


def calculate_gains(
    region: pd.DataFrame,
    fd_scheme: str = "SRA-ZF/MRT-FD",
    hd_scheme: str = "SRA-HD",
    ara_scheme: str = "ARA-MRC/MRT-FD",
) -> dict:
    """
    Sum-rate gains of the FD SRA scheme at each scheme's best p.

    Args:
        region (DataFrame): rate-region sweep, see summarize_region
        fd_scheme (str): scheme whose gains are reported
        hd_scheme (str): half-duplex baseline
        ara_scheme (str): FD all-RRH baseline

    Returns:
        dict: gains in percent plus the per-scheme summary rows
    """
    summary = summarize_region(region).set_index("scheme")
    for name in (fd_scheme, hd_scheme, ara_scheme):
        if name not in summary.index:
            raise DomainError(f"scheme {name!r} not in the rate region")

    fd = summary.loc[fd_scheme, "best_sum_rate"]
    return {
        "fd_scheme": fd_scheme,
        "fd_best_sum_rate": float(fd),
        "gain_over_hd_pct": _gain_pct(fd, summary.loc[hd_scheme, "best_sum_rate"]),
        "gain_over_ara_pct": _gain_pct(fd, summary.loc[ara_scheme, "best_sum_rate"]),
        "schemes": summary.reset_index().to_dict(orient="records"),
    }
