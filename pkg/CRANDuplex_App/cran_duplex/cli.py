"""
Command-line driver: python -m cran_duplex {fig1,fig2,fig3,validate,point}

Every subcommand writes one CSV (stdout unless --out is given) whose leading
'# key: value' lines echo the scenario, seed, budget and version.
Exit codes: 0 success, 1 failed validation or numerical failure, 2 bad configuration.
"""

import argparse
import logging
import sys
from typing import List, Optional, Tuple

from dotenv import find_dotenv, load_dotenv

from . import __version__
from .config.params import threads_from_env
from .errors import ConfigError, CranDuplexError
from .experiments.figures import ExperimentSpec, run_fig1, run_fig2, run_fig3, run_point
from .experiments.validation import run_validate
from .numerics.quadrature import NESTED_TOL
from .simulation.montecarlo import DEFAULT_N_FADING, DEFAULT_N_SPATIAL
from .utils.csv_io import write_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

RUNNERS = {
    "fig1": run_fig1,
    "fig2": run_fig2,
    "fig3": run_fig3,
    "validate": run_validate,
    "point": run_point,
}

HELP = {
    "fig1": "average DL rate of ARA and SRA versus residual LI power",
    "fig2": "average SRA UL rate versus user power, MRC/MRT and ZF/MRT",
    "fig3": "UL/DL rate region over the DL fraction p, FD and HD",
    "validate": "Monte Carlo versus analytic acceptance checks",
    "point": "every analytic and simulated rate at one scenario",
}


def parse_budget(text: str) -> Tuple[int, int]:
    """'2000x100' -> (2000, 100)."""
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise ConfigError(f"budget must look like N_SPATIALxN_FADING, got {text!r}", "budget")
    try:
        n_spatial, n_fading = int(parts[0]), int(parts[1])
    except ValueError:
        raise ConfigError(f"budget must look like N_SPATIALxN_FADING, got {text!r}", "budget") from None
    if n_spatial < 1 or n_fading < 1:
        raise ConfigError("budget counts must be positive", "budget")
    return n_spatial, n_fading


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cran_duplex",
        description="Average rates of a full-duplex C-RAN with Poisson-deployed RRHs.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="experiment", required=True)

    for name, text in HELP.items():
        sub = commands.add_parser(name, help=text, description=text)
        sub.add_argument("--config", help="scenario file (key = value); defaults to the evaluation scenario")
        sub.add_argument("--out", help="CSV path, '-' for stdout (default)")
        sub.add_argument("--seed", type=int, default=0, help="root seed of every RNG stream")
        sub.add_argument(
            "--budget",
            default=f"{DEFAULT_N_SPATIAL}x{DEFAULT_N_FADING}",
            help="Monte Carlo budget N_SPATIALxN_FADING (default %(default)s)",
        )
        sub.add_argument("--fast", action="store_true", help="tenfold smaller spatial budget, looser tolerances")
        sub.add_argument(
            "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE", help="override a scenario key"
        )
        sub.add_argument("--threads", type=int, help="worker threads (default: CRAN_DUPLEX_THREADS or CPU count)")
        sub.add_argument("--tol", type=float, default=NESTED_TOL, help="relative tolerance of analytic rates")
        sub.add_argument("--verbose", "-v", action="store_true", help="log progress")
        if name == "validate":
            sub.add_argument(
                "--tolerance-scale", type=float, default=1.0, help="multiply every acceptance tolerance"
            )
    return parser


def spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    n_spatial, n_fading = parse_budget(args.budget)
    threads = args.threads if args.threads is not None else threads_from_env()
    if threads < 1:
        raise ConfigError("--threads must be positive", "threads")
    return ExperimentSpec(
        experiment=args.experiment,
        config_path=args.config,
        out_path=args.out,
        overrides=tuple(args.overrides),
        seed=args.seed,
        n_spatial=n_spatial,
        n_fading=n_fading,
        fast=args.fast,
        threads=threads,
        tolerance_scale=getattr(args, "tolerance_scale", 1.0),
        analytic_tol=args.tol,
        verbose=args.verbose,
    )


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv(find_dotenv(usecwd=True))
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        spec = spec_from_args(args)
        result = RUNNERS[spec.experiment](spec)
    except ConfigError as exc:
        logger.error("Configuration error: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CranDuplexError as exc:
        logger.error("%s failed: %s", args.experiment, exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED

    write_csv(result.frame, spec.out_path, result.metadata)
    if spec.experiment == "validate":
        if spec.out_path not in (None, "-"):
            print(result.frame.to_string(index=False))
        if not result.passed:
            failed = result.frame.loc[~result.frame["pass"], "check"].tolist()
            print(f"validation failed: {', '.join(failed)}", file=sys.stderr)
            return EXIT_FAILED
    return EXIT_OK
