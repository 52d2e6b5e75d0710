"""
cran_duplex
Average UL / DL rates of a full-duplex C-RAN with Poisson-deployed
multi-antenna RRHs: Monte Carlo simulator plus semi-analytical engine.
"""

from .config import SystemParams, load_params, normalize
from .errors import ConfigError, CranDuplexError
from .simulation.montecarlo import Scheme, estimate_rate, sweep

__version__ = "0.3.0"

__all__ = [
    "ConfigError",
    "CranDuplexError",
    "Scheme",
    "SystemParams",
    "estimate_rate",
    "load_params",
    "normalize",
    "sweep",
    "__version__",
]
