"""
Scenario parameters for the full-duplex C-RAN model.

SystemParams holds what a scenario file says (powers in dBm); NormalizedParams
holds what every formula consumes (powers divided by the noise power, so the
noise is one).  dBm only ever appears at this boundary.
"""

import logging
import math
import os
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Tuple, Union

from dotenv import dotenv_values

from ..errors import ConfigError

logger = logging.getLogger(__name__)

THREADS_ENV = "CRAN_DUPLEX_THREADS"

REQUIRED_KEYS = (
    "lambda",
    "p_dl",
    "radius",
    "m_antennas",
    "alpha",
    "p_b_dbm",
    "p_u_dbm",
    "sigma_li_dbm",
    "noise_dbm",
)

OPTIONAL_DEFAULTS = {
    "epsilon": 1.0,
    "tau": 0.5,
    "ara_power_split": "per-rrh",
}

POWER_SPLITS = ("per-rrh", "total")

# file key -> dataclass attribute
_ATTRIBUTE = {"lambda": "density"}
_KEY = {attr: key for key, attr in _ATTRIBUTE.items()}

ALPHA_MAX_DENOMINATOR = 16


def dbm_to_mw(dbm: float) -> float:
    """10^(dBm/10) milliwatts; -inf maps to exactly 0."""
    if dbm == -math.inf:
        return 0.0
    return 10.0 ** (dbm / 10.0)


def rational_alpha(alpha: float) -> Tuple[int, int]:
    """(m, n) with gcd(m, n) = 1 and n <= 16 closest to alpha."""
    ratio = Fraction(alpha).limit_denominator(ALPHA_MAX_DENOMINATOR)
    return ratio.numerator, ratio.denominator


@dataclass(frozen=True)
class SystemParams:
    """All scenario constants as written in a scenario file."""

    density: float
    p_dl: float
    radius: float
    m_antennas: int
    alpha: float
    p_b_dbm: float
    p_u_dbm: float
    sigma_li_dbm: float
    noise_dbm: float
    epsilon: float = OPTIONAL_DEFAULTS["epsilon"]
    tau: float = OPTIONAL_DEFAULTS["tau"]
    ara_power_split: str = OPTIONAL_DEFAULTS["ara_power_split"]
    alpha_ratio: Optional[Tuple[int, int]] = field(default=None, compare=True)

    def __post_init__(self):
        _check_geometry(self)
        for key in ("p_b_dbm", "p_u_dbm", "noise_dbm"):
            if not math.isfinite(getattr(self, key)):
                raise ConfigError(f"{key} must be a finite dBm value", key)
        if math.isnan(self.sigma_li_dbm) or self.sigma_li_dbm == math.inf:
            raise ConfigError("sigma_li_dbm must be a dBm value or 'off'", "sigma_li_dbm")
        if self.alpha_ratio is None:
            object.__setattr__(self, "alpha_ratio", rational_alpha(self.alpha))

    @classmethod
    def reference_scenario(cls) -> "SystemParams":
        """Evaluation settings: 46/23 dBm powers, -50 dBm noise, lambda = 1e-3."""
        return cls(
            density=1e-3,
            p_dl=0.5,
            radius=300.0,
            m_antennas=2,
            alpha=3.0,
            p_b_dbm=46.0,
            p_u_dbm=23.0,
            sigma_li_dbm=-30.0,
            noise_dbm=-50.0,
        )

    @property
    def delta(self) -> float:
        return 2.0 / self.alpha

    @property
    def mu_dl(self) -> float:
        return math.pi * self.p_dl * self.density * self.radius**2

    @property
    def mu_ul(self) -> float:
        return math.pi * (1.0 - self.p_dl) * self.density * self.radius**2

    def updated(self, **changes) -> "SystemParams":
        """Copy with fields replaced; alpha_ratio is re-derived when alpha moves."""
        if "alpha" in changes and "alpha_ratio" not in changes:
            changes["alpha_ratio"] = None
        return replace(self, **changes)

    def as_metadata(self) -> Dict[str, str]:
        """Scenario echo in file-key form, used in CSV headers."""
        return dict(_text_items(self))


@dataclass(frozen=True)
class NormalizedParams:
    """Scenario with powers expressed relative to unit noise; sigma_li is the LI loop gain."""

    density: float
    p_dl: float
    radius: float
    m_antennas: int
    alpha: float
    epsilon: float
    tau: float
    ara_power_split: str
    alpha_ratio: Tuple[int, int]
    p_b: float
    p_u: float
    sigma_li: float

    def __post_init__(self):
        _check_geometry(self)
        for key in ("p_b", "p_u", "sigma_li"):
            value = getattr(self, key)
            if not value >= 0.0:
                raise ConfigError(f"{key} must be non-negative", key)

    @property
    def delta(self) -> float:
        return 2.0 / self.alpha

    @property
    def dl_density(self) -> float:
        return self.p_dl * self.density

    @property
    def ul_density(self) -> float:
        return (1.0 - self.p_dl) * self.density

    @property
    def mu_dl(self) -> float:
        return math.pi * self.dl_density * self.radius**2

    @property
    def mu_ul(self) -> float:
        return math.pi * self.ul_density * self.radius**2

    @property
    def singular(self) -> bool:
        return self.epsilon == 0.0

    def updated(self, **changes) -> "NormalizedParams":
        if "alpha" in changes and "alpha_ratio" not in changes:
            changes["alpha_ratio"] = rational_alpha(changes["alpha"])
        return replace(self, **changes)


def _check_geometry(params) -> None:
    # Closed interval here; scenario files are held to the open one in load_params.
    if not 0.0 <= params.p_dl <= 1.0:
        raise ConfigError("p_dl must lie in [0, 1]", "p_dl")
    if not params.density >= 0.0 or not math.isfinite(params.density):
        raise ConfigError("lambda must be a finite non-negative density", "lambda")
    if not params.radius > 0.0 or not math.isfinite(params.radius):
        raise ConfigError("radius must be positive", "radius")
    if int(params.m_antennas) != params.m_antennas or params.m_antennas < 1:
        raise ConfigError("m_antennas must be an integer >= 1", "m_antennas")
    if not params.alpha > 2.0:
        raise ConfigError("alpha must exceed 2", "alpha")
    if not params.epsilon >= 0.0:
        raise ConfigError("epsilon must be non-negative", "epsilon")
    if not 0.0 <= params.tau <= 1.0:
        raise ConfigError("tau must lie in [0, 1]", "tau")
    if params.ara_power_split not in POWER_SPLITS:
        raise ConfigError(
            f"ara_power_split must be one of {', '.join(POWER_SPLITS)}", "ara_power_split"
        )
    if params.alpha_ratio is not None:
        m, n = params.alpha_ratio
        if n < 1 or math.gcd(m, n) != 1:
            raise ConfigError("alpha ratio must be m/n with gcd(m, n) = 1", "alpha")


def normalize(params: Union[SystemParams, NormalizedParams]) -> NormalizedParams:
    """
    Divide every linear power by the linear noise power.

    sigma_li_dbm is the residual LI power seen at the receiver, so the stored
    sigma_li is the loop gain E|h_LI|^2 relative to P_u: P_u * sigma_li equals
    the LI power over the noise, and sigma_li_dbm = p_u_dbm means no cancellation.
    """
    if isinstance(params, NormalizedParams):
        return params

    noise = dbm_to_mw(params.noise_dbm)
    return NormalizedParams(
        density=params.density,
        p_dl=params.p_dl,
        radius=params.radius,
        m_antennas=int(params.m_antennas),
        alpha=params.alpha,
        epsilon=params.epsilon,
        tau=params.tau,
        ara_power_split=params.ara_power_split,
        alpha_ratio=params.alpha_ratio,
        p_b=dbm_to_mw(params.p_b_dbm) / noise,
        p_u=dbm_to_mw(params.p_u_dbm) / noise,
        sigma_li=dbm_to_mw(params.sigma_li_dbm - params.p_u_dbm),
    )


# --- PARSING ---


def _parse_number(key: str, text: str, integer: bool = False) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be numeric, got {text!r}", key) from None
    if integer:
        if not value.is_integer():
            raise ConfigError(f"{key} must be an integer, got {text!r}", key)
        return int(value)
    return value


def _parse_alpha(text: str) -> Tuple[float, Optional[Tuple[int, int]]]:
    if "/" in text:
        try:
            ratio = Fraction(text.replace(" ", ""))
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"alpha must be a number or m/n, got {text!r}", "alpha") from None
        return float(ratio), (ratio.numerator, ratio.denominator)
    return _parse_number("alpha", text), None


def _parse_sigma_li(text: str) -> float:
    if text.strip().lower() in ("off", "-inf"):
        return -math.inf
    return _parse_number("sigma_li_dbm", text)


def params_from_mapping(raw: Mapping[str, Optional[str]]) -> SystemParams:
    """Validate a key -> text mapping and build SystemParams."""
    values = {}
    for key, text in raw.items():
        key = key.strip().lower()
        if key not in REQUIRED_KEYS and key not in OPTIONAL_DEFAULTS:
            raise ConfigError(f"unknown key {key!r}", key)
        if text is None or text.strip() == "":
            raise ConfigError(f"could not parse a value for {key!r}", key)
        values[key] = text.strip()

    missing = [key for key in REQUIRED_KEYS if key not in values]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}", missing[0])

    alpha, alpha_ratio = _parse_alpha(values["alpha"])
    kwargs = {
        "density": _parse_number("lambda", values["lambda"]),
        "p_dl": _parse_number("p_dl", values["p_dl"]),
        "radius": _parse_number("radius", values["radius"]),
        "m_antennas": _parse_number("m_antennas", values["m_antennas"], integer=True),
        "alpha": alpha,
        "alpha_ratio": alpha_ratio,
        "p_b_dbm": _parse_number("p_b_dbm", values["p_b_dbm"]),
        "p_u_dbm": _parse_number("p_u_dbm", values["p_u_dbm"]),
        "sigma_li_dbm": _parse_sigma_li(values["sigma_li_dbm"]),
        "noise_dbm": _parse_number("noise_dbm", values["noise_dbm"]),
        "epsilon": _parse_number("epsilon", values.get("epsilon", str(OPTIONAL_DEFAULTS["epsilon"]))),
        "tau": _parse_number("tau", values.get("tau", str(OPTIONAL_DEFAULTS["tau"]))),
        "ara_power_split": values.get("ara_power_split", OPTIONAL_DEFAULTS["ara_power_split"]).lower(),
    }
    return SystemParams(**kwargs)


def load_params(path: Union[str, os.PathLike]) -> SystemParams:
    """
    Load a scenario file of `key = value` lines.

    Args:
        path: scenario file in dotenv grammar (# comments allowed)

    Returns:
        SystemParams: validated scenario, defaults filled in

    Raises:
        ConfigError: naming the offending key
    """
    if not os.path.isfile(path):
        raise ConfigError(f"scenario file not found: {path}")

    raw = dotenv_values(path)
    params = params_from_mapping(raw)
    if not 0.0 < params.p_dl < 1.0:
        raise ConfigError("p_dl must lie strictly between 0 and 1", "p_dl")

    logger.debug("Loaded scenario %s: %s", path, params)
    return params


def _text_items(params: SystemParams) -> Iterable[Tuple[str, str]]:
    for item in fields(params):
        attr = item.name
        if attr == "alpha_ratio":
            continue
        value = getattr(params, attr)
        if attr == "alpha":
            m, n = params.alpha_ratio
            text = f"{m}/{n}" if float(Fraction(m, n)) == value else repr(value)
        elif attr == "sigma_li_dbm" and value == -math.inf:
            text = "off"
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        yield _KEY.get(attr, attr), text


def params_to_text(params: SystemParams) -> str:
    """Serialize to the scenario-file grammar; load_params reads it back unchanged."""
    return "".join(f"{key} = {text}\n" for key, text in _text_items(params))


def with_overrides(params: SystemParams, overrides: Iterable[str]) -> SystemParams:
    """Apply `key=value` overrides through the same validation as a file."""
    raw = dict(_text_items(params))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        key, text = item.split("=", 1)
        raw[key.strip().lower()] = text.strip()
    return params_from_mapping(raw)


def threads_from_env(default: Optional[int] = None) -> int:
    """Worker count from CRAN_DUPLEX_THREADS, falling back to the CPU count.

    Reads the process environment only; the CLI loads .env once at startup.
    """
    text = os.getenv(THREADS_ENV)
    if text is None or text.strip() == "":
        return default or os.cpu_count() or 1
    try:
        threads = int(text)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {text!r}", THREADS_ENV) from None
    if threads < 1:
        raise ConfigError(f"{THREADS_ENV} must be positive", THREADS_ENV)
    return threads


