import pytest

from cran_duplex.config.params import NormalizedParams, SystemParams, normalize, rational_alpha

BASE_NORMALIZED = dict(
    density=1e-3,
    p_dl=0.5,
    radius=100.0,
    m_antennas=2,
    alpha=3.0,
    epsilon=1.0,
    tau=0.5,
    ara_power_split="per-rrh",
    p_b=1e4,
    p_u=1e3,
    sigma_li=1e-2,
)


@pytest.fixture
def scenario() -> SystemParams:
    return SystemParams.reference_scenario()


@pytest.fixture
def small_scenario() -> SystemParams:
    """A few RRHs per pattern so Monte Carlo tests stay quick."""
    return SystemParams.reference_scenario().updated(radius=60.0)


@pytest.fixture
def normalized(scenario) -> NormalizedParams:
    return normalize(scenario)


@pytest.fixture
def make_params():
    """Factory for noise-normalized scenarios around a small 100 m disc."""

    def build(**changes) -> NormalizedParams:
        values = {**BASE_NORMALIZED, **changes}
        values.setdefault("alpha_ratio", rational_alpha(values["alpha"]))
        return NormalizedParams(**values)

    return build
