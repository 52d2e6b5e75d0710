"""Scenario loading, validation and power normalization."""

import math

import pytest

from cran_duplex.config.params import (
    THREADS_ENV,
    SystemParams,
    dbm_to_mw,
    load_params,
    normalize,
    params_from_mapping,
    params_to_text,
    rational_alpha,
    threads_from_env,
    with_overrides,
)
from cran_duplex.errors import ConfigError

SCENARIO_TEXT = """
# evaluation scenario
lambda = 1e-3
p_dl = 0.5
radius = 300
m_antennas = 2
alpha = 3/1
p_b_dbm = 46
p_u_dbm = 23
sigma_li_dbm = -30
noise_dbm = -50
"""


def _write(tmp_path, text):
    path = tmp_path / "scenario.env"
    path.write_text(text)
    return path


class TestUnits:
    def test_dbm_to_mw(self):
        assert dbm_to_mw(0.0) == 1.0
        assert math.isclose(dbm_to_mw(30.0), 1000.0)
        assert dbm_to_mw(-math.inf) == 0.0

    def test_normalized_powers_are_relative_to_noise(self, scenario):
        norm = normalize(scenario)
        assert math.isclose(norm.p_b, 10 ** 9.6)
        assert math.isclose(norm.p_u, 10 ** 7.3)
        assert math.isclose(norm.sigma_li, 10 ** -5.3)
        assert math.isclose(norm.p_u * norm.sigma_li, 10 ** 2.0)

    def test_li_power_at_user_power_means_no_cancellation(self, scenario):
        norm = normalize(scenario.updated(sigma_li_dbm=scenario.p_u_dbm))
        assert math.isclose(norm.sigma_li, 1.0)
        floor = normalize(scenario.updated(sigma_li_dbm=scenario.noise_dbm))
        assert math.isclose(floor.p_u * floor.sigma_li, 1.0)

    def test_li_off_is_zero(self, scenario):
        assert normalize(scenario.updated(sigma_li_dbm=-math.inf)).sigma_li == 0.0

    def test_rational_alpha(self):
        assert rational_alpha(3.0) == (3, 1)
        assert rational_alpha(2.5) == (5, 2)


class TestLoading:
    def test_load_scenario_file(self, tmp_path):
        params = load_params(_write(tmp_path, SCENARIO_TEXT))
        assert params == SystemParams.reference_scenario()
        assert params.alpha_ratio == (3, 1)
        assert params.epsilon == 1.0
        assert params.tau == 0.5
        assert params.ara_power_split == "per-rrh"

    def test_text_round_trip(self, tmp_path, scenario):
        assert load_params(_write(tmp_path, params_to_text(scenario))) == scenario

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_params(tmp_path / "absent.env")

    def test_missing_key_is_named(self, tmp_path):
        text = SCENARIO_TEXT.replace("radius = 300\n", "")
        with pytest.raises(ConfigError) as info:
            load_params(_write(tmp_path, text))
        assert info.value.key == "radius"

    def test_unknown_key(self, tmp_path):
        with pytest.raises(ConfigError) as info:
            load_params(_write(tmp_path, SCENARIO_TEXT + "beta = 2\n"))
        assert info.value.key == "beta"

    def test_unparsable_value(self, tmp_path):
        with pytest.raises(ConfigError) as info:
            load_params(_write(tmp_path, SCENARIO_TEXT.replace("p_b_dbm = 46", "p_b_dbm = loud")))
        assert info.value.key == "p_b_dbm"

    @pytest.mark.parametrize("p_dl", ["0", "1", "1.5"])
    def test_file_p_dl_is_open_interval(self, tmp_path, p_dl):
        with pytest.raises(ConfigError) as info:
            load_params(_write(tmp_path, SCENARIO_TEXT.replace("p_dl = 0.5", f"p_dl = {p_dl}")))
        assert info.value.key == "p_dl"

    @pytest.mark.parametrize(
        "key, value",
        [("alpha", "2"), ("m_antennas", "0"), ("m_antennas", "2.5"), ("radius", "-1"), ("lambda", "-1e-3")],
    )
    def test_out_of_range(self, key, value):
        raw = dict(SystemParams.reference_scenario().as_metadata())
        raw[key] = value
        with pytest.raises(ConfigError) as info:
            params_from_mapping(raw)
        assert info.value.key == key

    def test_li_off_keyword(self):
        raw = dict(SystemParams.reference_scenario().as_metadata())
        raw["sigma_li_dbm"] = "off"
        assert params_from_mapping(raw).sigma_li_dbm == -math.inf

    def test_bad_power_split(self):
        raw = dict(SystemParams.reference_scenario().as_metadata())
        raw["ara_power_split"] = "half"
        with pytest.raises(ConfigError):
            params_from_mapping(raw)


class TestOverrides:
    def test_override_changes_one_field(self, scenario):
        changed = with_overrides(scenario, ["p_u_dbm=10", "alpha=4"])
        assert changed.p_u_dbm == 10.0
        assert changed.alpha == 4.0
        assert changed.alpha_ratio == (4, 1)
        assert changed.p_b_dbm == scenario.p_b_dbm

    def test_malformed_override(self, scenario):
        with pytest.raises(ConfigError):
            with_overrides(scenario, ["p_u_dbm"])

    def test_unknown_override_key(self, scenario):
        with pytest.raises(ConfigError):
            with_overrides(scenario, ["gain=3"])


class TestThreads:
    def test_env_value(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "3")
        assert threads_from_env() == 3

    def test_default(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "")
        assert threads_from_env(default=5) == 5

    @pytest.mark.parametrize("text", ["many", "0"])
    def test_invalid(self, monkeypatch, text):
        monkeypatch.setenv(THREADS_ENV, text)
        with pytest.raises(ConfigError):
            threads_from_env()

    def test_dotenv_file_is_not_read_per_call(self, monkeypatch, tmp_path):
        (tmp_path / ".env").write_text(f"{THREADS_ENV}=7\n")
        monkeypatch.chdir(tmp_path)
        monkeypatch.delenv(THREADS_ENV, raising=False)
        assert threads_from_env(default=2) == 2
