import math

import numpy as np
import pytest

from cran_duplex.analysis import analytic
from cran_duplex.errors import ConfigError, DomainError
from cran_duplex.simulation.montecarlo import (
    MonteCarloEstimator,
    Scheme,
    estimate_rate,
    rates_as_dict,
    stream,
    sweep,
)


class TestScheme:
    def test_descriptors(self):
        assert Scheme("sra", "zf").descriptor == "SRA-ZF/MRT-FD"
        assert Scheme("ara", "mrc").descriptor == "ARA-MRC/MRT-FD"
        assert Scheme("ara", "mrc", "hd").descriptor == "ARA-HD"
        assert Scheme("sra", "mrc", ul_pair_geometry="uniform").descriptor == "SRA-MRC/MRT-FD-uniform-pair"

    @pytest.mark.parametrize("kwargs", [{"association": "all"}, {"processing": "mmse"}, {"duplex": "tdd"}])
    def test_rejects_unknown(self, kwargs):
        with pytest.raises(ConfigError):
            Scheme(**kwargs)

    def test_zf_needs_two_antennas(self, make_params):
        with pytest.raises(ConfigError):
            MonteCarloEstimator(make_params(m_antennas=1), Scheme("sra", "zf"), 2, 2)


class TestStreams:
    def test_streams_are_keyed(self):
        a = stream(7, 3, "dl").random(4)
        np.testing.assert_array_equal(a, stream(7, 3, "dl").random(4))
        assert not np.array_equal(a, stream(7, 3, "ul").random(4))
        assert not np.array_equal(a, stream(7, 4, "dl").random(4))


class TestEstimator:
    def test_thread_count_does_not_change_results(self, make_params):
        params = make_params()
        for scheme in (Scheme("ara", "zf"), Scheme("sra", "mrc"), Scheme("ara", "mrc", "hd")):
            one = estimate_rate(params, scheme, 12, 8, seed=5, threads=1).as_row()
            four = estimate_rate(params, scheme, 12, 8, seed=5, threads=4).as_row()
            assert one == four

    def test_seed_changes_results(self, make_params):
        params = make_params()
        a = estimate_rate(params, Scheme("sra", "zf"), 12, 8, seed=1, threads=2)
        b = estimate_rate(params, Scheme("sra", "zf"), 12, 8, seed=2, threads=2)
        assert a.dl.mean != b.dl.mean

    def test_sum_is_ul_plus_dl(self, make_params):
        rates = estimate_rate(make_params(), Scheme("ara", "mrc"), 10, 5, seed=3, threads=2)
        np.testing.assert_allclose(rates.total.mean, rates.ul.mean + rates.dl.mean)
        assert rates.ul.std_error > 0

    def test_single_link(self, make_params):
        rates = estimate_rate(make_params(), Scheme("sra", "zf"), 10, 5, seed=3, threads=2, links="dl")
        row = rates.as_row()
        assert rates.ul is None and rates.total is None
        assert math.isnan(row["ul_rate"]) and math.isnan(row["sum_rate"])
        assert row["dl_rate"] > 0
        assert rates_as_dict(rates)["ul"] is None

    def test_single_link_matches_full_run(self, make_params):
        params = make_params()
        full = estimate_rate(params, Scheme("ara", "zf"), 10, 5, seed=3, threads=2)
        dl_only = estimate_rate(params, Scheme("ara", "zf"), 10, 5, seed=3, threads=2, links="dl")
        assert full.dl.mean == dl_only.dl.mean

    def test_all_ul_gives_zero_dl(self, make_params):
        rates = estimate_rate(make_params(p_dl=0.0), Scheme("ara", "mrc"), 10, 5, seed=3, threads=2)
        assert rates.dl.mean == 0.0
        assert rates.ul.mean > 0.0

    def test_all_dl_gives_zero_ul(self, make_params):
        rates = estimate_rate(make_params(p_dl=1.0), Scheme("sra", "zf"), 10, 5, seed=3, threads=2)
        assert rates.ul.mean == 0.0

    def test_hd_time_share(self, make_params):
        rates = estimate_rate(make_params(tau=1.0), Scheme("sra", "mrc", "hd"), 10, 5, seed=3, threads=2)
        assert rates.ul.mean == 0.0 and rates.dl.mean > 0.0

    def test_bad_budget_and_links(self, make_params):
        with pytest.raises(ConfigError):
            MonteCarloEstimator(make_params(), Scheme(), 0, 5)
        with pytest.raises(ConfigError):
            MonteCarloEstimator(make_params(), Scheme(), 5, 5, links="sum")

    def test_status_updates(self, make_params):
        updates = []
        estimate_rate(make_params(), Scheme(), 20, 2, seed=1, threads=2, status_callback=updates.append)
        progress = [u["progress"] for u in updates]
        assert progress[0] == 0 and progress[-1] == 100
        assert progress == sorted(progress)

    def test_zf_uplink_agrees_with_rate_integral(self, make_params):
        params = make_params(p_u=1e6)
        rates = estimate_rate(params, Scheme("sra", "zf"), 400, 20, seed=11, threads=4, links="ul")
        expected = analytic.ul_rate_sra_zf(params).value
        assert abs(rates.ul.mean - expected) <= 4.0 * rates.ul.std_error + 0.01 * expected


class TestAgainstAnalytic:
    """Monte Carlo at a 400 x 20 budget: 4 standard errors plus 1% for the integration tolerance."""

    @staticmethod
    def _agrees(estimate, expected):
        assert estimate.std_error > 0
        assert abs(estimate.mean - expected) <= 4.0 * estimate.std_error + 0.01 * expected

    def test_ara_downlink(self, make_params):
        params = make_params()
        rates = estimate_rate(params, Scheme("ara", "mrc"), 400, 20, seed=12, threads=4, links="dl")
        self._agrees(rates.dl, analytic.dl_rate_ara_exact(params).value)

    def test_sra_downlink(self, make_params):
        params = make_params()
        rates = estimate_rate(params, Scheme("sra", "mrc"), 400, 20, seed=13, threads=4, links="dl")
        self._agrees(rates.dl, analytic.dl_rate_sra(params).value)

    def test_mrc_uplink_uniform_pair(self, make_params):
        # the analytic UL rate uses the singular loss, so the simulation does too
        params = make_params(epsilon=0.0)
        scheme = Scheme("sra", "mrc", ul_pair_geometry="uniform")
        rates = estimate_rate(params, scheme, 400, 20, seed=14, threads=4, links="ul")
        self._agrees(rates.ul, analytic.ul_rate_sra_mrc(params).value)

    def test_sra_half_duplex(self, make_params):
        params = make_params(epsilon=0.0)
        rates = estimate_rate(params, Scheme("sra", "mrc", "hd"), 400, 20, seed=15, threads=4)
        expected = analytic.hd_rates_sra(params)
        self._agrees(rates.ul, expected.ul)
        self._agrees(rates.dl, expected.dl)


class TestSweep:
    def test_common_random_numbers(self, small_scenario):
        frame = sweep(
            small_scenario, Scheme("ara", "mrc"), "sigma_li", [-50.0, -30.0, -10.0], 8, 4, seed=2, threads=2, links="dl"
        )
        assert list(frame["value"]) == [-50.0, -30.0, -10.0]
        assert set(frame["method"]) == {"mc"}
        # identical draws, only the LI scale moves: the DL rate falls strictly
        assert np.all(np.diff(frame["dl_rate"].to_numpy()) < 0)

    def test_invalid_variable(self, small_scenario):
        with pytest.raises(ConfigError):
            sweep(small_scenario, Scheme(), "tau", [0.1, 0.2], 2, 2)

    @pytest.mark.parametrize("grid", [[], [1.0, 3.0, 2.0]])
    def test_invalid_grid(self, small_scenario, grid):
        with pytest.raises(ConfigError):
            sweep(small_scenario, Scheme(), "p_u", grid, 2, 2)

    def test_needs_system_params(self, make_params):
        with pytest.raises(DomainError):
            sweep(make_params(), Scheme(), "p_u", [1.0, 2.0], 2, 2)
