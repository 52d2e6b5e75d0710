import numpy as np
import pytest
from scipy import integrate, stats

from cran_duplex.errors import NoAssociationError
from cran_duplex.network.geometry import (
    PointPattern,
    nearest,
    nearest_distance_pdf_cond,
    nearest_distance_pdf_ppp,
    pair_distance_pdf,
    pattern_from_frame,
    pattern_to_frame,
    sample_pattern,
    sample_ppp_disc,
    sample_uniform_disc,
    thin,
)


class TestSampling:
    def test_points_stay_in_disc(self):
        rng = np.random.default_rng(42)
        pts = sample_uniform_disc(5000, 50.0, rng)
        assert pts.shape == (5000, 2)
        assert np.all(np.hypot(pts[:, 0], pts[:, 1]) <= 50.0)

    def test_radial_law_is_uniform_in_area(self):
        rng = np.random.default_rng(42)
        pts = sample_uniform_disc(4000, 10.0, rng)
        r = np.hypot(pts[:, 0], pts[:, 1])
        # P(r <= x) = (x/R)^2
        result = stats.kstest(r, lambda x: np.clip((x / 10.0) ** 2, 0.0, 1.0))
        assert result.pvalue > 0.01

    def test_ppp_mean_count(self):
        rng = np.random.default_rng(42)
        counts = [len(sample_ppp_disc(1e-3, 100.0, rng)) for _ in range(2000)]
        np.testing.assert_allclose(np.mean(counts), np.pi * 10.0, rtol=0.03)

    def test_empty_density(self):
        assert len(sample_ppp_disc(0.0, 100.0, np.random.default_rng(42))) == 0

    def test_thinning_extremes(self):
        pts = sample_uniform_disc(20, 5.0, np.random.default_rng(42))
        dl, ul = thin(pts, 1.0, np.random.default_rng(1))
        assert len(dl) == 20 and len(ul) == 0
        dl, ul = thin(pts, 0.0, np.random.default_rng(1))
        assert len(dl) == 0 and len(ul) == 20

    def test_thinning_marks_shared_across_p(self):
        pts = sample_uniform_disc(200, 5.0, np.random.default_rng(42))
        dl_low, _ = thin(pts, 0.3, np.random.default_rng(7))
        dl_high, _ = thin(pts, 0.6, np.random.default_rng(7))
        low = {tuple(p) for p in dl_low}
        assert low <= {tuple(p) for p in dl_high}

    def test_sample_pattern(self):
        pattern = sample_pattern(1e-3, 0.5, 100.0, np.random.default_rng(42))
        assert pattern.radius == 100.0
        assert pattern.n_dl + pattern.n_ul == len(pattern.dl_points) + len(pattern.ul_points)


class TestNearest:
    def test_nearest_and_ties(self):
        pts = np.array([[3.0, 4.0], [0.0, 1.0], [1.0, 0.0]])
        index, distance = nearest(pts)
        assert index == 1
        assert distance == 1.0

    def test_empty(self):
        with pytest.raises(NoAssociationError):
            nearest(np.empty((0, 2)))


class TestDistanceLaws:
    @pytest.mark.parametrize("n", [1, 3, 10])
    def test_conditional_nearest_pdf_integrates_to_one(self, n):
        total, _ = integrate.quad(lambda r: nearest_distance_pdf_cond(r, n, 50.0), 0.0, 50.0)
        np.testing.assert_allclose(total, 1.0, rtol=1e-8)

    def test_conditional_nearest_pdf_matches_sampling(self):
        rng = np.random.default_rng(42)
        samples = [np.min(np.hypot(*sample_uniform_disc(5, 10.0, rng).T)) for _ in range(3000)]
        cdf = lambda x: 1.0 - (1.0 - np.clip(x / 10.0, 0.0, 1.0) ** 2) ** 5
        assert stats.kstest(samples, cdf).pvalue > 0.01

    def test_pair_pdf_integrates_to_one(self):
        total, _ = integrate.quad(lambda r: pair_distance_pdf(r, 30.0), 0.0, 60.0, limit=200)
        np.testing.assert_allclose(total, 1.0, rtol=1e-8)

    def test_pair_mean_distance(self):
        # E|X - Y| = 128 R / (45 pi) for two uniform points in a disc
        mean, _ = integrate.quad(lambda r: r * pair_distance_pdf(r, 30.0), 0.0, 60.0, limit=200)
        np.testing.assert_allclose(mean, 128.0 * 30.0 / (45.0 * np.pi), rtol=1e-8)

    def test_ppp_nearest_pdf(self):
        total, _ = integrate.quad(lambda r: nearest_distance_pdf_ppp(r, 1e-3), 0.0, np.inf)
        np.testing.assert_allclose(total, 1.0, rtol=1e-8)
        with pytest.raises(ValueError):
            nearest_distance_pdf_ppp(1.0, 0.0)

    def test_pdfs_vanish_outside_support(self):
        assert nearest_distance_pdf_cond(11.0, 3, 10.0) == 0.0
        assert pair_distance_pdf(21.0, 10.0) == 0.0
        assert pair_distance_pdf(np.array([-1.0, 5.0]), 10.0)[0] == 0.0


class TestReplay:
    def test_frame_round_trip(self):
        rng = np.random.default_rng(42)
        pattern = PointPattern(sample_uniform_disc(3, 10.0, rng), sample_uniform_disc(2, 10.0, rng), 10.0)
        frame = pattern_to_frame(pattern)
        assert list(frame["type"]) == ["dl"] * 3 + ["ul"] * 2
        again = pattern_from_frame(frame, 10.0)
        np.testing.assert_array_equal(again.dl_points, pattern.dl_points)
        np.testing.assert_array_equal(again.ul_points, pattern.ul_points)
