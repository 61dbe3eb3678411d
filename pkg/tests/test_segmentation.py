"""Background subtraction, intermeans thresholding, binarization."""

import numpy as np
import pytest

import oracles
from vesselseg.errors import DegenerateImageError, ParameterError
from vesselseg.segmentation import (
    HIST_BINS,
    binarize,
    isodata_from_histogram,
    isodata_threshold,
    subtract_background,
)


class TestSubtractBackground:
    def test_constant_gives_zeros(self):
        out = subtract_background(np.full((12, 12), 0.4))
        np.testing.assert_array_equal(out, 0.0)

    def test_offset_invariance(self, rng):
        img = rng.random((20, 20)) * 0.4 + 0.2
        np.testing.assert_allclose(
            subtract_background(img), subtract_background(img + 0.3), atol=1e-9
        )

    def test_matches_box_oracle(self, rng):
        img = rng.random((7, 7))
        radius = 2
        diff = img - oracles.box_mean(img, radius)
        want = (diff - diff.min()) / (diff.max() - diff.min())
        np.testing.assert_allclose(subtract_background(img, radius), want, atol=1e-6)

    def test_output_spans_unit_interval(self, rng):
        out = subtract_background(rng.random((16, 16)))
        assert out.min() == 0.0 and out.max() == 1.0

    def test_dark_line_on_ramp_lands_in_lowest_decile(self):
        # A slow illumination ramp is flattened away; the only structure
        # left is the dark line, which ends up at the very bottom of the
        # rescaled output.
        img = np.tile(np.linspace(0.3, 0.7, 60), (40, 1))
        img[20, 10:50] -= 0.15
        img = np.clip(img, 0.0, 1.0)
        out = subtract_background(img, 4)
        line = out[20, 15:45]
        assert line.max() < 0.1
        background = np.delete(out, 20, axis=0)[5:-5, 15:45]
        assert background.min() > 0.3


class TestIsodataHistogram:
    def test_two_spike_histogram_splits_midway(self):
        hist = np.zeros(HIST_BINS)
        hist[64] = 100.0
        hist[192] = 100.0
        res = isodata_from_histogram(hist)
        assert res.converged
        assert abs(res.threshold - 0.5019531) < 1e-6

    def test_unbalanced_spikes(self):
        # 90% of mass at 0.1, 10% at 0.9: the fixed point is the midpoint
        # of the two class means, independent of the mass ratio.
        hist = np.zeros(HIST_BINS)
        hist[25] = 900.0
        hist[230] = 100.0
        res = isodata_from_histogram(hist)
        centers = (np.arange(HIST_BINS) + 0.5) / HIST_BINS
        assert res.converged
        assert abs(res.threshold - (centers[25] + centers[230]) / 2.0) < 1e-12

    def test_fixed_point_matches_exhaustive_oracle(self, rng):
        for _ in range(50):
            hist = np.zeros(HIST_BINS)
            occupied = rng.choice(HIST_BINS, size=rng.integers(2, 40), replace=False)
            hist[occupied] = rng.integers(1, 1000, size=occupied.size)
            res = isodata_from_histogram(hist)
            fixed = oracles.intermeans_fixed_points(hist)
            assert fixed, "oracle found no self-consistent split"
            assert min(abs(res.threshold - t) for t in fixed) < 1.0 / HIST_BINS

    def test_both_classes_nonempty(self, rng):
        centers = (np.arange(HIST_BINS) + 0.5) / HIST_BINS
        for _ in range(20):
            hist = np.zeros(HIST_BINS)
            occupied = rng.choice(HIST_BINS, size=5, replace=False)
            hist[occupied] = rng.integers(1, 100, size=5)
            t = isodata_from_histogram(hist).threshold
            below = hist[centers < t].sum()
            assert 0 < below < hist.sum()

    def test_rejects_single_spike(self):
        hist = np.zeros(HIST_BINS)
        hist[100] = 50.0
        with pytest.raises(DegenerateImageError):
            isodata_from_histogram(hist)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ParameterError):
            isodata_from_histogram(np.ones(100))
        with pytest.raises(ParameterError):
            isodata_from_histogram(np.full(HIST_BINS, -1.0))


class TestIsodataThreshold:
    def test_two_value_image(self):
        img = np.full((10, 10), 0.25)
        img[:, 5:] = 0.75
        res = isodata_threshold(img)
        assert res.converged
        assert 0.25 < res.threshold < 0.75
        assert abs(res.threshold - 0.5) < 1.0 / HIST_BINS

    def test_constant_image_rejected(self):
        with pytest.raises(DegenerateImageError):
            isodata_threshold(np.full((8, 8), 0.5))

    def test_two_values_in_one_bin_split_exactly(self):
        lo, hi = 0.5, 0.5 + 1e-6
        img = np.full((6, 6), lo)
        img[0, 0] = hi
        res = isodata_threshold(img)
        assert res.converged
        assert lo < res.threshold <= hi

    def test_threshold_separates_classes(self, rng):
        img = rng.random((30, 30))
        t = isodata_threshold(img).threshold
        assert (img < t).any() and (img >= t).any()

    def test_affine_shift_moves_threshold_with_histogram(self):
        img = np.clip(np.tile(np.linspace(0.1, 0.5, 50), (20, 1)), 0, 1)
        t1 = isodata_threshold(img).threshold
        t2 = isodata_threshold(img + 0.3).threshold
        assert abs((t2 - t1) - 0.3) < 2.0 / HIST_BINS


class TestBinarize:
    def test_vessels_dark_is_strictly_below(self):
        img = np.array([[0.2, 0.5, 0.8]])
        out = binarize(img, 0.5)
        np.testing.assert_array_equal(out, [[True, False, False]])

    def test_vessels_bright_flips_polarity(self):
        img = np.array([[0.2, 0.5, 0.8]])
        out = binarize(img, 0.5, vessels_dark=False)
        np.testing.assert_array_equal(out, [[False, True, True]])

    def test_checkerboard(self):
        img = np.indices((8, 8)).sum(axis=0) % 2 * 0.8 + 0.1
        out = binarize(img, 0.5)
        assert out.sum() == 32
        np.testing.assert_array_equal(out, img < 0.5)

    def test_partition_is_exhaustive(self, rng):
        img = rng.random((15, 15))
        dark = binarize(img, 0.4, vessels_dark=True)
        bright = binarize(img, 0.4, vessels_dark=False)
        assert np.array_equal(dark, ~bright)

    def test_rejects_nonfinite_threshold(self):
        with pytest.raises(ParameterError):
            binarize(np.zeros((3, 3)), float("nan"))
