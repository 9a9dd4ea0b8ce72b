"""Histogram construction, quantiles, and the frequency-trimmed mean."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from canestat import (
    EmptySelection,
    PixelSample,
    build_histogram,
    frequency_trimmed_mean,
    min_value,
    quantile,
    trim_kept_bins,
)


def quantile_oracle(values, q):
    """Brute-force sorted linear interpolation, written independently."""
    xs = sorted(values)
    if q <= 0:
        return xs[0]
    if q >= 1:
        return xs[-1]
    pos = q * (len(xs) - 1)
    lo = int(pos)
    frac = pos - lo
    if lo + 1 == len(xs):
        return xs[lo]
    return xs[lo] + frac * (xs[lo + 1] - xs[lo])


def trimmed_mean_oracle(hist, subset, top_fraction):
    """Sort bins by count, apply the quantile keep-rule, weight by count."""
    counts = [int(hist.counts[i]) for i in subset]
    threshold = quantile_oracle([float(c) for c in counts], 1.0 - top_fraction)
    num = 0.0
    den = 0.0
    for i in subset:
        if hist.counts[i] >= threshold:
            center = 0.5 * (hist.bin_edges[i] + hist.bin_edges[i + 1])
            num += hist.counts[i] * center
            den += hist.counts[i]
    return num / den


class TestBuildHistogram:
    def test_forced_two_bins_symmetric_split(self):
        sample = PixelSample("b", [0, 0, 0, 1, 1, 1])
        hist = build_histogram(sample, n_bins=2)
        assert hist.counts.tolist() == [3, 3]

    def test_constant_sample_single_bin(self):
        sample = PixelSample("b", np.full(200, 5.0))
        hist = build_histogram(sample)
        assert hist.n_bins == 1
        assert hist.counts.tolist() == [200]
        assert hist.bin_edges[0] < 5.0 < hist.bin_edges[1]

    def test_counts_match_sort_and_count_oracle(self):
        rng = np.random.default_rng(3)
        values = rng.normal(100.0, 0.5, 10_000)
        hist = build_histogram(PixelSample("b", values))
        # recount by sorting into edges by hand (right-open, last closed)
        edges = hist.bin_edges
        expected = np.zeros(hist.n_bins, dtype=int)
        for v in np.sort(values):
            for i in range(hist.n_bins):
                last = i == hist.n_bins - 1
                if edges[i] <= v < edges[i + 1] or (last and v == edges[i + 1]):
                    expected[i] += 1
                    break
        assert hist.counts.tolist() == expected.tolist()

    @pytest.mark.parametrize("seed", range(20))
    def test_count_conservation(self, seed):
        rng = np.random.default_rng(seed)
        values = rng.normal(0, rng.uniform(0.1, 10), int(rng.integers(5, 3000)))
        hist = build_histogram(PixelSample("b", values))
        assert hist.total == values.size
        assert hist.bin_edges[0] == values.min()
        assert hist.bin_edges[-1] == values.max()
        assert 1 <= hist.n_bins <= 512

    def test_shift_equivariance(self):
        rng = np.random.default_rng(9)
        values = rng.normal(10, 2, 500)
        h0 = build_histogram(PixelSample("b", values))
        h1 = build_histogram(PixelSample("b", values + 7.25))
        assert h1.counts.tolist() == h0.counts.tolist()
        np.testing.assert_allclose(h1.centers, h0.centers + 7.25, atol=1e-9)


class TestQuantile:
    def test_examples(self):
        assert quantile([1, 2, 3, 4], 0.5) == 2.5
        assert quantile([9, 4, 7], 0.0) == 4.0
        assert quantile([9, 4, 7], 1.0) == 9.0

    @given(
        st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50),
        st.floats(0, 1),
    )
    @settings(max_examples=200, deadline=None)
    def test_matches_oracle(self, values, q):
        assert quantile(values, q) == pytest.approx(
            quantile_oracle(values, q), rel=1e-12, abs=1e-9
        )

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            quantile([], 0.5)


class TestMinValue:
    def test_examples(self):
        assert min_value(PixelSample("b", [3, 1, 2])) == 1.0
        assert min_value(PixelSample("b", np.full(10, 4.5))) == 4.5

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_sort_oracle(self, seed):
        values = np.random.default_rng(seed).normal(0, 100, 1000)
        assert min_value(values) == sorted(values)[0]


class TestFrequencyTrimmedMean:
    def _hist(self, counts, edges=None):
        counts = np.asarray(counts)
        if edges is None:
            edges = np.arange(counts.size + 1, dtype=float)
        from canestat import Histogram

        return Histogram(np.asarray(edges, dtype=float), counts)

    def test_no_trimming_is_weighted_mean(self):
        hist = self._hist([4, 1, 5], edges=[0, 2, 4, 6])
        got = frequency_trimmed_mean(hist, [0, 1, 2], 1.0)
        assert got == pytest.approx((4 * 1 + 1 * 3 + 5 * 5) / 10)

    def test_single_dominant_bin(self):
        hist = self._hist([1, 100, 1], edges=[-2.5, 2.5, 7.5, 12.5])
        assert frequency_trimmed_mean(hist, [0, 1, 2], 0.3) == 5.0

    @pytest.mark.parametrize("seed", range(200))
    def test_matches_bruteforce_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n_bins = int(rng.integers(2, 40))
        counts = rng.integers(0, 50, n_bins)
        if counts.sum() == 0:
            counts[int(rng.integers(n_bins))] = 1
        hist = self._hist(counts)
        size = int(rng.integers(1, n_bins + 1))
        subset = sorted(rng.choice(n_bins, size=size, replace=False).tolist())
        if hist.counts[subset].sum() == 0:
            subset.append(int(np.argmax(counts)))
        frac = float(rng.uniform(0.05, 1.0))
        got = frequency_trimmed_mean(hist, subset, frac)
        assert got == pytest.approx(trimmed_mean_oracle(hist, subset, frac), rel=1e-12)

    def test_result_within_kept_bin_centers(self):
        rng = np.random.default_rng(77)
        for _ in range(50):
            counts = rng.integers(0, 30, 20)
            counts[5] += 1  # guarantee mass
            hist = self._hist(counts)
            kept = trim_kept_bins(hist, range(20), 0.3)
            got = frequency_trimmed_mean(hist, range(20), 0.3)
            assert hist.centers[kept].min() - 1e-12 <= got <= hist.centers[kept].max() + 1e-12

    def test_monotone_trimming(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            counts = rng.integers(0, 100, 30)
            counts[3] += 1
            hist = self._hist(counts)
            kept_small = set(trim_kept_bins(hist, range(30), 0.1).tolist())
            kept_large = set(trim_kept_bins(hist, range(30), 0.5).tolist())
            assert kept_small <= kept_large

    def test_empty_subset_rejected(self):
        hist = self._hist([1, 2, 3])
        with pytest.raises(EmptySelection):
            frequency_trimmed_mean(hist, [], 0.3)

    def test_all_zero_counts_rejected(self):
        hist = self._hist([0, 0, 5])
        with pytest.raises(EmptySelection):
            frequency_trimmed_mean(hist, [0, 1], 0.3)

    def test_shift_equivariance(self):
        rng = np.random.default_rng(21)
        values = rng.normal(50, 3, 2000)
        h0 = build_histogram(PixelSample("b", values))
        h1 = build_histogram(PixelSample("b", values + 11.5))
        f0 = frequency_trimmed_mean(h0, range(h0.n_bins), 0.3)
        f1 = frequency_trimmed_mean(h1, range(h1.n_bins), 0.3)
        assert f1 - f0 == pytest.approx(11.5, abs=1e-9)
