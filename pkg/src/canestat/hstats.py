"""Per-block elevation histograms and frequency-trimmed means.

The trimmed mean operates in histogram space: within a chosen set of bins,
only the bins whose counts reach the top fraction of bin frequencies are
kept, and the result is the count-weighted mean of the kept bin centers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySelection

# Freedman-Diaconis bin counts are clamped to this range.
MIN_BINS = 32
MAX_BINS = 512


@dataclass(frozen=True)
class Histogram:
    """Right-open equal-width bins; the last bin is right-closed."""

    bin_edges: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=np.float64)
        counts = np.asarray(self.counts, dtype=np.int64)
        if edges.ndim != 1 or counts.ndim != 1 or edges.size != counts.size + 1:
            raise ValueError("need B+1 edges for B counts")
        if not np.all(np.diff(edges) > 0):
            raise ValueError("bin edges must be strictly increasing")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        edges.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def n_bins(self) -> int:
        return int(self.counts.size)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def bin_width(self) -> float:
        return float(self.bin_edges[1] - self.bin_edges[0])


def quantile(values, q: float) -> float:
    """Linear-interpolation quantile on sorted values; q=0 is the minimum."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("quantile of empty input")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must be in [0, 1], got {q}")
    return float(np.quantile(values, q))


def min_value(sample) -> float:
    """Exact minimum of a pixel sample (or raw array)."""
    values = np.asarray(getattr(sample, "values", sample), dtype=np.float64)
    if values.size == 0:
        raise ValueError("min_value of empty input")
    return float(values.min())


def _fd_bin_count(values: np.ndarray) -> int:
    n = values.size
    span = float(values.max() - values.min())
    iqr = quantile(values, 0.75) - quantile(values, 0.25)
    width = 2.0 * iqr * n ** (-1.0 / 3.0)
    if width > 0.0:
        n_bins = int(np.ceil(span / width))
    else:
        # Zero IQR with nonzero span (heavy ties): fall back to a sqrt rule.
        n_bins = int(np.ceil(np.sqrt(n)))
    return int(min(MAX_BINS, max(MIN_BINS, n_bins)))


def build_histogram(sample, n_bins: int | None = None) -> Histogram:
    """Histogram a pixel sample with Freedman-Diaconis binning.

    Edges span [min, max] of the values; the bin count is clamped to
    [32, 512] unless ``n_bins`` forces one. A constant sample yields a
    single bin of small nonzero width rather than an error.
    """
    values = np.asarray(getattr(sample, "values", sample), dtype=np.float64)
    if values.size == 0:
        raise ValueError("cannot histogram an empty sample")
    lo = float(values.min())
    hi = float(values.max())
    if lo == hi:
        width = max(1e-6, abs(lo) * 1e-9)
        edges = np.array([lo - width / 2.0, lo + width / 2.0])
        return Histogram(edges, np.array([values.size], dtype=np.int64))
    if n_bins is None:
        n_bins = _fd_bin_count(values)
    elif n_bins < 1:
        raise ValueError("n_bins must be positive")
    edges = np.linspace(lo, hi, n_bins + 1)
    counts, edges = np.histogram(values, bins=edges)
    return Histogram(edges, counts.astype(np.int64))


def trim_kept_bins(hist: Histogram, bin_subset, top_fraction: float) -> np.ndarray:
    """Indices of the subset bins whose counts reach the top fraction.

    A bin survives when its count is at least the (1 - top_fraction)
    quantile of the subset's counts, so the most frequent bin always
    survives.
    """
    subset = np.asarray(bin_subset, dtype=np.int64)
    if subset.size == 0:
        raise EmptySelection("empty bin subset")
    if not 0.0 < top_fraction <= 1.0:
        raise ValueError(f"top_fraction must be in (0, 1], got {top_fraction}")
    counts = hist.counts[subset]
    threshold = quantile(counts.astype(np.float64), 1.0 - top_fraction)
    return subset[counts >= threshold]


def frequency_trimmed_mean(hist: Histogram, bin_subset, top_fraction: float) -> float:
    """Count-weighted mean of the kept bins' centers within ``bin_subset``."""
    subset = np.asarray(bin_subset, dtype=np.int64)
    if subset.size == 0:
        raise EmptySelection("empty bin subset")
    if hist.counts[subset].sum() == 0:
        raise EmptySelection("all bins in subset have zero count")
    kept = trim_kept_bins(hist, subset, top_fraction)
    weights = hist.counts[kept].astype(np.float64)
    centers = hist.centers[kept]
    return float(np.sum(weights * centers) / np.sum(weights))
