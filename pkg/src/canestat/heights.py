"""Per-block canopy height estimation from a single surface model.

Each block's pixel distribution is classified as unimodal or bimodal. A
bimodal block (visible ground gaps) takes the difference of two
frequency-trimmed means, one per mixture component; a unimodal block (dense
canopy) falls back to the trimmed canopy mean minus the lowest pixel.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BlockTooSmall, NegativeHeight
from .gmm import (
    BIMODAL,
    DEFAULT_DELTA_BIC,
    DEFAULT_SEPARATION,
    UNIMODAL,
    ModalityDecision,
    assign_components,
    classify_modality,
)
from .hstats import Histogram, build_histogram, frequency_trimmed_mean, min_value
from .raster import DEFAULT_MIN_PIXELS, PixelSample

DEFAULT_CANOPY_TRIM = 0.30
DEFAULT_GROUND_TRIM = 0.10


@dataclass(frozen=True)
class HeightEstimate:
    """A block's derived cane height and the evidence behind it."""

    block_id: str
    case_used: str
    canopy_elevation: float
    ground_elevation: float
    dchm: float
    pixel_count: int
    decision: ModalityDecision
    histogram: Histogram

    def to_dict(self) -> dict:
        return {
            "block_id": self.block_id,
            "case": self.case_used,
            "canopy_elevation_m": self.canopy_elevation,
            "ground_elevation_m": self.ground_elevation,
            "dchm_m": self.dchm,
            "pixel_count": self.pixel_count,
            "modality": self.decision.to_dict(),
            "histogram": {
                "bin_edges": self.histogram.bin_edges.tolist(),
                "counts": self.histogram.counts.tolist(),
                "total": self.histogram.total,
            },
        }


def variance_floor_for(hist: Histogram) -> float:
    """EM variance floor tied to the histogram resolution."""
    return max(1e-6, (hist.bin_width / 2.0) ** 2)


def case1_bimodal(
    sample: PixelSample,
    decision: ModalityDecision,
    hist: Histogram,
    canopy_trim_fraction: float = DEFAULT_CANOPY_TRIM,
    ground_trim_fraction: float = DEFAULT_GROUND_TRIM,
) -> HeightEstimate:
    """Height from the difference of per-component trimmed means."""
    ground_bins, canopy_bins = assign_components(decision.fit_k2, hist)
    canopy = frequency_trimmed_mean(hist, canopy_bins, canopy_trim_fraction)
    ground = frequency_trimmed_mean(hist, ground_bins, ground_trim_fraction)
    dchm = canopy - ground
    if dchm <= 0.0:
        raise NegativeHeight(sample.block_id, dchm)
    return HeightEstimate(
        block_id=sample.block_id,
        case_used=BIMODAL,
        canopy_elevation=canopy,
        ground_elevation=ground,
        dchm=dchm,
        pixel_count=sample.count,
        decision=decision,
        histogram=hist,
    )


def case2_unimodal(
    sample: PixelSample,
    decision: ModalityDecision,
    hist: Histogram,
    canopy_trim_fraction: float = DEFAULT_CANOPY_TRIM,
) -> HeightEstimate:
    """Height from the trimmed canopy mean minus the minimum pixel."""
    all_bins = range(hist.n_bins)
    canopy = frequency_trimmed_mean(hist, all_bins, canopy_trim_fraction)
    ground = min_value(sample)
    dchm = canopy - ground
    if dchm <= 0.0:
        raise NegativeHeight(sample.block_id, dchm)
    return HeightEstimate(
        block_id=sample.block_id,
        case_used=UNIMODAL,
        canopy_elevation=canopy,
        ground_elevation=ground,
        dchm=dchm,
        pixel_count=sample.count,
        decision=decision,
        histogram=hist,
    )


def estimate_block_height(
    sample: PixelSample,
    canopy_trim_fraction: float = DEFAULT_CANOPY_TRIM,
    ground_trim_fraction: float = DEFAULT_GROUND_TRIM,
    min_pixels: int = DEFAULT_MIN_PIXELS,
    delta_bic_threshold: float = DEFAULT_DELTA_BIC,
    separation_threshold: float = DEFAULT_SEPARATION,
) -> HeightEstimate:
    """Classify a block's modality and dispatch to the matching case."""
    if sample.count < min_pixels:
        raise BlockTooSmall(sample.block_id, sample.count, min_pixels)
    hist = build_histogram(sample)
    decision = classify_modality(
        sample.values,
        variance_floor=variance_floor_for(hist),
        delta_bic_threshold=delta_bic_threshold,
        separation_threshold=separation_threshold,
    )
    if decision.modality == BIMODAL:
        return case1_bimodal(
            sample, decision, hist, canopy_trim_fraction, ground_trim_fraction
        )
    return case2_unimodal(sample, decision, hist, canopy_trim_fraction)
