"""canestat: single-DSM crop height extraction and yield regression.

A blocked field trial is analyzed straight from one pre-harvest digital
surface model: per-block pixel distributions are split into ground and
canopy modes with a deterministic 1-D Gaussian mixture, frequency-trimmed
means turn the modes into a derived cane height, and treatment-zone medians
feed an ordinary least-squares yield regression.
"""

from .errors import (
    BlockTooSmall,
    CanestatError,
    CanestatWarning,
    ConfigError,
    DegenerateDesign,
    EmptySelection,
    GridFormatError,
    MaskFormatError,
    MissingMetadata,
    NegativeHeight,
)
from .gmm import (
    BIMODAL,
    UNIMODAL,
    GmmFit,
    ModalityDecision,
    assign_components,
    bic,
    classify_modality,
    fit_gmm_1d,
)
from .heights import (
    HeightEstimate,
    case1_bimodal,
    case2_unimodal,
    estimate_block_height,
)
from .hstats import (
    Histogram,
    build_histogram,
    frequency_trimmed_mean,
    min_value,
    quantile,
    trim_kept_bins,
)
from .pipeline import PipelineConfig, RunReport, run_pipeline
from .raster import (
    BlockPolygon,
    PixelSample,
    RasterGrid,
    extract_block_pixels,
    load_block_polygons,
    parse_ascii_grid,
    rasterize_mask,
    read_ascii_grid,
    save_ascii_grid,
    write_ascii_grid,
)
from .synth import (
    BlockSpec,
    SceneSpec,
    generate_scene,
    generate_zone_fixture,
)
from .zones import (
    BlockDefinition,
    RegressionResult,
    TreatmentZone,
    ZoneSummary,
    aggregate_zones,
    all_zones,
    assign_zone,
    fit_regression,
    read_block_metadata,
)

__version__ = "0.1.0"

__all__ = [
    "BIMODAL",
    "UNIMODAL",
    "BlockDefinition",
    "BlockPolygon",
    "BlockSpec",
    "BlockTooSmall",
    "CanestatError",
    "CanestatWarning",
    "ConfigError",
    "DegenerateDesign",
    "EmptySelection",
    "GmmFit",
    "GridFormatError",
    "HeightEstimate",
    "Histogram",
    "MaskFormatError",
    "MissingMetadata",
    "ModalityDecision",
    "NegativeHeight",
    "PipelineConfig",
    "PixelSample",
    "RasterGrid",
    "RegressionResult",
    "RunReport",
    "SceneSpec",
    "TreatmentZone",
    "ZoneSummary",
    "aggregate_zones",
    "all_zones",
    "assign_components",
    "assign_zone",
    "bic",
    "build_histogram",
    "case1_bimodal",
    "case2_unimodal",
    "classify_modality",
    "estimate_block_height",
    "extract_block_pixels",
    "fit_gmm_1d",
    "fit_regression",
    "frequency_trimmed_mean",
    "generate_scene",
    "generate_zone_fixture",
    "load_block_polygons",
    "min_value",
    "parse_ascii_grid",
    "quantile",
    "rasterize_mask",
    "read_ascii_grid",
    "read_block_metadata",
    "run_pipeline",
    "save_ascii_grid",
    "trim_kept_bins",
    "write_ascii_grid",
]
