"""End-to-end run: rasters and masks in, tables and plots out.

Per-block analysis is pure, so blocks may be processed serially or by a
process pool; results are merged in block_id order either way and every
output file is byte-identical across runs and parallelism settings.
"""

from __future__ import annotations

import json
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CanestatError, CanestatWarning, ConfigError
from .gmm import (
    BIMODAL,
    DEFAULT_DELTA_BIC,
    DEFAULT_SEPARATION,
    assign_components,
)
from .heights import (
    DEFAULT_CANOPY_TRIM,
    DEFAULT_GROUND_TRIM,
    HeightEstimate,
    estimate_block_height,
)
from .hstats import trim_kept_bins
from .raster import (
    DEFAULT_MIN_PIXELS,
    extract_block_pixels,
    load_block_polygons,
    rasterize_mask,
    read_ascii_grid,
)
from .svgplot import emit_histogram_plot, emit_regression_plot
from .zones import aggregate_zones, fit_regression, read_block_metadata

OUTPUT_DIR_ENV = "CANESTAT_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "canestat_out"

_CONFIG_KEYS = {
    "dsm_path",
    "masks_path",
    "metadata_path",
    "output_dir",
    "canopy_trim_fraction",
    "ground_trim_fraction",
    "min_pixels",
    "delta_bic_threshold",
    "separation_threshold",
    "parallel",
}
_REQUIRED_KEYS = ("dsm_path", "masks_path", "metadata_path")


@dataclass(frozen=True)
class PipelineConfig:
    dsm_path: str
    masks_path: str
    metadata_path: str
    output_dir: str = DEFAULT_OUTPUT_DIR
    canopy_trim_fraction: float = DEFAULT_CANOPY_TRIM
    ground_trim_fraction: float = DEFAULT_GROUND_TRIM
    min_pixels: int = DEFAULT_MIN_PIXELS
    delta_bic_threshold: float = DEFAULT_DELTA_BIC
    separation_threshold: float = DEFAULT_SEPARATION
    parallel: bool = False

    def __post_init__(self):
        for name in ("canopy_trim_fraction", "ground_trim_fraction"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ConfigError(f"{name} must be in (0, 1], got {value}")
        for name in ("delta_bic_threshold", "separation_threshold"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.min_pixels < 1:
            raise ConfigError("min_pixels must be at least 1")

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        """Load a flat JSON config; relative paths resolve against it."""
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config must be a flat JSON object")
        unknown = sorted(set(raw) - _CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        missing = [k for k in _REQUIRED_KEYS if k not in raw]
        if missing:
            raise ConfigError(f"missing required config keys: {', '.join(missing)}")
        base = path.parent
        for key in (*_REQUIRED_KEYS, "output_dir"):
            if key in raw:
                raw[key] = str((base / str(raw[key])).resolve())
        return cls(**raw)


@dataclass
class RunReport:
    """What a pipeline run produced, accepted, and rejected."""

    accepted: list = field(default_factory=list)
    rejected: list = field(default_factory=list)  # (block_id, error) pairs
    warnings: list = field(default_factory=list)
    summaries: list = field(default_factory=list)
    regression: object = None
    output_dir: str = ""

    @property
    def succeeded(self) -> bool:
        return self.regression is not None


def _estimate_one(args):
    """Worker: estimate one block; exceptions become rejection records."""
    sample, params = args
    try:
        return "ok", estimate_block_height(sample, **params)
    except CanestatError as exc:
        return "rejected", (sample.block_id, f"{type(exc).__name__}: {exc}")


def _fmt_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _kept_bins_for_plot(estimate: HeightEstimate, config: PipelineConfig):
    hist = estimate.histogram
    if estimate.case_used == BIMODAL:
        ground_bins, canopy_bins = assign_components(
            estimate.decision.fit_k2, hist
        )
        canopy_kept = trim_kept_bins(hist, canopy_bins, config.canopy_trim_fraction)
        ground_kept = trim_kept_bins(hist, ground_bins, config.ground_trim_fraction)
    else:
        canopy_kept = trim_kept_bins(
            hist, range(hist.n_bins), config.canopy_trim_fraction
        )
        ground_kept = ()
    return canopy_kept, ground_kept


def run_pipeline(config: PipelineConfig) -> RunReport:
    """Execute the full analysis and write all output files.

    Input problems raise :class:`ConfigError` before anything is written.
    Per-block failures are collected, not fatal; the run itself fails only
    when fewer than two treatment zones survive, in which case no
    regression outputs are produced.
    """
    report = RunReport()

    try:
        grid = read_ascii_grid(config.dsm_path)
    except OSError as exc:
        raise ConfigError(f"cannot read DSM: {exc}") from None
    except CanestatError as exc:
        raise ConfigError(f"bad DSM file: {exc}") from None
    try:
        polygons = load_block_polygons(config.masks_path)
    except OSError as exc:
        raise ConfigError(f"cannot read masks: {exc}") from None
    except CanestatError as exc:
        raise ConfigError(f"bad mask file: {exc}") from None
    if not polygons:
        raise ConfigError("mask file defines no blocks")
    try:
        with open(config.metadata_path, "r", encoding="utf-8", newline="") as fh:
            definitions = read_block_metadata(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read metadata: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"bad metadata file: {exc}") from None

    output_dir = Path(os.environ.get(OUTPUT_DIR_ENV) or config.output_dir)

    # Extract samples serially (cheap); estimation below may fan out.
    samples = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", CanestatWarning)
        for poly in sorted(polygons, key=lambda p: p.block_id):
            mask = rasterize_mask(poly, grid)
            try:
                samples.append(
                    extract_block_pixels(
                        grid, mask, poly.block_id, config.min_pixels
                    )
                )
            except CanestatError as exc:
                report.rejected.append(
                    (poly.block_id, f"{type(exc).__name__}: {exc}")
                )
    report.warnings.extend(str(w.message) for w in caught)

    params = {
        "canopy_trim_fraction": config.canopy_trim_fraction,
        "ground_trim_fraction": config.ground_trim_fraction,
        "min_pixels": config.min_pixels,
        "delta_bic_threshold": config.delta_bic_threshold,
        "separation_threshold": config.separation_threshold,
    }
    tasks = [(sample, params) for sample in samples]
    if config.parallel and len(tasks) > 1:
        workers = min(len(tasks), os.cpu_count() or 1)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_estimate_one, tasks, chunksize=4))
    else:
        results = [_estimate_one(task) for task in tasks]

    for status, payload in results:
        if status == "ok":
            report.accepted.append(payload)
        else:
            report.rejected.append(payload)
    report.accepted.sort(key=lambda e: e.block_id)
    report.rejected.sort()

    known_ids = {d.block_id for d in definitions}
    with_metadata = []
    for est in report.accepted:
        if est.block_id in known_ids:
            with_metadata.append(est)
        else:
            report.rejected.append(
                (est.block_id, "MissingMetadata: no metadata row for block")
            )
    report.rejected.sort()

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", CanestatWarning)
        report.summaries = aggregate_zones(with_metadata, definitions)
    report.warnings.extend(str(w.message) for w in caught)

    if len(report.summaries) >= 2:
        report.regression = fit_regression(
            [(s.median_height, s.median_yield) for s in report.summaries]
        )
    else:
        report.warnings.append(
            f"only {len(report.summaries)} zone(s) survived; regression skipped"
        )

    _write_outputs(report, config, output_dir)
    report.output_dir = str(output_dir)
    return report


def _write_outputs(report: RunReport, config: PipelineConfig, output_dir: Path):
    output_dir.mkdir(parents=True, exist_ok=True)
    (output_dir / "diagnostics").mkdir(exist_ok=True)
    (output_dir / "histograms").mkdir(exist_ok=True)

    rows = [
        "block_id,case,canopy_elevation_m,ground_elevation_m,dchm_m,pixel_count"
    ]
    for est in report.accepted:
        rows.append(
            ",".join(
                _fmt_cell(v)
                for v in (
                    est.block_id,
                    est.case_used,
                    est.canopy_elevation,
                    est.ground_elevation,
                    est.dchm,
                    est.pixel_count,
                )
            )
        )
    _write_text(output_dir / "blocks.csv", "\n".join(rows) + "\n")

    for est in report.accepted:
        _write_text(
            output_dir / "diagnostics" / f"{est.block_id}.json",
            json.dumps(est.to_dict(), indent=2) + "\n",
        )
        canopy_kept, ground_kept = _kept_bins_for_plot(est, config)
        _write_text(
            output_dir / "histograms" / f"{est.block_id}.svg",
            emit_histogram_plot(
                est.histogram,
                est.decision,
                canopy_kept=canopy_kept,
                ground_kept=ground_kept,
                title=f"Block {est.block_id} elevation histogram",
            ),
        )

    if report.summaries:
        zone_rows = ["zone,median_height_m,median_yield_t_acre,block_count"]
        for s in report.summaries:
            zone_rows.append(
                f"{s.zone.abbreviation},{s.median_height!r},"
                f"{s.median_yield!r},{s.block_count}"
            )
        _write_text(output_dir / "zones.csv", "\n".join(zone_rows) + "\n")

    if report.regression is not None:
        payload = {
            "slope": report.regression.slope,
            "intercept": report.regression.intercept,
            "r_squared": report.regression.r_squared,
            "n_points": report.regression.n_points,
            "residuals": report.regression.residuals.tolist(),
        }
        _write_text(
            output_dir / "regression.json", json.dumps(payload, indent=2) + "\n"
        )
        _write_text(
            output_dir / "regression.svg",
            emit_regression_plot(report.regression, report.summaries),
        )

    status = "ok" if report.succeeded else "failed"
    report_payload = {
        "status": status,
        "n_blocks_accepted": len(report.accepted),
        "n_blocks_rejected": len(report.rejected),
        "rejected": [
            {"block_id": block_id, "error": error}
            for block_id, error in report.rejected
        ],
        "warnings": report.warnings,
        "zones_survived": len(report.summaries),
    }
    _write_text(
        output_dir / "report.json", json.dumps(report_payload, indent=2) + "\n"
    )
