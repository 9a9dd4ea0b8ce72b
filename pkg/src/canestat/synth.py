"""Seeded synthetic farm scenes with known canopy heights and yields.

Real field rasters are rarely shareable, so tests and demos run against
generated ones: a sloped ground plane, rectangular (or arbitrary polygon)
blocks whose pixels split into ground-level gap clusters and canopy-level
cover, and a yield table drawn from a known linear law. Every artifact is a
pure function of the spec and its seed; per-block Philox streams keep the
output identical whether blocks are filled serially or in parallel.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .raster import BlockPolygon, RasterGrid, rasterize_mask
from .zones import NITROGEN_LEVELS, WATER_LEVELS, BlockDefinition

DEFAULT_CELLSIZE = 0.02  # meters per pixel, typical low-altitude UAV GSD


@dataclass(frozen=True)
class BlockSpec:
    """One synthetic block: geometry plus its generating truth."""

    block_id: str
    vertices: tuple
    true_height: float
    ground_fraction: float
    noise_sigma: float

    def __post_init__(self):
        if not 0.0 <= self.ground_fraction <= 1.0:
            raise ValueError("ground_fraction must be in [0, 1]")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be non-negative")


@dataclass(frozen=True)
class SceneSpec:
    """Everything needed to deterministically rebuild a synthetic scene."""

    ncols: int
    nrows: int
    blocks: tuple
    cellsize: float = DEFAULT_CELLSIZE
    xllcorner: float = 0.0
    yllcorner: float = 0.0
    nodata_value: float = -9999.0
    ground_elevation: float = 100.0
    ground_slope: tuple = (0.0, 0.0)
    seed: int = 0

    def to_json(self) -> str:
        payload = {
            "ncols": self.ncols,
            "nrows": self.nrows,
            "cellsize": self.cellsize,
            "xllcorner": self.xllcorner,
            "yllcorner": self.yllcorner,
            "nodata_value": self.nodata_value,
            "ground_elevation": self.ground_elevation,
            "ground_slope": list(self.ground_slope),
            "seed": self.seed,
            "blocks": [
                {
                    "block_id": b.block_id,
                    "vertices": [list(v) for v in b.vertices],
                    "true_height": b.true_height,
                    "ground_fraction": b.ground_fraction,
                    "noise_sigma": b.noise_sigma,
                }
                for b in self.blocks
            ],
        }
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SceneSpec":
        raw = json.loads(text)
        blocks = tuple(
            BlockSpec(
                block_id=str(b["block_id"]),
                vertices=tuple(tuple(v) for v in b["vertices"]),
                true_height=float(b["true_height"]),
                ground_fraction=float(b["ground_fraction"]),
                noise_sigma=float(b["noise_sigma"]),
            )
            for b in raw["blocks"]
        )
        return cls(
            ncols=int(raw["ncols"]),
            nrows=int(raw["nrows"]),
            blocks=blocks,
            cellsize=float(raw.get("cellsize", DEFAULT_CELLSIZE)),
            xllcorner=float(raw.get("xllcorner", 0.0)),
            yllcorner=float(raw.get("yllcorner", 0.0)),
            nodata_value=float(raw.get("nodata_value", -9999.0)),
            ground_elevation=float(raw.get("ground_elevation", 100.0)),
            ground_slope=tuple(raw.get("ground_slope", (0.0, 0.0))),
            seed=int(raw.get("seed", 0)),
        )


def _block_rng(seed: int, stream: int) -> np.random.Generator:
    """Independent, portable stream per block (Philox keyed by seed+index)."""
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _place_gap_blobs(rng, rows, cols, target: int) -> np.ndarray:
    """Mark ``target`` of the block's cells as ground gaps, in round blobs.

    Blob centers are drawn among still-unmarked cells, so every draw makes
    progress and the loop terminates with exactly ``target`` marks.
    """
    m = rows.size
    marked = np.zeros(m, dtype=bool)
    if target <= 0:
        return marked
    max_radius = max(2.0, 0.75 * np.sqrt(target))
    n_marked = 0
    while n_marked < target:
        open_idx = np.flatnonzero(~marked)
        center = open_idx[int(rng.integers(open_idx.size))]
        radius = float(rng.uniform(1.0, max_radius))
        d2 = (rows - rows[center]) ** 2.0 + (cols - cols[center]) ** 2.0
        candidates = np.flatnonzero((d2 <= radius * radius) & ~marked)
        room = target - n_marked
        if candidates.size > room:
            candidates = candidates[:room]
        marked[candidates] = True
        n_marked += candidates.size
    return marked


def generate_scene(spec: SceneSpec):
    """Build the raster, masks, and truth table for a scene spec.

    Returns ``(grid, polygons, truth)``. Within each block a seeded
    fraction of cells sits at ground level and the rest at ground plus the
    block's true height, both with Gaussian pixel noise; gaps come in
    spatially clustered blobs so bimodal blocks show two separated peaks.
    """
    polygons = [
        BlockPolygon(b.block_id, np.asarray(b.vertices, dtype=np.float64))
        for b in spec.blocks
    ]

    geometry = RasterGrid(
        ncols=spec.ncols,
        nrows=spec.nrows,
        xllcorner=spec.xllcorner,
        yllcorner=spec.yllcorner,
        cellsize=spec.cellsize,
        nodata_value=spec.nodata_value,
        cells=np.zeros((spec.nrows, spec.ncols)),
    )
    masks = [rasterize_mask(p, geometry) for p in polygons]
    claimed = np.zeros((spec.nrows, spec.ncols), dtype=np.int32)
    for mask in masks:
        claimed += mask
    if np.any(claimed > 1):
        raise ValueError("block polygons overlap on the raster")

    dx, dy = spec.ground_slope
    cx = geometry.cell_centers_x()
    cy = geometry.cell_centers_y()
    plane = np.full((spec.nrows, spec.ncols), spec.ground_elevation)
    plane += dx * (cx[None, :] - spec.xllcorner)
    plane += dy * (cy[:, None] - spec.yllcorner)
    cells = plane.copy()

    truth_blocks = {}
    for stream, (block, mask) in enumerate(zip(spec.blocks, masks), start=1):
        rng = _block_rng(spec.seed, stream)
        rows, cols = np.nonzero(mask)
        n_cells = rows.size
        if n_cells == 0:
            truth_blocks[block.block_id] = {
                "true_height": block.true_height,
                "noise_sigma": block.noise_sigma,
                "ground_fraction": block.ground_fraction,
                "n_cells": 0,
                "n_ground": 0,
                "mean_ground_elevation": None,
                "mean_canopy_elevation": None,
            }
            continue
        target = int(round(block.ground_fraction * n_cells))
        gap = _place_gap_blobs(rng, rows.astype(np.float64), cols.astype(np.float64), target)
        noise = rng.normal(0.0, block.noise_sigma, n_cells)
        values = plane[rows, cols] + np.where(gap, 0.0, block.true_height) + noise
        cells[rows, cols] = values
        truth_blocks[block.block_id] = {
            "true_height": block.true_height,
            "noise_sigma": block.noise_sigma,
            "ground_fraction": block.ground_fraction,
            "n_cells": int(n_cells),
            "n_ground": int(gap.sum()),
            "mean_ground_elevation": float(values[gap].mean()) if gap.any() else None,
            "mean_canopy_elevation": float(values[~gap].mean()) if (~gap).any() else None,
        }

    grid = RasterGrid(
        ncols=spec.ncols,
        nrows=spec.nrows,
        xllcorner=spec.xllcorner,
        yllcorner=spec.yllcorner,
        cellsize=spec.cellsize,
        nodata_value=spec.nodata_value,
        cells=cells,
    )
    truth = {"seed": spec.seed, "blocks": truth_blocks}
    return grid, polygons, truth


def rect_vertices(x0: float, y0: float, width: float, height: float) -> tuple:
    """Counter-clockwise rectangle corners."""
    return ((x0, y0), (x0 + width, y0), (x0 + width, y0 + height), (x0, y0 + height))


def layout_block_grid(
    n_columns: int,
    n_rows: int,
    block_cells: int = 30,
    gutter_cells: int = 3,
    cellsize: float = DEFAULT_CELLSIZE,
    xllcorner: float = 0.0,
    yllcorner: float = 0.0,
):
    """Rectangular block footprints on a regular grid, plus raster dims.

    Block edges snap to cell boundaries so each footprint rasterizes to
    exactly ``block_cells**2`` cells with no boundary ties.
    """
    pitch = block_cells + gutter_cells
    ncols = gutter_cells + n_columns * pitch
    nrows = gutter_cells + n_rows * pitch
    footprints = []
    for row in range(n_rows):
        for col in range(n_columns):
            x0 = xllcorner + (gutter_cells + col * pitch) * cellsize
            y0 = yllcorner + (gutter_cells + row * pitch) * cellsize
            side = block_cells * cellsize
            footprints.append(rect_vertices(x0, y0, side, side))
    return footprints, ncols, nrows


def generate_zone_fixture(
    slope: float,
    intercept: float,
    noise_sigma_yield: float,
    seed: int,
    blocks_per_zone: int = 7,
    block_cells: int = 30,
    noise_sigma: float = 0.05,
    height_span: tuple = (1.5, 4.0),
):
    """A nine-zone farm whose yields follow a known linear law of height.

    Zone base heights span ``height_span`` with small per-block jitter;
    per-block yields are ``slope * true_height + intercept`` plus Gaussian
    noise. Returns ``(scene_spec, definitions, truth)`` where truth records
    the generating parameters and every block's drawn values.
    """
    if not (np.isfinite(slope) and np.isfinite(intercept)):
        raise ValueError("slope and intercept must be finite")

    zones = [(w, n) for w in WATER_LEVELS for n in NITROGEN_LEVELS]
    zone_heights = np.linspace(height_span[0], height_span[1], len(zones))
    footprints, ncols, nrows = layout_block_grid(
        n_columns=len(zones), n_rows=blocks_per_zone, block_cells=block_cells
    )

    rng = _block_rng(seed, 0)  # stream 0 reserved for fixture-level draws
    blocks = []
    definitions = []
    yields_truth = {}
    for j in range(blocks_per_zone):
        for z, (water, nitrogen) in enumerate(zones):
            block_id = f"{water}_{nitrogen}_B{j + 1}"
            height = float(zone_heights[z] + rng.uniform(-0.1, 0.1))
            # Ground fractions below ~0.25 keep the sample IQR at the
            # canopy-mode scale, so Freedman-Diaconis bins resolve both
            # modes finely instead of clamping at the coarse floor.
            ground_fraction = float(rng.uniform(0.16, 0.20))
            y = slope * height + intercept + rng.normal(0.0, noise_sigma_yield)
            y = max(0.0, float(y))
            blocks.append(
                BlockSpec(
                    block_id=block_id,
                    vertices=footprints[j * len(zones) + z],
                    true_height=height,
                    ground_fraction=ground_fraction,
                    noise_sigma=noise_sigma,
                )
            )
            definitions.append(
                BlockDefinition(
                    block_id=block_id,
                    water_level=water,
                    nitrogen_level=nitrogen,
                    yield_tons_per_acre=y,
                )
            )
            yields_truth[block_id] = {"true_height": height, "yield": y}

    spec = SceneSpec(ncols=ncols, nrows=nrows, blocks=tuple(blocks), seed=seed)
    truth = {
        "slope": slope,
        "intercept": intercept,
        "noise_sigma_yield": noise_sigma_yield,
        "seed": seed,
        "zone_heights": {
            f"{w}_{n}": float(h) for (w, n), h in zip(zones, zone_heights)
        },
        "blocks": yields_truth,
    }
    return spec, definitions, truth


def metadata_csv(definitions) -> str:
    """Serialize block definitions to the metadata CSV format."""
    lines = ["block_id,water_level,nitrogen_level,yield_tons_per_acre"]
    for d in definitions:
        lines.append(
            f"{d.block_id},{d.water_level},{d.nitrogen_level},"
            f"{d.yield_tons_per_acre!r}"
        )
    return "\n".join(lines) + "\n"
