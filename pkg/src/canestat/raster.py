"""Elevation grids, block polygons, and per-block pixel extraction.

The grid format is the plain-text ASCII raster layout: six header lines
(``ncols``, ``nrows``, ``xllcorner``, ``yllcorner``, ``cellsize``,
``NODATA_value``) followed by ``nrows`` lines of ``ncols`` space-separated
values, row 0 being the northernmost. Block masks arrive as a JSON array of
``{"block_id": ..., "vertices": [[x, y], ...]}`` polygons expressed in the
grid's ground coordinate frame.
"""

from __future__ import annotations

import io
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BlockTooSmall,
    CanestatWarning,
    GridFormatError,
    MaskFormatError,
)

HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value")

# Canonical spellings used when writing.
_HEADER_LABELS = {
    "ncols": "ncols",
    "nrows": "nrows",
    "xllcorner": "xllcorner",
    "yllcorner": "yllcorner",
    "cellsize": "cellsize",
    "nodata_value": "NODATA_value",
}

DEFAULT_MIN_PIXELS = 100


@dataclass(frozen=True)
class RasterGrid:
    """A georeferenced elevation matrix with a nodata sentinel.

    ``cells`` is an ``(nrows, ncols)`` float64 array in row-major order with
    row 0 at the top (north). Cells equal to ``nodata_value`` are invalid and
    excluded from every statistic downstream.
    """

    ncols: int
    nrows: int
    xllcorner: float
    yllcorner: float
    cellsize: float
    nodata_value: float
    cells: np.ndarray

    def __post_init__(self):
        if self.ncols < 1 or self.nrows < 1:
            raise ValueError("grid dimensions must be at least 1x1")
        if not self.cellsize > 0:
            raise ValueError("cellsize must be positive")
        cells = np.asarray(self.cells, dtype=np.float64)
        if cells.shape != (self.nrows, self.ncols):
            raise ValueError(
                f"cells shape {cells.shape} does not match "
                f"(nrows, ncols)=({self.nrows}, {self.ncols})"
            )
        cells = cells.copy()
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def valid(self) -> np.ndarray:
        """Boolean matrix marking cells that are not nodata."""
        return self.cells != self.nodata_value

    def cell_centers_x(self) -> np.ndarray:
        return self.xllcorner + (np.arange(self.ncols) + 0.5) * self.cellsize

    def cell_centers_y(self) -> np.ndarray:
        """Center y per row, row 0 northernmost."""
        rows = np.arange(self.nrows)
        return self.yllcorner + (self.nrows - 1 - rows + 0.5) * self.cellsize


@dataclass(frozen=True)
class BlockPolygon:
    """A named polygon in ground coordinates; closure is implied."""

    block_id: str
    vertices: np.ndarray = field(repr=False)

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=np.float64)
        if verts.ndim != 2 or verts.shape[1] != 2:
            raise ValueError(f"block {self.block_id!r}: vertices must be (n, 2)")
        # Drop an explicit closing vertex if present.
        if len(verts) > 1 and np.array_equal(verts[0], verts[-1]):
            verts = verts[:-1]
        if len(verts) < 3:
            raise ValueError(f"block {self.block_id!r}: need at least 3 vertices")
        if self._shoelace(verts) == 0.0:
            raise ValueError(f"block {self.block_id!r}: polygon has zero area")
        verts.setflags(write=False)
        object.__setattr__(self, "vertices", verts)

    @staticmethod
    def _shoelace(verts: np.ndarray) -> float:
        x, y = verts[:, 0], verts[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    @property
    def area(self) -> float:
        return abs(self._shoelace(self.vertices))


@dataclass(frozen=True)
class PixelSample:
    """Valid elevation values extracted from one block, row-major order."""

    block_id: str
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ValueError("values must be 1-D")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def count(self) -> int:
        return int(self.values.size)


def _parse_header_value(key, token, line_no):
    try:
        if key in ("ncols", "nrows"):
            value = int(token)
            if value < 1:
                raise GridFormatError(f"{key} must be a positive integer", line_no)
            return value
        return float(token)
    except ValueError:
        raise GridFormatError(
            f"cannot parse {key} value {token!r}", line_no
        ) from None


def parse_ascii_grid(text) -> RasterGrid:
    """Parse an ASCII grid from a string or readable text stream.

    Header keys are matched case-insensitively. Malformed headers, bad cell
    tokens, and cell-count mismatches raise :class:`GridFormatError` carrying
    the offending line number.
    """
    if hasattr(text, "read"):
        text = text.read()
    lines = text.splitlines()

    header = {}
    data_start = 0
    for line_no, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        if len(header) == len(HEADER_KEYS):
            data_start = line_no - 1
            break
        parts = raw.split()
        if len(parts) != 2:
            raise GridFormatError(
                f"expected 'key value' header line, got {raw.strip()!r}", line_no
            )
        key = parts[0].lower()
        if key not in HEADER_KEYS:
            raise GridFormatError(f"unknown header key {parts[0]!r}", line_no)
        if key in header:
            raise GridFormatError(f"duplicate header key {parts[0]!r}", line_no)
        header[key] = _parse_header_value(key, parts[1], line_no)
    else:
        if len(header) < len(HEADER_KEYS):
            missing = sorted(set(HEADER_KEYS) - set(header))
            raise GridFormatError(
                f"missing header keys: {', '.join(missing)}", len(lines)
            )
        data_start = len(lines)

    ncols, nrows = header["ncols"], header["nrows"]
    if not header["cellsize"] > 0:
        raise GridFormatError("cellsize must be positive", None)

    expected = nrows * ncols
    values = np.empty(expected, dtype=np.float64)
    n_seen = 0
    for line_no, raw in enumerate(lines[data_start:], start=data_start + 1):
        tokens = raw.split()
        for token in tokens:
            if n_seen >= expected:
                raise GridFormatError(
                    f"too many cell values (expected {expected})", line_no
                )
            try:
                values[n_seen] = float(token)
            except ValueError:
                raise GridFormatError(
                    f"non-numeric cell token {token!r}", line_no
                ) from None
            n_seen += 1
    if n_seen != expected:
        raise GridFormatError(
            f"cell count mismatch: expected {expected}, got {n_seen}", len(lines)
        )

    return RasterGrid(
        ncols=ncols,
        nrows=nrows,
        xllcorner=header["xllcorner"],
        yllcorner=header["yllcorner"],
        cellsize=header["cellsize"],
        nodata_value=header["nodata_value"],
        cells=values.reshape(nrows, ncols),
    )


def write_ascii_grid(grid: RasterGrid) -> str:
    """Serialize a grid to its canonical text form.

    Fixed header order, one raster row per line, and shortest round-trippable
    decimal representation for every value, so ``parse(write(g))`` reproduces
    ``g`` bit for bit.
    """
    out = io.StringIO()
    out.write(f"{_HEADER_LABELS['ncols']} {grid.ncols}\n")
    out.write(f"{_HEADER_LABELS['nrows']} {grid.nrows}\n")
    out.write(f"{_HEADER_LABELS['xllcorner']} {grid.xllcorner!r}\n")
    out.write(f"{_HEADER_LABELS['yllcorner']} {grid.yllcorner!r}\n")
    out.write(f"{_HEADER_LABELS['cellsize']} {grid.cellsize!r}\n")
    out.write(f"{_HEADER_LABELS['nodata_value']} {grid.nodata_value!r}\n")
    for row in grid.cells:
        out.write(" ".join(repr(v) for v in row.tolist()))
        out.write("\n")
    return out.getvalue()


def read_ascii_grid(path) -> RasterGrid:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_ascii_grid(fh)


def save_ascii_grid(grid: RasterGrid, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(write_ascii_grid(grid))


def load_block_polygons(source) -> list[BlockPolygon]:
    """Load block polygons from a mask JSON document (path, text, or stream)."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = str(source)
        if not text.lstrip().startswith("["):
            with open(text, "r", encoding="utf-8") as fh:
                text = fh.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MaskFormatError(f"mask file is not valid JSON: {exc}") from None
    if not isinstance(raw, list):
        raise MaskFormatError("mask file must be a JSON array of blocks")
    polygons = []
    seen = set()
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict) or "block_id" not in entry or "vertices" not in entry:
            raise MaskFormatError(
                f"mask entry {i} must be an object with block_id and vertices"
            )
        block_id = str(entry["block_id"])
        if block_id in seen:
            raise MaskFormatError(f"duplicate block_id {block_id!r}")
        seen.add(block_id)
        try:
            polygons.append(BlockPolygon(block_id, np.asarray(entry["vertices"], dtype=np.float64)))
        except ValueError as exc:
            raise MaskFormatError(str(exc)) from None
    return polygons


def dump_block_polygons(polygons) -> str:
    """Serialize polygons to the mask JSON format."""
    payload = [
        {"block_id": p.block_id, "vertices": p.vertices.tolist()} for p in polygons
    ]
    return json.dumps(payload, indent=2)


def rasterize_mask(poly: BlockPolygon, grid: RasterGrid) -> np.ndarray:
    """Select the grid cells whose centers fall inside ``poly``.

    Containment uses the even-odd rule. A center exactly on the boundary is
    resolved half-open: top and left edges are inclusive, bottom and right
    exclusive, so two polygons sharing an edge never both claim a cell.
    """
    verts = poly.vertices
    cx = grid.cell_centers_x()
    cy = grid.cell_centers_y()
    inside = np.zeros((grid.nrows, grid.ncols), dtype=bool)

    n = len(verts)
    for i in range(n):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % n]
        if y1 == y2:
            continue
        crosses = (y1 >= cy) != (y2 >= cy)
        if not crosses.any():
            continue
        x_int = x1 + (cy - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses[:, None] & (cx[None, :] < x_int[:, None])

    if not inside.any():
        warnings.warn(
            f"block {poly.block_id!r}: polygon selects no cells",
            CanestatWarning,
            stacklevel=2,
        )
    return inside


def extract_block_pixels(
    grid: RasterGrid,
    mask: np.ndarray,
    block_id: str,
    min_pixels: int = DEFAULT_MIN_PIXELS,
) -> PixelSample:
    """Collect the selected, non-nodata elevations in row-major scan order."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != grid.cells.shape:
        raise ValueError(
            f"mask shape {mask.shape} does not match grid {grid.cells.shape}"
        )
    values = grid.cells[mask & grid.valid]
    if values.size < min_pixels:
        raise BlockTooSmall(block_id, int(values.size), min_pixels)
    return PixelSample(block_id, values)
