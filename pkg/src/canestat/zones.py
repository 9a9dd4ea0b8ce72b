"""Treatment-zone aggregation and the yield-vs-height regression.

Blocks carry a water level (LW/MW/HW) and a nitrogen level (LN/MN/HN);
the 3x3 cross product defines nine treatment zones. Accepted block heights
and recorded yields are reduced to per-zone medians, and an ordinary
least-squares line with R-squared is fitted over the zone points.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import CanestatWarning, DegenerateDesign, MissingMetadata

WATER_LEVELS = ("LW", "MW", "HW")
NITROGEN_LEVELS = ("LN", "MN", "HN")

METADATA_HEADER = ["block_id", "water_level", "nitrogen_level", "yield_tons_per_acre"]


@dataclass(frozen=True)
class BlockDefinition:
    """One block's treatment levels and post-harvest yield."""

    block_id: str
    water_level: str
    nitrogen_level: str
    yield_tons_per_acre: float

    def __post_init__(self):
        if self.water_level not in WATER_LEVELS:
            raise ValueError(
                f"block {self.block_id!r}: unknown water level {self.water_level!r}"
            )
        if self.nitrogen_level not in NITROGEN_LEVELS:
            raise ValueError(
                f"block {self.block_id!r}: unknown nitrogen level "
                f"{self.nitrogen_level!r}"
            )
        if not self.yield_tons_per_acre >= 0:
            raise ValueError(f"block {self.block_id!r}: yield must be non-negative")


@dataclass(frozen=True)
class TreatmentZone:
    water_level: str
    nitrogen_level: str

    @property
    def abbreviation(self) -> str:
        return f"{self.water_level}_{self.nitrogen_level}"


def all_zones() -> list[TreatmentZone]:
    """The nine zones in canonical (water-major) order."""
    return [
        TreatmentZone(w, n) for w in WATER_LEVELS for n in NITROGEN_LEVELS
    ]


def assign_zone(definition: BlockDefinition) -> TreatmentZone:
    return TreatmentZone(definition.water_level, definition.nitrogen_level)


@dataclass(frozen=True)
class ZoneSummary:
    zone: TreatmentZone
    median_height: float
    median_yield: float
    block_count: int


@dataclass(frozen=True)
class RegressionResult:
    """OLS line y = slope*x + intercept with diagnostics."""

    slope: float
    intercept: float
    r_squared: float
    n_points: int
    residuals: np.ndarray = field(repr=False)

    def __post_init__(self):
        res = np.asarray(self.residuals, dtype=np.float64)
        res.setflags(write=False)
        object.__setattr__(self, "residuals", res)


def read_block_metadata(source) -> list[BlockDefinition]:
    """Read the block metadata CSV (path, text, or stream)."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = str(source)
        if "\n" not in text:
            with open(text, "r", encoding="utf-8", newline="") as fh:
                text = fh.read()
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != METADATA_HEADER:
        raise ValueError(
            f"metadata CSV must have header {','.join(METADATA_HEADER)}"
        )
    definitions = []
    seen = set()
    for row in reader:
        block_id = row["block_id"].strip()
        if block_id in seen:
            raise ValueError(f"duplicate block_id {block_id!r} in metadata")
        seen.add(block_id)
        definitions.append(
            BlockDefinition(
                block_id=block_id,
                water_level=row["water_level"].strip(),
                nitrogen_level=row["nitrogen_level"].strip(),
                yield_tons_per_acre=float(row["yield_tons_per_acre"]),
            )
        )
    return definitions


def _median(values) -> float:
    # Even counts take the mean of the two middle values.
    return float(np.median(np.asarray(values, dtype=np.float64)))


def aggregate_zones(estimates, definitions) -> list[ZoneSummary]:
    """Reduce accepted block estimates to per-zone medians.

    Every estimate must have a metadata row; zones without any accepted
    block are omitted with a warning rather than emitted empty.
    """
    by_id = {d.block_id: d for d in definitions}
    members: dict[str, list] = {z.abbreviation: [] for z in all_zones()}
    for est in estimates:
        definition = by_id.get(est.block_id)
        if definition is None:
            raise MissingMetadata(est.block_id)
        members[assign_zone(definition).abbreviation].append((est, definition))

    summaries = []
    for zone in all_zones():
        group = members[zone.abbreviation]
        if not group:
            warnings.warn(
                f"zone {zone.abbreviation} has no accepted blocks; omitted",
                CanestatWarning,
                stacklevel=2,
            )
            continue
        heights = [est.dchm for est, _ in group]
        yields = [d.yield_tons_per_acre for _, d in group]
        summaries.append(
            ZoneSummary(
                zone=zone,
                median_height=_median(heights),
                median_yield=_median(yields),
                block_count=len(group),
            )
        )
    return summaries


def fit_regression(points) -> RegressionResult:
    """Closed-form OLS with intercept over (height, yield) points."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be a sequence of (x, y) pairs")
    n = pts.shape[0]
    if n < 2:
        raise DegenerateDesign(f"need at least 2 points, got {n}")
    x, y = pts[:, 0], pts[:, 1]
    x_mean = x.mean()
    y_mean = y.mean()
    sxx = float(np.sum((x - x_mean) ** 2))
    if sxx == 0.0:
        raise DegenerateDesign("all heights are equal; slope is undefined")
    slope = float(np.sum((x - x_mean) * (y - y_mean))) / sxx
    intercept = float(y_mean - slope * x_mean)
    residuals = y - (slope * x + intercept)
    ss_res = float(np.sum(residuals**2))
    ss_tot = float(np.sum((y - y_mean) ** 2))
    if ss_tot == 0.0:
        r_squared = 1.0
    else:
        r_squared = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return RegressionResult(
        slope=slope,
        intercept=intercept,
        r_squared=r_squared,
        n_points=n,
        residuals=residuals,
    )
