"""Shared fixtures: a small on-disk farm fixture ready for the pipeline."""

import json

import pytest

from canestat.raster import dump_block_polygons, save_ascii_grid
from canestat.synth import generate_scene, generate_zone_fixture, metadata_csv


def write_fixture_tree(
    directory,
    slope=7.61,
    intercept=0.56,
    noise_sigma_yield=0.3,
    seed=0,
    blocks_per_zone=2,
    block_cells=20,
):
    """Generate a fixture and write dsm.asc/masks.json/metadata.csv/config.json."""
    spec, definitions, truth = generate_zone_fixture(
        slope,
        intercept,
        noise_sigma_yield,
        seed=seed,
        blocks_per_zone=blocks_per_zone,
        block_cells=block_cells,
    )
    grid, polygons, scene_truth = generate_scene(spec)
    directory.mkdir(parents=True, exist_ok=True)
    save_ascii_grid(grid, directory / "dsm.asc")
    (directory / "masks.json").write_text(
        dump_block_polygons(polygons), encoding="utf-8"
    )
    (directory / "metadata.csv").write_text(metadata_csv(definitions), encoding="utf-8")
    config = {
        "dsm_path": "dsm.asc",
        "masks_path": "masks.json",
        "metadata_path": "metadata.csv",
        "output_dir": "out",
    }
    (directory / "config.json").write_text(
        json.dumps(config, indent=2), encoding="utf-8"
    )
    return {"truth": truth, "scene_truth": scene_truth, "definitions": definitions}


@pytest.fixture
def fixture_tree(tmp_path):
    """A small pipeline-ready fixture on disk; returns (dir, truth info)."""
    info = write_fixture_tree(tmp_path / "farm")
    return tmp_path / "farm", info
