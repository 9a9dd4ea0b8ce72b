"""Scene generator determinism, truth consistency, and fixture structure."""

import numpy as np
import pytest

from canestat import (
    BIMODAL,
    UNIMODAL,
    classify_modality,
    extract_block_pixels,
    rasterize_mask,
    write_ascii_grid,
)
from canestat.synth import (
    BlockSpec,
    SceneSpec,
    generate_scene,
    generate_zone_fixture,
    layout_block_grid,
    metadata_csv,
    rect_vertices,
)
from canestat.zones import read_block_metadata
import io


def small_scene(seed=0, ground_fraction=0.4, true_height=2.5, noise=0.05):
    footprints, ncols, nrows = layout_block_grid(2, 1, block_cells=40)
    blocks = tuple(
        BlockSpec(f"B{i}", fp, true_height, ground_fraction, noise)
        for i, fp in enumerate(footprints)
    )
    return SceneSpec(ncols=ncols, nrows=nrows, blocks=blocks, seed=seed)


class TestGenerateScene:
    def test_deterministic_byte_identical(self):
        spec = small_scene(seed=42)
        grid_a, _, truth_a = generate_scene(spec)
        grid_b, _, truth_b = generate_scene(spec)
        assert write_ascii_grid(grid_a) == write_ascii_grid(grid_b)
        assert truth_a == truth_b

    def test_different_seeds_differ(self):
        a = generate_scene(small_scene(seed=1))[0]
        b = generate_scene(small_scene(seed=2))[0]
        assert write_ascii_grid(a) != write_ascii_grid(b)

    def test_bimodal_block_by_construction(self):
        grid, polys, _ = generate_scene(small_scene(ground_fraction=0.4))
        sample = extract_block_pixels(grid, rasterize_mask(polys[0], grid), "B0")
        decision = classify_modality(sample.values)
        assert decision.modality == BIMODAL
        gap = abs(decision.fit_k2.means[1] - decision.fit_k2.means[0])
        assert gap == pytest.approx(2.5, abs=0.1)

    def test_zero_ground_fraction_unimodal(self):
        grid, polys, truth = generate_scene(small_scene(ground_fraction=0.0))
        sample = extract_block_pixels(grid, rasterize_mask(polys[0], grid), "B0")
        assert classify_modality(sample.values).modality == UNIMODAL
        assert truth["blocks"]["B0"]["n_ground"] == 0

    def test_overlapping_polygons_rejected(self):
        square = rect_vertices(0.1, 0.1, 0.5, 0.5)
        overlapping = rect_vertices(0.3, 0.3, 0.5, 0.5)
        spec = SceneSpec(
            ncols=60,
            nrows=60,
            blocks=(
                BlockSpec("a", square, 2.0, 0.3, 0.05),
                BlockSpec("b", overlapping, 2.0, 0.3, 0.05),
            ),
        )
        with pytest.raises(ValueError, match="overlap"):
            generate_scene(spec)

    def test_ground_fraction_realized(self):
        spec = small_scene(ground_fraction=0.35)
        _, _, truth = generate_scene(spec)
        b = truth["blocks"]["B0"]
        assert b["n_ground"] == round(0.35 * b["n_cells"])

    @pytest.mark.parametrize("seed", range(10))
    def test_truth_table_consistency(self, seed):
        # empirical canopy-minus-ground mean equals the constructed height
        # within 3 standard errors of the difference of the two means
        spec = small_scene(seed=seed, ground_fraction=0.4, noise=0.05)
        _, _, truth = generate_scene(spec)
        for b in truth["blocks"].values():
            diff = b["mean_canopy_elevation"] - b["mean_ground_elevation"]
            n_ground = b["n_ground"]
            n_canopy = b["n_cells"] - n_ground
            tol = 3 * b["noise_sigma"] * np.sqrt(1 / n_ground + 1 / n_canopy)
            assert diff == pytest.approx(b["true_height"], abs=tol)

    def test_sloped_ground_plane(self):
        footprints, ncols, nrows = layout_block_grid(1, 1, block_cells=20)
        spec = SceneSpec(
            ncols=ncols,
            nrows=nrows,
            blocks=(BlockSpec("B0", footprints[0], 2.0, 0.0, 0.0),),
            ground_slope=(0.5, 0.0),
            seed=3,
        )
        grid, _, _ = generate_scene(spec)
        # elevation increases left to right at 0.5 per meter of x; row 0 is
        # gutter, entirely outside the block, so it shows the bare plane
        dx = np.diff(grid.cells[0])
        assert np.allclose(dx, 0.5 * spec.cellsize, atol=1e-12)

    def test_gaps_spatially_clustered(self):
        # clustered blobs have far fewer gap/canopy adjacencies than iid
        spec = small_scene(seed=11, ground_fraction=0.3)
        grid, polys, _ = generate_scene(spec)
        mask = rasterize_mask(polys[0], grid)
        rows, cols = np.nonzero(mask)
        r0, c0 = rows.min(), cols.min()
        block = grid.cells[r0 : rows.max() + 1, c0 : cols.max() + 1]
        ground_level = 100.0
        is_gap = block < ground_level + 1.0
        horizontal_pairs = is_gap[:, :-1] != is_gap[:, 1:]
        boundary_fraction = horizontal_pairs.mean()
        # iid placement at p=0.3 would give 2*0.3*0.7 = 0.42 of pairs mixed
        assert boundary_fraction < 0.25

    def test_json_roundtrip(self):
        spec = small_scene(seed=9)
        back = SceneSpec.from_json(spec.to_json())
        assert back == spec


class TestZoneFixture:
    def test_structure(self):
        spec, defs, truth = generate_zone_fixture(7.61, 0.56, 0.5, seed=1)
        assert len(defs) == 63
        assert len(spec.blocks) == 63
        assert len({d.block_id for d in defs}) == 63
        assert truth["slope"] == 7.61

    def test_yields_follow_line_when_noiseless(self):
        _, defs, truth = generate_zone_fixture(7.61, 0.56, 0.0, seed=2)
        for d in defs:
            h = truth["blocks"][d.block_id]["true_height"]
            assert d.yield_tons_per_acre == pytest.approx(7.61 * h + 0.56, abs=1e-9)

    def test_flat_slope_flat_yield(self):
        _, defs, _ = generate_zone_fixture(0.0, 20.0, 0.0, seed=3)
        ys = {d.yield_tons_per_acre for d in defs}
        assert ys == {20.0}

    def test_heights_span_requested_range(self):
        _, _, truth = generate_zone_fixture(7.61, 0.56, 0.0, seed=4)
        hs = [b["true_height"] for b in truth["blocks"].values()]
        assert min(hs) == pytest.approx(1.5, abs=0.15)
        assert max(hs) == pytest.approx(4.0, abs=0.15)

    def test_metadata_csv_roundtrip(self):
        _, defs, _ = generate_zone_fixture(7.61, 0.56, 0.2, seed=5)
        text = metadata_csv(defs)
        back = read_block_metadata(io.StringIO(text))
        assert [d.block_id for d in back] == [d.block_id for d in defs]
        assert all(
            a.yield_tons_per_acre == b.yield_tons_per_acre
            for a, b in zip(back, defs)
        )

    def test_deterministic(self):
        a = generate_zone_fixture(7.61, 0.56, 0.3, seed=6)
        b = generate_zone_fixture(7.61, 0.56, 0.3, seed=6)
        assert a[0] == b[0]
        assert [d.yield_tons_per_acre for d in a[1]] == [
            d.yield_tons_per_acre for d in b[1]
        ]
