"""Command-line entry points.

``canestat run --config cfg.json`` executes the pipeline; ``canestat synth
scene`` and ``canestat synth fixture`` emit synthetic inputs in the same
formats the pipeline ingests.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from .errors import CanestatError, ConfigError
from .pipeline import PipelineConfig, run_pipeline
from .raster import dump_block_polygons, save_ascii_grid
from .synth import SceneSpec, generate_scene, generate_zone_fixture, metadata_csv
from .zones import fit_regression

log = logging.getLogger("canestat")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="canestat",
        description="Crop height extraction and yield regression from a single DSM",
    )
    parser.add_argument("--verbose", action="store_true", help="chatty logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the full pipeline from a config file")
    run_p.add_argument("--config", required=True, help="path to the JSON config")
    run_p.add_argument(
        "--parallel",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="process blocks with a worker pool (overrides config)",
    )
    run_p.add_argument(
        "--block-regression",
        action="store_true",
        help="extension: also fit a per-block (not per-zone) regression",
    )

    synth_p = sub.add_parser("synth", help="generate synthetic inputs")
    synth_sub = synth_p.add_subparsers(dest="synth_command", required=True)

    scene_p = synth_sub.add_parser("scene", help="build a scene from a spec file")
    scene_p.add_argument("--spec", required=True, help="SceneSpec JSON path")
    scene_p.add_argument("--out", required=True, help="output directory")

    fixture_p = synth_sub.add_parser(
        "fixture", help="build a nine-zone fixture with a known yield law"
    )
    fixture_p.add_argument("--slope", type=float, required=True)
    fixture_p.add_argument("--intercept", type=float, required=True)
    fixture_p.add_argument("--noise", type=float, required=True, help="yield noise sigma")
    fixture_p.add_argument("--seed", type=int, required=True)
    fixture_p.add_argument("--out", required=True, help="output directory")
    fixture_p.add_argument("--blocks-per-zone", type=int, default=7)

    return parser


def _cmd_run(args) -> int:
    config = PipelineConfig.from_json(args.config)
    if args.parallel is not None:
        config = dataclasses.replace(config, parallel=bool(args.parallel))
    report = run_pipeline(config)

    for block_id, error in report.rejected:
        log.warning("rejected %s: %s", block_id, error)
    for message in report.warnings:
        log.warning("%s", message)

    if args.block_regression and report.accepted:
        _write_block_regression(report, config)

    if not report.succeeded:
        errors = [
            {"block_id": block_id, "error": error}
            for block_id, error in report.rejected
        ]
        print(
            json.dumps({"status": "failed", "errors": errors}, indent=2),
            file=sys.stderr,
        )
        return 1
    reg = report.regression
    print(
        f"{len(report.accepted)} blocks accepted, {len(report.rejected)} rejected; "
        f"{len(report.summaries)} zones; "
        f"y = {reg.slope:.3f}x + {reg.intercept:.3f}, R^2 = {reg.r_squared:.3f}"
    )
    print(f"outputs in {report.output_dir}")
    return 0


def _write_block_regression(report, config) -> None:
    """Optional per-block regression, clearly labeled as an extension."""
    from .zones import read_block_metadata

    with open(config.metadata_path, "r", encoding="utf-8", newline="") as fh:
        definitions = {d.block_id: d for d in read_block_metadata(fh)}
    points = [
        (est.dchm, definitions[est.block_id].yield_tons_per_acre)
        for est in report.accepted
        if est.block_id in definitions
    ]
    if len(points) < 2:
        log.warning("not enough blocks for the block-level regression")
        return
    result = fit_regression(points)
    payload = {
        "note": "extension: regression over individual blocks, not treatment zones",
        "slope": result.slope,
        "intercept": result.intercept,
        "r_squared": result.r_squared,
        "n_points": result.n_points,
        "residuals": result.residuals.tolist(),
    }
    out = Path(report.output_dir) / "regression_blocks.json"
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(payload, indent=2) + "\n")


def _write_scene_outputs(out_dir: Path, grid, polygons, truth) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    save_ascii_grid(grid, out_dir / "dsm.asc")
    with open(out_dir / "masks.json", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_block_polygons(polygons) + "\n")
    with open(out_dir / "truth.json", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(truth, indent=2) + "\n")


def _cmd_synth_scene(args) -> int:
    spec = SceneSpec.from_json(Path(args.spec).read_text(encoding="utf-8"))
    grid, polygons, truth = generate_scene(spec)
    _write_scene_outputs(Path(args.out), grid, polygons, truth)
    print(f"scene with {len(polygons)} blocks written to {args.out}")
    return 0


def _cmd_synth_fixture(args) -> int:
    spec, definitions, truth = generate_zone_fixture(
        slope=args.slope,
        intercept=args.intercept,
        noise_sigma_yield=args.noise,
        seed=args.seed,
        blocks_per_zone=args.blocks_per_zone,
    )
    grid, polygons, scene_truth = generate_scene(spec)
    out_dir = Path(args.out)
    truth = {**truth, "scene": scene_truth}
    _write_scene_outputs(out_dir, grid, polygons, truth)
    with open(out_dir / "metadata.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(metadata_csv(definitions))
    config = {
        "dsm_path": "dsm.asc",
        "masks_path": "masks.json",
        "metadata_path": "metadata.csv",
        "output_dir": "out",
    }
    with open(out_dir / "config.json", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(config, indent=2) + "\n")
    print(
        f"fixture with {len(definitions)} blocks written to {args.out} "
        f"(pipeline-ready config.json included)"
    )
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "synth" and args.synth_command == "scene":
            return _cmd_synth_scene(args)
        if args.command == "synth" and args.synth_command == "fixture":
            return _cmd_synth_fixture(args)
        raise AssertionError("unreachable")
    except ConfigError as exc:
        print(
            json.dumps({"status": "config_error", "errors": [str(exc)]}, indent=2),
            file=sys.stderr,
        )
        return 2
    except CanestatError as exc:
        print(
            json.dumps({"status": "error", "errors": [str(exc)]}, indent=2),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
