"""Batch command-line interface.

Subcommands map one-to-one onto the canned studies plus config utilities:

    bipnav sim1-rot   [--seed N] [--trials N] [--out-dir DIR]
    bipnav sim1-trans ...
    bipnav sim2       ...
    bipnav sim3       ...
    bipnav run CONFIG ...
    bipnav defaults
    bipnav verify

Exit codes: 0 success, 2 config error, 3 all trials degenerate, 1 other.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import sys

from .engine import BatchFailure, all_failed, run_batch
from .errors import ConfigInvalid, PipelineError
from .scenario import ScenarioConfig, default_config, dump_config, parse_config
from .studies import (
    SweepResult,
    emit_results,
    sim1_rotation,
    sim1_translation,
    sim2_coupled_grid,
    sim3_analytic_vs_mc,
)

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3

_STUDIES = {
    "sim1-rot": sim1_rotation,
    "sim1-trans": sim1_translation,
    "sim2": sim2_coupled_grid,
    "sim3": sim3_analytic_vs_mc,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bipnav", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    parser.add_argument("--trials", type=int, default=None, help="override the trial count")
    parser.add_argument("--out-dir", default=None, help="directory for CSV/JSON output files")
    parser.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="what to print to stdout")
    parser.add_argument("--workers", type=int, default=1, help="worker pool size for trials")

    sub = parser.add_subparsers(dest="command", required=True)
    for name in _STUDIES:
        sub.add_parser(name, help=f"run the {name} study on the (overridable) default scene")
    run_p = sub.add_parser("run", help="run a single batch from a config file")
    run_p.add_argument("config", help="path to a scenario JSON file")
    sub.add_parser("defaults", help="print the default scenario config")
    sub.add_parser("verify", help="run the built-in invariant checks")
    return parser


def _apply_overrides(config: ScenarioConfig, args) -> ScenarioConfig:
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    if args.trials is not None:
        config = dataclasses.replace(config, trials=args.trials)
    return config


def _print_result(result: SweepResult, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps({
            "study": result.name,
            "seed": result.seed,
            "columns": list(result.columns),
            "rows": [list(r) for r in result.rows],
        }, indent=2))
        return
    buf = io.StringIO()
    buf.write(",".join(result.columns) + "\n")
    for row in result.rows:
        buf.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")
    sys.stdout.write(buf.getvalue())


def _cmd_study(args) -> int:
    config = _apply_overrides(default_config(), args)
    result = _STUDIES[args.command](config, workers=args.workers)
    if args.out_dir:
        emit_results(result, args.out_dir)
    _print_result(result, args.format)
    return EXIT_OK


def _cmd_run(args) -> int:
    config = _apply_overrides(parse_config(args.config), args)
    batch = run_batch(config, workers=args.workers)
    if all_failed(batch):
        raise BatchFailure(f"all {batch.trials} trials failed")
    from .stats import summarize

    rows = []
    for label, samples in (
        ("e_3d_mm", batch.e3d()),
        ("e_tcp_mm", batch.etcp()),
        ("e_reproj_px", batch.ereproj()),
    ):
        s = summarize(samples)
        rows.append((label, s.mean, s.std, s.p95, s.worst, s.count))
    result = SweepResult(
        name="batch_summary",
        columns=("metric", "mean", "std", "p95", "worst", "count"),
        rows=tuple(rows),
        config=config.to_dict(),
        seed=config.seed,
        raw=({"failures": len(batch.failures)},),
    )
    if args.out_dir:
        emit_results(result, args.out_dir)
    _print_result(result, args.format)
    return EXIT_OK


def _cmd_defaults(args) -> int:
    config = _apply_overrides(default_config(), args)
    sys.stdout.write(dump_config(config))
    return EXIT_OK


def _verify_checks():
    """Yield (name, callable) pairs; each callable raises on failure."""
    import numpy as np

    from .dlt import estimate_projection, make_correspondences
    from .geometry import Point3H, SmallAngleSpec, exact_transform, project
    from .stats import summarize
    from .triangulate import BiplanarObservation, triangulate

    def round_trip():
        config = default_config()
        config = dataclasses.replace(
            config, noise=dataclasses.replace(config.noise, sigma_px=0.0), trials=1
        )
        view1, view2 = config.rig.build_views()
        rng = np.random.default_rng(7)
        for _ in range(20):
            target = Point3H(*rng.uniform(-150, 150, size=3))
            obs = BiplanarObservation(
                project(view1, target).normalize(),
                project(view2, target).normalize(),
                view1, view2,
            )
            err = np.linalg.norm(triangulate(obs).point.xyz() - target.xyz())
            if err > 1e-8:
                raise AssertionError(f"round-trip error {err:.2e} mm")

    def bias_identity():
        config = default_config()
        view1, _ = config.rig.build_views()
        points = [p.normalize() for p in config.fiducials.points]
        centroid = config.fiducials.centroid()
        rng = np.random.default_rng(11)
        for _ in range(10):
            angles = rng.uniform(-0.03, 0.03, size=3)
            shifts = rng.uniform(-3, 3, size=3)
            t_err = exact_transform(SmallAngleSpec(*angles, *shifts))
            physical = [t_err.inverse().apply(p) for p in points]
            pixels = [project(view1, p).normalize() for p in physical]
            estimate = estimate_projection(make_correspondences(points, pixels))
            expected = view1.matrix @ t_err.inverse().matrix
            from .geometry import ProjectionMatrix

            expected = ProjectionMatrix(expected).normalized(centroid)
            gap = np.linalg.norm(estimate.matrix - expected.matrix)
            if gap > 1e-8:
                raise AssertionError(f"bias identity residual {gap:.2e}")

    def percentile_convention():
        got = summarize(list(range(1, 101))).p95
        if abs(got - 95.05) > 1e-12:
            raise AssertionError(f"P95 of 1..100 = {got!r}, expected 95.05")

    def determinism():
        config = dataclasses.replace(default_config(), trials=50)
        config = dataclasses.replace(
            config, noise=dataclasses.replace(config.noise, sigma_px=1.0)
        )
        a = run_batch(config)
        b = run_batch(config, workers=3)
        if a != b:
            raise AssertionError("same seed produced different batches")

    yield "round-trip", round_trip
    yield "bias-identity", bias_identity
    yield "percentile-convention", percentile_convention
    yield "determinism", determinism


def _cmd_verify(args) -> int:
    failed = 0
    for name, check in _verify_checks():
        try:
            check()
        except Exception as exc:  # noqa: BLE001 - report, don't crash
            failed += 1
            print(f"FAIL {name}: {exc}")
        else:
            print(f"PASS {name}")
    return EXIT_OK if failed == 0 else EXIT_OTHER


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command in _STUDIES:
            return _cmd_study(args)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "defaults":
            return _cmd_defaults(args)
        if args.command == "verify":
            return _cmd_verify(args)
        return EXIT_OTHER
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BatchFailure as exc:
        print(f"degenerate geometry: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
