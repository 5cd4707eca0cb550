"""Command line front end.

Every flag mirrors a PipelineConfig field; a JSON config file can set
any of them, with explicit flags taking precedence. The worker thread
count comes from --threads or the SPHPREP_NUM_THREADS variable.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .export import read_particles_csv, write_particles_csv
from .facegrid import build_face_grid
from .geometry import FORMATS, load_geometry
from .pipeline import (
    PipelineConfig,
    StageError,
    _merge_geometries,
    _stage,
    run_pack,
    run_pipeline,
    run_sample,
    run_sdf,
)
from .sdf import brute_force_sdf, build_sdf
from .winding import build_hierarchy, is_inside

_CONFIG_FIELDS = {f.name for f in dataclasses.fields(PipelineConfig)}


def _add_common(parser: argparse.ArgumentParser, with_geometry: bool = True) -> None:
    if with_geometry:
        parser.add_argument("geometry", nargs="+", help="geometry files (mesh or polygon)")
    parser.add_argument("--config", help="JSON file presetting any flag below")
    parser.add_argument("--threads", type=int, help="worker thread count")
    parser.add_argument("-v", "--verbose", action="store_true", help="log stage progress")
    parser.add_argument("--fmt", choices=FORMATS, help="input format (default: sniff)")
    parser.add_argument("--output", help="output directory")
    parser.add_argument("--spacing", type=float, help="interior lattice spacing")
    parser.add_argument("--boundary-thickness", type=float, dest="boundary_thickness")
    parser.add_argument("--band-radius", type=float, dest="band_radius")
    parser.add_argument("--epsilon-w", type=float, dest="epsilon_w",
                        help="winding threshold for inside")
    parser.add_argument("--leaf-capacity", type=int, dest="leaf_capacity")
    parser.add_argument("--smoothing-ratio", type=float, dest="smoothing_ratio")
    parser.add_argument("--background-pressure", type=float, dest="background_pressure")
    parser.add_argument("--rest-density", type=float, dest="rest_density")
    parser.add_argument("--max-iterations", type=int, dest="max_iterations")
    parser.add_argument("--scheme", choices=("bs32", "heun_euler"))
    parser.add_argument("--placement", choices=("midpoint", "on_surface"))
    parser.add_argument("--atol", type=float, dest="absolute_tolerance")
    parser.add_argument("--rtol", type=float, dest="relative_tolerance")
    parser.add_argument("--initial-step", type=float, dest="initial_step")
    parser.add_argument("--plateau", action=argparse.BooleanOptionalAction,
                        dest="terminate_on_plateau", default=None,
                        help="stop when the energy average levels off")
    parser.add_argument("--plateau-window", type=int, dest="plateau_window")
    parser.add_argument("--plateau-tolerance", type=float, dest="plateau_tolerance")
    parser.add_argument("--vtk", action=argparse.BooleanOptionalAction,
                        dest="write_vtk", default=None)


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    config = PipelineConfig()
    if args.config:
        try:
            values = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise StageError("load", exc) from exc
        unknown = set(values) - _CONFIG_FIELDS
        if unknown:
            raise StageError(
                "load", ValueError(f"unknown config keys: {sorted(unknown)}")
            )
        for key, value in values.items():
            setattr(config, key, value)
    for name in _CONFIG_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            setattr(config, name, value)
    geometry = getattr(args, "geometry", None)
    if geometry:
        config.geometry = list(geometry)
    return config


def _print_summary(res) -> None:
    if res.report is not None:
        print(
            f"packed in {res.report.iterations} iterations "
            f"({res.report.termination}), final energy {res.report.energy[-1]:.6e}"
        )
    if res.quality is not None:
        q = res.quality
        print(
            f"density error: max {q.density_max_abs:.4e}, rms {q.density_rms:.4e}, "
            f"{100.0 * q.deviation_fraction:.2f}% beyond 1%"
        )
    for name, path in sorted(res.artifacts.items()):
        print(f"wrote {name}: {path}")


def _cmd_sample(args) -> int:
    res = run_sample(_build_config(args))
    n_b = res.boundary.count if res.boundary is not None else 0
    print(f"sampled {res.interior.count} interior and {n_b} boundary particles")
    _print_summary(res)
    return 0


def _cmd_sdf(args) -> int:
    res = run_sdf(_build_config(args))
    print(f"distance cloud holds {res.cloud.count} points")
    _print_summary(res)
    return 0


def _cmd_pack(args) -> int:
    res = run_pack(_build_config(args))
    _print_summary(res)
    return 0


def _cmd_pipeline(args) -> int:
    res = run_pipeline(_build_config(args))
    _print_summary(res)
    return 0


def _cmd_segment(args) -> int:
    config = _build_config(args)
    with _stage("load"):
        particles = read_particles_csv(args.particles)
        geometry = _merge_geometries(
            [load_geometry(p, config.fmt) for p in config.geometry]
        )
    with _stage("build_hierarchy"):
        hierarchy = build_hierarchy(geometry, config.leaf_capacity)
    with _stage("segment"):
        keep = is_inside(particles.positions, hierarchy, config.epsilon_w)
    with _stage("export"):
        out = Path(args.segment_output)
        out.parent.mkdir(parents=True, exist_ok=True)
        write_particles_csv(
            out, particles.positions[keep], particles.masses[keep], particles.role[keep]
        )
    print(f"kept {int(keep.sum())} of {particles.count} particles")
    print(f"wrote particles: {out}")
    return 0


def _cmd_bench(args) -> int:
    if args.repeat < 3:
        raise StageError("load", ValueError("need at least 3 repetitions"))
    config = _build_config(args)
    with _stage("load"):
        geometry = _merge_geometries(
            [load_geometry(p, config.fmt) for p in config.geometry]
        )
    with _stage("build_face_grid"):
        grid = build_face_grid(geometry, config.search_radius)

    def clock(fn):
        times = []
        result = None
        for _ in range(args.repeat):
            start = time.perf_counter()
            result = fn()
            times.append(time.perf_counter() - start)
        return result, min(times), float(np.median(times))

    with _stage("build_sdf"):
        gridded, grid_best, grid_median = clock(
            lambda: build_sdf(geometry, grid, config.spacing, config.search_radius)
        )
        brute, brute_best, brute_median = clock(
            lambda: brute_force_sdf(geometry, config.spacing, config.search_radius)
        )
    same = (
        len(gridded.phi) == len(brute.phi)
        and np.array_equal(gridded.positions, brute.positions)
        and np.array_equal(gridded.phi, brute.phi)
    )
    print(f"faces: {geometry.face_count}, cloud points: {gridded.count}")
    print(f"grid  : best {grid_best:.4f} s, median {grid_median:.4f} s")
    print(f"brute : best {brute_best:.4f} s, median {brute_median:.4f} s")
    print(f"speedup (best): {brute_best / grid_best:.2f}x")
    print(f"identical results: {'yes' if same else 'NO'}")
    return 0 if same else 1


def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sphprep",
        description="Particle generation for smoothed-particle simulations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="initial lattice and band sampling")
    _add_common(p)
    p.set_defaults(handler=_cmd_sample)

    p = sub.add_parser("sdf", help="signed-distance cloud only")
    _add_common(p)
    p.set_defaults(handler=_cmd_sdf)

    p = sub.add_parser("pack", help="sample and relax particles")
    _add_common(p)
    p.set_defaults(handler=_cmd_pack)

    p = sub.add_parser("pipeline", help="full run with quality metrics")
    _add_common(p)
    p.set_defaults(handler=_cmd_pipeline)

    p = sub.add_parser("segment", help="filter a particle table by containment")
    p.add_argument("particles", help="particle CSV to filter")
    _add_common(p)
    p.add_argument("--segment-output", default="segmented.csv",
                   help="path of the filtered CSV")
    p.set_defaults(handler=_cmd_segment)

    p = sub.add_parser("bench", help="time the gridded distance build against brute force")
    _add_common(p)
    p.add_argument("--repeat", type=int, default=3, help="timing repetitions (min 3)")
    p.set_defaults(handler=_cmd_bench)
    return parser


def main(argv=None) -> int:
    args = _make_parser().parse_args(argv)
    if args.verbose:
        import logging

        logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    threads = args.threads if args.threads is not None else os.environ.get(
        "SPHPREP_NUM_THREADS"
    )
    if threads is not None:
        try:
            import numba

            numba.set_num_threads(int(threads))
        except ValueError as exc:
            print(f"error: bad thread count {threads!r}: {exc}", file=sys.stderr)
            return 2
    try:
        return args.handler(args)
    except StageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
