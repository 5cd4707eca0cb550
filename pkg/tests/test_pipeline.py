"""Staged runs from geometry files to packed particle tables."""

from __future__ import annotations

import numpy as np
import pytest

from sphprep import (
    PipelineConfig,
    circle_polygon,
    run_pack,
    run_pipeline,
    run_sample,
    run_sdf,
    square_polygon,
)
from sphprep.export import read_particles_csv
from sphprep.pipeline import StageError

from util import write_polygon_csv


def _circle_file(tmp_path, name="circle.csv", radius=1.0):
    path = tmp_path / name
    write_polygon_csv(path, [circle_polygon(radius=radius, segments=64).vertices])
    return path


def _config(tmp_path, **overrides):
    base = dict(
        geometry=[str(_circle_file(tmp_path))],
        output=str(tmp_path / "out"),
        spacing=0.2,
        boundary_thickness=0.4,
        max_iterations=6,
    )
    base.update(overrides)
    return PipelineConfig(**base)


def test_sample_stage_outputs(tmp_path):
    res = run_sample(_config(tmp_path))
    assert res.interior.count > 0
    assert res.boundary.count > 0
    assert res.report is None and res.quality is None
    assert set(res.artifacts) == {"particles_csv", "particles_vtk"}
    table = read_particles_csv(res.artifacts["particles_csv"])
    assert table.count == res.interior.count + res.boundary.count


def test_sdf_stage_outputs(tmp_path):
    res = run_sdf(_config(tmp_path))
    assert res.cloud.count > 0
    assert res.interior is None
    assert set(res.artifacts) == {"cloud_csv", "cloud_vtk"}


def test_pack_stage_outputs(tmp_path):
    res = run_pack(_config(tmp_path))
    assert res.report.iterations == 6
    assert res.quality is None
    assert set(res.artifacts) == {"particles_csv", "particles_vtk", "energy_csv"}


def test_full_pipeline_outputs(tmp_path):
    res = run_pipeline(_config(tmp_path))
    assert set(res.artifacts) == {
        "particles_csv",
        "particles_vtk",
        "energy_csv",
        "quality_json",
        "cloud_csv",
        "cloud_vtk",
    }
    assert res.quality.termination == res.report.termination
    assert res.quality.interior_count == res.interior.count


def test_vtk_artifacts_optional(tmp_path):
    res = run_pipeline(_config(tmp_path, write_vtk=False))
    assert not any(name.endswith("_vtk") for name in res.artifacts)


def test_missing_geometry_fails_in_load_stage(tmp_path):
    config = _config(tmp_path, geometry=[str(tmp_path / "ghost.stl")])
    with pytest.raises(StageError) as info:
        run_sample(config)
    assert info.value.stage == "load"
    assert "ghost.stl" in str(info.value)


def test_defaulted_band_covers_boundary_layer(tmp_path):
    # boundary_thickness left unset: every sampled boundary particle must
    # still fit between the surface and the derived band ceiling
    config = _config(tmp_path, boundary_thickness=None)
    res = run_sample(config)
    assert res.boundary.count > 0
    radii = np.linalg.norm(res.boundary.positions, axis=1)
    assert radii.max() <= 1.0 + config.thickness + 1e-12
    assert config.thickness == pytest.approx(4 * config.spacing)


def test_two_disjoint_loops_sample_disjointly(tmp_path):
    left = circle_polygon(radius=0.5, segments=48, center=(-1.0, 0.0))
    right = square_polygon(side=0.8, center=(1.2, 0.0))
    pa = tmp_path / "left.csv"
    pb = tmp_path / "right.csv"
    write_polygon_csv(pa, [left.vertices])
    write_polygon_csv(pb, [right.vertices])
    config = PipelineConfig(
        geometry=[str(pa), str(pb)],
        output=str(tmp_path / "out"),
        spacing=0.1,
        boundary_thickness=0.2,
        max_iterations=3,
    )
    res = run_sample(config)
    x = res.interior.positions[:, 0]
    in_left = np.linalg.norm(res.interior.positions - [-1.0, 0.0], axis=1) < 0.5
    in_right = np.all(np.abs(res.interior.positions - [1.2, 0.0]) < 0.4, axis=1)
    assert (in_left | in_right).all()
    assert in_left.any() and in_right.any()
    assert not (in_left & in_right).any()
    assert not ((x > -0.4) & (x < 0.7)).any()  # nothing in the gap


def test_runs_are_reproducible_bytewise(tmp_path):
    geo = _circle_file(tmp_path)
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    for out in (out_a, out_b):
        run_pipeline(
            PipelineConfig(
                geometry=[str(geo)],
                output=str(out),
                spacing=0.2,
                boundary_thickness=0.4,
                max_iterations=6,
            )
        )
    for name in ("particles.csv", "energy.csv", "cloud.csv"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
