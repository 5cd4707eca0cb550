"""On-disk formats: particle and cloud tables, energy history, VTK."""

from __future__ import annotations

import json

import numpy as np
import pytest

from sphprep.export import (
    read_particles_csv,
    write_cloud_csv,
    write_energy_csv,
    write_legacy_vtk,
    write_particles_csv,
    write_quality_json,
)
from sphprep.metrics import QualityReport
from sphprep.packing import ConvergenceReport
from sphprep.sdf import SignedDistanceCloud


def test_particle_csv_round_trip_bitwise(tmp_path):
    rng = np.random.default_rng(2)
    positions = rng.normal(size=(37, 2)) * np.pi
    masses = rng.uniform(1e-6, 1e3, size=37)
    role = (rng.random(37) < 0.3).astype(np.int8)
    path = tmp_path / "p.csv"
    write_particles_csv(path, positions, masses, role)
    back = read_particles_csv(path)
    assert np.array_equal(back.positions, positions)
    assert np.array_equal(back.masses, masses)
    assert np.array_equal(back.role, role)
    # rewriting what was read reproduces the file byte for byte
    again = tmp_path / "p2.csv"
    write_particles_csv(again, back.positions, back.masses, back.role)
    assert again.read_bytes() == path.read_bytes()


def test_particle_csv_3d_header(tmp_path):
    path = tmp_path / "p3.csv"
    write_particles_csv(path, np.zeros((2, 3)), np.ones(2), np.zeros(2, dtype=np.int8))
    assert path.read_text().splitlines()[0] == "x,y,z,mass,role"
    assert read_particles_csv(path).dim == 3


def test_particle_csv_rejects_malformed(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("")
    with pytest.raises(ValueError, match="empty"):
        read_particles_csv(path)
    path.write_text("a,b,mass\n")
    with pytest.raises(ValueError, match="expected columns"):
        read_particles_csv(path)
    path.write_text("x,y,mass,role\n1,2,3\n")
    with pytest.raises(ValueError, match="expected 4 columns"):
        read_particles_csv(path)
    path.write_text("x,y,mass,role\n1,2,3,ghost\n")
    with pytest.raises(ValueError, match="unknown role"):
        read_particles_csv(path)
    path.write_text("x,y,mass,role\noops,2,3,interior\n")
    with pytest.raises(ValueError, match=":2:"):
        read_particles_csv(path)


def test_cloud_csv_layout(tmp_path):
    positions = np.array([[0.0, 1.0], [2.0, 3.0]])
    cloud = SignedDistanceCloud(
        positions,
        np.array([0.5, -0.25]),
        np.array([[1.0, 0.0], [0.0, -1.0]]),
        band_radius=1.0,
        spacing=0.5,
    )
    path = tmp_path / "cloud.csv"
    write_cloud_csv(path, cloud)
    lines = path.read_text().splitlines()
    assert lines[0] == "x,y,phi,nx,ny"
    assert len(lines) == 3
    row = np.array(lines[1].split(","), dtype=np.float64)
    np.testing.assert_array_equal(row, [0.0, 1.0, 0.5, 1.0, 0.0])


def _report():
    return ConvergenceReport(
        iterations=3,
        termination="max_iterations",
        energy=np.array([2.0, 1.0, 4.0]),
        step_sizes=np.array([0.1, 0.2, 0.1]),
        projected_interior=np.array([5, 0, 1]),
        projected_boundary=np.array([0, 2, 0]),
        rejected_steps=1,
        zero_normal_events=0,
    )


def test_energy_csv_columns(tmp_path):
    path = tmp_path / "energy.csv"
    write_energy_csv(path, _report())
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration,E_kin,E_kin_n,dt,projected_interior,projected_boundary"
    assert len(lines) == 4
    table = np.array([ln.split(",") for ln in lines[1:]], dtype=np.float64)
    np.testing.assert_array_equal(table[:, 0], [1, 2, 3])
    np.testing.assert_array_equal(table[:, 1], [2.0, 1.0, 4.0])
    np.testing.assert_array_equal(table[:, 2], [1.0, 0.5, 1.0])  # running-peak scaled
    np.testing.assert_array_equal(table[:, 4], [5, 0, 1])


def test_quality_json_payload(tmp_path):
    quality = QualityReport(
        interior_count=10,
        boundary_count=4,
        rest_density=1.0,
        density_max_abs=0.05,
        density_rms=0.01,
        deviation_fraction=0.2,
        final_energy=1e-3,
        final_normalized_energy=1e-2,
        iterations=7,
        termination="energy_plateau",
    )
    path = tmp_path / "quality.json"
    write_quality_json(path, quality, extra={"wall_seconds": 1.5})
    payload = json.loads(path.read_text())
    assert payload["interior_count"] == 10
    assert payload["termination"] == "energy_plateau"
    assert payload["wall_seconds"] == 1.5


def test_legacy_vtk_structure(tmp_path):
    positions = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    path = tmp_path / "points.vtk"
    write_legacy_vtk(
        path,
        positions,
        {"phi": np.array([0.1, 0.2, 0.3]), "role": np.array([0, 1, 0])},
    )
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# vtk DataFile")
    assert "POINTS 3 double" in lines
    # 2D input is padded with a zero third component
    first_point = lines[lines.index("POINTS 3 double") + 1]
    assert first_point.split() == ["1", "2", "0"]
    assert "SCALARS phi double 1" in lines
    assert "SCALARS role int 1" in lines
    assert lines.count("LOOKUP_TABLE default") == 2
    assert "CELLS 3 6" in lines
