"""File outputs: particle and cloud tables, energy history, legacy VTK.

All text is written with repr-exact float formatting, so rerunning an
identical configuration reproduces identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .metrics import QualityReport
from .packing import ConvergenceReport
from .sampling import ROLE_NAMES, ParticleSet
from .sdf import SignedDistanceCloud

Array = np.ndarray

_AXES = "xyz"
_ROLE_IDS = {name: role for role, name in ROLE_NAMES.items()}


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_particles_csv(path, positions: Array, masses: Array, role: Array) -> None:
    d = positions.shape[1]
    lines = [",".join(_AXES[:d]) + ",mass,role"]
    for p, m, r in zip(positions, masses, role):
        coords = ",".join(_fmt(c) for c in p)
        lines.append(f"{coords},{_fmt(m)},{ROLE_NAMES[int(r)]}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_particles_csv(path) -> ParticleSet:
    """Read a particle table written by write_particles_csv."""
    text = Path(path).read_text().strip().splitlines()
    if not text:
        raise ValueError(f"{path}: empty particle file")
    header = text[0].split(",")
    if header[-2:] != ["mass", "role"] or header[0] != "x":
        raise ValueError(f"{path}: expected columns x[,y[,z]],mass,role")
    d = len(header) - 2
    positions, masses, roles = [], [], []
    for number, line in enumerate(text[1:], start=2):
        parts = line.split(",")
        if len(parts) != d + 2:
            raise ValueError(f"{path}:{number}: expected {d + 2} columns")
        try:
            positions.append([float(v) for v in parts[:d]])
            masses.append(float(parts[d]))
        except ValueError as exc:
            raise ValueError(f"{path}:{number}: {exc}") from None
        role_name = parts[d + 1].strip()
        if role_name not in _ROLE_IDS:
            raise ValueError(f"{path}:{number}: unknown role {role_name!r}")
        roles.append(_ROLE_IDS[role_name])
    spacing = float(np.abs(masses[0]) ** (1.0 / d)) if masses else 0.0
    return ParticleSet(
        positions=np.array(positions),
        masses=np.array(masses),
        spacing=spacing,
        role=np.array(roles, dtype=np.int8),
    )


def write_cloud_csv(path, cloud: SignedDistanceCloud) -> None:
    d = cloud.dim
    header = ",".join(_AXES[:d]) + ",phi," + ",".join("n" + a for a in _AXES[:d])
    lines = [header]
    for p, phi, n in zip(cloud.positions, cloud.phi, cloud.normals):
        row = [_fmt(c) for c in p] + [_fmt(phi)] + [_fmt(c) for c in n]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_energy_csv(path, report: ConvergenceReport) -> None:
    normalized = report.normalized_energy
    lines = ["iteration,E_kin,E_kin_n,dt,projected_interior,projected_boundary"]
    for i in range(report.iterations):
        lines.append(
            f"{i + 1},{_fmt(report.energy[i])},{_fmt(normalized[i])},"
            f"{_fmt(report.step_sizes[i])},"
            f"{report.projected_interior[i]},{report.projected_boundary[i]}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_quality_json(path, quality: QualityReport, extra: dict | None = None) -> None:
    payload = quality.as_dict()
    if extra:
        payload.update(extra)
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_legacy_vtk(
    path,
    positions: Array,
    point_data: dict[str, Array],
    title: str = "particle data",
) -> None:
    """Legacy ASCII VTK with one vertex cell per point.

    point_data maps field names to per-point arrays; integer arrays are
    written as int scalars, everything else as double.
    """
    n, d = positions.shape
    coords = np.zeros((n, 3))
    coords[:, :d] = positions
    out = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {n} double",
    ]
    out += [" ".join(_fmt(c) for c in row) for row in coords]
    out.append(f"CELLS {n} {2 * n}")
    out += [f"1 {i}" for i in range(n)]
    out.append(f"CELL_TYPES {n}")
    out += ["1"] * n
    out.append(f"POINT_DATA {n}")
    for name, values in point_data.items():
        values = np.asarray(values)
        if np.issubdtype(values.dtype, np.integer):
            out.append(f"SCALARS {name} int 1")
            out.append("LOOKUP_TABLE default")
            out += [str(int(v)) for v in values]
        else:
            out.append(f"SCALARS {name} double 1")
            out.append("LOOKUP_TABLE default")
            out += [_fmt(v) for v in values]
    Path(path).write_text("\n".join(out) + "\n")
