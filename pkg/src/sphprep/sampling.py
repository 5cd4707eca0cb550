"""Initial particle placement on the shared lattice.

Interior particles sit at cell centers of the lattice anchored at the
geometry bounding-box minimum; the signed-distance cloud lives on the
same lattice extended outward, so interior particles and cloud points
can never coincide. Boundary particles start from the cloud points
inside the boundary band and later relax toward a body-fitted layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Geometry, geometry_aabb
from .sdf import SignedDistanceCloud, _lattice, boundary_positions
from .winding import WindingHierarchy, is_inside

Array = np.ndarray

ROLE_INTERIOR = 0
ROLE_BOUNDARY = 1
ROLE_NAMES = {ROLE_INTERIOR: "interior", ROLE_BOUNDARY: "boundary"}


@dataclass
class ParticleSet:
    """Particles of one role with their generating spacing."""

    positions: Array
    masses: Array
    spacing: float
    role: Array
    velocities: Array = field(default=None)  # type: ignore[assignment]
    transport_velocities: Array = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        self.positions = np.ascontiguousarray(self.positions, dtype=np.float64)
        self.masses = np.asarray(self.masses, dtype=np.float64)
        self.role = np.asarray(self.role, dtype=np.int8)
        if self.velocities is None:
            self.velocities = np.zeros_like(self.positions)
        if self.transport_velocities is None:
            self.transport_velocities = np.zeros_like(self.positions)

    @property
    def count(self) -> int:
        return len(self.positions)

    @property
    def dim(self) -> int:
        return self.positions.shape[1]


def _uniform_set(positions: Array, spacing: float, role: int, rho0: float) -> ParticleSet:
    n, d = positions.shape
    masses = np.full(n, rho0 * spacing**d)
    return ParticleSet(
        positions=positions, masses=masses, spacing=spacing,
        role=np.full(n, role, dtype=np.int8),
    )


def sample_interior(
    g: Geometry,
    hierarchy: WindingHierarchy,
    spacing: float,
    epsilon_w: float = 0.5,
    rho0: float = 1.0,
) -> ParticleSet:
    """Cell-centered lattice points whose winding number says inside.

    Masses are rho0 * spacing**d, so total mass matches the lattice
    estimate of the enclosed volume.
    """
    if spacing <= 0.0:
        raise ValueError("spacing must be positive")
    box = geometry_aabb(g)
    lattice = _lattice(box.min_corner, box.max_corner, spacing, margin=0)
    keep = is_inside(lattice, hierarchy, epsilon_w)
    positions = lattice[keep]
    if len(positions) == 0:
        raise ValueError(
            "no lattice point falls inside the geometry; spacing too coarse?"
        )
    return _uniform_set(positions, spacing, ROLE_INTERIOR, rho0)


def sample_boundary(
    cloud: SignedDistanceCloud, thickness: float, rho0: float = 1.0
) -> ParticleSet:
    """Cloud points within the boundary band as particles.

    thickness = 0 yields an empty set, which downstream packing treats
    as relaxation without a boundary layer.
    """
    if thickness == 0.0:
        positions = np.empty((0, cloud.dim))
    else:
        positions = boundary_positions(cloud, thickness)
    return _uniform_set(positions, cloud.spacing, ROLE_BOUNDARY, rho0)


def merge(*sets: ParticleSet) -> ParticleSet:
    """Concatenate particle sets; spacing is taken from the first."""
    if not sets:
        raise ValueError("nothing to merge")
    return ParticleSet(
        positions=np.concatenate([s.positions for s in sets]),
        masses=np.concatenate([s.masses for s in sets]),
        spacing=sets[0].spacing,
        role=np.concatenate([s.role for s in sets]),
        velocities=np.concatenate([s.velocities for s in sets]),
        transport_velocities=np.concatenate([s.transport_velocities for s in sets]),
    )
