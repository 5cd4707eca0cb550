"""Particle relaxation under a constant background pressure.

Each iteration restarts the transport velocity from zero, advances
positions and transport velocities together by one accepted step of an
embedded Runge-Kutta pair, and then clamps stragglers back into their
admissible region using Shepard-interpolated distances to the surface.

Step control watches the embedded error of the positions alone: the
transport velocity is zeroed again at the next iteration, so its
accuracy has no bearing on anything the iteration keeps. Because the
velocity restarts at zero, the first two stage positions of either
tableau coincide with the start positions, and the final stage enters
the error estimate only through its velocity part; both tableaus
therefore need at most one fresh force evaluation beyond the shared
start-of-iteration one.

The per-iteration kinetic energy is recorded before the clamp so the
convergence history measures the dynamics, not the correction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._accel import (
    CellTable,
    build_cell_table,
    density_field,
    pressure_acceleration,
    shepard_field,
)
from .kernels import QuinticKernel
from .sampling import ROLE_INTERIOR, ParticleSet
from .sdf import SignedDistanceCloud

Array = np.ndarray

SCHEMES = ("bs32", "heun_euler")
PLACEMENTS = ("midpoint", "on_surface")

# step controller constants
_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_MAX_REJECTS = 60
_ERR_FLOOR = 1e-300


@dataclass
class PackingConfig:
    """Knobs of the relaxation; defaults work for unit-sized geometries."""

    background_pressure: float = 1.0
    smoothing_ratio: float = 0.8        # kernel length over particle spacing
    boundary_thickness: float = 0.0     # band depth the boundary layer must fill
    rest_density: float = 1.0
    max_iterations: int = 1000
    scheme: str = "bs32"
    placement: str = "midpoint"         # surface sits between the particle rows
    absolute_tolerance: float = 1e-6
    relative_tolerance: float = 1e-3
    initial_step: float | None = None
    max_step: float | None = None       # default: the initial step
    terminate_on_plateau: bool = False
    plateau_window: int = 50
    plateau_tolerance: float = 1e-3

    def validate(self) -> None:
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.placement not in PLACEMENTS:
            raise ValueError(
                f"unknown placement {self.placement!r}; expected one of {PLACEMENTS}"
            )
        if self.background_pressure <= 0.0:
            raise ValueError("background pressure must be positive")
        if self.smoothing_ratio <= 0.0:
            raise ValueError("smoothing ratio must be positive")
        if self.rest_density <= 0.0:
            raise ValueError("rest density must be positive")
        if self.max_iterations < 1:
            raise ValueError("need at least one iteration")
        if self.absolute_tolerance <= 0.0 or self.relative_tolerance < 0.0:
            raise ValueError("tolerances must be positive")
        if self.max_step is not None and self.max_step <= 0.0:
            raise ValueError("maximum step must be positive")
        if self.boundary_thickness < 0.0:
            raise ValueError("boundary thickness must be nonnegative")
        if self.plateau_window < 2:
            raise ValueError("plateau window must span at least 2 iterations")


@dataclass
class PackingState:
    """Union of interior and boundary particles plus static surface data."""

    positions: Array
    masses: Array
    role: Array
    transport_velocities: Array
    spacing: float              # interior lattice spacing
    boundary_spacing: float
    kernel: QuinticKernel
    cloud: SignedDistanceCloud
    cloud_table: CellTable

    @property
    def interior(self) -> Array:
        return self.role == ROLE_INTERIOR

    @property
    def count(self) -> int:
        return len(self.positions)


@dataclass
class ConvergenceReport:
    """Per-iteration history of one relaxation run."""

    iterations: int
    termination: str
    energy: Array
    step_sizes: Array
    projected_interior: Array
    projected_boundary: Array
    rejected_steps: int
    zero_normal_events: int

    @property
    def normalized_energy(self) -> Array:
        """Energy over its running maximum; stays in (0, 1] once motion starts."""
        peak = np.maximum.accumulate(self.energy)
        return self.energy / np.where(peak > 0.0, peak, 1.0)


def make_packing_state(
    interior: ParticleSet,
    boundary: ParticleSet | None,
    cloud: SignedDistanceCloud,
    config: PackingConfig,
) -> PackingState:
    config.validate()
    sets = [interior] if boundary is None or boundary.count == 0 else [interior, boundary]
    positions = np.concatenate([s.positions for s in sets])
    masses = np.concatenate([s.masses for s in sets])
    role = np.concatenate([s.role for s in sets])
    kernel = QuinticKernel(h=config.smoothing_ratio * interior.spacing, dim=interior.dim)
    boundary_spacing = boundary.spacing if boundary is not None and boundary.count else cloud.spacing
    return PackingState(
        positions=positions,
        masses=masses,
        role=role,
        transport_velocities=np.zeros_like(positions),
        spacing=interior.spacing,
        boundary_spacing=boundary_spacing,
        kernel=kernel,
        cloud=cloud,
        cloud_table=build_cell_table(cloud.positions, kernel.compact_support),
    )


def density_summation(
    positions: Array, masses: Array, kernel: QuinticKernel, table: CellTable | None = None
) -> Array:
    """Mass-weighted kernel sum at each particle, self included."""
    if table is None:
        table = build_cell_table(positions, kernel.compact_support)
    return density_field(positions, positions, masses, table, kernel.h, kernel.sigma)


def packing_acceleration(
    positions: Array,
    masses: Array,
    kernel: QuinticKernel,
    background_pressure: float = 1.0,
    rho: Array | None = None,
    table: CellTable | None = None,
) -> Array:
    """Acceleration of the constant-pressure transport force.

    Vanishes identically on a full-support uniform lattice; scales
    linearly with the background pressure.
    """
    if table is None:
        table = build_cell_table(positions, kernel.compact_support)
    if rho is None:
        rho = density_field(positions, positions, masses, table, kernel.h, kernel.sigma)
    return pressure_acceleration(
        positions, positions, masses, rho, table, kernel.h, kernel.sigma, background_pressure
    )


def _surface_frame(
    positions: Array, cloud: SignedDistanceCloud, kernel: QuinticKernel, table: CellTable
) -> tuple[Array, Array, Array, Array]:
    """Shepard distance and unit normal per particle, with skip masks.

    Particles whose kernel support contains no cloud point are far from
    the band and never need clamping; particles whose averaged normal
    cancels exactly have no usable direction and are left alone too.
    """
    phi, raw_normal, wsum = shepard_field(
        positions, cloud.positions, cloud.phi, cloud.normals, table, kernel.h
    )
    supported = wsum > 0.0
    norm = np.linalg.norm(raw_normal, axis=1)
    usable = supported & (norm > 0.0)
    unit = np.zeros_like(raw_normal)
    unit[usable] = raw_normal[usable] / norm[usable, None]
    degenerate = supported & (norm == 0.0)
    return phi, unit, usable, degenerate


def apply_bounding_interior(
    positions: Array,
    cloud: SignedDistanceCloud,
    kernel: QuinticKernel,
    spacing: float,
    placement: str = "midpoint",
    table: CellTable | None = None,
) -> tuple[Array, int, int]:
    """Clamp interior particles that drifted into the surface zone.

    midpoint: particles must stay half a spacing beneath the surface,
    so the outermost interior row and innermost boundary row straddle
    it. on_surface: particles may touch the surface exactly and are
    projected onto it when outside.

    Returns (new positions, clamped count, skipped-degenerate count).
    """
    if table is None:
        table = build_cell_table(cloud.positions, kernel.compact_support)
    phi, normal, usable, degenerate = _surface_frame(positions, cloud, kernel, table)
    offset = 0.0 if placement == "on_surface" else 0.5 * spacing
    with np.errstate(invalid="ignore"):
        move = usable & (phi >= -offset)
    out = positions.copy()
    out[move] -= (phi[move] + offset)[:, None] * normal[move]
    return out, int(move.sum()), int(degenerate.sum())


def apply_bounding_boundary(
    positions: Array,
    cloud: SignedDistanceCloud,
    kernel: QuinticKernel,
    thickness: float,
    boundary_spacing: float,
    placement: str = "midpoint",
    table: CellTable | None = None,
) -> tuple[Array, int, int]:
    """Keep boundary-layer particles inside their band.

    Past the outer band surface pulls straight back onto it; too close
    to the geometry surface pushes out to half a boundary spacing.  In
    on_surface placement the near trigger widens to a full spacing since
    the interior occupies the surface itself.
    """
    if table is None:
        table = build_cell_table(cloud.positions, kernel.compact_support)
    phi, normal, usable, degenerate = _surface_frame(positions, cloud, kernel, table)
    # the outer rail doubles as the trigger: the band edge always pushes
    # outward (one-sided support), so any slack here becomes a ratchet
    # that walks the outermost ring past the band
    deep_at = thickness
    near_at = boundary_spacing if placement == "on_surface" else 0.5 * boundary_spacing
    with np.errstate(invalid="ignore"):
        deep = usable & (phi >= deep_at)
        near = usable & ~deep & (phi < near_at)
    out = positions.copy()
    out[deep] -= (phi[deep] - thickness)[:, None] * normal[deep]
    out[near] -= (phi[near] - 0.5 * boundary_spacing)[:, None] * normal[near]
    return out, int(deep.sum() + near.sum()), int(degenerate.sum())


def _wrms(err: Array, reference: Array, candidate: Array, atol: float, rtol: float) -> float:
    scale = atol + rtol * np.maximum(np.abs(reference), np.abs(candidate))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def pack(state: PackingState, config: PackingConfig) -> ConvergenceReport:
    """Relax the particle configuration; mutates state in place.

    One iteration is one accepted adaptive step. The step size carries
    over between iterations under a PI controller on the embedded error
    estimate of the positions, capped so a quiescent configuration stays
    put instead of letting the step grow without bound.
    """
    config.validate()
    kernel = state.kernel
    h = kernel.h
    masses = state.masses
    interior_mask = state.interior
    interior_masses = masses[interior_mask]
    has_boundary = bool((~interior_mask).any())

    dt = config.initial_step if config.initial_step is not None else 0.25 * h * np.sqrt(
        config.rest_density / config.background_pressure
    )
    if dt <= 0.0:
        raise ValueError("initial step must be positive")
    dt_floor = 1e-14 * dt
    # the default step is the stability limit of the projected relaxation
    # map, so growing past it only churns the configuration
    dt_cap = config.max_step if config.max_step is not None else dt
    dt = min(dt, dt_cap)

    # exponents of the PI controller: k = order of the accepted result + 1
    k = 3 if config.scheme == "bs32" else 2
    beta1 = 0.7 / k
    beta2 = 0.4 / k
    err_prev = 1.0

    energies: list[float] = []
    steps: list[float] = []
    moved_interior: list[int] = []
    moved_boundary: list[int] = []
    rejected = 0
    zero_normal = 0
    termination = "max_iterations"
    window = config.plateau_window
    previous_average: float | None = None

    def force(r: Array, table: CellTable) -> Array:
        rho = density_field(r, r, masses, table, h, kernel.sigma)
        return pressure_acceleration(
            r, r, masses, rho, table, h, kernel.sigma, config.background_pressure
        )

    for iteration in range(1, config.max_iterations + 1):
        r0 = state.positions
        table = build_cell_table(r0, kernel.compact_support)
        a1 = force(r0, table)

        accepted = False
        for _ in range(_MAX_REJECTS):
            if config.scheme == "bs32":
                # transport velocity restarts at zero, so stage two sits at r0
                # and its acceleration equals a1 exactly
                w2 = 0.5 * dt * a1
                w3 = 0.75 * dt * a1
                a3 = force(r0 + 0.75 * dt * w2, table)
                r1 = r0 + dt * (w2 / 3.0 + 4.0 * w3 / 9.0)
                w1 = dt * (2.0 * a1 / 9.0 + a1 / 3.0 + 4.0 * a3 / 9.0)
                # the embedded result touches the last stage only through its
                # velocity part, which is w1 itself; no extra force evaluation
                r_low = r0 + dt * (w2 / 4.0 + w3 / 3.0 + w1 / 8.0)
            else:
                # Heun-Euler: the Euler predictor also stays at r0
                r1 = r0 + 0.5 * dt * dt * a1
                w1 = dt * a1
                r_low = r0
            err = max(
                _wrms(
                    r1 - r_low, r0, r1,
                    config.absolute_tolerance, config.relative_tolerance,
                ),
                _ERR_FLOOR,
            )
            if err <= 1.0:
                accepted = True
                break
            rejected += 1
            dt *= max(_MIN_FACTOR, _SAFETY * err ** (-1.0 / k))
            if dt < dt_floor:
                raise RuntimeError(
                    f"step size collapsed to {dt:.3e} at iteration {iteration}; "
                    "the configuration is not integrable with these tolerances"
                )
        if not accepted:
            raise RuntimeError(
                f"no acceptable step within {_MAX_REJECTS} attempts at iteration {iteration}"
            )

        if not np.isfinite(r1).all() or not np.isfinite(w1).all():
            bad = int(np.argwhere(~np.isfinite(r1).all(axis=1) | ~np.isfinite(w1).all(axis=1))[0][0])
            raise RuntimeError(
                f"non-finite state for particle {bad} at iteration {iteration}"
            )

        state.positions = r1
        state.transport_velocities = w1
        energy = 0.5 * float(
            np.sum(interior_masses * np.sum(w1[interior_mask] ** 2, axis=1))
        )
        energies.append(energy)
        steps.append(dt)

        new_pos = state.positions
        inner, n_moved_i, skipped_i = apply_bounding_interior(
            new_pos[interior_mask], state.cloud, kernel, state.spacing,
            config.placement, state.cloud_table,
        )
        result = new_pos.copy()
        result[interior_mask] = inner
        zero_normal += skipped_i
        n_moved_b = 0
        if has_boundary:
            outer, n_moved_b, skipped_b = apply_bounding_boundary(
                new_pos[~interior_mask], state.cloud, kernel,
                config.boundary_thickness, state.boundary_spacing,
                config.placement, state.cloud_table,
            )
            result[~interior_mask] = outer
            zero_normal += skipped_b
        state.positions = result
        moved_interior.append(n_moved_i)
        moved_boundary.append(n_moved_b)

        # controller update for the next iteration
        factor = _SAFETY * err ** (-beta1) * err_prev**beta2
        dt = min(dt * min(_MAX_FACTOR, max(_MIN_FACTOR, factor)), dt_cap)
        err_prev = err

        if config.terminate_on_plateau and len(energies) >= window:
            current_average = float(np.mean(energies[-window:]))
            if previous_average is not None and previous_average > 0.0:
                change = abs(current_average - previous_average) / previous_average
                if change < config.plateau_tolerance:
                    termination = "energy_plateau"
                    break
            previous_average = current_average

    return ConvergenceReport(
        iterations=len(energies),
        termination=termination,
        energy=np.array(energies),
        step_sizes=np.array(steps),
        projected_interior=np.array(moved_interior, dtype=np.int64),
        projected_boundary=np.array(moved_boundary, dtype=np.int64),
        rejected_steps=rejected,
        zero_normal_events=zero_normal,
    )
