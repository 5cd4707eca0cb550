"""Quality measures of a packed particle configuration.

Density norms are taken over interior particles only, with densities
summed over every particle in range, so a well-covered interior row
next to the boundary layer is judged against the full rest density.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .kernels import QuinticKernel
from .packing import ConvergenceReport, PackingState, density_summation

Array = np.ndarray


@dataclass(frozen=True)
class DensityErrors:
    """Interior density deviation from the rest density."""

    max_abs: float        # worst single particle
    rms: float            # root mean square over interior particles
    deviation_fraction: float  # particles off by more than one percent

    def as_dict(self) -> dict:
        return asdict(self)


def kinetic_energy(masses: Array, velocities: Array) -> float:
    return 0.5 * float(np.sum(masses * np.sum(velocities**2, axis=1)))


def density_errors(
    positions: Array,
    masses: Array,
    interior: Array,
    kernel: QuinticKernel,
    rest_density: float = 1.0,
) -> DensityErrors:
    """Norms of the summed-density error on the interior subset.

    The rms norm can never exceed the max norm; both are reported in
    absolute density units.
    """
    rho = density_summation(positions, masses, kernel)
    err = rho[interior] - rest_density
    if len(err) == 0:
        raise ValueError("no interior particles to evaluate")
    return DensityErrors(
        max_abs=float(np.max(np.abs(err))),
        rms=float(np.sqrt(np.mean(err**2))),
        deviation_fraction=float(np.mean(np.abs(err) / rest_density > 0.01)),
    )


def convergence_order(errors, spacings=None) -> Array:
    """Observed order between consecutive refinements.

    With no spacings given, a fixed refinement ratio of two is assumed.
    """
    e = np.asarray(errors, dtype=np.float64)
    if len(e) < 2:
        raise ValueError("need at least two error levels")
    if np.any(e <= 0.0):
        raise ValueError("errors must be positive")
    if spacings is None:
        ratios = np.full(len(e) - 1, 2.0)
    else:
        s = np.asarray(spacings, dtype=np.float64)
        if len(s) != len(e):
            raise ValueError("one spacing per error level required")
        if np.any(s[:-1] <= s[1:]):
            raise ValueError("spacings must strictly decrease")
        ratios = s[:-1] / s[1:]
    return np.log(e[:-1] / e[1:]) / np.log(ratios)


@dataclass(frozen=True)
class QualityReport:
    """Summary of one relaxation run, ready for serialization."""

    interior_count: int
    boundary_count: int
    rest_density: float
    density_max_abs: float
    density_rms: float
    deviation_fraction: float
    final_energy: float
    final_normalized_energy: float
    iterations: int
    termination: str

    def as_dict(self) -> dict:
        return asdict(self)


def quality_report(
    state: PackingState, report: ConvergenceReport, rest_density: float = 1.0
) -> QualityReport:
    interior = state.interior
    errors = density_errors(
        state.positions, state.masses, interior, state.kernel, rest_density
    )
    normalized = report.normalized_energy
    return QualityReport(
        interior_count=int(interior.sum()),
        boundary_count=int((~interior).sum()),
        rest_density=rest_density,
        density_max_abs=errors.max_abs,
        density_rms=errors.rms,
        deviation_fraction=errors.deviation_fraction,
        final_energy=float(report.energy[-1]) if len(report.energy) else 0.0,
        final_normalized_energy=float(normalized[-1]) if len(normalized) else 0.0,
        iterations=report.iterations,
        termination=report.termination,
    )
