"""Body-fitted particle generation for smoothed-particle methods.

Workflow: load a surface geometry, build a narrow-band signed-distance
cloud around it, seed boundary and interior particles, then relax the
union under a constant background pressure until the configuration is
isotropic. Segmentation relies on generalized winding numbers, so
non-watertight and self-intersecting inputs degrade gracefully.
"""

from .facegrid import FaceGrid, build_face_grid, faces_near
from .geometry import Aabb, Geometry, geometry_aabb, load_geometry
from .kernels import (
    QuinticKernel,
    kernel_gradient,
    kernel_value,
    shepard_interpolate,
)
from .metrics import (
    DensityErrors,
    QualityReport,
    convergence_order,
    density_errors,
    kinetic_energy,
    quality_report,
)
from .packing import (
    ConvergenceReport,
    PackingConfig,
    PackingState,
    apply_bounding_boundary,
    apply_bounding_interior,
    density_summation,
    make_packing_state,
    pack,
    packing_acceleration,
)
from .pipeline import (
    PipelineConfig,
    PipelineResult,
    StageError,
    run_pack,
    run_pipeline,
    run_sample,
    run_sdf,
)
from .sampling import ParticleSet, merge, sample_boundary, sample_interior
from .shapes import (
    box_mesh,
    circle_polygon,
    icosphere,
    naca_airfoil,
    square_polygon,
    tetrahedron,
)
from .sdf import (
    SignedDistanceCloud,
    boundary_positions,
    brute_force_sdf,
    build_sdf,
    signed_distance_to_face,
)
from .winding import (
    WindingHierarchy,
    build_hierarchy,
    is_inside,
    winding_direct,
    winding_hierarchical,
)

__all__ = [
    "Aabb",
    "ConvergenceReport",
    "DensityErrors",
    "FaceGrid",
    "Geometry",
    "PackingConfig",
    "PackingState",
    "ParticleSet",
    "PipelineConfig",
    "PipelineResult",
    "QualityReport",
    "QuinticKernel",
    "SignedDistanceCloud",
    "StageError",
    "WindingHierarchy",
    "apply_bounding_boundary",
    "apply_bounding_interior",
    "boundary_positions",
    "box_mesh",
    "brute_force_sdf",
    "build_face_grid",
    "build_hierarchy",
    "build_sdf",
    "circle_polygon",
    "convergence_order",
    "density_errors",
    "density_summation",
    "faces_near",
    "geometry_aabb",
    "icosphere",
    "is_inside",
    "kernel_gradient",
    "kernel_value",
    "kinetic_energy",
    "load_geometry",
    "make_packing_state",
    "merge",
    "naca_airfoil",
    "pack",
    "packing_acceleration",
    "quality_report",
    "run_pack",
    "run_pipeline",
    "run_sample",
    "run_sdf",
    "sample_boundary",
    "sample_interior",
    "shepard_interpolate",
    "signed_distance_to_face",
    "square_polygon",
    "tetrahedron",
    "winding_direct",
    "winding_hierarchical",
]

__version__ = "0.1.0"
