"""End-to-end particle generation with named stages.

Stages run in a fixed order; a failure in any stage surfaces as a
StageError naming that stage, which the command line turns into a
nonzero exit. Multiple input geometries are concatenated into one face
set; their winding numbers add, so disjoint closed parts behave as a
union of interiors.
"""

from __future__ import annotations

import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import export
from .facegrid import build_face_grid
from .geometry import Geometry, load_geometry
from .metrics import quality_report
from .packing import PackingConfig, density_summation, make_packing_state, pack
from .sampling import merge, sample_boundary, sample_interior
from .sdf import build_sdf
from .winding import build_hierarchy

logger = logging.getLogger(__name__)

STAGES = (
    "load",
    "build_face_grid",
    "build_sdf",
    "sample_boundary",
    "build_hierarchy",
    "sample_interior",
    "pack",
    "metrics",
    "export",
)


class StageError(RuntimeError):
    """Carries the name of the pipeline stage that failed."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage} failed: {cause}")
        self.stage = stage
        self.cause = cause


@contextmanager
def _stage(name: str):
    logger.info("stage %s", name)
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


@dataclass
class PipelineConfig:
    """Every knob of the pipeline; mirrored one-to-one by the CLI."""

    geometry: list[str] = field(default_factory=list)
    fmt: str = "auto"
    output: str = "out"
    spacing: float = 0.1
    boundary_thickness: float | None = None   # None: four spacings
    band_radius: float | None = None          # None: derived from support and band
    epsilon_w: float = 0.5
    leaf_capacity: int = 100
    smoothing_ratio: float = 0.8
    background_pressure: float = 1.0
    rest_density: float = 1.0
    max_iterations: int = 1000
    scheme: str = "bs32"
    placement: str = "midpoint"
    absolute_tolerance: float = 1e-6
    relative_tolerance: float = 1e-3
    initial_step: float | None = None
    terminate_on_plateau: bool = False
    plateau_window: int = 50
    plateau_tolerance: float = 1e-3
    write_vtk: bool = True

    @property
    def thickness(self) -> float:
        if self.boundary_thickness is None:
            return 4.0 * self.spacing
        return self.boundary_thickness

    @property
    def search_radius(self) -> float:
        """Face search radius; covers kernel support and boundary band."""
        if self.band_radius is not None:
            return self.band_radius
        support = 3.0 * self.smoothing_ratio * self.spacing
        return max(support, self.thickness + self.spacing)

    def packing_config(self) -> PackingConfig:
        return PackingConfig(
            background_pressure=self.background_pressure,
            smoothing_ratio=self.smoothing_ratio,
            boundary_thickness=self.thickness,
            rest_density=self.rest_density,
            max_iterations=self.max_iterations,
            scheme=self.scheme,
            placement=self.placement,
            absolute_tolerance=self.absolute_tolerance,
            relative_tolerance=self.relative_tolerance,
            initial_step=self.initial_step,
            terminate_on_plateau=self.terminate_on_plateau,
            plateau_window=self.plateau_window,
            plateau_tolerance=self.plateau_tolerance,
        )


def _merge_geometries(parts: list[Geometry]) -> Geometry:
    if len(parts) == 1:
        return parts[0]
    dims = {g.dimension for g in parts}
    if len(dims) != 1:
        raise ValueError("cannot mix 2D and 3D geometries")
    offsets = np.cumsum([0] + [len(g.vertices) for g in parts[:-1]])
    return Geometry(
        vertices=np.concatenate([g.vertices for g in parts]),
        faces=np.concatenate([g.faces + off for g, off in zip(parts, offsets)]),
        face_normals=np.concatenate([g.face_normals for g in parts]),
    )


@dataclass
class PipelineResult:
    """Everything the stages produced, plus paths of written artifacts."""

    geometry: Geometry | None = None
    cloud: object = None
    interior: object = None
    boundary: object = None
    state: object = None
    report: object = None
    quality: object = None
    artifacts: dict = field(default_factory=dict)


def _run_stages(config: PipelineConfig, last: str) -> PipelineResult:
    if last not in STAGES:
        raise ValueError(f"unknown stage {last!r}")
    cutoff = STAGES.index(last)
    res = PipelineResult()

    with _stage("load"):
        if not config.geometry:
            raise ValueError("no geometry file given")
        if config.spacing <= 0.0:
            raise ValueError("spacing must be positive")
        res.geometry = _merge_geometries(
            [load_geometry(p, config.fmt) for p in config.geometry]
        )
    if cutoff < 1:
        return res

    with _stage("build_face_grid"):
        grid = build_face_grid(res.geometry, config.search_radius)
    if cutoff < 2:
        return res

    with _stage("build_sdf"):
        res.cloud = build_sdf(res.geometry, grid, config.spacing, config.search_radius)
    if cutoff < 3:
        return res

    with _stage("sample_boundary"):
        res.boundary = sample_boundary(res.cloud, config.thickness, config.rest_density)
    if cutoff < 4:
        return res

    with _stage("build_hierarchy"):
        hierarchy = build_hierarchy(res.geometry, config.leaf_capacity)
    if cutoff < 5:
        return res

    with _stage("sample_interior"):
        res.interior = sample_interior(
            res.geometry, hierarchy, config.spacing, config.epsilon_w, config.rest_density
        )
    if cutoff < 6:
        return res

    with _stage("pack"):
        res.state = make_packing_state(
            res.interior, res.boundary, res.cloud, config.packing_config()
        )
        res.report = pack(res.state, config.packing_config())
    if cutoff < 7:
        return res

    with _stage("metrics"):
        res.quality = quality_report(res.state, res.report, config.rest_density)
    return res


def _export_particles(res: PipelineResult, config: PipelineConfig, out: Path) -> None:
    if res.state is not None:
        positions, masses, role = res.state.positions, res.state.masses, res.state.role
        kernel = res.state.kernel
    else:
        union = (
            merge(res.interior, res.boundary)
            if res.boundary is not None and res.boundary.count
            else res.interior
        )
        positions, masses, role = union.positions, union.masses, union.role
        kernel = None
    path = out / "particles.csv"
    export.write_particles_csv(path, positions, masses, role)
    res.artifacts["particles_csv"] = str(path)
    if config.write_vtk:
        data = {"mass": masses, "role": role.astype(np.int32)}
        if kernel is not None:
            data["density"] = density_summation(positions, masses, kernel)
        vtk_path = out / "particles.vtk"
        export.write_legacy_vtk(vtk_path, positions, data, title="packed particles")
        res.artifacts["particles_vtk"] = str(vtk_path)


def _export_cloud(res: PipelineResult, config: PipelineConfig, out: Path) -> None:
    path = out / "cloud.csv"
    export.write_cloud_csv(path, res.cloud)
    res.artifacts["cloud_csv"] = str(path)
    if config.write_vtk:
        vtk_path = out / "cloud.vtk"
        export.write_legacy_vtk(
            vtk_path,
            res.cloud.positions,
            {"signed_distance": res.cloud.phi},
            title="signed distance cloud",
        )
        res.artifacts["cloud_vtk"] = str(vtk_path)


def run_sdf(config: PipelineConfig) -> PipelineResult:
    """Stages through the distance cloud, then write it out."""
    res = _run_stages(config, "build_sdf")
    with _stage("export"):
        out = Path(config.output)
        out.mkdir(parents=True, exist_ok=True)
        _export_cloud(res, config, out)
    return res


def run_sample(config: PipelineConfig) -> PipelineResult:
    """Stages through initial sampling; writes unrelaxed particles."""
    res = _run_stages(config, "sample_interior")
    with _stage("export"):
        out = Path(config.output)
        out.mkdir(parents=True, exist_ok=True)
        _export_particles(res, config, out)
    return res


def run_pack(config: PipelineConfig) -> PipelineResult:
    """Stages through relaxation; writes particles and energy history."""
    res = _run_stages(config, "pack")
    with _stage("export"):
        out = Path(config.output)
        out.mkdir(parents=True, exist_ok=True)
        _export_particles(res, config, out)
        energy_path = out / "energy.csv"
        export.write_energy_csv(energy_path, res.report)
        res.artifacts["energy_csv"] = str(energy_path)
    return res


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    """All stages plus every artifact, including the quality summary."""
    res = _run_stages(config, "metrics")
    with _stage("export"):
        out = Path(config.output)
        out.mkdir(parents=True, exist_ok=True)
        _export_particles(res, config, out)
        _export_cloud(res, config, out)
        energy_path = out / "energy.csv"
        export.write_energy_csv(energy_path, res.report)
        res.artifacts["energy_csv"] = str(energy_path)
        quality_path = out / "quality.json"
        export.write_quality_json(
            quality_path,
            res.quality,
            extra={"spacing": config.spacing, "scheme": config.scheme},
        )
        res.artifacts["quality_json"] = str(quality_path)
    return res
