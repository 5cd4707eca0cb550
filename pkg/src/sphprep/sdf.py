"""Narrow-band signed distance cloud.

Signed distance to a face follows the classic region classification of
the closest point (face interior, edge, or vertex), with the sign taken
from the angle-weighted pseudo-normal of whichever feature was hit. The
cloud stores, per grid point near the surface, the signed distance and
the outward normal of the minimizing face.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .facegrid import FaceGrid, cell_coordinates_batch
from .geometry import Geometry, geometry_aabb

Array = np.ndarray

# feature codes shared by the 2D and 3D paths
FEATURE_VERTEX = 0
FEATURE_EDGE = 1
FEATURE_FACE = 2

_FEATURE_NAMES = {FEATURE_VERTEX: "vertex", FEATURE_EDGE: "edge", FEATURE_FACE: "face_interior"}


@dataclass
class SignedDistanceCloud:
    """Fixed sample points near the surface with signed distance and normal.

    phi is negative inside the geometry. normals are the outward unit
    normals of the minimizing faces, not pseudo-normals; Shepard
    averaging smooths them later anyway.
    """

    positions: Array
    phi: Array
    normals: Array
    band_radius: float
    spacing: float

    @property
    def count(self) -> int:
        return len(self.positions)

    @property
    def dim(self) -> int:
        return self.positions.shape[1]


@dataclass
class _SignTables:
    """Per-feature pseudo-normals, unnormalized (only the sign of a dot
    product is ever taken, so scaling is irrelevant)."""

    vertex: Array          # (n_vertices, d) angle-weighted sums of incident face normals
    edge: Array | None     # 3D only: (n_faces, 3, 3), slot k = undirected edge (v_k, v_{k+1})


def sign_tables(g: Geometry) -> _SignTables:
    n = g.face_normals
    if g.dimension == 2:
        vertex = np.zeros_like(g.vertices)
        np.add.at(vertex, g.faces[:, 0], n)
        np.add.at(vertex, g.faces[:, 1], n)
        return _SignTables(vertex=vertex, edge=None)

    fv = g.face_vertices()
    vertex = np.zeros_like(g.vertices)
    for k in range(3):
        e1 = fv[:, (k + 1) % 3] - fv[:, k]
        e2 = fv[:, (k + 2) % 3] - fv[:, k]
        cosang = np.einsum("ij,ij->i", e1, e2) / (
            np.linalg.norm(e1, axis=1) * np.linalg.norm(e2, axis=1)
        )
        angle = np.arccos(np.clip(cosang, -1.0, 1.0))
        np.add.at(vertex, g.faces[:, k], angle[:, None] * n)

    # undirected edge -> summed normals of the faces sharing it
    slots = np.stack([g.faces, np.roll(g.faces, -1, axis=1)], axis=2)  # (m, 3, 2)
    undirected = np.sort(slots.reshape(-1, 2), axis=1)
    uniq, inverse = np.unique(undirected, axis=0, return_inverse=True)
    sums = np.zeros((len(uniq), 3))
    np.add.at(sums, inverse, np.repeat(n, 3, axis=0))
    edge = sums[inverse].reshape(len(g.faces), 3, 3)
    return _SignTables(vertex=vertex, edge=edge)


def _closest_on_segments(p: Array, a: Array, b: Array):
    """Closest point on segments for every (point, segment) pair.

    p: (P, 1, 2); a, b: (F, 2). Returns (closest (P,F,2), feature code,
    feature index) where feature index is the endpoint slot for vertex hits.
    """
    ab = b - a
    t = np.einsum("pfk,fk->pf", p - a, ab) / np.einsum("fk,fk->f", ab, ab)
    feature = np.full(t.shape, FEATURE_EDGE, dtype=np.int8)
    slot = np.zeros(t.shape, dtype=np.int8)
    at_a = t <= 0.0
    at_b = t >= 1.0
    feature[at_a] = FEATURE_VERTEX
    feature[at_b] = FEATURE_VERTEX
    slot[at_b] = 1
    tc = np.clip(t, 0.0, 1.0)
    closest = a + tc[..., None] * ab
    # exact endpoints for vertex hits, immune to roundoff in a + t*ab
    closest = np.where(at_a[..., None], np.broadcast_to(a, closest.shape), closest)
    closest = np.where(at_b[..., None], np.broadcast_to(b, closest.shape), closest)
    return closest, feature, slot


def _closest_on_triangles(p: Array, a: Array, b: Array, c: Array):
    """Region-classified closest point for every (point, triangle) pair.

    p: (P, 1, 3); a, b, c: (F, 3). The region tests run in the standard
    order (vertices, then edges, then interior), which also fixes the
    behavior on boundaries between regions.
    """
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = np.einsum("pfk,fk->pf", ap, ab)
    d2 = np.einsum("pfk,fk->pf", ap, ac)

    bp = p - b
    d3 = np.einsum("pfk,fk->pf", bp, ab)
    d4 = np.einsum("pfk,fk->pf", bp, ac)

    cp = p - c
    d5 = np.einsum("pfk,fk->pf", cp, ab)
    d6 = np.einsum("pfk,fk->pf", cp, ac)

    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2

    shape = d1.shape
    closest = np.empty(shape + (3,))
    feature = np.empty(shape, dtype=np.int8)
    slot = np.empty(shape, dtype=np.int8)
    remain = np.ones(shape, dtype=bool)

    def assign(mask, pts, feat, sl):
        nonlocal remain
        m = remain & mask
        closest[m] = pts[m]
        feature[m] = feat
        slot[m] = sl
        remain &= ~m

    assign((d1 <= 0.0) & (d2 <= 0.0), np.broadcast_to(a, shape + (3,)), FEATURE_VERTEX, 0)
    assign((d3 >= 0.0) & (d4 <= d3), np.broadcast_to(b, shape + (3,)), FEATURE_VERTEX, 1)
    assign((d6 >= 0.0) & (d5 <= d6), np.broadcast_to(c, shape + (3,)), FEATURE_VERTEX, 2)

    with np.errstate(invalid="ignore", divide="ignore"):
        v_ab = d1 / (d1 - d3)
        assign((vc <= 0.0) & (d1 >= 0.0) & (d3 <= 0.0),
               a + v_ab[..., None] * ab, FEATURE_EDGE, 0)

        v_ac = d2 / (d2 - d6)
        assign((vb <= 0.0) & (d2 >= 0.0) & (d6 <= 0.0),
               a + v_ac[..., None] * ac, FEATURE_EDGE, 2)

        v_bc = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        assign((va <= 0.0) & (d4 - d3 >= 0.0) & (d5 - d6 >= 0.0),
               b + v_bc[..., None] * (c - b), FEATURE_EDGE, 1)

        denom = va + vb + vc
        v = vb / denom
        w = vc / denom
        interior = a + v[..., None] * ab + w[..., None] * ac
    closest[remain] = interior[remain]
    feature[remain] = FEATURE_FACE
    slot[remain] = 0
    return closest, feature, slot


def _signed_block(points: Array, g: Geometry, face_ids: Array, tables: _SignTables):
    """Signed distance from each point to each face of a candidate list.

    Returns (phi, feature, slot), all shaped (P, F). The sign comes from
    the pseudo-normal of the hit feature; a dot product of exactly zero
    counts as positive.
    """
    fv = g.vertices[g.faces[face_ids]]
    p = points[:, None, :]
    if g.dimension == 2:
        closest, feature, slot = _closest_on_segments(p, fv[:, 0], fv[:, 1])
    else:
        closest, feature, slot = _closest_on_triangles(p, fv[:, 0], fv[:, 1], fv[:, 2])

    offset = p - closest
    dist = np.sqrt(np.einsum("pfk,pfk->pf", offset, offset))

    cols = np.broadcast_to(np.arange(len(face_ids)), feature.shape)
    hit_vertex = g.faces[face_ids][cols, slot.astype(np.int64)]
    pn = tables.vertex[hit_vertex]
    face_n = np.broadcast_to(g.face_normals[face_ids], pn.shape)
    if g.dimension == 3:
        edge_pn = tables.edge[face_ids][cols, slot.astype(np.int64)]
        pn = np.where((feature == FEATURE_EDGE)[..., None], edge_pn, pn)
        pn = np.where((feature == FEATURE_FACE)[..., None], face_n, pn)
    else:
        # 2D: an "edge" hit is the segment interior, signed by its own normal
        pn = np.where((feature == FEATURE_EDGE)[..., None], face_n, pn)

    side = np.einsum("pfk,pfk->pf", offset, pn)
    phi = np.where(side < 0.0, -dist, dist)
    return phi, feature, slot


def signed_distance_to_face(x: Array, g: Geometry, face_index: int,
                            tables: _SignTables | None = None):
    """Signed distance from one point to one face.

    Returns (phi, face outward normal, feature) with feature one of
    "face_interior", "edge", "vertex".
    """
    if tables is None:
        tables = sign_tables(g)
    pts = np.asarray(x, dtype=np.float64)[None, :]
    ids = np.asarray([face_index], dtype=np.int64)
    phi, feature, _ = _signed_block(pts, g, ids, tables)
    return float(phi[0, 0]), g.face_normals[face_index].copy(), _FEATURE_NAMES[int(feature[0, 0])]


def _lattice(aabb_min: Array, aabb_max: Array, spacing: float, margin: float) -> Array:
    """Cell-centered lattice anchored at the geometry box corner.

    Points sit at min + (k + 1/2) * spacing; negative k extends the grid
    by `margin` on every side. The interior sampling lattice uses the
    same anchor with margin 0, so both grids share one registration.
    """
    pad = int(np.ceil(margin / spacing))
    counts = np.ceil((aabb_max - aabb_min) / spacing).astype(int)
    axes = [
        aabb_min[k] + (np.arange(-pad, counts[k] + pad) + 0.5) * spacing
        for k in range(len(aabb_min))
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def build_sdf(g: Geometry, grid: FaceGrid, spacing: float, band_radius: float,
              tables: _SignTables | None = None,
              pair_chunk: int = 2_000_000) -> SignedDistanceCloud:
    """Generate the narrow-band signed distance cloud.

    Steps: lattice over the dilated bounding box; discard points whose
    grid cell holds no faces; per survivor take the face of minimal
    absolute signed distance among the nearby ones (ties to the lowest
    face index); finally discard points with |phi| beyond the band.

    Grid soundness makes the nearby-face minimum equal the all-face
    minimum for every point kept.
    """
    if grid.cell_size < band_radius:
        raise ValueError("face grid cells must be at least the band radius")
    box = geometry_aabb(g)
    points = _lattice(box.min_corner, box.max_corner, spacing, band_radius)
    if tables is None:
        tables = sign_tables(g)

    coords = cell_coordinates_batch(points, grid.cell_size)
    keys = [tuple(c) for c in coords]
    keep = np.fromiter((k in grid.cells for k in keys), dtype=bool, count=len(keys))
    points = points[keep]
    if len(points) == 0:
        raise ValueError("no lattice points near the surface; geometry smaller than one cell?")

    coords = coords[keep]
    # points sharing a cell share the same candidate list; process per cell
    order = np.lexsort(coords.T[::-1])
    coords = coords[order]
    points = points[order]
    boundaries = np.flatnonzero(np.any(np.diff(coords, axis=0) != 0, axis=1)) + 1
    groups = np.split(np.arange(len(points)), boundaries)

    phi = np.empty(len(points))
    nearest = np.empty(len(points), dtype=np.int64)
    for rows in groups:
        faces = grid.cells[tuple(coords[rows[0]])]
        step = max(1, pair_chunk // max(1, len(faces)))
        for lo in range(0, len(rows), step):
            rr = rows[lo : lo + step]
            block, _, _ = _signed_block(points[rr], g, faces, tables)
            win = np.argmin(np.abs(block), axis=1)  # first minimum = lowest face id
            phi[rr] = block[np.arange(len(rr)), win]
            nearest[rr] = faces[win]

    # emit rows in lattice enumeration order, same as the brute-force path
    undo = np.empty_like(order)
    undo[order] = np.arange(len(order))
    points, phi, nearest = points[undo], phi[undo], nearest[undo]

    inside_band = np.abs(phi) <= band_radius
    return SignedDistanceCloud(
        positions=points[inside_band],
        phi=phi[inside_band],
        normals=g.face_normals[nearest[inside_band]].copy(),
        band_radius=float(band_radius),
        spacing=float(spacing),
    )


def brute_force_sdf(g: Geometry, spacing: float, band_radius: float,
                    tables: _SignTables | None = None,
                    pair_chunk: int = 2_000_000) -> SignedDistanceCloud:
    """Reference path: identical arithmetic, candidate list = every face.

    Exists as a real code path (benchmark baseline and exactness oracle),
    not as test scaffolding.
    """
    box = geometry_aabb(g)
    points = _lattice(box.min_corner, box.max_corner, spacing, band_radius)
    if tables is None:
        tables = sign_tables(g)
    faces = np.arange(g.face_count, dtype=np.int64)

    phi = np.empty(len(points))
    nearest = np.empty(len(points), dtype=np.int64)
    step = max(1, pair_chunk // g.face_count)
    for lo in range(0, len(points), step):
        rows = slice(lo, min(lo + step, len(points)))
        block, _, _ = _signed_block(points[rows], g, faces, tables)
        win = np.argmin(np.abs(block), axis=1)
        phi[rows] = block[np.arange(block.shape[0]), win]
        nearest[rows] = faces[win]

    inside_band = np.abs(phi) <= band_radius
    return SignedDistanceCloud(
        positions=points[inside_band],
        phi=phi[inside_band],
        normals=g.face_normals[nearest[inside_band]].copy(),
        band_radius=float(band_radius),
        spacing=float(spacing),
    )


def boundary_positions(cloud: SignedDistanceCloud, thickness: float) -> Array:
    """Cloud points strictly outside the surface but within the boundary hull."""
    if thickness > cloud.band_radius:
        raise ValueError("boundary thickness exceeds the stored band")
    keep = (cloud.phi > 0.0) & (cloud.phi <= thickness)
    if not np.any(keep) and thickness < cloud.spacing:
        warnings.warn("boundary thinner than the cloud spacing; no positions fall in it")
    return cloud.positions[keep]
