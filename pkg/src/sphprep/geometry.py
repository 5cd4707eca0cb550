"""Surface geometry loading and face primitives.

A geometry is an indexed face set: oriented edges in 2D, oriented triangles
in 3D. Orientation matters everywhere downstream (winding numbers, outward
normals), so normals are always recomputed from the vertex winding and
never trusted from the input file.
"""

from __future__ import annotations

import re
import struct
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

Array = np.ndarray


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned bounding box with closed bounds."""

    min_corner: Array
    max_corner: Array

    def __post_init__(self):
        if np.any(self.min_corner > self.max_corner):
            raise ValueError("Aabb min_corner exceeds max_corner")

    @property
    def extent(self) -> Array:
        return self.max_corner - self.min_corner

    def dilated(self, margin: float) -> "Aabb":
        return Aabb(self.min_corner - margin, self.max_corner + margin)

    def contains(self, points: Array) -> Array:
        """Componentwise closed-interval test, vectorized over rows."""
        points = np.atleast_2d(points)
        return np.all((points >= self.min_corner) & (points <= self.max_corner), axis=1)


@dataclass
class Geometry:
    """Indexed face set with per-face outward unit normals.

    vertices : (n, d) float64, deduplicated (bitwise), d in {2, 3}
    faces : (m, d) int64 vertex indices; 2 per edge, 3 per triangle,
        orientation-significant
    face_normals : (m, d) float64 unit normals recomputed from winding
    """

    vertices: Array
    faces: Array
    face_normals: Array

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=np.float64)
        self.faces = np.ascontiguousarray(self.faces, dtype=np.int64)
        self.face_normals = np.ascontiguousarray(self.face_normals, dtype=np.float64)
        if self.faces.size and self.faces.max() >= len(self.vertices):
            raise ValueError("face index out of range")

    @property
    def dimension(self) -> int:
        return self.vertices.shape[1]

    @property
    def face_count(self) -> int:
        return len(self.faces)

    def face_vertices(self, indices=None) -> Array:
        """Vertex positions per face, shape (m, verts_per_face, d)."""
        f = self.faces if indices is None else self.faces[indices]
        return self.vertices[f]


def edge_normals(vertices: Array, faces: Array) -> Array:
    """Outward unit normal per oriented 2D edge: the direction rotated by -90 deg.

    For a counterclockwise loop this points out of the enclosed region.
    """
    d = vertices[faces[:, 1]] - vertices[faces[:, 0]]
    n = np.stack([d[:, 1], -d[:, 0]], axis=1)
    return n / np.linalg.norm(n, axis=1, keepdims=True)


def triangle_normals(vertices: Array, faces: Array) -> Array:
    vi, vj, vk = (vertices[faces[:, c]] for c in range(3))
    n = np.cross(vj - vi, vk - vi)
    return n / np.linalg.norm(n, axis=1, keepdims=True)


def _dedup_vertices(raw: Array) -> tuple[Array, Array]:
    """Collapse bitwise-identical vertices, keeping first-occurrence order.

    Returns (unique_vertices, index_map) with raw[i] == unique[index_map[i]].
    Exact equality only; no epsilon welding, so unclosed seams survive as-is.
    """
    uniq, first, inverse = np.unique(raw, axis=0, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty(len(order), dtype=np.int64)
    rank[order] = np.arange(len(order))
    return uniq[order], rank[inverse.ravel()]


def _drop_degenerate(vertices: Array, faces: Array, label: str) -> Array:
    """Remove zero-measure faces, warning with their indices."""
    if faces.shape[1] == 2:
        repeated = faces[:, 0] == faces[:, 1]
        length = np.linalg.norm(vertices[faces[:, 1]] - vertices[faces[:, 0]], axis=1)
        bad = repeated | (length == 0.0)
    else:
        repeated = (
            (faces[:, 0] == faces[:, 1])
            | (faces[:, 1] == faces[:, 2])
            | (faces[:, 0] == faces[:, 2])
        )
        vi, vj, vk = (vertices[faces[:, c]] for c in range(3))
        area2 = np.linalg.norm(np.cross(vj - vi, vk - vi), axis=1)
        bad = repeated | (area2 == 0.0)
    if np.any(bad):
        idx = np.flatnonzero(bad)
        warnings.warn(
            f"dropping {idx.size} degenerate {label} face(s): indices {idx.tolist()[:16]}"
            + ("..." if idx.size > 16 else ""),
            stacklevel=3,
        )
        faces = faces[~bad]
    return faces


def _from_triangle_soup(tris: Array) -> Geometry:
    """Build an indexed 3D geometry from raw per-face vertex triples."""
    raw = tris.reshape(-1, 3)
    verts, index_map = _dedup_vertices(raw)
    faces = index_map.reshape(-1, 3)
    faces = _drop_degenerate(verts, faces, "triangle")
    if len(faces) == 0:
        raise ValueError("geometry contains no non-degenerate faces")
    return Geometry(verts, faces, triangle_normals(verts, faces))


def _parse_stl_binary(data: bytes) -> Geometry:
    if len(data) < 84:
        raise ValueError("binary STL truncated: missing header or count")
    (count,) = struct.unpack_from("<I", data, 80)
    expected = 84 + 50 * count
    if len(data) < expected:
        raise ValueError(
            f"binary STL truncated: {count} triangles declared, "
            f"{(len(data) - 84) // 50} present"
        )
    records = np.frombuffer(
        data, dtype=np.dtype([("n", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")]),
        count=count, offset=84,
    )
    # stored normals are ignored; orientation comes from the vertex winding
    return _from_triangle_soup(records["v"].astype(np.float64))


_FLOAT = r"[-+]?[\d.]+(?:[eE][-+]?\d+)?"
_VERTEX_RE = re.compile(rf"vertex\s+({_FLOAT})\s+({_FLOAT})\s+({_FLOAT})")


def _parse_stl_ascii(text: str) -> Geometry:
    coords = _VERTEX_RE.findall(text)
    if not coords or len(coords) % 3 != 0:
        raise ValueError(f"ASCII STL malformed: {len(coords)} vertex lines (need 3 per facet)")
    # round-trip through float32 so ASCII and binary encodings of the same
    # mesh dedup identically
    tris = np.array(coords, dtype=np.float32).astype(np.float64).reshape(-1, 3, 3)
    return _from_triangle_soup(tris)


def _parse_polygon_csv(text: str) -> Geometry:
    """One `x,y` vertex per line; blank lines separate loops; loops are
    implicitly closed. Outer loops wind counterclockwise, holes clockwise.
    """
    loops: list[list[list[float]]] = [[]]
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            if loops[-1]:
                loops.append([])
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ValueError(f"polygon csv line {lineno}: expected 'x,y', got {line!r}")
        try:
            loops[-1].append([float(parts[0]), float(parts[1])])
        except ValueError as exc:
            raise ValueError(f"polygon csv line {lineno}: {exc}") from None
    loops = [lp for lp in loops if lp]
    if not loops:
        raise ValueError("polygon csv contains no vertices")

    raw = np.array([v for lp in loops for v in lp], dtype=np.float64)
    verts, index_map = _dedup_vertices(raw)
    faces = []
    offset = 0
    for lp in loops:
        k = len(lp)
        if k < 2:
            raise ValueError("polygon loop with fewer than 2 vertices")
        idx = index_map[offset : offset + k]
        faces.append(np.stack([idx, np.roll(idx, -1)], axis=1))
        offset += k
    faces = _drop_degenerate(verts, np.concatenate(faces), "edge")
    if len(faces) == 0:
        raise ValueError("geometry contains no non-degenerate faces")
    return Geometry(verts, faces, edge_normals(verts, faces))


FORMATS = ("auto", "stl_binary", "stl_ascii", "polygon_csv")


def _sniff_format(path: Path, data: bytes) -> str:
    suffix = path.suffix.lower()
    if suffix == ".csv":
        return "polygon_csv"
    if len(data) >= 84:
        (count,) = struct.unpack_from("<I", data, 80)
        if len(data) == 84 + 50 * count:
            # exact binary length wins even when the header says "solid"
            return "stl_binary"
    if data.lstrip()[:5] == b"solid":
        return "stl_ascii"
    return "stl_binary"


def load_geometry(path, fmt: str = "auto") -> Geometry:
    """Load a surface geometry from disk.

    Parameters
    ----------
    path : file path
    fmt : one of "stl_binary", "stl_ascii", "polygon_csv", or "auto"
        (extension plus content sniffing).

    Vertices are deduplicated bitwise, degenerate faces dropped with a
    warning, and face normals recomputed from the stored winding.
    """
    path = Path(path)
    data = path.read_bytes()
    if fmt == "auto":
        fmt = _sniff_format(path, data)
    if fmt == "stl_binary":
        return _parse_stl_binary(data)
    if fmt == "stl_ascii":
        return _parse_stl_ascii(data.decode("ascii", errors="replace"))
    if fmt == "polygon_csv":
        return _parse_polygon_csv(data.decode())
    raise ValueError(f"unknown geometry format {fmt!r}")


def face_aabb(g: Geometry, face_index: int) -> Aabb:
    """Bounding box of one face's vertices."""
    pts = g.vertices[g.faces[face_index]]
    return Aabb(pts.min(axis=0), pts.max(axis=0))


def geometry_aabb(g: Geometry) -> Aabb:
    """Bounding box over all vertices."""
    if len(g.vertices) == 0:
        raise ValueError("empty geometry has no bounding box")
    return Aabb(g.vertices.min(axis=0), g.vertices.max(axis=0))
