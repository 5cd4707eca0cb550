"""Procedural test geometries with outward orientation.

These cover the shapes used throughout the examples and tests: smooth
closed curves, an airfoil-like slender polygon, and the classic
subdivided icosahedron. All generators return watertight, consistently
oriented geometry; corruption for robustness studies is applied by the
caller (see `Geometry` slicing in the tests).
"""

from __future__ import annotations

import numpy as np

from .geometry import Geometry, edge_normals, triangle_normals

Array = np.ndarray


def _polygon(vertices: Array) -> Geometry:
    n = len(vertices)
    faces = np.stack([np.arange(n), np.roll(np.arange(n), -1)], axis=1).astype(np.int64)
    v = np.asarray(vertices, dtype=np.float64)
    return Geometry(vertices=v, faces=faces, face_normals=edge_normals(v, faces))


def circle_polygon(radius: float = 1.0, segments: int = 256, center=(0.0, 0.0)) -> Geometry:
    """Regular polygon approximating a circle, counterclockwise."""
    if segments < 3:
        raise ValueError("need at least 3 segments")
    t = 2.0 * np.pi * np.arange(segments) / segments
    pts = np.stack([np.cos(t), np.sin(t)], axis=1) * radius + np.asarray(center, dtype=np.float64)
    return _polygon(pts)


def square_polygon(side: float = 1.0, center=(0.0, 0.0)) -> Geometry:
    half = 0.5 * side
    corners = np.array(
        [[-half, -half], [half, -half], [half, half], [-half, half]], dtype=np.float64
    )
    return _polygon(corners + np.asarray(center, dtype=np.float64))


def naca_airfoil(chord: float = 1.0, thickness: float = 0.12, segments: int = 2000) -> Geometry:
    """Symmetric four-digit-series airfoil as a closed polygon.

    Thickness is relative to chord (0.12 gives the familiar 0012
    profile). Cosine spacing clusters vertices at the leading edge where
    curvature is high; the trailing edge is closed exactly. The polygon
    runs lower surface nose-to-tail, then upper surface back, which is
    counterclockwise.
    """
    if segments < 6 or segments % 2:
        raise ValueError("segments must be even and at least 6")
    per_side = segments // 2 + 1
    beta = np.linspace(0.0, np.pi, per_side)
    x = 0.5 * (1.0 - np.cos(beta))  # 0 at nose, 1 at tail
    # closed-trailing-edge thickness polynomial
    y = 5.0 * thickness * (
        0.2969 * np.sqrt(x)
        - 0.1260 * x
        - 0.3516 * x**2
        + 0.2843 * x**3
        - 0.1036 * x**4
    )
    lower = np.stack([x, -y], axis=1)
    upper = np.stack([x[::-1], y[::-1]], axis=1)
    pts = np.concatenate([lower, upper[1:-1]]) * chord
    return _polygon(pts)


_GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0

_ICOSAHEDRON_VERTICES = np.array(
    [
        [-1, _GOLDEN, 0], [1, _GOLDEN, 0], [-1, -_GOLDEN, 0], [1, -_GOLDEN, 0],
        [0, -1, _GOLDEN], [0, 1, _GOLDEN], [0, -1, -_GOLDEN], [0, 1, -_GOLDEN],
        [_GOLDEN, 0, -1], [_GOLDEN, 0, 1], [-_GOLDEN, 0, -1], [-_GOLDEN, 0, 1],
    ],
    dtype=np.float64,
)

_ICOSAHEDRON_FACES = np.array(
    [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ],
    dtype=np.int64,
)


def icosphere(radius: float = 1.0, subdivisions: int = 4, center=(0.0, 0.0, 0.0)) -> Geometry:
    """Subdivided icosahedron projected onto the sphere.

    Face count is 20 * 4**subdivisions, so levels 0..4 give 20, 80, 320,
    1280, 5120 triangles. Orientation is outward at every level.
    """
    if subdivisions < 0:
        raise ValueError("subdivisions must be nonnegative")
    verts = [v / np.linalg.norm(v) for v in _ICOSAHEDRON_VERTICES]
    faces = [tuple(f) for f in _ICOSAHEDRON_FACES]
    for _ in range(subdivisions):
        midpoint: dict[tuple[int, int], int] = {}

        def split(i: int, j: int) -> int:
            key = (i, j) if i < j else (j, i)
            if key not in midpoint:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                midpoint[key] = len(verts) - 1
            return midpoint[key]

        refined = []
        for i, j, k in faces:
            ij, jk, ki = split(i, j), split(j, k), split(k, i)
            refined += [(i, ij, ki), (j, jk, ij), (k, ki, jk), (ij, jk, ki)]
        faces = refined
    vertices = np.array(verts) * radius + np.asarray(center, dtype=np.float64)
    face_array = np.array(faces, dtype=np.int64)
    return Geometry(
        vertices=vertices, faces=face_array,
        face_normals=triangle_normals(vertices, face_array),
    )


def box_mesh(lengths=(1.0, 1.0, 1.0), center=(0.0, 0.0, 0.0)) -> Geometry:
    """Axis-aligned box as 12 outward triangles."""
    half = 0.5 * np.asarray(lengths, dtype=np.float64)
    signs = np.array(
        [[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)],
        dtype=np.float64,
    )
    vertices = signs * half + np.asarray(center, dtype=np.float64)
    # vertex order: index bit 2 -> x, bit 1 -> y, bit 0 -> z
    quads = [
        (0, 1, 3, 2),  # -x
        (4, 6, 7, 5),  # +x
        (0, 4, 5, 1),  # -y
        (2, 3, 7, 6),  # +y
        (0, 2, 6, 4),  # -z
        (1, 5, 7, 3),  # +z
    ]
    faces = np.array(
        [tri for a, b, c, d in quads for tri in ((a, b, c), (a, c, d))], dtype=np.int64
    )
    return Geometry(
        vertices=vertices, faces=faces, face_normals=triangle_normals(vertices, faces)
    )


def tetrahedron(scale: float = 1.0) -> Geometry:
    """Regular tetrahedron with outward faces, centroid at the origin."""
    vertices = np.array(
        [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=np.float64
    ) * scale
    faces = np.array([[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]], dtype=np.int64)
    return Geometry(
        vertices=vertices, faces=faces, face_normals=triangle_normals(vertices, faces)
    )
