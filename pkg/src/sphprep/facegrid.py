"""Face-based neighborhood search on a uniform hash grid.

Cells have edge length r_s. Each face is registered in every cell its
vertex bounding box touches, then each cell's list is widened to the
union over the 3^d surrounding cells. The resulting guarantee is what
makes the narrow-band signed distances exact: any face within r_s of a
query point is in that point's cell list.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from itertools import product

import numpy as np

from .geometry import Geometry

Array = np.ndarray

_EMPTY = np.empty(0, dtype=np.int64)


def cell_coordinates(x: Array, cell_size: float) -> tuple[int, ...]:
    """Integer cell of a position: componentwise floor(x / cell_size)."""
    if cell_size <= 0:
        raise ValueError("cell size must be positive")
    return tuple(int(c) for c in np.floor(np.asarray(x, dtype=np.float64) / cell_size))


def cell_coordinates_batch(points: Array, cell_size: float) -> Array:
    if cell_size <= 0:
        raise ValueError("cell size must be positive")
    return np.floor(np.asarray(points, dtype=np.float64) / cell_size).astype(np.int64)


@dataclass
class FaceGrid:
    """Immutable map from integer cell coordinates to sorted unique face ids."""

    cell_size: float
    dim: int
    cells: dict[tuple[int, ...], Array]

    def faces_near(self, x: Array) -> Array:
        """Face ids stored at x's cell; empty when the cell is vacant,
        meaning every face is farther than about r_s away."""
        return self.cells.get(cell_coordinates(x, self.cell_size), _EMPTY)


def build_face_grid(g: Geometry, cell_size: float) -> FaceGrid:
    """Register faces into cells, then pad by one ring of neighbors.

    Padding happens as a second pass over the occupied-or-adjacent cell
    set rather than by inserting each face into its 3^d neighborhood up
    front; insertion stays proportional to the face's own bounding box.
    """
    if cell_size <= 0:
        raise ValueError("cell size must be positive")
    if g.face_count == 0:
        raise ValueError("cannot build a face grid for an empty geometry")
    d = g.dimension

    fv = g.face_vertices()
    lo = cell_coordinates_batch(fv.min(axis=1), cell_size)
    hi = cell_coordinates_batch(fv.max(axis=1), cell_size)

    occupied: dict[tuple[int, ...], list[int]] = defaultdict(list)
    for face, (a, b) in enumerate(zip(lo, hi)):
        ranges = [range(a[k], b[k] + 1) for k in range(d)]
        for key in product(*ranges):
            occupied[key].append(face)

    offsets = list(product((-1, 0, 1), repeat=d))
    padded: dict[tuple[int, ...], Array] = {}
    # the dilated key set: every occupied cell plus its direct neighbors
    targets = {
        tuple(k + o for k, o in zip(key, off)) for key in occupied for off in offsets
    }
    for key in targets:
        merged: list[int] = []
        for off in offsets:
            near = occupied.get(tuple(k + o for k, o in zip(key, off)))
            if near:
                merged.extend(near)
        if merged:
            padded[key] = np.unique(np.asarray(merged, dtype=np.int64))
    return FaceGrid(cell_size=float(cell_size), dim=d, cells=padded)


def faces_near(grid: FaceGrid, x: Array) -> Array:
    return grid.faces_near(x)
