"""Face lookup grid: candidate sets must never miss a nearby face."""

from __future__ import annotations

import numpy as np
import pytest

from sphprep import (
    build_face_grid,
    circle_polygon,
    faces_near,
    icosphere,
    signed_distance_to_face,
    tetrahedron,
)
from sphprep.facegrid import cell_coordinates
from sphprep.sdf import sign_tables


def _distances_to_all_faces(x, g, tables):
    return np.array(
        [abs(signed_distance_to_face(x, g, i, tables)[0]) for i in range(g.face_count)]
    )


@pytest.mark.parametrize(
    "geometry,radius",
    [(tetrahedron(), 0.35), (circle_polygon(segments=48), 0.3), (icosphere(1.0, 1), 0.4)],
)
def test_candidates_cover_every_face_within_radius(geometry, radius):
    """Soundness fuzz: every face closer than the search radius shows up."""
    grid = build_face_grid(geometry, radius)
    tables = sign_tables(geometry)
    rng = np.random.default_rng(505)
    queries = rng.uniform(-1.6, 1.6, size=(120, geometry.dimension))
    for x in queries:
        candidates = set(faces_near(grid, x).tolist())
        dist = _distances_to_all_faces(x, geometry, tables)
        required = set(np.flatnonzero(dist <= radius).tolist())
        assert required <= candidates


def test_candidates_on_exact_cell_boundaries():
    # queries landing exactly on cell planes exercise the floor rounding
    geometry = tetrahedron()
    radius = 0.5
    grid = build_face_grid(geometry, radius)
    tables = sign_tables(geometry)
    axis = np.array([-2, -1, 0, 1, 2], dtype=np.float64) * radius
    for x0 in axis:
        for x1 in axis:
            x = np.array([x0, x1, 0.0])
            candidates = set(faces_near(grid, x).tolist())
            dist = _distances_to_all_faces(x, geometry, tables)
            required = set(np.flatnonzero(dist <= radius).tolist())
            assert required <= candidates


def test_candidate_ids_valid_and_unique():
    geometry = icosphere(1.0, 1)
    grid = build_face_grid(geometry, 0.3)
    x = np.array([0.9, 0.1, -0.2])
    ids = faces_near(grid, x)
    assert len(ids) == len(set(ids.tolist()))
    assert np.all(ids >= 0)
    assert np.all(ids < geometry.face_count)


def test_repeated_queries_identical():
    geometry = circle_polygon(segments=64)
    grid = build_face_grid(geometry, 0.2)
    x = np.array([0.77, -0.31])
    assert np.array_equal(faces_near(grid, x), faces_near(grid, x))


def test_cell_coordinates_floor_behavior():
    assert cell_coordinates(np.array([0.0, 0.0]), 1.0) == (0, 0)
    assert cell_coordinates(np.array([-0.25, 1.75]), 0.5) == (-1, 3)
    assert cell_coordinates(np.array([-1.0]), 0.5) == (-2,)
    with pytest.raises(ValueError):
        cell_coordinates(np.array([1.0]), 0.0)


def test_far_query_returns_empty():
    geometry = tetrahedron()
    grid = build_face_grid(geometry, 0.25)
    ids = faces_near(grid, np.array([50.0, 50.0, 50.0]))
    assert len(ids) == 0
