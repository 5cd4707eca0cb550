"""Generalized winding numbers for robust inside-outside segmentation.

The winding number of a query point is the signed angle sum over all
faces, normalized to full revolutions. Because each face contributes
independently, any face subset S with closing surface S-bar (same
boundary, opposite chain orientation) satisfies w(S) = -w(S-bar) for
points outside the closed union. The hierarchy exploits this: nodes
whose box excludes the query point are evaluated through their small
closing instead of their many contained faces.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .geometry import Geometry, geometry_aabb

Array = np.ndarray

_PAIR_CHUNK = 4_000_000


def _angle_sum_2d(points: Array, vertices: Array, faces: Array) -> Array:
    """Sum of signed angles subtended by directed edges, per point."""
    total = np.zeros(len(points))
    if len(faces) == 0:
        return total
    fstep = max(1, _PAIR_CHUNK // max(1, len(points)))
    for lo in range(0, len(faces), fstep):
        f = faces[lo : lo + fstep]
        a = vertices[f[:, 0]][None, :, :] - points[:, None, :]
        b = vertices[f[:, 1]][None, :, :] - points[:, None, :]
        det = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
        dot = a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1]
        total += np.arctan2(det, dot).sum(axis=1)
    return total


def _angle_sum_3d(points: Array, vertices: Array, faces: Array) -> Array:
    """Sum of signed solid angles of oriented triangles, per point.

    Uses the two-argument arctangent form of the solid angle, which is
    finite for every query point, on-surface points included.
    """
    total = np.zeros(len(points))
    if len(faces) == 0:
        return total
    fstep = max(1, _PAIR_CHUNK // max(1, len(points)))
    for lo in range(0, len(faces), fstep):
        f = faces[lo : lo + fstep]
        a = vertices[f[:, 0]][None, :, :] - points[:, None, :]
        b = vertices[f[:, 1]][None, :, :] - points[:, None, :]
        c = vertices[f[:, 2]][None, :, :] - points[:, None, :]
        la = np.sqrt(np.einsum("pfk,pfk->pf", a, a))
        lb = np.sqrt(np.einsum("pfk,pfk->pf", b, b))
        lc = np.sqrt(np.einsum("pfk,pfk->pf", c, c))
        det = np.einsum("pfk,pfk->pf", a, np.cross(b, c))
        denom = (
            la * lb * lc
            + np.einsum("pfk,pfk->pf", a, b) * lc
            + np.einsum("pfk,pfk->pf", b, c) * la
            + np.einsum("pfk,pfk->pf", c, a) * lb
        )
        total += 2.0 * np.arctan2(det, denom).sum(axis=1)
    return total


def _winding_sum(points: Array, vertices: Array, faces: Array) -> Array:
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    d = points.shape[1]
    if d == 2:
        return _angle_sum_2d(points, vertices, faces) / (2.0 * np.pi)
    return _angle_sum_3d(points, vertices, faces) / (4.0 * np.pi)


def winding_direct(points: Array, g: Geometry, face_subset: Array | None = None) -> Array:
    """Exact winding number by direct summation.

    points may be a single position or an (n, d) batch; face_subset
    restricts the sum to those face ids. Finite for any input, corrupted
    meshes included.
    """
    faces = g.faces if face_subset is None else g.faces[np.asarray(face_subset, dtype=np.int64)]
    single = np.asarray(points).ndim == 1
    w = _winding_sum(points, g.vertices, faces)
    return float(w[0]) if single else w


def _chain_boundary_2d(edges: Array) -> dict[int, int]:
    """Net chain-boundary coefficient per vertex: +1 per head, -1 per tail."""
    net: dict[int, int] = {}
    for t, h in edges:
        t = int(t)
        h = int(h)
        net[h] = net.get(h, 0) + 1
        net[t] = net.get(t, 0) - 1
    return {v: k for v, k in net.items() if k != 0}


def _close_chain_2d(edges: Array) -> tuple[Array, bool]:
    """Synthetic edges C with boundary opposite to the given chain.

    Vertices with surplus heads become tails of closing edges, deficits
    become heads; both sides are paired in first-seen order.
    """
    net = _chain_boundary_2d(edges)
    if not net:
        return np.empty((0, 2), dtype=np.int64), True
    seen: dict[int, int] = {}
    for t, h in edges:
        seen.setdefault(int(t), len(seen))
        seen.setdefault(int(h), len(seen))
    by_seen = sorted(net, key=seen.__getitem__)
    tails = [v for v in by_seen for _ in range(max(0, net[v]))]
    heads = [v for v in by_seen for _ in range(max(0, -net[v]))]
    if len(tails) != len(heads):
        # total boundary coefficients always sum to zero; reaching this
        # would mean corrupted indices
        return np.empty((0, 2), dtype=np.int64), False
    return np.array(list(zip(tails, heads)), dtype=np.int64).reshape(-1, 2), True


def _directed_boundary_3d(tris: Array) -> list[tuple[int, int]]:
    """Directed edges of the chain boundary, with multiplicity."""
    count: Counter = Counter()
    for i, j, k in tris:
        count[(int(i), int(j))] += 1
        count[(int(j), int(k))] += 1
        count[(int(k), int(i))] += 1
    boundary = []
    for (u, v) in sorted(count):
        net = count[(u, v)] - count.get((v, u), 0)
        boundary.extend([(u, v)] * max(0, net))
    return boundary


def _close_chain_3d(tris: Array) -> tuple[Array, bool]:
    """Fan-triangulated closing of the boundary loops of a triangle set.

    The boundary of a chain has equal in- and out-degree at every vertex,
    so a greedy lowest-index walk always decomposes it into closed loops;
    each loop (w0, w1, ..., w_{L-1}) is closed by triangles
    (w0, w_{i+1}, w_i), whose summed boundary is the reversed loop.
    """
    boundary = _directed_boundary_3d(tris)
    if not boundary:
        return np.empty((0, 3), dtype=np.int64), True
    out_map: dict[int, list[int]] = {}
    for u, v in boundary:
        out_map.setdefault(u, []).append(v)
    for u in out_map:
        out_map[u].sort(reverse=True)  # pop() takes the lowest head

    fans: list[tuple[int, int, int]] = []
    remaining = len(boundary)
    starts = sorted(out_map, reverse=True)
    while remaining:
        while starts and not out_map.get(starts[-1]):
            starts.pop()
        if not starts:
            return np.empty((0, 3), dtype=np.int64), False
        w0 = starts[-1]
        loop = [w0, out_map[w0].pop()]
        remaining -= 1
        while loop[-1] != w0:
            nxt = out_map.get(loop[-1])
            if not nxt:
                return np.empty((0, 3), dtype=np.int64), False
            loop.append(nxt.pop())
            remaining -= 1
        loop.pop()  # drop the repeated start
        if len(loop) < 3:
            return np.empty((0, 3), dtype=np.int64), False
        fans.extend((loop[0], loop[i + 1], loop[i]) for i in range(1, len(loop) - 1))
    return np.array(fans, dtype=np.int64).reshape(-1, 3), True


def _chain_closed(face_lists: list[Array], dim: int) -> bool:
    """Exact integer check that the union of face sets has empty boundary."""
    stacked = [f for f in face_lists if len(f)]
    if not stacked:
        return True
    faces = np.concatenate(stacked)
    if dim == 2:
        return not _chain_boundary_2d(faces)
    return not _directed_boundary_3d(faces)


@dataclass
class _Node:
    box_min: Array
    box_max: Array
    left: int = -1
    right: int = -1
    faces: Array | None = None      # leaf: sorted face ids
    closing: Array | None = None    # internal: vertex-index rows, may be empty
    closing_ok: bool = True

    @property
    def is_leaf(self) -> bool:
        return self.faces is not None


@dataclass
class WindingHierarchy:
    """Binary AABB tree over faces with per-node closing surfaces."""

    geometry: Geometry
    nodes: list[_Node] = field(default_factory=list)
    leaf_capacity: int = 100


def build_hierarchy(g: Geometry, leaf_capacity: int = 100) -> WindingHierarchy:
    """Median split along the longest box axis until leaves are small.

    Per internal node: faces with any vertex outside the node box are set
    aside, the rest are closed over their exterior boundary, and the
    set-aside faces are appended orientation-flipped. Nodes whose closing
    fails the exact closedness check fall back to child recursion.
    """
    if leaf_capacity < 1:
        raise ValueError("leaf capacity must be at least 1")
    V, F = g.vertices, g.faces
    box = geometry_aabb(g)
    centroids = V[F].mean(axis=1)
    hier = WindingHierarchy(geometry=g, leaf_capacity=leaf_capacity)
    nodes = hier.nodes

    def build(face_ids: Array, bmin: Array, bmax: Array) -> int:
        index = len(nodes)
        node = _Node(box_min=bmin, box_max=bmax)
        nodes.append(node)
        if len(face_ids) <= leaf_capacity:
            node.faces = np.sort(face_ids)
            return index

        axis = int(np.argmax(bmax - bmin))
        order = np.argsort(centroids[face_ids, axis], kind="stable")
        half = len(face_ids) // 2
        split = 0.5 * (
            centroids[face_ids[order[half - 1]], axis]
            + centroids[face_ids[order[half]], axis]
        )
        left_max = bmax.copy()
        left_max[axis] = split
        right_min = bmin.copy()
        right_min[axis] = split

        fv = V[F[face_ids]]
        outside = ((fv < bmin) | (fv > bmax)).any(axis=(1, 2))
        contained = F[face_ids[~outside]]
        closing, ok = (
            _close_chain_2d(contained) if g.dimension == 2 else _close_chain_3d(contained)
        )
        if ok:
            flipped = F[face_ids[outside]][:, ::-1]
            node.closing = np.concatenate([closing, flipped]) if len(flipped) else closing
            node.closing_ok = _chain_closed([contained, closing], g.dimension)
        else:
            node.closing_ok = False

        node.left = build(face_ids[order[:half]], bmin, left_max)
        node.right = build(face_ids[order[half:]], right_min, bmax)
        return index

    build(np.arange(len(F), dtype=np.int64), box.min_corner.copy(), box.max_corner.copy())
    return hier


def winding_hierarchical(points: Array, hier: WindingHierarchy) -> Array:
    """Winding numbers via tree descent; equals direct summation.

    Points outside a node's box see that node through its closing with
    the sign flipped; points inside recurse; leaves are summed directly.
    """
    single = np.asarray(points).ndim == 1
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    V, F = hier.geometry.vertices, hier.geometry.faces
    w = np.zeros(len(pts))

    stack: list[tuple[int, Array]] = [(0, np.arange(len(pts)))]
    while stack:
        node_id, idx = stack.pop()
        node = hier.nodes[node_id]
        if node.is_leaf:
            w[idx] += _winding_sum(pts[idx], V, F[node.faces])
            continue
        p = pts[idx]
        inside = np.all((p >= node.box_min) & (p <= node.box_max), axis=1)
        if node.closing_ok:
            out = idx[~inside]
            if len(out):
                w[out] -= _winding_sum(pts[out], V, node.closing)
            descend = idx[inside]
        else:
            descend = idx
        if len(descend):
            stack.append((node.left, descend))
            stack.append((node.right, descend))
    return w[0].item() if single else w


def is_inside(points: Array, hier: WindingHierarchy, epsilon_w: float = 0.5) -> Array:
    """Relaxed containment test |w| >= epsilon_w.

    epsilon_w = 0.5 matches the watertight jump; lower values admit
    corrupted geometries with holes or duplicated faces.
    """
    if not 0.0 < epsilon_w <= 1.0:
        raise ValueError("epsilon_w must lie in (0, 1]")
    w = winding_hierarchical(points, hier)
    if np.isscalar(w):
        return abs(w) >= epsilon_w
    return np.abs(w) >= epsilon_w
