"""Compiled neighbor loops for the relaxation inner kernels.

Everything here is gather-style: each output row is reduced by exactly
one thread, with neighbor cells visited in a fixed order and particles
within a cell in sorted order. Results are therefore bitwise identical
for any thread count. Scatter-style reductions would be faster on paper
but give up that reproducibility.

Cell tables are flat CSR structures over linearized integer cell keys;
out-of-range neighbor coordinates are skipped per axis before the key
is formed, so distinct cells can never alias.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

Array = np.ndarray


@dataclass
class CellTable:
    """Sorted particle-in-cell index, queryable from compiled code."""

    cell_size: float
    origin: Array        # (d,) int64 minimum cell coordinate
    shape: Array         # (d,) int64 cells per axis
    strides: Array       # (d,) int64 linearization strides
    keys: Array          # (n_cells,) int64 sorted unique linear keys
    starts: Array        # (n_cells,) int64 slice starts into `order`
    ends: Array          # (n_cells,) int64 slice ends
    order: Array         # (n,) int64 member indices, sorted by key
    offsets: Array       # (3**d, d) int64 neighbor cell offsets


def build_cell_table(positions: Array, cell_size: float) -> CellTable:
    if len(positions) == 0:
        raise ValueError("cannot build a cell table over zero points")
    coords = np.floor(positions / cell_size).astype(np.int64)
    origin = coords.min(axis=0)
    shape = coords.max(axis=0) - origin + 1
    d = positions.shape[1]
    strides = np.ones(d, dtype=np.int64)
    for k in range(d - 2, -1, -1):
        strides[k] = strides[k + 1] * shape[k + 1]
    linear = ((coords - origin) * strides).sum(axis=1)
    order = np.argsort(linear, kind="stable").astype(np.int64)
    sorted_keys = linear[order]
    keys, starts = np.unique(sorted_keys, return_index=True)
    ends = np.append(starts[1:], len(order))
    offsets = np.array(
        list(itertools.product((-1, 0, 1), repeat=d)), dtype=np.int64
    )
    return CellTable(
        cell_size=cell_size, origin=origin, shape=shape, strides=strides,
        keys=keys, starts=starts.astype(np.int64), ends=ends.astype(np.int64),
        order=order, offsets=offsets,
    )


@njit(inline="always", cache=True)
def _profile(q: float) -> float:
    if q >= 3.0:
        return 0.0
    s = (3.0 - q) ** 5
    if q < 2.0:
        s -= 6.0 * (2.0 - q) ** 5
    if q < 1.0:
        s += 15.0 * (1.0 - q) ** 5
    return s


@njit(inline="always", cache=True)
def _profile_derivative(q: float) -> float:
    if q >= 3.0:
        return 0.0
    s = -5.0 * (3.0 - q) ** 4
    if q < 2.0:
        s += 30.0 * (2.0 - q) ** 4
    if q < 1.0:
        s -= 75.0 * (1.0 - q) ** 4
    return s


@njit(inline="always", cache=True)
def _cell_slot(keys: Array, key: np.int64) -> int:
    lo, hi = 0, keys.shape[0]
    while lo < hi:
        mid = (lo + hi) >> 1
        if keys[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    if lo < keys.shape[0] and keys[lo] == key:
        return lo
    return -1


@njit(parallel=True, cache=True)
def _density_kernel(
    eval_pos, source_pos, masses,
    cell_size, origin, shape, strides, keys, starts, ends, order, offsets,
    h, norm, out,
):
    n, d = eval_pos.shape
    support2 = (3.0 * h) ** 2
    for i in prange(n):
        acc = 0.0
        for o in range(offsets.shape[0]):
            key = np.int64(0)
            valid = True
            for k in range(d):
                c = np.int64(math.floor(eval_pos[i, k] / cell_size)) - origin[k] + offsets[o, k]
                if c < 0 or c >= shape[k]:
                    valid = False
                    break
                key += c * strides[k]
            if not valid:
                continue
            slot = _cell_slot(keys, key)
            if slot < 0:
                continue
            for t in range(starts[slot], ends[slot]):
                j = order[t]
                r2 = 0.0
                for k in range(d):
                    dx = eval_pos[i, k] - source_pos[j, k]
                    r2 += dx * dx
                if r2 < support2:
                    acc += masses[j] * _profile(math.sqrt(r2) / h)
        out[i] = acc * norm


@njit(parallel=True, cache=True)
def _acceleration_kernel(
    eval_pos, source_pos, masses, rho,
    cell_size, origin, shape, strides, keys, starts, ends, order, offsets,
    h, grad_norm, out,
):
    n, d = eval_pos.shape
    support2 = (3.0 * h) ** 2
    for i in prange(n):
        ax = 0.0
        ay = 0.0
        az = 0.0
        for o in range(offsets.shape[0]):
            key = np.int64(0)
            valid = True
            for k in range(d):
                c = np.int64(math.floor(eval_pos[i, k] / cell_size)) - origin[k] + offsets[o, k]
                if c < 0 or c >= shape[k]:
                    valid = False
                    break
                key += c * strides[k]
            if not valid:
                continue
            slot = _cell_slot(keys, key)
            if slot < 0:
                continue
            for t in range(starts[slot], ends[slot]):
                j = order[t]
                r2 = 0.0
                for k in range(d):
                    dx = eval_pos[i, k] - source_pos[j, k]
                    r2 += dx * dx
                if r2 <= 0.0 or r2 >= support2:
                    continue
                dist = math.sqrt(r2)
                scale = masses[j] / rho[j] * _profile_derivative(dist / h) / dist
                ax += scale * (eval_pos[i, 0] - source_pos[j, 0])
                ay += scale * (eval_pos[i, 1] - source_pos[j, 1])
                if d == 3:
                    az += scale * (eval_pos[i, 2] - source_pos[j, 2])
        factor = -2.0 / rho[i] * grad_norm
        out[i, 0] = factor * ax
        out[i, 1] = factor * ay
        if d == 3:
            out[i, 2] = factor * az


@njit(parallel=True, cache=True)
def _shepard_kernel(
    eval_pos, cloud_pos, cloud_phi, cloud_normals,
    cell_size, origin, shape, strides, keys, starts, ends, order, offsets,
    h, out_phi, out_normal, out_wsum,
):
    n, d = eval_pos.shape
    support2 = (3.0 * h) ** 2
    for i in prange(n):
        wsum = 0.0
        psum = 0.0
        nx = 0.0
        ny = 0.0
        nz = 0.0
        for o in range(offsets.shape[0]):
            key = np.int64(0)
            valid = True
            for k in range(d):
                c = np.int64(math.floor(eval_pos[i, k] / cell_size)) - origin[k] + offsets[o, k]
                if c < 0 or c >= shape[k]:
                    valid = False
                    break
                key += c * strides[k]
            if not valid:
                continue
            slot = _cell_slot(keys, key)
            if slot < 0:
                continue
            for t in range(starts[slot], ends[slot]):
                j = order[t]
                r2 = 0.0
                for k in range(d):
                    dx = eval_pos[i, k] - cloud_pos[j, k]
                    r2 += dx * dx
                if r2 >= support2:
                    continue
                w = _profile(math.sqrt(r2) / h)
                wsum += w
                psum += cloud_phi[j] * w
                nx += cloud_normals[j, 0] * w
                ny += cloud_normals[j, 1] * w
                if d == 3:
                    nz += cloud_normals[j, 2] * w
        out_wsum[i] = wsum
        if wsum > 0.0:
            out_phi[i] = psum / wsum
        else:
            out_phi[i] = np.nan
        out_normal[i, 0] = nx
        out_normal[i, 1] = ny
        if d == 3:
            out_normal[i, 2] = nz


def density_field(
    eval_pos: Array, source_pos: Array, masses: Array, table: CellTable, h: float, sigma: float
) -> Array:
    """Kernel-weighted mass sum at eval_pos over the tabulated sources."""
    out = np.empty(len(eval_pos))
    _density_kernel(
        eval_pos, source_pos, masses,
        table.cell_size, table.origin, table.shape, table.strides,
        table.keys, table.starts, table.ends, table.order, table.offsets,
        h, sigma / h ** eval_pos.shape[1], out,
    )
    return out


def pressure_acceleration(
    eval_pos: Array,
    source_pos: Array,
    masses: Array,
    rho: Array,
    table: CellTable,
    h: float,
    sigma: float,
    background_pressure: float,
) -> Array:
    """Constant-pressure transport acceleration at eval_pos.

    The pressure multiplies the unit-pressure result outside the
    compiled loop, so scaling the pressure scales the output exactly.
    """
    d = eval_pos.shape[1]
    out = np.empty_like(eval_pos)
    _acceleration_kernel(
        eval_pos, source_pos, masses, rho,
        table.cell_size, table.origin, table.shape, table.strides,
        table.keys, table.starts, table.ends, table.order, table.offsets,
        h, sigma / h ** (d + 1), out,
    )
    return out * background_pressure


def shepard_field(
    eval_pos: Array, cloud_pos: Array, phi: Array, normals: Array,
    table: CellTable, h: float,
) -> tuple[Array, Array, Array]:
    """Shepard-averaged distance and raw averaged normal per query.

    Queries with empty support get phi = nan, wsum = 0; the profile
    normalization cancels in the quotient, so it is left out entirely.
    """
    out_phi = np.empty(len(eval_pos))
    out_normal = np.empty_like(eval_pos)
    out_wsum = np.empty(len(eval_pos))
    _shepard_kernel(
        eval_pos, cloud_pos, phi, normals,
        table.cell_size, table.origin, table.shape, table.strides,
        table.keys, table.starts, table.ends, table.order, table.offsets,
        h, out_phi, out_normal, out_wsum,
    )
    return out_phi, out_normal, out_wsum
