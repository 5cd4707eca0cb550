"""Quintic spline smoothing kernel and Shepard interpolation.

The same kernel drives both the packing forces and the signed-distance
interpolation; using two different smoothing lengths buys nothing, so a
single instance is passed around.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

Array = np.ndarray

_SIGMA = {1: 1.0 / 120.0, 2: 7.0 / (478.0 * np.pi), 3: 1.0 / (120.0 * np.pi)}


def _profile(q: Array) -> Array:
    """Dimensionless quintic spline w(q), supported on [0, 3)."""
    q = np.asarray(q, dtype=np.float64)
    out = np.zeros_like(q)
    m = q < 3.0
    t = 3.0 - q[m]
    out[m] = t * t * t * t * t
    m = q < 2.0
    t = 2.0 - q[m]
    out[m] -= 6.0 * t * t * t * t * t
    m = q < 1.0
    t = 1.0 - q[m]
    out[m] += 15.0 * t * t * t * t * t
    return out


def _profile_derivative(q: Array) -> Array:
    """dw/dq, branchwise: -5 times the quartic differences."""
    q = np.asarray(q, dtype=np.float64)
    out = np.zeros_like(q)
    m = q < 3.0
    t = 3.0 - q[m]
    out[m] = -5.0 * t * t * t * t
    m = q < 2.0
    t = 2.0 - q[m]
    out[m] += 30.0 * t * t * t * t
    m = q < 1.0
    t = 1.0 - q[m]
    out[m] -= 75.0 * t * t * t * t
    return out


@dataclass(frozen=True)
class QuinticKernel:
    """Quintic spline kernel W(r, h) = w(||r||/h) / h^d with compact support 3h."""

    h: float
    dim: int
    sigma: float = field(init=False)

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("smoothing length must be positive")
        if self.dim not in _SIGMA:
            raise ValueError(f"unsupported dimension {self.dim}")
        object.__setattr__(self, "sigma", _SIGMA[self.dim])

    @property
    def compact_support(self) -> float:
        return 3.0 * self.h

    def value_at_zero(self) -> float:
        # w(0) = 3^5 - 6*2^5 + 15 = 66
        return 66.0 * self.sigma / self.h**self.dim


def kernel_value(kernel: QuinticKernel, r: Array) -> Array:
    """W evaluated at displacement vectors r, shape (..., d) or (d,)."""
    r = np.asarray(r, dtype=np.float64)
    dist = np.linalg.norm(np.atleast_2d(r), axis=-1)
    w = kernel.sigma / kernel.h**kernel.dim * _profile(dist / kernel.h)
    return w if r.ndim > 1 else w[0]


def kernel_value_from_distance(kernel: QuinticKernel, dist: Array) -> Array:
    """W as a function of scalar separation; saves a norm when it is known."""
    return kernel.sigma / kernel.h**kernel.dim * _profile(np.asarray(dist) / kernel.h)


def kernel_gradient(kernel: QuinticKernel, r: Array) -> Array:
    """Analytic gradient of W with respect to r.

    Radial symmetry gives grad W = (sigma / h^{d+1}) w'(q) r/||r||; the
    limit at r = 0 is the zero vector and is returned exactly so that
    coincident particles exert no force.
    """
    r = np.asarray(r, dtype=np.float64)
    single = r.ndim == 1
    r2 = np.atleast_2d(r)
    dist = np.linalg.norm(r2, axis=-1)
    scale = np.zeros_like(dist)
    nz = dist > 0.0
    scale[nz] = (
        kernel.sigma
        / kernel.h ** (kernel.dim + 1)
        * _profile_derivative(dist[nz] / kernel.h)
        / dist[nz]
    )
    grad = r2 * scale[:, None]
    return grad[0] if single else grad


def shepard_interpolate(query: Array, positions: Array, phi: Array, normals: Array,
                        kernel: QuinticKernel) -> tuple[float, Array]:
    """Kernel-weighted average of a signed-distance sample cloud.

    Returns (phi, unit normal) at `query`. The weights are normalized by
    their sum, so any constant field is reproduced exactly. Raises
    ValueError on empty support and on a zero averaged normal; callers
    decide what either condition means.
    """
    query = np.asarray(query, dtype=np.float64)
    w = kernel_value_from_distance(
        kernel, np.linalg.norm(np.atleast_2d(positions) - query, axis=1)
    )
    wsum = w.sum()
    if wsum == 0.0:
        raise ValueError("empty interpolation support")
    phi_q = float(np.dot(w, phi) / wsum)
    n_q = (w[:, None] * normals).sum(axis=0) / wsum
    norm = np.linalg.norm(n_q)
    if norm == 0.0:
        raise ValueError("averaged normal vanishes; direction undefined")
    return phi_q, n_q / norm
