"""Kernel identities checked against quadrature and finite differences."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sphprep import QuinticKernel, kernel_gradient, kernel_value, shepard_interpolate
from sphprep.kernels import kernel_value_from_distance

Array = np.ndarray


def _simpson(f, a: float, b: float, n: int = 512) -> float:
    """Composite Simpson rule with n (even) intervals."""
    x = np.linspace(a, b, n + 1)
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float((b - a) / (3.0 * n) * np.dot(w, f(x)))


@pytest.mark.parametrize("dim", [2, 3])
@pytest.mark.parametrize("h", [0.08, 0.5, 1.0])
def test_unit_volume_integral(dim, h):
    """Integrating W over its support must give exactly one particle."""
    kernel = QuinticKernel(h=h, dim=dim)
    surface = (lambda r: 2.0 * np.pi * r) if dim == 2 else (lambda r: 4.0 * np.pi * r**2)

    def integrand(r):
        return kernel_value_from_distance(kernel, r) * surface(r)

    # integrate each polynomial piece separately so the rule never
    # straddles a knot of the spline
    total = sum(_simpson(integrand, k * h, (k + 1) * h) for k in range(3))
    assert abs(total - 1.0) <= 1e-6


@pytest.mark.parametrize("dim", [2, 3])
def test_gradient_matches_finite_differences(dim):
    kernel = QuinticKernel(h=0.3, dim=dim)
    rng = np.random.default_rng(7)
    directions = rng.normal(size=(40, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = np.linspace(0.1, 2.7, 40) * kernel.h
    step = 1e-6 * kernel.h
    for u, r in zip(directions, radii):
        grad = kernel_gradient(kernel, r * u)
        ahead = kernel_value_from_distance(kernel, r + step)
        behind = kernel_value_from_distance(kernel, r - step)
        radial_fd = (ahead - behind) / (2.0 * step)
        radial = float(np.dot(grad, u))
        assert abs(radial - radial_fd) <= 1e-6 * max(abs(radial), 1.0)


def test_support_is_compact():
    kernel = QuinticKernel(h=0.25, dim=2)
    assert kernel.compact_support == pytest.approx(3 * 0.25)
    far = np.array([[kernel.compact_support, 0.0], [5.0, 5.0]])
    assert np.all(kernel_value(kernel, far) == 0.0)
    assert np.all(kernel_gradient(kernel, far) == 0.0)


def test_profile_continuous_at_knots():
    kernel = QuinticKernel(h=1.0, dim=3)
    scale = kernel.value_at_zero()
    for knot in (1.0, 2.0, 3.0):
        below = np.nextafter(knot, 0.0)
        above = np.nextafter(knot, 4.0)
        values = kernel_value_from_distance(kernel, np.array([below, above]))
        assert abs(values[0] - values[1]) <= 1e-12 * scale
        grads = kernel_gradient(
            kernel, np.array([[below, 0.0, 0.0], [above, 0.0, 0.0]])
        )
        assert abs(grads[0, 0] - grads[1, 0]) <= 1e-9 * scale


def test_radial_profile_monotone():
    kernel = QuinticKernel(h=0.4, dim=2)
    r = np.linspace(0.0, kernel.compact_support, 400)
    values = kernel_value_from_distance(kernel, r)
    assert np.all(np.diff(values) <= 1e-15)
    assert values[0] == pytest.approx(kernel.value_at_zero())


def test_gradient_vanishes_at_origin():
    kernel = QuinticKernel(h=0.2, dim=3)
    assert np.all(kernel_gradient(kernel, np.zeros(3)) == 0.0)


def test_value_agrees_with_distance_form():
    kernel = QuinticKernel(h=0.37, dim=3)
    rng = np.random.default_rng(11)
    vecs = rng.normal(scale=0.3, size=(100, 3))
    direct = kernel_value(kernel, vecs)
    via_norm = kernel_value_from_distance(kernel, np.linalg.norm(vecs, axis=1))
    assert np.array_equal(direct, via_norm)


@settings(max_examples=60, deadline=None)
@given(
    h=st.floats(0.01, 10.0),
    dim=st.sampled_from([2, 3]),
    q=st.floats(0.0, 2.999),
    scale=st.floats(0.1, 10.0),
)
def test_kernel_scale_invariance(h, dim, q, scale):
    """W(sr; sh) s^d == W(r; h): resolution only rescales, never reshapes."""
    base = QuinticKernel(h=h, dim=dim)
    scaled = QuinticKernel(h=scale * h, dim=dim)
    r = q * h
    a = kernel_value_from_distance(base, r)
    b = kernel_value_from_distance(scaled, scale * r) * scale**dim
    assert a >= 0.0
    assert a <= base.value_at_zero() * (1.0 + 1e-12)
    assert b == pytest.approx(a, rel=1e-10, abs=1e-300)


@settings(max_examples=60, deadline=None)
@given(data=st.data(), dim=st.sampled_from([2, 3]))
def test_gradient_points_inward(data, dim):
    kernel = QuinticKernel(h=1.0, dim=dim)
    coords = data.draw(
        st.lists(st.floats(-1.7, 1.7), min_size=dim, max_size=dim)
    )
    r = np.array(coords)
    assert float(np.dot(r, kernel_gradient(kernel, r))) <= 0.0


def test_shepard_reproduces_constants():
    kernel = QuinticKernel(h=0.3, dim=2)
    rng = np.random.default_rng(3)
    cloud = rng.uniform(-0.5, 0.5, size=(60, 2))
    phi = np.full(60, 0.8125)
    normals = np.tile([0.6, 0.8], (60, 1))
    value, normal = shepard_interpolate(np.zeros(2), cloud, phi, normals, kernel)
    assert abs(value - 0.8125) <= 1e-12
    np.testing.assert_allclose(normal, [0.6, 0.8], atol=1e-12)
    assert np.linalg.norm(normal) == pytest.approx(1.0, abs=1e-12)


def test_shepard_weighted_average_between_two_samples():
    kernel = QuinticKernel(h=1.0, dim=2)
    cloud = np.array([[-0.5, 0.0], [1.0, 0.0]])
    phi = np.array([2.0, -4.0])
    normals = np.array([[1.0, 0.0], [1.0, 0.0]])
    w = kernel_value_from_distance(kernel, np.array([0.5, 1.0]))
    expected = float(np.dot(w, phi) / w.sum())
    value, _ = shepard_interpolate(np.zeros(2), cloud, phi, normals, kernel)
    assert value == pytest.approx(expected, rel=1e-14)


def test_shepard_empty_support_raises():
    kernel = QuinticKernel(h=0.1, dim=2)
    cloud = np.array([[5.0, 5.0]])
    with pytest.raises(ValueError, match="support"):
        shepard_interpolate(np.zeros(2), cloud, np.zeros(1), np.ones((1, 2)), kernel)


def test_shepard_cancelling_normals_raise():
    kernel = QuinticKernel(h=1.0, dim=2)
    cloud = np.array([[0.5, 0.0], [-0.5, 0.0]])
    normals = np.array([[1.0, 0.0], [-1.0, 0.0]])
    with pytest.raises(ValueError, match="normal"):
        shepard_interpolate(np.zeros(2), cloud, np.zeros(2), normals, kernel)
