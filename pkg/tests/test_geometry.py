from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fbreg.errors import DomainError
from fbreg.geometry import (
    ball_quadrature,
    check_ball,
    gradient_at,
    interpolate,
    nodes_in_ball,
    sample_unit_ball,
    unit_ball_volume,
    unit_quadrature,
    unit_sphere_area,
)
from fbreg.model import Grid, HalfSpaceSolution, VectorField

GRID = Grid.from_bounds([-1, -1], [1, 1], 1 / 16)
A = np.array([[0.3, -1.2], [2.0, 0.5], [-0.7, 0.1]])
B = np.array([0.2, -0.4, 1.0])


def _affine(x):
    return x @ A.T + B


def _quadratic(x):
    return np.stack([x[:, 0] ** 2 - 0.5 * x[:, 0] * x[:, 1], 2.0 * x[:, 1] ** 2], axis=1)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("r", [1.0, 0.3])
def test_weights_sum_to_measures(n, r):
    q = ball_quadrature(np.zeros(n), r, (16, 32))
    vol = unit_ball_volume(n) * r**n
    area = unit_sphere_area(n) * r ** (n - 1)
    assert abs(q.volume_weights.sum() - vol) <= 1e-12 * vol
    assert abs(q.surface_weights.sum() - area) <= 1e-12 * area


def test_unit_disc_area():
    assert abs(unit_quadrature(2, (32, 128)).volume_weights.sum() - math.pi) <= 1e-12


def test_second_moment_of_disc():
    q = unit_quadrature(2, (32, 128))
    assert abs(np.dot(q.volume_weights, q.volume_points[:, 1] ** 2) - math.pi / 4) <= 1e-10


def test_sphere_integral_of_sin_power():
    q = unit_quadrature(2, (8, 256))
    sin = q.surface_points[:, 1]
    value = np.dot(q.surface_weights, np.maximum(sin, 0.0) ** 4 / 4)
    assert abs(value - 3 * math.pi / 32) <= 1e-10


def test_three_dimensional_moment():
    q = unit_quadrature(3, (16, 16))
    # integral of z^2 over the unit ball is 4 pi / 15
    assert abs(np.dot(q.volume_weights, q.volume_points[:, 2] ** 2) - 4 * math.pi / 15) <= 1e-12


def test_scaled_rule_matches_direct_rule():
    base = unit_quadrature(2, (12, 40))
    moved = base.scaled([0.2, -0.1], 0.5)
    direct = ball_quadrature([0.2, -0.1], 0.5, (12, 40))
    np.testing.assert_allclose(moved.volume_points, direct.volume_points, atol=1e-15)
    np.testing.assert_allclose(moved.volume_weights, direct.volume_weights, rtol=1e-14)


def test_nonpositive_radius_rejected():
    with pytest.raises(DomainError):
        ball_quadrature([0.0, 0.0], 0.0)


def test_interpolation_at_nodes_is_exact():
    u = VectorField.from_function(GRID, _quadratic)
    pts = GRID.coords().reshape(-1, 2)[::37]
    np.testing.assert_array_equal(interpolate(u, pts), u.values.reshape(-1, 2)[::37])


@given(st.floats(-1, 1), st.floats(-1, 1))
def test_interpolation_reproduces_affine_fields(x, y):
    u = VectorField.from_function(GRID, _affine)
    np.testing.assert_allclose(interpolate(u, [x, y]), _affine(np.array([[x, y]]))[0], atol=1e-13)


def test_interpolation_error_of_quadratic_within_bound():
    u = VectorField.from_function(GRID, _quadratic)
    rng = np.random.default_rng(3)
    pts = rng.uniform(-1, 1, size=(500, 2))
    err = np.abs(interpolate(u, pts) - _quadratic(pts))
    # second derivatives are bounded by 4 in every component
    h = GRID.h
    assert np.all(err <= h * h * 4 / 8 * 2 + 1e-14)


def test_interpolation_outside_hull_rejected():
    u = VectorField.from_function(GRID, _affine)
    with pytest.raises(DomainError):
        interpolate(u, [1.2, 0.0])
    with pytest.raises(DomainError):
        interpolate(u, [0.0, 0.0, 0.0])


def test_gradient_of_affine_field_exact():
    u = VectorField.from_function(GRID, _affine)
    np.testing.assert_allclose(gradient_at(u, [0.13, -0.41]), A, atol=1e-12)


def test_gradient_of_constant_is_zero():
    u = VectorField.from_function(GRID, lambda x: np.ones((len(x), 2)))
    assert np.all(gradient_at(u, [0.3, 0.3]) == 0.0)


def test_gradient_of_half_space_away_from_interface():
    # centered differences are exact on the quadratic branch when x . nu > 2h
    H = HalfSpaceSolution.from_directions([0.0, 1.0], [1.0, 0.0], 1.0)
    x = np.array([0.11, 0.37])
    for inv_h in (16, 32, 64):
        grid = Grid.from_bounds([-1, -1], [1, 1], 1 / inv_h)
        u = VectorField.from_function(grid, H.value)
        np.testing.assert_allclose(gradient_at(u, x), H.gradient(x[None])[0], atol=1e-12)


def test_strict_gradient_needs_margin():
    u = VectorField.from_function(GRID, _affine)
    with pytest.raises(DomainError):
        gradient_at(u, [0.99, 0.0])
    np.testing.assert_allclose(gradient_at(u, [0.99, 0.0], strict=False), A, atol=1e-12)


def test_check_ball_margin():
    u = VectorField.from_function(GRID, _affine)
    check_ball(u, [0.0, 0.0], 0.8)
    with pytest.raises(DomainError):
        check_ball(u, [0.0, 0.0], 0.95)


def test_sample_unit_ball_rescales_two_homogeneous_field():
    H = HalfSpaceSolution.from_directions([0.0, 1.0], [1.0, 0.0], 1.0)
    q = unit_quadrature(2, (8, 32))
    small = sample_unit_ball(H, [0.0, 0.0], 0.1, q)
    big = sample_unit_ball(H, [0.0, 0.0], 0.7, q)
    np.testing.assert_allclose(small.values, big.values, atol=1e-14)
    np.testing.assert_allclose(small.surface_grads, big.surface_grads, atol=1e-14)


def test_nodes_in_ball_count():
    u = VectorField.from_function(GRID, _affine)
    idx = nodes_in_ball(u, [0.0, 0.0], 0.25)
    pts = GRID.coords().reshape(-1, 2)[idx]
    assert np.all(np.linalg.norm(pts, axis=1) <= 0.25 + 1e-12)
    # lattice points of Z^2 in the disc of radius 4
    assert len(idx) == 49
