from __future__ import annotations

import math

import numpy as np
import pytest

from fbreg.blowup import (
    decay_from_series,
    decay_measurement,
    homogeneity_defect,
    kappa_from_alpha,
    project_to_halfspace,
    rescale,
    sphere_distance_l1,
)
from fbreg.errors import InsufficientDataError, PreconditionError
from fbreg.model import HalfSpaceSolution
from fbreg.scenarios import unit_vector
from fbreg.weiss import radii_ladder

from solved import LINEAR

ORDERS = (32, 256)
NU = unit_vector(0.3, 2)
E = np.array([0.6, -0.8])
HALF = HalfSpaceSolution.from_directions(NU, E, 1.0)
HALF_3D = HalfSpaceSolution.from_directions([0.0, 0.6, 0.8], [0.0, 1.0], 1.0)


class Sum:
    """``base + amplitude * p(x) * direction`` with a quadratic harmonic ``p``."""

    def __init__(self, base, amplitude, direction):
        self.base, self.amplitude, self.direction = base, amplitude, np.asarray(direction, dtype=float)
        self.n, self.m = base.n, base.m

    def value(self, x):
        p = x[:, 0] ** 2 - x[:, 1] ** 2
        return self.base.value(x) + self.amplitude * p[:, None] * self.direction

    def gradient(self, x):
        dp = np.stack([2 * x[:, 0], -2 * x[:, 1]], axis=1)
        return self.base.gradient(x) + self.amplitude * self.direction[None, :, None] * dp[:, None, :]


class Cubic:
    n, m = 2, 1

    def value(self, x):
        return np.linalg.norm(x, axis=1)[:, None] ** 3

    def gradient(self, x):
        r = np.linalg.norm(x, axis=1)
        return (3 * r[:, None] * x)[:, None, :]


def test_rescale_of_half_space_is_scale_free():
    a = rescale(HALF, [0.0, 0.0], 0.4, ORDERS)
    b = rescale(HALF, [0.0, 0.0], 0.2, ORDERS)
    np.testing.assert_allclose(a.values, b.values, atol=1e-14)
    np.testing.assert_allclose(a.surface_values, HALF.value(a.quad.directions), atol=1e-14)
    assert a.radius == 0.4 and np.all(a.center == 0.0)


def test_homogeneity_defect_of_half_space():
    assert homogeneity_defect(rescale(HALF, [0.0, 0.0], 0.5, ORDERS)) <= 1e-12


def test_homogeneity_defect_of_cubic():
    # |x . grad v - 2 v| = rho^3, whose integral 2 pi / 5 also normalizes the defect
    assert abs(homogeneity_defect(rescale(Cubic(), [0.0, 0.0], 1.0, ORDERS)) - 1.0) <= 1e-12


def test_homogeneity_defect_needs_radial_nodes():
    with pytest.raises(InsufficientDataError):
        homogeneity_defect(rescale(HALF, [0.0, 0.0], 0.5, (4, 64)))


def test_projection_recovers_directions():
    p = project_to_halfspace(rescale(HALF, [0.0, 0.0], 1.0, ORDERS), 1.0)
    assert np.linalg.norm(p.nu - NU) <= 1e-6
    assert np.linalg.norm(p.e - E) <= 1e-6
    assert p.residual_constrained <= 1e-6


def test_projection_absorbs_sign_into_e():
    neg = HalfSpaceSolution.from_directions(NU, -E, 1.0)
    p = project_to_halfspace(rescale(neg, [0.0, 0.0], 1.0, ORDERS), 1.0)
    assert np.linalg.norm(p.e + E) <= 1e-6
    assert np.linalg.norm(p.nu - NU) <= 1e-6


def test_projection_three_dimensions():
    p = project_to_halfspace(rescale(HALF_3D, np.zeros(3), 1.0, (16, 32)), 1.0)
    assert np.linalg.norm(p.nu - np.array([0.0, 0.6, 0.8])) <= 1e-4
    assert p.residual_constrained <= 1e-4


def test_projection_of_perturbed_half_space():
    up = HalfSpaceSolution.from_directions([0.0, 1.0], [1.0, 0.0], 1.0)
    field = Sum(up, 0.05, [0.0, 1.0])
    p = project_to_halfspace(rescale(field, [0.0, 0.0], 1.0, ORDERS), 1.0)
    angle = math.degrees(math.acos(min(1.0, float(p.nu @ np.array([0.0, 1.0])))))
    assert angle <= 1.0
    # cos(2 theta) on the unit circle has L2 norm sqrt(pi)
    assert abs(p.residual_constrained - 0.05 * math.sqrt(math.pi)) <= 0.01


def test_projection_of_zero_trace_rejected():
    class Zero:
        n, m = 2, 2

        def value(self, x):
            return np.zeros((len(x), 2))

        def gradient(self, x):
            return np.zeros((len(x), 2, 2))

    with pytest.raises(PreconditionError):
        project_to_halfspace(rescale(Zero(), [0.0, 0.0], 1.0, ORDERS), 1.0)


def test_sphere_distance():
    v = rescale(HALF, [0.0, 0.0], 1.0, ORDERS)
    assert sphere_distance_l1(v, HALF) == 0.0


def test_kappa_inversion():
    assert kappa_from_alpha(4.0, 2) == 0.5


def test_synthetic_decay_recovers_one_half():
    r = np.geomspace(0.01, 0.4, 12)
    rep = decay_from_series(r, r**4, r**2, 2)
    assert abs(rep.alpha_G - 4.0) <= 1e-10
    assert abs(rep.kappa_hat - 0.5) <= 0.02
    assert rep.consistency <= 0.05
    assert rep.verdict == "decay confirmed"
    assert rep.to_dict()["kappa_hat"] == rep.kappa_hat


def test_negative_excess_is_flagged():
    r = np.geomspace(0.01, 0.4, 8)
    rep = decay_from_series(r, -(r**4) - 1e-3, r**2, 2)
    assert "monotonicity-violation" in rep.flags


def test_exact_half_space_is_already_homogeneous():
    up = HalfSpaceSolution.from_directions([0.0, 1.0], [1.0, 0.0], 1.0)
    rep = decay_measurement(up, LINEAR, [0.0, 0.0], radii_ladder(0.01, 0.4, 10), orders=ORDERS)
    assert rep.verdict == "already homogeneous"
    assert abs(rep.W0 - math.pi / 16) <= 1e-4


def test_decay_needs_decades_and_regular_point():
    up = HalfSpaceSolution.from_directions([0.0, 1.0], [1.0, 0.0], 1.0)
    with pytest.raises(InsufficientDataError):
        decay_measurement(up, LINEAR, [0.0, 0.0], radii_ladder(0.05, 0.4, 8), orders=ORDERS)
    with pytest.raises(PreconditionError):
        decay_measurement(up, LINEAR, [0.0, -0.5], radii_ladder(0.01, 0.4, 10), orders=ORDERS)
