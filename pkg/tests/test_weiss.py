from __future__ import annotations

import math

import numpy as np
import pytest

from fbreg.errors import DomainError, InputError, InsufficientDataError, PreconditionError
from fbreg.geometry import unit_quadrature, sample_unit_ball
from fbreg.model import Grid, HalfSpaceSolution, VectorField
from fbreg.weiss import (
    NON_REGULAR,
    REGULAR,
    TRIVIAL,
    RadialBump,
    alpha_n,
    alpha_n_surface_form,
    classify_density,
    classify_point,
    density_limit,
    domain_variation_residual,
    fit_power_law_offset,
    functional_H,
    functional_M,
    monotonicity_audit,
    radii_ladder,
    weiss_energy,
)

from solved import EXP_SAT, LINEAR

HALF_2D = HalfSpaceSolution.from_directions([0.0, 1.0], [1.0, 0.0], 1.0)
HALF_3D = HalfSpaceSolution.from_directions([0.0, 0.0, 1.0], [1.0, 0.0], 1.0)
ORDERS_2D = (64, 256)


class Zero:
    n, m = 2, 2

    def value(self, x):
        return np.zeros((len(x), 2))

    def gradient(self, x):
        return np.zeros((len(x), 2, 2))


def _unit_field(field, orders=ORDERS_2D):
    q = unit_quadrature(field.n, orders)
    return sample_unit_ball(field, np.zeros(field.n), 1.0, q)


def test_alpha_n_values():
    assert abs(alpha_n(2, 1.0) - math.pi / 8) <= 1e-14
    assert abs(alpha_n(3, 1.0) - 2 * math.pi / 15) <= 1e-14
    assert abs(alpha_n(2, 2.0) - math.pi / 2) <= 1e-14


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_alpha_n_forms_agree(n):
    assert abs(alpha_n(n, 1.3) - alpha_n_surface_form(n, 1.3)) <= 1e-14


def test_alpha_n_rejects_bad_input():
    with pytest.raises(InputError):
        alpha_n(0, 1.0)
    with pytest.raises(InputError):
        alpha_n(2, 0.0)


def test_functional_M_half_space():
    assert abs(functional_M(_unit_field(HALF_2D), 1.0) - math.pi / 16) <= 1e-4
    assert abs(functional_M(_unit_field(HALF_3D, (32, 48)), 1.0) - math.pi / 15) <= 1e-4


def test_functionals_vanish_on_zero_field():
    v = _unit_field(Zero())
    assert functional_M(v, 1.0) == 0.0
    assert functional_H(v, EXP_SAT, 0.1) == 0.0


@pytest.mark.parametrize("s", [1e-3, 0.1, 1.0])
def test_linear_H_equals_M(s):
    v = _unit_field(HALF_2D)
    assert abs(functional_H(v, LINEAR, s) - functional_M(v, 1.0)) <= 1e-12


def test_H_nondecreasing_in_scale_and_tends_to_M():
    v = _unit_field(HALF_2D)
    values = [functional_H(v, EXP_SAT, s) for s in (1e-4, 1e-3, 1e-2, 1e-1, 1.0)]
    assert np.all(np.diff(values) >= -1e-14)
    assert abs(values[0] - functional_M(v, EXP_SAT.f0)) <= 1e-3
    with pytest.raises(InputError):
        functional_H(v, EXP_SAT, 0.0)


@pytest.mark.parametrize("r", [0.05, 0.3, 1.0])
def test_weiss_energy_of_half_space(r):
    assert abs(weiss_energy(HALF_2D, LINEAR, [0.0, 0.0], r, ORDERS_2D) - math.pi / 16) <= 1e-4


def test_weiss_energy_of_half_space_in_three_dimensions():
    assert abs(weiss_energy(HALF_3D, LINEAR, [0.0, 0.0, 0.0], 0.4, (32, 48)) - math.pi / 15) <= 1e-4


def test_weiss_energy_of_zero_field():
    assert weiss_energy(Zero(), EXP_SAT, [0.0, 0.0], 0.5, ORDERS_2D) == 0.0


def test_monotonicity_terms_vanish_on_half_space():
    radii = radii_ladder(0.05, 0.8, 10)
    report = monotonicity_audit(HALF_2D, LINEAR, [0.0, 0.0], radii, orders=ORDERS_2D)
    assert report.monotone
    assert np.max(np.abs(report.T1)) <= 1e-10
    assert np.max(np.abs(report.T2)) <= 1e-10
    assert np.max(np.abs(report.dW)) <= 1e-8
    assert len(report.rows()) == 10


def test_monotonicity_of_zero_field():
    report = monotonicity_audit(Zero(), EXP_SAT, [0.0, 0.0], radii_ladder(0.05, 0.5, 8), orders=ORDERS_2D)
    assert np.all(report.W == 0) and np.all(report.T1 == 0) and np.all(report.T2 == 0)


def test_running_maximum_criterion():
    class Scaled:
        n, m = 2, 2

        def __init__(self, scale):
            self.scale = scale

        def value(self, x):
            return self.scale * HALF_2D.value(x)

        def gradient(self, x):
            return self.scale * HALF_2D.gradient(x)

    class Piecewise:
        """Amplitude 0.9 inside |x| < 0.3 and 1 outside, with the jump ignored in the gradient.

        The sphere term grows faster than the bulk once r passes 0.3, so W drops there.
        """

        n, m = 2, 2

        def _a(self, x):
            return np.where(np.linalg.norm(x, axis=1) < 0.3, 0.9, 1.0)[:, None]

        def value(self, x):
            return self._a(x) * HALF_2D.value(x)

        def gradient(self, x):
            return self._a(x)[..., None] * HALF_2D.gradient(x)

    report = monotonicity_audit(Piecewise(), LINEAR, [0.0, 0.0], [0.1, 0.15, 0.2, 0.25, 0.35, 0.45], orders=ORDERS_2D)
    assert report.violations == [4, 5]
    flat = monotonicity_audit(Scaled(0.9), LINEAR, [0.0, 0.0], [0.1, 0.15, 0.2, 0.25, 0.35, 0.45], orders=ORDERS_2D)
    assert flat.violations == []


def test_radii_requirements():
    with pytest.raises(InsufficientDataError):
        monotonicity_audit(HALF_2D, LINEAR, [0.0, 0.0], [0.1, 0.2, 0.3])
    with pytest.raises(InputError):
        monotonicity_audit(HALF_2D, LINEAR, [0.0, 0.0], [0.1, 0.3, 0.2, 0.4, 0.5, 0.6])
    grid = Grid.from_bounds([-1, -1], [1, 1], 1 / 16)
    u = VectorField.from_function(grid, HALF_2D.value)
    with pytest.raises(DomainError):
        monotonicity_audit(u, LINEAR, [0.0, 0.0], radii_ladder(0.1, 0.6, 6))


def test_radii_ladder_shapes():
    np.testing.assert_allclose(radii_ladder(0.1, 0.4), [0.1, 0.1 * 2**0.5, 0.2, 0.2 * 2**0.5, 0.4])
    lad = radii_ladder(0.01, 0.5, 10)
    assert len(lad) == 10 and lad[0] == 0.01 and abs(lad[-1] - 0.5) < 1e-15
    with pytest.raises(InputError):
        radii_ladder(0.5, 0.1)


def test_density_fit_synthetic_power_law():
    r = np.geomspace(0.05, 0.4, 12)
    fit = fit_power_law_offset(r, 0.19635 + 0.5 * r**2)
    assert abs(fit.W0 - 0.19635) <= 1e-6
    assert abs(fit.exponent - 2.0) <= 0.01
    assert not fit.low_confidence


def test_density_fit_constant():
    fit = fit_power_law_offset(np.geomspace(0.05, 0.4, 8), np.full(8, 0.3))
    assert fit.W0 == pytest.approx(0.3, abs=1e-15)
    assert fit.amplitude == 0.0


def test_density_fit_noisy():
    r = np.geomspace(0.05, 0.4, 12)
    noise = np.random.default_rng(7).normal(0.0, 1e-5, r.size)
    fit = fit_power_law_offset(r, 0.19635 + 0.5 * r**2 + noise)
    assert abs(fit.W0 - 0.19635) <= 1e-4


def test_density_fit_needs_points():
    with pytest.raises(InsufficientDataError):
        fit_power_law_offset([0.1, 0.2], [1.0, 1.0])


def test_density_limit_stores_estimate():
    report = monotonicity_audit(HALF_2D, LINEAR, [0.0, 0.0], radii_ladder(0.05, 0.5, 8), orders=ORDERS_2D)
    fit = density_limit(report)
    assert report.W0_estimate == fit.W0
    assert abs(fit.W0 - math.pi / 16) <= 1e-4


def test_classify_density_thresholds():
    a = alpha_n(2, 1.0)
    assert classify_density(0.0, 2, 1.0) == TRIVIAL
    assert classify_density(a / 2, 2, 1.0) == REGULAR
    assert classify_density(a, 2, 1.0) == NON_REGULAR


def test_classify_point_on_half_space_and_in_zero_set():
    radii = radii_ladder(0.05, 0.3, 8)
    assert classify_point(HALF_2D, LINEAR, [0.0, 0.0], radii, orders=ORDERS_2D).label == REGULAR
    assert classify_point(HALF_2D, LINEAR, [0.0, -0.5], radii, orders=ORDERS_2D).label == TRIVIAL


def test_classify_point_rejects_nondegenerate_point():
    grid = Grid.from_bounds([-1, -1], [1, 1], 1 / 32)
    u = VectorField.from_function(grid, HALF_2D.value)
    with pytest.raises(PreconditionError):
        classify_point(u, LINEAR, [0.0, 0.5], radii_ladder(0.25, 0.4, 6))


def _exact_on_grid(inv_h):
    grid = Grid.from_bounds([-1, -1], [1, 1], 1 / inv_h)
    return VectorField.from_function(grid, HALF_2D.value)


def test_domain_variation_of_exact_half_space_converges():
    xi = RadialBump((0.1, 0.05), 0.6)
    res = [domain_variation_residual(_exact_on_grid(k), LINEAR, xi) for k in (32, 64, 128)]
    assert res[2] <= 1e-3
    assert math.log2(res[0] / res[1]) >= 1.0 and math.log2(res[1] / res[2]) >= 1.0


def test_domain_variation_of_zero_field():
    grid = Grid.from_bounds([-1, -1], [1, 1], 1 / 16)
    u = VectorField(grid, np.zeros(grid.dims + (2,)), grid.boundary_mask())
    assert domain_variation_residual(u, EXP_SAT, RadialBump((0.0, 0.0), 0.5)) == 0.0


def test_domain_variation_support_must_fit():
    with pytest.raises(DomainError):
        domain_variation_residual(_exact_on_grid(16), LINEAR, RadialBump((0.5, 0.0), 0.6))


def test_radial_bump_jacobian_matches_differences():
    xi = RadialBump((0.1, -0.2), 0.5)
    x = np.array([[0.2, 0.0], [-0.1, -0.3]])
    _, jac = xi(x)
    eps = 1e-6
    for j in range(2):
        d = np.zeros(2)
        d[j] = eps
        fd = (xi(x + d)[0] - xi(x - d)[0]) / (2 * eps)
        np.testing.assert_allclose(jac[:, :, j], fd, atol=1e-8)
