from __future__ import annotations

import numpy as np
import pytest

from fbreg.errors import DomainError, InputError
from fbreg.oracle import PlanarProfile, exact_linear_1d, reference_radial, reference_solve_1d

from solved import EXP_SAT, LINEAR


def test_contact_solution_example():
    sol = exact_linear_1d(1.0, 0.0, 1.0, 0.125, 0.0)
    assert sol.contact and sol.x1 == 0.5 and sol.x2 == 1.0
    x = np.linspace(0.0, 1.0, 11)
    np.testing.assert_allclose(sol(x), 0.5 * np.maximum(0.5 - x, 0.0) ** 2, atol=1e-16)
    np.testing.assert_allclose(sol.derivative(x), -np.maximum(0.5 - x, 0.0), atol=1e-16)


def test_zero_data_contact_everywhere():
    sol = exact_linear_1d(1.0, 0.0, 1.0, 0.0, 0.0)
    assert sol.x1 == 0.0 and sol.x2 == 1.0
    assert np.all(sol(np.linspace(0, 1, 5)) == 0.0)


def test_grazing_contact():
    sol = exact_linear_1d(2.0, 0.0, 1.0, 0.25, 0.25)
    assert sol.contact and sol.x1 == pytest.approx(0.5) and sol.x2 == pytest.approx(0.5)


def test_no_contact_parabola():
    sol = exact_linear_1d(1.0, 0.0, 1.0, 1.0, 1.0)
    assert not sol.contact
    assert sol(0.0) == pytest.approx(1.0) and sol(1.0) == pytest.approx(1.0)
    assert sol(0.5) == pytest.approx(1.0 - 0.125)
    # u'' = lam on the whole interval
    x = np.array([0.2, 0.4])
    assert np.all(np.diff(sol.derivative(x)) == pytest.approx(0.2))


def test_contact_input_checks():
    with pytest.raises(InputError):
        exact_linear_1d(1.0, 0.0, 1.0, -0.1, 0.0)
    with pytest.raises(InputError):
        exact_linear_1d(0.0, 0.0, 1.0, 0.1, 0.0)


def test_reference_solve_matches_closed_form():
    h = 1 / 32
    ref = reference_solve_1d(LINEAR, 0.0, 1.0, 0.125, 0.0, h)
    exact = exact_linear_1d(1.0, 0.0, 1.0, 0.125, 0.0)
    assert ref.h == h / 4
    assert np.max(np.abs(ref.u - exact(ref.x))) <= 10 * ref.h**2


def test_reference_solve_exp_sat_is_reproducible():
    a = reference_solve_1d(EXP_SAT, 0.0, 1.0, 0.2, 0.0, 1 / 16)
    b = reference_solve_1d(EXP_SAT, 0.0, 1.0, 0.2, 0.0, 1 / 16)
    assert a.u.tobytes() == b.u.tobytes()
    assert np.any(a.u == 0.0) or np.min(a.u) < 1e-10


def test_reference_solve_zero_data_and_checks():
    ref = reference_solve_1d(EXP_SAT, 0.0, 1.0, 0.0, 0.0, 1 / 8)
    assert np.all(ref.u == 0.0)
    with pytest.raises(InputError):
        reference_solve_1d(LINEAR, 0.0, 1.0, 0.1, 0.0, 1 / 8, refinement=2)


def test_planar_linear_profile_is_half_space():
    prof = PlanarProfile(LINEAR, [0.0, 1.0], [1.0, 0.0])
    x = np.array([[0.1, 0.4], [0.3, -0.2]])
    np.testing.assert_allclose(prof.value(x), [[0.08, 0.0], [0.0, 0.0]], atol=1e-16)


def test_planar_profile_solves_first_integral():
    prof = PlanarProfile(EXP_SAT, [0.0, 1.0], [1.0, 0.0], t_max=2.0)
    t = np.linspace(0.05, 1.5, 30)
    U, dU = prof.profile(t)
    # U'' = f(U): compare the derivative of U' with f(U)
    h = 1e-5
    _, up = prof.profile(t + h)
    _, um = prof.profile(t - h)
    np.testing.assert_allclose((up - um) / (2 * h), EXP_SAT.f(U), rtol=1e-6)
    # near zero U behaves like f(0) t^2 / 2
    U_small, _ = prof.profile(np.array([1e-3]))
    assert U_small[0] == pytest.approx(0.5e-6, rel=1e-2)
    with pytest.raises(DomainError):
        prof.profile(np.array([3.0]))


def test_radial_zero_boundary():
    prof = reference_radial(LINEAR, 2, 1.0, 0.0)
    assert np.all(prof.value(np.array([[0.3, 0.1], [0.0, 0.9]])) == 0.0)


def test_radial_linear_without_contact():
    b = 0.5
    prof = reference_radial(LINEAR, 2, 1.0, b, [1.0, 0.0])
    r = np.linspace(0.0, 1.0, 21)
    U, dU = prof.profile(r)
    np.testing.assert_allclose(U, b + (r * r - 1.0) / 4.0, atol=1e-10)
    np.testing.assert_allclose(dU, r / 2.0, atol=1e-10)
    assert prof.contact_radius == 0.0


def test_radial_small_boundary_has_contact_disc():
    prof = reference_radial(EXP_SAT, 2, 1.0, 0.05)
    assert 0.0 < prof.contact_radius < 1.0
    U, _ = prof.profile(np.array([0.5 * prof.contact_radius, 1.0]))
    assert U[0] == 0.0 and U[1] == pytest.approx(0.05, abs=1e-10)


def test_radial_domain_checks():
    prof = reference_radial(LINEAR, 2, 1.0, 0.5)
    assert prof.contains_ball([0.2, 0.0], 0.5) and not prof.contains_ball([0.6, 0.0], 0.5)
    with pytest.raises(DomainError):
        prof.profile(np.array([1.5]))
    with pytest.raises(InputError):
        reference_radial(LINEAR, 2, 1.0, -0.1)
