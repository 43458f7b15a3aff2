from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fbreg.energy import (
    DiscreteEnergy,
    dirichlet_gradient,
    discrete_energy,
    lipschitz_bound,
    prox_field,
    prox_pointwise,
)
from fbreg.errors import InputError
from fbreg.model import Grid, HalfSpaceSolution, VectorField, make_nonlinearity

LINEAR = make_nonlinearity("linear", [1.0])
FAMILIES = {
    "linear": make_nonlinearity("linear", [1.0]),
    "affine": make_nonlinearity("affine-quadratic", [1.0, 0.5]),
    "exp": make_nonlinearity("exp-saturating", [1.0, 4.0]),
}


def brute_force_radius(r: float, tau: float, N, points: int = 1_000_001) -> float:
    s = np.linspace(0.0, r, points)
    obj = 0.5 * (s - r) ** 2 + tau * N.F(s)
    return float(s[np.argmin(obj)])


def test_energy_hand_example():
    g = Grid.from_bounds([0.0], [1.0], 0.5)
    u = VectorField(g, np.array([[0.0], [0.5], [1.0]]), np.zeros(3, dtype=bool))
    E = DiscreteEnergy(g, LINEAR)
    assert E.dirichlet(u.values, u.mask) == pytest.approx(1.0, abs=1e-15)
    assert E.nonsmooth(u.values, u.mask) == pytest.approx(1.5, abs=1e-15)
    assert discrete_energy(u, E) == pytest.approx(2.5, abs=1e-15)


def test_energy_of_zero_field():
    g = Grid.from_bounds([-1, -1], [1, 1], 0.25)
    u = VectorField(g, np.zeros(g.dims + (2,)), g.boundary_mask())
    assert discrete_energy(u, DiscreteEnergy(g, FAMILIES["exp"])) == 0.0


def test_energy_rejects_foreign_grid():
    g1 = Grid.from_bounds([0.0], [1.0], 0.5)
    g2 = Grid.from_bounds([0.0], [1.0], 0.25)
    u = VectorField(g1, np.zeros((3, 1)), g1.boundary_mask())
    with pytest.raises(InputError):
        discrete_energy(u, DiscreteEnergy(g2, LINEAR))


def test_half_space_energy_converges():
    # on [-1,1]^2 with nu = e_2: int |grad h|^2 + 2|h| = int_0^1 2 t^2 dt * 2 = 4/3
    exact = 4.0 / 3.0
    H = HalfSpaceSolution.from_directions([0, 1], [1, 0], 1.0)
    errs = []
    for h in (1 / 16, 1 / 32, 1 / 64):
        g = Grid.from_bounds([-1, -1], [1, 1], h)
        u = VectorField.from_function(g, H.value, np.zeros(g.dims, dtype=bool))
        errs.append(abs(discrete_energy(u, DiscreteEnergy(g, LINEAR)) - exact))
    assert errs[2] < errs[1] < errs[0]
    assert errs[2] < 0.05


def test_gradient_of_constant_field_vanishes():
    g = Grid.from_bounds([-1, -1], [1, 1], 0.25)
    u = VectorField(g, np.full(g.dims + (2,), 0.7), g.boundary_mask())
    grad = dirichlet_gradient(u, DiscreteEnergy(g, LINEAR)).values
    assert np.max(np.abs(grad)) <= 1e-14


def test_gradient_spike_stencil():
    h = 0.25
    g = Grid.from_bounds([-1, -1], [1, 1], h)
    vals = np.zeros(g.dims + (1,))
    vals[4, 4, 0] = 1.0
    u = VectorField(g, vals, g.boundary_mask())
    grad = dirichlet_gradient(u, DiscreteEnergy(g, LINEAR)).values[..., 0]
    assert grad[4, 4] == pytest.approx(2.0 * 4.0)
    for i, j in ((3, 4), (5, 4), (4, 3), (4, 5)):
        assert grad[i, j] == pytest.approx(-2.0)
    assert np.all(grad[g.boundary_mask()] == 0.0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_gradient_matches_central_differences(n):
    rng = np.random.default_rng(n)
    g = Grid.from_bounds([0.0] * n, [1.0] * n, 0.25)
    mask = g.boundary_mask()
    vals = rng.standard_normal(g.dims + (2,))
    E = DiscreteEnergy(g, LINEAR)
    grad = E.gradient(vals, mask)
    step = 1e-6
    free = np.argwhere(~mask)
    for idx in free[:: max(1, len(free) // 8)]:
        for c in range(2):
            plus = vals.copy()
            minus = vals.copy()
            plus[tuple(idx) + (c,)] += step
            minus[tuple(idx) + (c,)] -= step
            fd = (E.dirichlet(plus, mask) - E.dirichlet(minus, mask)) / (2 * step)
            assert fd == pytest.approx(grad[tuple(idx) + (c,)], rel=1e-6, abs=1e-8)


@pytest.mark.parametrize("n, h, expected", [(2, 0.1, 16.0), (1, 0.5, 16.0)])
def test_lipschitz_examples(n, h, expected):
    g = Grid.from_bounds([0.0] * n, [2.0] * n, h)
    assert lipschitz_bound(DiscreteEnergy(g, LINEAR)) == pytest.approx(expected)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_lipschitz_dominates_power_iteration(n):
    g = Grid.from_bounds([0.0] * n, [1.0] * n, 1.0 / 8)
    mask = g.boundary_mask()
    E = DiscreteEnergy(g, LINEAR)
    rng = np.random.default_rng(0)
    x = rng.standard_normal(g.dims + (1,))
    x[mask] = 0
    lam = 0.0
    for _ in range(300):
        y = E.gradient(x, mask)
        lam = float(np.linalg.norm(y) / np.linalg.norm(x))
        x = y / np.linalg.norm(y)
    assert lam <= lipschitz_bound(E)


def test_prox_examples():
    assert np.allclose(prox_pointwise([0.3, 0.4], 0.1, LINEAR), [0.18, 0.24], atol=1e-15)
    assert np.all(prox_pointwise([0.1, 0.1], 0.1, LINEAR) == 0.0)
    for N in FAMILIES.values():
        assert np.all(prox_pointwise([0.0, 0.0, 0.0], 0.7, N) == 0.0)
    with pytest.raises(InputError):
        prox_pointwise([1.0], 0.0, LINEAR)


@given(
    st.sampled_from(sorted(FAMILIES)),
    st.lists(st.floats(-3, 3), min_size=2, max_size=2),
    st.floats(1e-3, 1.0),
)
def test_prox_matches_scan_and_keeps_direction(family, w, tau):
    N = FAMILIES[family]
    w = np.asarray(w)
    v = prox_pointwise(w, tau, N)
    r = float(np.linalg.norm(w))
    expected = brute_force_radius(r, tau, N, points=200_001)
    assert float(np.linalg.norm(v)) == pytest.approx(expected, abs=2e-5)
    if r > 0 and np.linalg.norm(v) > 0:
        assert np.allclose(v / np.linalg.norm(v), w / r, atol=1e-12)


@given(
    st.sampled_from(sorted(FAMILIES)),
    st.lists(st.floats(-3, 3), min_size=6, max_size=6),
    st.floats(1e-3, 1.0),
)
def test_prox_firmly_nonexpansive(family, w, tau):
    N = FAMILIES[family]
    w1, w2 = np.asarray(w[:3]), np.asarray(w[3:])
    p1, p2 = prox_pointwise(w1, tau, N), prox_pointwise(w2, tau, N)
    d = p1 - p2
    assert float(d @ d) <= float(d @ (w1 - w2)) + 1e-12


def test_prox_field_matches_pointwise():
    rng = np.random.default_rng(3)
    w = rng.standard_normal((50, 3))
    N = FAMILIES["exp"]
    batch = prox_field(w, 0.3, N)
    for i in range(50):
        assert np.allclose(batch[i], prox_pointwise(w[i], 0.3, N), atol=1e-14)
