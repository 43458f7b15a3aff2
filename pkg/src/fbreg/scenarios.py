"""Standard boundary-value configurations with known or reference solutions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .model import Grid, HalfSpaceSolution, VectorField
from .oracle import PlanarProfile, reference_radial


@dataclass(frozen=True, eq=False)
class Scenario:
    """Grid, Dirichlet data and (when available) the exact continuum solution."""

    name: str
    grid: Grid
    g: VectorField
    N: object
    exact: object | None = None


def _square(n: int, half_width: float, h: float) -> Grid:
    return Grid.from_bounds([-half_width] * n, [half_width] * n, h)


def unit_vector(angle: float, n: int) -> np.ndarray:
    """``(sin a, cos a, 0...)`` for ``n >= 2``; ``(1,)`` in 1-D."""
    if n == 1:
        return np.ones(1)
    v = np.zeros(n)
    v[0], v[-1] = math.sin(angle), math.cos(angle)
    return v


def half_space_scenario(N, h: float, *, n: int = 2, m: int = 2, angle: float = 0.3, half_width: float = 1.0) -> Scenario:
    """Dirichlet data from the half-space solution with normal at ``angle`` from ``e_n``."""
    nu = unit_vector(angle, n)
    e = np.eye(m)[0]
    H = HalfSpaceSolution.from_directions(nu, e, N.f0)
    grid = _square(n, half_width, h)
    g = VectorField.from_function(grid, H.value)
    return Scenario("half-space", grid, g, N, H if N.is_linear else None)


def planar_scenario(
    N, h: float, *, n: int = 2, m: int = 2, angle: float = 0.3, offset: float = 0.0, half_width: float = 1.0
) -> Scenario:
    """Dirichlet data from the exact flat-interface profile of ``N``."""
    nu = unit_vector(angle, n)
    e = np.eye(m)[0]
    prof = PlanarProfile(N, nu, e, offset, t_max=2.0 * half_width * math.sqrt(n) + 1.0)
    grid = _square(n, half_width, h)
    g = VectorField.from_function(grid, prof.value)
    return Scenario("planar", grid, g, N, prof)


def radial_scenario(N, h: float, *, b: float = 0.05, m: int = 2, half_width: float = 1.0) -> Scenario:
    """Radial data ``U(|x|) e`` on the square, with ``U`` the radial solution taking
    the value ``b`` at ``|x| = half_width``; the profile is extended to the corners."""
    e = np.eye(m)[0]
    R = half_width
    base = reference_radial(N, 2, R, b, e)
    reach = R * math.sqrt(2.0) * 1.001
    if base.contact_radius > 0:
        # same contact radius, profile continued to the corners
        prof = _extend_radial(N, base, reach)
    else:
        prof = reference_radial(N, 2, reach, float(base.profile(np.array([reach * 0.999]))[0][0]), e)
    grid = _square(2, half_width, h)
    g = VectorField.from_function(grid, prof.value)
    return Scenario("radial", grid, g, N, prof)


def _extend_radial(N, base, reach: float):
    from .oracle import RadialProfile, _shoot

    sol, _ = _shoot(N, base.n, reach, base.contact_radius, 0.0)
    return RadialProfile(base.n, reach, base.contact_radius, 0.0, sol, base.e, base.center)


def constant_scenario(N, h: float, value, *, n: int = 2, half_width: float = 1.0) -> Scenario:
    value = np.atleast_1d(np.asarray(value, dtype=float))
    grid = _square(n, half_width, h)
    vals = np.broadcast_to(value, grid.dims + value.shape).copy()
    return Scenario("constant", grid, VectorField(grid, vals, grid.boundary_mask()), N)


def contact_1d_scenario(N, h: float, p: float, q: float, a: float = 0.0, b: float = 1.0) -> Scenario:
    if p < 0 or q < 0:
        raise InputError("boundary values must be nonnegative")
    grid = Grid.from_bounds([a], [b], h)
    vals = np.zeros(grid.dims + (1,))
    vals[0, 0], vals[-1, 0] = p, q
    return Scenario("contact-1d", grid, VectorField(grid, vals, grid.boundary_mask()), N)
