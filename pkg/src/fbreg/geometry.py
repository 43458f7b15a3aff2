"""Point evaluation of fields and quadrature over balls and spheres.

Grid fields are evaluated by multilinear interpolation of nodal values;
gradients by multilinear interpolation of centered-difference nodal
gradients. Any other object exposing ``value(points)`` and
``gradient(points)`` (for example :class:`~fbreg.model.HalfSpaceSolution`)
is treated as an analytic field and evaluated directly.
"""

from __future__ import annotations

import itertools
import math
import weakref
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .model import VectorField

_HULL_EPS = 1e-10
_nodal_grad_cache: "weakref.WeakKeyDictionary[VectorField, np.ndarray]" = weakref.WeakKeyDictionary()


def _as_points(x, n: int) -> tuple[np.ndarray, bool]:
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != n:
        raise DomainError(f"points must have {n} coordinates, got shape {pts.shape}")
    return pts, single


def _locate(u: VectorField, pts: np.ndarray, margin: float = 0.0):
    grid = u.grid
    lo = grid.lower + margin
    hi = grid.upper - margin
    tol = _HULL_EPS * max(1.0, grid.h)
    if np.any(pts < lo - tol) or np.any(pts > hi + tol):
        bad = pts[np.any((pts < lo - tol) | (pts > hi + tol), axis=1)][0]
        if margin:
            raise DomainError(f"point {bad} is closer than {margin:g} to the grid hull")
        raise DomainError(f"point {bad} lies outside the grid hull [{lo}, {hi}]")
    t = (pts - grid.lower) / grid.h
    dims = np.asarray(grid.dims)
    i = np.clip(np.floor(t).astype(int), 0, dims - 2)
    return i, t - i


def _multilinear(arr: np.ndarray, i: np.ndarray, frac: np.ndarray) -> np.ndarray:
    n = i.shape[1]
    tail = arr.shape[n:]
    out = np.zeros((i.shape[0],) + tail)
    for corner in itertools.product((0, 1), repeat=n):
        w = np.ones(i.shape[0])
        for a, c in enumerate(corner):
            w = w * (frac[:, a] if c else 1.0 - frac[:, a])
        idx = tuple(i[:, a] + c for a, c in enumerate(corner))
        out += w.reshape((-1,) + (1,) * len(tail)) * arr[idx]
    return out


def interpolate(u: VectorField, x) -> np.ndarray:
    """Multilinear interpolation of ``u`` at ``x`` (one point or ``(P, n)``)."""
    pts, single = _as_points(x, u.n)
    i, frac = _locate(u, pts)
    out = _multilinear(u.values, i, frac)
    return out[0] if single else out


def nodal_gradients(u: VectorField) -> np.ndarray:
    """Centered-difference gradients at every node, shape ``dims + (m, n)``.

    One-sided differences are used on the hull.
    """
    cached = _nodal_grad_cache.get(u)
    if cached is not None:
        return cached
    grads = [np.gradient(u.values, u.grid.h, axis=a) for a in range(u.n)]
    out = np.stack(grads, axis=-1)
    out.setflags(write=False)
    _nodal_grad_cache[u] = out
    return out


def gradient_at(u: VectorField, x, *, strict: bool = True) -> np.ndarray:
    """Interpolated gradient ``(m, n)`` (or ``(P, m, n)``) at ``x``.

    With ``strict`` the points must keep a distance ``h`` from the hull,
    where the nodal differences are centered.
    """
    pts, single = _as_points(x, u.n)
    i, frac = _locate(u, pts, margin=u.grid.h if strict else 0.0)
    out = _multilinear(nodal_gradients(u), i, frac)
    return out[0] if single else out


def field_values(field, pts: np.ndarray) -> np.ndarray:
    if isinstance(field, VectorField):
        return interpolate(field, pts)
    return np.asarray(field.value(pts), dtype=float)


def field_gradients(field, pts: np.ndarray) -> np.ndarray:
    if isinstance(field, VectorField):
        return gradient_at(field, pts, strict=False)
    return np.asarray(field.gradient(pts), dtype=float)


def field_dim(field) -> int:
    return field.n


def grid_spacing(field) -> float | None:
    return field.grid.h if isinstance(field, VectorField) else None


def check_ball(field, center, r: float) -> None:
    """Require ``B_{r + 2h}(center)`` inside the hull of a grid field.

    Analytic fields may restrict their domain through ``contains_ball``.
    """
    center = np.asarray(center, dtype=float)
    if not isinstance(field, VectorField):
        contains = getattr(field, "contains_ball", None)
        if contains is not None and not contains(center, r):
            raise DomainError(f"ball of radius {r:g} at {center} leaves the field's domain")
        return
    margin = r + 2.0 * field.grid.h
    lo = field.grid.lower
    hi = field.grid.upper
    slack = np.minimum(center - lo, hi - center)
    if np.any(slack < margin - _HULL_EPS):
        raise DomainError(
            f"ball of radius {r:g} at {center} needs margin {margin:g} to the hull, "
            f"only {slack.min():g} available"
        )


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def unit_sphere_area(n: int) -> float:
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


@dataclass(frozen=True, eq=False)
class BallQuadrature:
    """Product rule on ``B_r(center)``: Gauss-Legendre in the radius times an
    angular rule on the unit sphere.

    ``radial_weights`` integrate ``g(rho) rho**(n-1)`` over ``[0, r]``.
    """

    center: np.ndarray
    radius: float
    radial_nodes: np.ndarray
    radial_weights: np.ndarray
    directions: np.ndarray
    angular_weights: np.ndarray

    @property
    def n(self) -> int:
        return self.directions.shape[1]

    @property
    def volume_points(self) -> np.ndarray:
        pts = self.radial_nodes[:, None, None] * self.directions[None, :, :]
        return self.center + pts.reshape(-1, self.n)

    @property
    def volume_weights(self) -> np.ndarray:
        return np.outer(self.radial_weights, self.angular_weights).ravel()

    @property
    def surface_points(self) -> np.ndarray:
        return self.center + self.radius * self.directions

    @property
    def surface_weights(self) -> np.ndarray:
        return self.angular_weights * self.radius ** (self.n - 1)

    @property
    def volume_directions(self) -> np.ndarray:
        return np.broadcast_to(
            self.directions[None], (len(self.radial_nodes),) + self.directions.shape
        ).reshape(-1, self.n)

    @property
    def volume_radii(self) -> np.ndarray:
        return np.repeat(self.radial_nodes, len(self.angular_weights))

    def scaled(self, center, radius: float) -> "BallQuadrature":
        """Same rule moved to ``B_radius(center)``."""
        k = radius / self.radius
        return BallQuadrature(
            center=np.asarray(center, dtype=float),
            radius=float(radius),
            radial_nodes=self.radial_nodes * k,
            radial_weights=self.radial_weights * k**self.n,
            directions=self.directions,
            angular_weights=self.angular_weights,
        )


def default_orders(n: int, r: float, h: float | None) -> tuple[int, int]:
    """``(N_r, N_ang)``; ``N_ang`` counts angles (n=2) or polar Gauss nodes (n=3)."""
    ratio = 0.0 if h is None else r / h
    n_r = max(32, math.ceil(4.0 * ratio))
    if n == 2:
        n_ang = max(128, math.ceil(2.0 * math.pi * ratio))
        n_ang += -n_ang % 4
    elif n == 3:
        n_ang = max(32, math.ceil(math.pi * ratio))
    else:
        n_ang = 2
    return n_r, n_ang


def sphere_rule(n: int, n_ang: int) -> tuple[np.ndarray, np.ndarray]:
    """Directions and weights of the angular rule on the unit sphere of ``R^n``."""
    if n == 1:
        return np.array([[1.0], [-1.0]]), np.ones(2)
    if n == 2:
        theta = 2.0 * np.pi * np.arange(n_ang) / n_ang
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        return dirs, np.full(n_ang, 2.0 * np.pi / n_ang)
    if n == 3:
        n_phi = 2 * n_ang
        c, wc = np.polynomial.legendre.leggauss(n_ang)
        phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
        sin = np.sqrt(1.0 - c * c)
        dirs = np.stack(
            [
                np.outer(sin, np.cos(phi)).ravel(),
                np.outer(sin, np.sin(phi)).ravel(),
                np.repeat(c, n_phi),
            ],
            axis=1,
        )
        return dirs, np.outer(wc, np.full(n_phi, 2.0 * np.pi / n_phi)).ravel()
    raise DomainError(f"unsupported dimension {n}")


def ball_quadrature(
    center,
    r: float,
    orders: tuple[int, int] | None = None,
    *,
    h: float | None = None,
) -> BallQuadrature:
    """Deterministic product quadrature on ``B_r(center)``.

    ``orders`` defaults to ``N_r = max(32, ceil(4 r / h))`` radial nodes and
    ``max(128, ceil(2 pi r / h))`` angles in 2-D (rounded up to a multiple of
    4 so that the axes are nodes).
    """
    center = np.asarray(center, dtype=float)
    n = center.size
    if not r > 0:
        raise DomainError("ball radius must be positive")
    n_r, n_ang = orders if orders is not None else default_orders(n, r, h)
    x, w = np.polynomial.legendre.leggauss(n_r)
    rho = 0.5 * r * (x + 1.0)
    w_r = 0.5 * r * w * rho ** (n - 1)
    dirs, w_a = sphere_rule(n, n_ang)
    return BallQuadrature(center, float(r), rho, w_r, dirs, w_a)


@dataclass(frozen=True, eq=False)
class UnitBallField:
    """Values and gradients of a field sampled on a unit-ball quadrature.

    ``values``/``grads`` live on the volume nodes, ``surface_values`` and
    ``surface_grads`` on the unit sphere.
    """

    quad: BallQuadrature
    values: np.ndarray
    grads: np.ndarray
    surface_values: np.ndarray
    surface_grads: np.ndarray

    @property
    def n(self) -> int:
        return self.quad.n

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def integrate(self, g: np.ndarray) -> float:
        return float(np.dot(self.quad.volume_weights, g))

    def integrate_surface(self, g: np.ndarray) -> float:
        return float(np.dot(self.quad.surface_weights, g))


def unit_quadrature(n: int, orders: tuple[int, int] | None = None) -> BallQuadrature:
    return ball_quadrature(np.zeros(n), 1.0, orders)


def sample_unit_ball(field, center, r: float, quad: BallQuadrature) -> UnitBallField:
    """Samples of ``x -> field(center + r x) / r**2`` on the unit-ball rule ``quad``."""
    center = np.asarray(center, dtype=float)
    check_ball(field, center, r)
    vol = center + r * (quad.volume_points - quad.center)
    surf = center + r * quad.directions
    values = field_values(field, vol) / r**2
    grads = field_gradients(field, vol) / r
    s_values = field_values(field, surf) / r**2
    s_grads = field_gradients(field, surf) / r
    return UnitBallField(quad, values, grads, s_values, s_grads)


def nodes_in_ball(u: VectorField, center, r: float) -> np.ndarray:
    """Flat indices of grid nodes inside the closed ball."""
    center = np.asarray(center, dtype=float)
    pts = u.grid.coords().reshape(-1, u.n)
    return np.flatnonzero(np.sum((pts - center) ** 2, axis=1) <= r * r * (1 + 1e-12))
