"""Free boundary extraction and the audits built on it.

The free boundary is located as the ``theta_pos`` level set of ``|u|``: on
every grid edge where ``|u|`` crosses the level, the crossing of the linearly
interpolated vector is solved exactly (a quadratic in the edge parameter),
so the multilinear interpolant returns ``theta_pos`` at every extracted
point. This is the vertex set of marching squares (n=2) and of the
cell-face contours used in 3-D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .errors import DomainError, InputError, InsufficientDataError, PreconditionError
from .geometry import (
    ball_quadrature,
    check_ball,
    field_gradients,
    field_values,
    gradient_at,
    grid_spacing,
    nodal_gradients,
    nodes_in_ball,
)
from .model import HalfSpaceSolution, VectorField


@dataclass(frozen=True, eq=False)
class FreeBoundarySet:
    """Extracted free boundary points and their ``Gamma0``/``Gamma1`` split."""

    points: np.ndarray
    grad_norm: np.ndarray
    degenerate: np.ndarray
    theta_pos: float
    theta_grad: float
    h: float

    def __len__(self) -> int:
        return len(self.points)

    @property
    def labels(self) -> list[str]:
        return ["Gamma0" if d else "Gamma1" for d in self.degenerate]

    @property
    def gamma0(self) -> np.ndarray:
        return self.points[self.degenerate]

    @property
    def gamma1(self) -> np.ndarray:
        return self.points[~self.degenerate]


def default_theta_pos(f0: float, h: float) -> float:
    return 1e-2 * f0 * h * h


def _edge_crossings(u: VectorField, theta: float) -> np.ndarray:
    grid = u.grid
    n = u.n
    vals = u.values
    r = u.norm()
    coords = grid.coords()
    above = r > theta
    out = []
    for a in range(n):
        lo = [slice(None)] * n
        hi = [slice(None)] * n
        lo[a] = slice(None, -1)
        hi[a] = slice(1, None)
        lo, hi = tuple(lo), tuple(hi)
        cross = (above[lo] != above[hi]) & ~(u.mask[lo] & u.mask[hi])
        if not np.any(cross):
            continue
        va = vals[lo][cross]
        d = vals[hi][cross] - va
        A = np.sum(d * d, axis=1)
        B = 2.0 * np.sum(va * d, axis=1)
        C = np.sum(va * va, axis=1) - theta * theta
        disc = np.sqrt(np.maximum(B * B - 4.0 * A * C, 0.0))
        t1 = (-B + disc) / (2.0 * A)
        t2 = (-B - disc) / (2.0 * A)
        ok1 = (t1 >= -1e-12) & (t1 <= 1 + 1e-12)
        t = np.clip(np.where(ok1, t1, t2), 0.0, 1.0)
        pts = coords[lo][cross].copy()
        pts[:, a] += t * grid.h
        out.append(pts)
    if not out:
        return np.zeros((0, n))
    pts = np.concatenate(out)
    order = np.lexsort(pts.T[::-1])
    return pts[order]


def extract(
    u: VectorField,
    theta_pos: float | None = None,
    *,
    f0: float = 1.0,
    theta_grad: float | None = None,
) -> FreeBoundarySet:
    """Level set of ``|u|`` at ``theta_pos`` with gradient classification.

    Defaults are ``theta_pos = 1e-2 f0 h^2`` and ``theta_grad = f0 h``.
    Points are returned in lexicographic order.
    """
    h = u.grid.h
    theta = default_theta_pos(f0, h) if theta_pos is None else float(theta_pos)
    if not theta > 0:
        raise InputError("theta_pos must be positive")
    tg = f0 * h if theta_grad is None else float(theta_grad)
    pts = _edge_crossings(u, theta)
    if len(pts):
        grads = gradient_at(u, pts, strict=False)
        gnorm = np.sqrt(np.sum(grads * grads, axis=(1, 2)))
    else:
        gnorm = np.zeros(0)
    return FreeBoundarySet(pts, gnorm, gnorm < tg, theta, tg, h)


def _in_support_closure(u, x0: np.ndarray, f0: float) -> bool:
    h = grid_spacing(u)
    if h is not None:
        idx = nodes_in_ball(u, x0, math.sqrt(u.n) * h)
        theta = default_theta_pos(f0, h)
        return bool(np.any(u.norm().ravel()[idx] > theta))
    eps = 1e-6
    quad = ball_quadrature(x0, eps, (4, 8 if u.n == 2 else 4))
    vals = field_values(u, np.vstack([x0[None], quad.volume_points]))
    return bool(np.any(np.linalg.norm(vals, axis=1) > 0))


def _ball_samples(u, x0: np.ndarray, r: float, with_grad: bool):
    check_ball(u, x0, r)
    quad = ball_quadrature(x0, r, h=grid_spacing(u))
    pts = np.vstack([quad.volume_points, quad.surface_points])
    vals = np.linalg.norm(field_values(u, pts), axis=1)
    grads = None
    if with_grad:
        g = field_gradients(u, pts)
        grads = np.sqrt(np.sum(g * g, axis=(1, 2)))
    if isinstance(u, VectorField):
        idx = nodes_in_ball(u, x0, r)
        vals = np.concatenate([vals, u.norm().ravel()[idx]])
        if with_grad:
            ng = nodal_gradients(u).reshape(-1, u.m * u.n)[idx]
            grads = np.concatenate([grads, np.sqrt(np.sum(ng * ng, axis=1))])
    return vals, grads


@dataclass(frozen=True)
class NondegeneracyRow:
    r: float
    sup: float
    bound: float
    margin: float
    flagged: bool


def nondegeneracy_audit(u, x0, radii, f0: float) -> list[NondegeneracyRow]:
    """Compare ``sup_{B_r(x0)} |u|`` with ``f0 r^2 / (2n)``.

    A row is flagged when the margin drops below ``-(0.05 bound + f0 h^2)``.
    """
    x0 = np.asarray(x0, dtype=float)
    if not _in_support_closure(u, x0, f0):
        raise PreconditionError(f"x0 = {x0} is not in the closure of the support of u")
    h = grid_spacing(u) or 0.0
    n = x0.size
    rows = []
    for r in np.asarray(radii, dtype=float):
        vals, _ = _ball_samples(u, x0, float(r), with_grad=False)
        sup = float(vals.max())
        bound = f0 * r * r / (2.0 * n)
        slack = 0.05 * bound + f0 * h * h
        rows.append(NondegeneracyRow(float(r), sup, bound, sup - bound, sup - bound < -slack))
    return rows


@dataclass(frozen=True)
class GrowthResult:
    exponent_u: float
    constant_u: float
    exponent_grad: float
    constant_grad: float
    radii: np.ndarray
    sup_u: np.ndarray
    sup_grad: np.ndarray


def _loglog_fit(r: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    if np.any(y <= 0):
        raise InsufficientDataError("growth fit needs positive suprema")
    slope, intercept = np.polyfit(np.log(r), np.log(y), 1)
    return float(slope), float(math.exp(intercept))


def growth_audit(
    u,
    x0,
    radii,
    *,
    f0: float = 1.0,
    theta_grad: float | None = None,
    min_cells: float = 10.0,
) -> GrowthResult:
    """Log-log slopes of ``sup_{B_r}|u|`` and ``sup_{B_r}|grad u|`` against ``r``.

    ``x0`` must be a degenerate point: ``|grad u(x0)| <= theta_grad``
    (default ``f0 h`` for grid fields). Radii below ``min_cells * h`` are
    dropped; at least four must remain.
    """
    x0 = np.asarray(x0, dtype=float)
    h = grid_spacing(u)
    g = np.linalg.norm(field_gradients(u, x0[None, :])[0])
    tg = theta_grad if theta_grad is not None else (f0 * h if h is not None else 1e-12)
    if g > tg:
        raise PreconditionError(f"|grad u(x0)| = {g:.3g} exceeds theta_grad = {tg:.3g}; not a Gamma0 point")
    radii = np.asarray(radii, dtype=float)
    if h is not None:
        radii = radii[radii >= min_cells * h * (1 - 1e-12)]
    if radii.size < 4:
        raise InsufficientDataError(f"growth audit needs at least 4 valid radii, got {radii.size}")
    sup_u = np.empty(radii.size)
    sup_g = np.empty(radii.size)
    for i, r in enumerate(radii):
        vals, grads = _ball_samples(u, x0, float(r), with_grad=True)
        sup_u[i] = vals.max()
        sup_g[i] = grads.max()
    eu, cu = _loglog_fit(radii, sup_u)
    eg, cg = _loglog_fit(radii, sup_g)
    return GrowthResult(eu, cu, eg, cg, radii, sup_u, sup_g)


@dataclass(frozen=True)
class SupportOffset:
    offset: float
    ratio: float
    epsilon: float


def support_offset(
    u: VectorField,
    H: HalfSpaceSolution,
    *,
    x0=None,
    theta_pos: float | None = None,
) -> SupportOffset:
    """Worst excursion of ``supp u`` below the hyperplane of ``H`` inside ``B_{1/2}(x0)``.

    ``epsilon`` is the nodal-quadrature ``L^1(B_1(x0))`` distance between
    ``u`` and ``H(. - x0)``; the ratio is ``offset / epsilon^(1/(2n+2))``.
    """
    n = u.n
    x0 = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
    grid = u.grid
    if np.any(x0 - 1.0 < grid.lower - 1e-12) or np.any(x0 + 1.0 > grid.upper + 1e-12):
        raise DomainError("B_1(x0) is not inside the grid")
    theta = default_theta_pos(H.f0, grid.h) if theta_pos is None else theta_pos
    pts = grid.coords().reshape(-1, n)
    vals = u.values.reshape(-1, u.m)
    rel = pts - x0
    dist2 = np.sum(rel * rel, axis=1)
    in1 = dist2 <= 1.0
    diff = vals[in1] - H.value(rel[in1])
    eps = float(np.sum(np.linalg.norm(diff, axis=1))) * grid.h**n
    if not eps < 1.0:
        raise PreconditionError(f"L1 distance {eps:.3g} to the half-space is not below 1")
    half = (dist2 <= 0.25) & (np.linalg.norm(vals, axis=1) > theta)
    depth = rel[half] @ np.asarray(H.nu)
    d = max(0.0, -float(depth.min())) if depth.size else 0.0
    if eps > 0:
        ratio = d / eps ** (1.0 / (2 * n + 2))
    else:
        ratio = 0.0 if d == 0 else float("inf")
    return SupportOffset(d, ratio, eps)


@dataclass(frozen=True)
class NormalField:
    points: np.ndarray
    normals: np.ndarray
    valid: np.ndarray

    @property
    def valid_points(self) -> np.ndarray:
        return self.points[self.valid]

    @property
    def valid_normals(self) -> np.ndarray:
        return self.normals[self.valid]


def smoothed_modulus(u: VectorField) -> VectorField:
    """``|u|`` after one Jacobi sweep (neighbour average) on interior nodes."""
    r = u.norm()
    out = r.copy()
    core = (slice(1, -1),) * u.n
    acc = np.zeros_like(r[core])
    for a in range(u.n):
        up = list(core)
        dn = list(core)
        up[a] = slice(2, None)
        dn[a] = slice(None, -2)
        acc += r[tuple(up)] + r[tuple(dn)]
    out[core] = acc / (2.0 * u.n)
    return VectorField(u.grid, out[..., None], u.mask)


def normal_field(fb: FreeBoundarySet, u: VectorField, *, offset_cells: float = 2.0) -> NormalField:
    """Unit normals pointing into ``{|u| > 0}``.

    The gradient of the smoothed modulus is read at ``x + offset_cells h nu_prev``
    where ``nu_prev`` is its direction at ``x`` itself. Points whose gradient
    vanishes or whose offset point leaves the hull are marked invalid.
    """
    k = len(fb)
    normals = np.zeros((k, u.n))
    valid = np.zeros(k, dtype=bool)
    if k == 0:
        return NormalField(fb.points, normals, valid)
    s = smoothed_modulus(u)
    g0 = gradient_at(s, fb.points, strict=False)[:, 0, :]
    n0 = np.linalg.norm(g0, axis=1)
    ok = n0 > 1e-14
    prev = np.divide(g0, n0[:, None], out=np.zeros_like(g0), where=ok[:, None])
    shifted = fb.points + offset_cells * u.grid.h * prev
    inside = np.all((shifted >= u.grid.lower) & (shifted <= u.grid.upper), axis=1)
    ok &= inside
    if np.any(ok):
        g1 = gradient_at(s, shifted[ok], strict=False)[:, 0, :]
        n1 = np.linalg.norm(g1, axis=1)
        good = n1 > 1e-14
        sub = np.flatnonzero(ok)
        normals[sub[good]] = g1[good] / n1[good, None]
        valid[sub[good]] = True
    return NormalField(fb.points, normals, valid)


def beta_reference(kappa: float, n: int) -> float:
    """Holder exponent ``q / (1 + q)`` with ``q = (n + 2) kappa / (2 (1 - kappa))``."""
    if not 0 < kappa < 1:
        raise InputError("kappa must lie in (0, 1)")
    q = (n + 2) * kappa / (2.0 * (1.0 - kappa))
    return q / (1.0 + q)


@dataclass(frozen=True)
class HolderResult:
    beta_hat: float
    residual: float
    pairs: int
    at_ceiling: bool
    beta_reference: float | None = None


HOLDER_CEILING = 1.0
_FLOOR = 1e-12


def holder_exponent(
    points,
    normals,
    h: float,
    *,
    r_min_cells: float = 10.0,
    r_max: float = 0.3,
    kappa: float | None = None,
    bins: int = 12,
) -> HolderResult:
    """Least-squares slope of ``log|nu(x) - nu(y)|`` against ``log|x - y|``.

    Only pairs with ``10 h <= |x - y| <= r_max`` enter. Pairs are grouped
    into ``bins`` equal-width bins of ``log|x - y|`` and the line is fitted
    to the bin means, so every scale carries the same weight regardless of
    how many pairs it holds. When almost all pair
    differences sit at the round-off floor the boundary is flat and the
    exponent is reported at the fit ceiling with ``at_ceiling`` set.
    """
    points = np.asarray(points, dtype=float)
    normals = np.asarray(normals, dtype=float)
    if len(points) < 20:
        raise InsufficientDataError(f"need at least 20 points with normals, got {len(points)}")
    dx = pdist(points)
    dn = pdist(normals)
    keep = (dx >= r_min_cells * h) & (dx <= r_max)
    if not np.any(keep) or dx[keep].max() < 10.0 * dx[keep].min():
        raise InsufficientDataError("pair distances in the fit window span less than one decade")
    dx, dn = dx[keep], dn[keep]
    n = points.shape[1]
    ref = beta_reference(kappa, n) if kappa is not None else None
    live = dn > _FLOOR
    if live.mean() < 0.5:
        return HolderResult(HOLDER_CEILING, 0.0, int(dx.size), True, ref)
    x, y = np.log(dx[live]), np.log(dn[live])
    edges = np.linspace(x.min(), x.max(), bins + 1)
    which = np.clip(np.digitize(x, edges) - 1, 0, bins - 1)
    filled = [i for i in range(bins) if np.any(which == i)]
    bx = np.array([x[which == i].mean() for i in filled])
    by = np.array([y[which == i].mean() for i in filled])
    slope, intercept = np.polyfit(bx, by, 1)
    resid = float(np.sqrt(np.mean((slope * bx + intercept - by) ** 2)))
    return HolderResult(float(slope), resid, int(live.sum()), False, ref)
