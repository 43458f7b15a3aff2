"""Weiss boundary-adjusted energy, the density functionals and point classification.

All ball integrals are evaluated on the rescaled field
``u_r(x) = u(x0 + r x) / r**2`` over the unit ball, so that

    W(u, x0, r) = H(u_r, r) = int_B1 |grad u_r|^2 + F_r(|u_r|) - 2 int_dB1 |u_r|^2

with ``F_r(t) = F(r^2 t) / r^2``. The derivative identity checked by
:func:`monotonicity_audit` reads ``dW/dr = T1 + T2`` with

    T1 = (2/r) int_dB1 |d_rho u_r - 2 u_r|^2,
    T2 = (2/r) int_B1 F_r'(|u_r|) |u_r| - F_r(|u_r|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, InputError, InsufficientDataError, PreconditionError
from .geometry import (
    UnitBallField,
    check_ball,
    field_gradients,
    gradient_at,
    grid_spacing,
    nodal_gradients,
    sample_unit_ball,
    unit_ball_volume,
    unit_quadrature,
    unit_sphere_area,
    default_orders,
)
from .model import VectorField

MIN_RADIUS_CELLS = 8.0
MIN_RADII = 6
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def alpha_n(n: int, f0: float) -> float:
    """Half-space density doubling constant ``f0**2 |B_1| / (2 (n + 2))``."""
    if n < 1:
        raise InputError("dimension must be at least 1")
    if not f0 > 0:
        raise InputError("f0 must be positive")
    return f0 * f0 * unit_ball_volume(n) / (2.0 * (n + 2))


def alpha_n_surface_form(n: int, f0: float) -> float:
    """Same constant written with the sphere area ``f0**2 |dB_1| / (2 n (n + 2))``."""
    return f0 * f0 * unit_sphere_area(n) / (2.0 * n * (n + 2))


def _norm2(a: np.ndarray) -> np.ndarray:
    return np.sum(a.reshape(a.shape[0], -1) ** 2, axis=1)


def functional_H(v: UnitBallField, N, s: float) -> float:
    """``int_B1 |grad v|^2 + F_s(|v|) - 2 int_dB1 |v|^2``."""
    if not s > 0:
        raise InputError("scale s must be positive")
    Ns = N.rescaled(s)
    r = np.sqrt(_norm2(v.values))
    bulk = _norm2(v.grads) + Ns.F(r)
    return v.integrate(bulk) - 2.0 * v.integrate_surface(_norm2(v.surface_values))


def functional_M(v: UnitBallField, f0: float) -> float:
    """``int_B1 |grad v|^2 + 2 f0 |v| - 2 int_dB1 |v|^2``, the ``s -> 0`` limit of H."""
    r = np.sqrt(_norm2(v.values))
    bulk = _norm2(v.grads) + 2.0 * f0 * r
    return v.integrate(bulk) - 2.0 * v.integrate_surface(_norm2(v.surface_values))


def _orders(field, n: int, r: float, orders):
    return orders if orders is not None else default_orders(n, r, grid_spacing(field))


def rescaled_samples(u, x0, r: float, orders=None) -> UnitBallField:
    """Samples of ``u_{x0,r}`` on the unit-ball rule sized for radius ``r``."""
    x0 = np.asarray(x0, dtype=float)
    quad = unit_quadrature(x0.size, _orders(u, x0.size, r, orders))
    return sample_unit_ball(u, x0, r, quad)


def weiss_energy(u, N, x0, r: float, orders=None) -> float:
    """Weiss boundary-adjusted energy ``W(u, x0, r)``."""
    return functional_H(rescaled_samples(u, x0, r, orders), N, r)


def _weiss_terms(u, N, x0, r: float, orders) -> tuple[float, float, float]:
    v = rescaled_samples(u, x0, r, orders)
    Nr = N.rescaled(r)
    W = functional_H(v, N, r)
    dirs = v.quad.directions
    radial = np.einsum("pij,pj->pi", v.surface_grads, dirs)
    T1 = (2.0 / r) * v.integrate_surface(_norm2(radial - 2.0 * v.surface_values))
    mod = np.sqrt(_norm2(v.values))
    gap = np.where(mod > 0, Nr.dF(mod) * mod - Nr.F(mod), 0.0)
    T2 = (2.0 / r) * v.integrate(gap)
    return W, T1, T2


@dataclass
class WeissReport:
    """Weiss energy and the two derivative terms along a radii ladder."""

    center: np.ndarray
    radii: np.ndarray
    W: np.ndarray
    dW: np.ndarray
    T1: np.ndarray
    T2: np.ndarray
    tol_mono: np.ndarray
    violations: list[int] = field(default_factory=list)
    W0_estimate: float | None = None
    fit_exponent: float | None = None

    @property
    def identity_gap(self) -> np.ndarray:
        return np.abs(self.dW - (self.T1 + self.T2))

    @property
    def monotone(self) -> bool:
        return not self.violations

    def rows(self) -> list[dict]:
        return [
            {"r": float(r), "W": float(w), "dW/dr": float(d), "T1": float(a), "T2": float(b)}
            for r, w, d, a, b in zip(self.radii, self.W, self.dW, self.T1, self.T2)
        ]


def radii_ladder(r_min: float, r_max: float, count: int | None = None) -> np.ndarray:
    """Geometric ladder from ``r_min`` to ``r_max``.

    Without ``count`` the ratio is ``sqrt(2)``; with ``count`` the ladder has
    exactly that many radii and both endpoints.
    """
    if not 0 < r_min < r_max:
        raise InputError("need 0 < r_min < r_max")
    if count is None:
        k = int(math.floor(2.0 * math.log2(r_max / r_min) + 1e-9))
        return r_min * 2.0 ** (np.arange(k + 1) / 2.0)
    if count < 2:
        raise InputError("ladder needs at least two radii")
    return np.geomspace(r_min, r_max, count)


def _check_radii(u, radii: np.ndarray, minimum: int = MIN_RADII) -> np.ndarray:
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or len(radii) < minimum:
        raise InsufficientDataError(f"need at least {minimum} radii, got {radii.size}")
    if np.any(np.diff(radii) <= 0):
        raise InputError("radii must be strictly increasing")
    h = grid_spacing(u)
    if h is not None and radii[0] < MIN_RADIUS_CELLS * h * (1 - 1e-12):
        raise DomainError(f"radius {radii[0]:g} is below {MIN_RADIUS_CELLS:g}h = {MIN_RADIUS_CELLS * h:g}")
    return radii


def monotonicity_audit(u, N, x0, radii, *, orders=None, tol_mono: float | None = None, map_fn=map) -> WeissReport:
    """Weiss energy, ``dW/dr`` and the terms ``T1``, ``T2`` along ``radii``.

    ``dW/dr`` uses second-order differences on the (possibly non-uniform)
    ladder. The tolerance is measured in units of ``W``: radius ``i`` is
    flagged when ``W`` there falls more than ``tol_mono`` below its maximum
    over the smaller radii. The default tolerance is ``1e-3 (1 + |W|)``. ``map_fn`` may be a deterministic
    parallel map; results do not depend on it.
    """
    x0 = np.asarray(x0, dtype=float)
    radii = _check_radii(u, radii)
    for r in radii:
        check_ball(u, x0, r)
    terms = list(map_fn(lambda r: _weiss_terms(u, N, x0, float(r), orders), radii))
    W, T1, T2 = (np.array(t) for t in zip(*terms))
    dW = np.gradient(W, radii)
    tol = 1e-3 * (1.0 + np.abs(W)) if tol_mono is None else np.full_like(W, tol_mono)
    running_max = np.maximum.accumulate(W)
    drop = np.concatenate([[0.0], running_max[:-1] - W[1:]])
    violations = [int(i) for i in np.flatnonzero(drop > tol)]
    report = WeissReport(x0, radii, W, dW, T1, T2, tol, violations)
    return report


@dataclass(frozen=True)
class DensityFit:
    W0: float
    exponent: float
    amplitude: float
    residual: float
    low_confidence: bool


def _fit_fixed_exponent(radii, W, alpha):
    A = np.stack([np.ones_like(radii), radii**alpha], axis=1)
    coef, *_ = np.linalg.lstsq(A, W, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - W) ** 2)))
    return coef, resid


def _golden_section(fn: Callable[[float], float], a: float, b: float, tol: float = 1e-6) -> float:
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def fit_power_law_offset(
    radii,
    W,
    *,
    alpha_range: tuple[float, float] = (0.1, 6.0),
    residual_threshold: float | None = None,
) -> DensityFit:
    """Fit ``W(r) = W0 + A r**alpha``.

    ``alpha`` is located by a coarse scan followed by golden-section search
    on the bracketing interval; ``(W0, A)`` come from linear least squares.
    The fit is flagged low-confidence when its RMS residual exceeds
    ``residual_threshold`` (default ``1e-3 (1 + |W0|)``).
    """
    radii = np.asarray(radii, dtype=float)
    W = np.asarray(W, dtype=float)
    if radii.size < 3:
        raise InsufficientDataError("power-law fit needs at least three points")
    lo, hi = alpha_range
    scale = float(np.max(np.abs(W - W.mean()))) if W.size else 0.0
    if scale <= 1e-14 * max(1.0, float(np.max(np.abs(W)))):
        W0 = float(W.mean())
        return DensityFit(W0, float("nan"), 0.0, 0.0, False)
    objective = lambda a: _fit_fixed_exponent(radii, W, a)[1]
    scan = np.linspace(lo, hi, 60)
    values = [objective(a) for a in scan]
    k = int(np.argmin(values))
    a_best = _golden_section(objective, scan[max(k - 1, 0)], scan[min(k + 1, len(scan) - 1)])
    coef, resid = _fit_fixed_exponent(radii, W, a_best)
    W0, A = float(coef[0]), float(coef[1])
    threshold = 1e-3 * (1.0 + abs(W0)) if residual_threshold is None else residual_threshold
    return DensityFit(W0, float(a_best), A, resid, resid > threshold)


def density_limit(report: WeissReport, **kwargs) -> DensityFit:
    """Estimate ``W(0+)`` from a Weiss report by the offset power-law fit."""
    if len(report.radii) < MIN_RADII:
        raise InsufficientDataError(f"need at least {MIN_RADII} radii")
    fit = fit_power_law_offset(report.radii, report.W, **kwargs)
    report.W0_estimate = fit.W0
    report.fit_exponent = fit.exponent
    return fit


TRIVIAL = "Trivial"
REGULAR = "Regular"
NON_REGULAR = "NonRegular"


@dataclass(frozen=True)
class Classification:
    label: str
    W0: float
    alpha: float
    low_confidence: bool
    fit: DensityFit | None = None
    report: WeissReport | None = None


def classify_density(W0: float, n: int, f0: float, tau_class: float = 0.05) -> str:
    """Label from a density value alone."""
    a = alpha_n(n, f0)
    if W0 <= tau_class * a:
        return TRIVIAL
    if abs(W0 - 0.5 * a) <= tau_class * a:
        return REGULAR
    return NON_REGULAR


def classify_point(
    u,
    N,
    x0,
    radii,
    tau_class: float = 0.05,
    *,
    theta_grad: float | None = None,
    orders=None,
    map_fn=map,
) -> Classification:
    """Classify ``x0`` as Trivial, Regular or NonRegular from its Weiss density.

    For grid fields ``|grad u(x0)|`` must not exceed ``theta_grad`` (default
    ``f(0) h``), otherwise the point is not a degenerate free boundary point.
    """
    x0 = np.asarray(x0, dtype=float)
    h = grid_spacing(u)
    if h is not None:
        tg = N.f0 * h if theta_grad is None else theta_grad
        g = np.linalg.norm(gradient_at(u, x0, strict=False))
        if g > tg:
            raise PreconditionError(f"|grad u(x0)| = {g:.3g} exceeds theta_grad = {tg:.3g}")
    elif theta_grad is not None:
        g = np.linalg.norm(field_gradients(u, x0[None, :])[0])
        if g > theta_grad:
            raise PreconditionError(f"|grad u(x0)| = {g:.3g} exceeds theta_grad = {theta_grad:.3g}")
    report = monotonicity_audit(u, N, x0, radii, orders=orders, map_fn=map_fn)
    fit = density_limit(report)
    label = classify_density(fit.W0, x0.size, N.f0, tau_class)
    return Classification(label, fit.W0, alpha_n(x0.size, N.f0), fit.low_confidence, fit, report)


def domain_variation_residual(u: VectorField, N, xi) -> float:
    """``|int |grad u|^2 div xi - 2 grad u D xi . grad u + F(|u|) div xi|`` by nodal quadrature.

    ``xi`` is a callable returning ``(values (P, n), jacobian (P, n, n))`` at
    points ``(P, n)``, with ``jacobian[p, i, j] = d xi_i / d x_j``. It must
    expose ``center`` and ``support_radius``; the support ball has to stay
    at least ``h`` away from the hull.
    """
    grid = u.grid
    center = np.asarray(xi.center, dtype=float)
    R = float(xi.support_radius)
    slack = np.minimum(center - grid.lower, grid.upper - center)
    if np.any(slack < R + grid.h):
        raise DomainError("support of xi touches the grid boundary")
    pts = grid.coords().reshape(-1, grid.n)
    inside = np.sum((pts - center) ** 2, axis=1) < R * R
    p = pts[inside]
    _, jac = xi(p)
    div = np.trace(jac, axis1=1, axis2=2)
    du = nodal_gradients(u).reshape(-1, u.m, u.n)[inside]
    mod = np.sqrt(np.sum(u.values.reshape(-1, u.m)[inside] ** 2, axis=1))
    dirichlet = np.sum(du * du, axis=(1, 2))
    cross = np.einsum("pij,pjk,pik->p", du, jac, du)
    integrand = dirichlet * div - 2.0 * cross + N.F(mod) * div
    return abs(float(np.sum(integrand)) * grid.h**grid.n)


@dataclass(frozen=True)
class RadialBump:
    """``xi(x) = phi(|x - c| / R) (x - c)`` with a smooth compactly supported ``phi``.

    ``phi(t) = exp(1 - 1/(1 - t^2))`` for ``t < 1`` and 0 beyond.
    """

    center: tuple[float, ...]
    support_radius: float

    def __call__(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        c = np.asarray(self.center, dtype=float)
        y = np.atleast_2d(x) - c
        t2 = np.sum(y * y, axis=1) / self.support_radius**2
        inside = t2 < 1.0
        phi = np.zeros_like(t2)
        dphi_dt2 = np.zeros_like(t2)
        q = 1.0 - t2[inside]
        phi[inside] = np.exp(1.0 - 1.0 / q)
        dphi_dt2[inside] = -phi[inside] / (q * q)
        vals = phi[:, None] * y
        n = y.shape[1]
        grad_phi = (2.0 / self.support_radius**2) * dphi_dt2[:, None] * y
        jac = phi[:, None, None] * np.eye(n)[None] + y[:, :, None] * grad_phi[:, None, :]
        return vals, jac
