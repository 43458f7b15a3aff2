"""Blow-up rescalings, projection onto half-space solutions and decay rates.

The rescaled field ``u_{x0,r}(x) = u(x0 + r x) / r^2`` is sampled on the
polar unit-ball rule. Near a regular point the Weiss energy excess
``G(r) = W(r) - W(0+)`` and the sphere distance ``d(r)`` to the blow-up
limit are expected to decay like powers of ``r`` with ``alpha_L = alpha_G / 2``;
the epiperimetric constant implied by ``alpha_G = (n+2) kappa / (1 - kappa)``
is ``kappa = alpha_G / (n + 2 + alpha_G)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, PreconditionError
from .geometry import UnitBallField, default_orders, grid_spacing, sample_unit_ball, sphere_rule, unit_quadrature
from .model import HalfSpaceSolution
from .weiss import MIN_RADIUS_CELLS, REGULAR, Classification, classify_point

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class BlowupField(UnitBallField):
    """Samples of ``u_{x0,r}`` on the unit ball, remembering ``x0`` and ``r``."""

    center: np.ndarray = field(default_factory=lambda: np.zeros(0))
    radius: float = 1.0


def rescale(u, x0, r: float, orders=None) -> BlowupField:
    """Sample ``u(x0 + r x) / r^2`` on the unit-ball rule."""
    x0 = np.asarray(x0, dtype=float)
    if orders is None:
        orders = default_orders(x0.size, r, grid_spacing(u))
    base = sample_unit_ball(u, x0, r, unit_quadrature(x0.size, orders))
    return BlowupField(
        base.quad, base.values, base.grads, base.surface_values, base.surface_grads, x0, float(r)
    )


def homogeneity_defect(v: UnitBallField) -> float:
    """``int_B1 |x . grad v - 2 v| / max(1, int_B1 |v|)``."""
    if len(v.quad.radial_nodes) < 8:
        raise InsufficientDataError("homogeneity defect needs at least 8 radial nodes")
    x = v.quad.volume_points - v.quad.center
    radial = np.einsum("pij,pj->pi", v.grads, x)
    num = v.integrate(np.linalg.norm(radial - 2.0 * v.values, axis=1))
    den = max(1.0, v.integrate(np.linalg.norm(v.values, axis=1)))
    return num / den


@dataclass(frozen=True)
class Projection:
    """Closest half-space solution in ``L^2(dB_1)``.

    ``residual_constrained`` uses the amplitude ``f0``;
    ``residual_free`` lets the amplitude float (``amplitude`` times ``f0``).
    """

    nu: np.ndarray
    e: np.ndarray
    residual_constrained: float
    residual_free: float
    amplitude: float
    f0: float

    def half_space(self) -> HalfSpaceSolution:
        return HalfSpaceSolution.from_directions(self.nu, self.e, self.f0)


def _direction_grid(n: int) -> np.ndarray:
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        a = 2.0 * np.pi * np.arange(720) / 720
        return np.stack([np.cos(a), np.sin(a)], axis=1)
    k = 1024
    i = np.arange(k) + 0.5
    z = 1.0 - 2.0 * i / k
    phi = np.pi * (1.0 + math.sqrt(5.0)) * i
    s = np.sqrt(1.0 - z * z)
    return np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)


class _SphereData:
    def __init__(self, dirs, weights, values, f0):
        self.dirs = dirs
        self.w = weights
        self.v = values
        self.f0 = f0
        self.vv = float(np.dot(weights, np.sum(values * values, axis=1)))

    def parts(self, nu: np.ndarray):
        t = np.maximum(self.dirs @ nu, 0.0)
        q = 0.5 * self.f0 * t * t
        qv = (self.w * q) @ self.v
        qq = float(np.dot(self.w, q * q))
        return qv, qq

    def constrained(self, nu: np.ndarray) -> float:
        qv, qq = self.parts(nu)
        return max(self.vv - 2.0 * float(np.linalg.norm(qv)) + qq, 0.0)

    def free(self, nu: np.ndarray) -> tuple[float, float]:
        qv, qq = self.parts(nu)
        a = float(np.linalg.norm(qv)) / qq
        return max(self.vv - a * a * qq, 0.0), a


def _golden_min(fn, a: float, b: float, tol: float = 1e-10) -> float:
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


def _spherical(theta: float, phi: float) -> np.ndarray:
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


def project_to_halfspace(v: UnitBallField, f0: float) -> Projection:
    """Best ``(nu, e)`` for ``v`` on the unit sphere.

    A coarse search (720 angles in 2-D, 1024 Fibonacci directions in 3-D)
    is refined by golden-section search in the angle chart. For every
    ``nu`` the optimal ``e`` is ``int q_nu v / |int q_nu v|``, with
    ``q_nu = f0 max(x . nu, 0)^2 / 2``.
    """
    vals = v.surface_values
    if not np.any(vals):
        raise PreconditionError("undefined projection: the field vanishes on the unit sphere")
    n = v.n
    data = _SphereData(v.quad.directions, v.quad.surface_weights, vals, f0)
    cands = _direction_grid(n)
    scores = np.array([data.constrained(c) for c in cands])
    best = cands[int(np.argmin(scores))]
    if n == 2:
        a0 = math.atan2(best[1], best[0])
        step = 2.0 * np.pi / len(cands)
        a = _golden_min(lambda t: data.constrained(np.array([math.cos(t), math.sin(t)])), a0 - step, a0 + step)
        nu = np.array([math.cos(a), math.sin(a)])
    elif n == 3:
        th = math.acos(np.clip(best[2], -1.0, 1.0))
        ph = math.atan2(best[1], best[0])
        step = 0.15
        for _ in range(3):
            th = _golden_min(lambda t: data.constrained(_spherical(t, ph)), th - step, th + step)
            ph = _golden_min(lambda p: data.constrained(_spherical(th, p)), ph - step, ph + step)
            step /= 4.0
        nu = _spherical(th, ph)
    else:
        nu = best
    qv, _ = data.parts(nu)
    e = qv / np.linalg.norm(qv)
    res_c = math.sqrt(data.constrained(nu))
    res_f2, amp = data.free(nu)
    return Projection(nu, e, res_c, math.sqrt(res_f2), amp, f0)


def sphere_distance_l1(v: UnitBallField, target) -> float:
    """``int_dB1 |v - target|`` for an analytic ``target`` with ``value(points)``."""
    ref = np.asarray(target.value(v.quad.directions), dtype=float)
    return v.integrate_surface(np.linalg.norm(v.surface_values - ref, axis=1))


@dataclass
class DecayReport:
    radii: np.ndarray
    G: np.ndarray
    d: np.ndarray
    alpha_G: float
    alpha_L: float
    kappa_hat: float
    consistency: float
    verdict: str
    W0: float | None = None
    n: int = 2
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "radii": [float(r) for r in self.radii],
            "G": [float(g) for g in self.G],
            "d": [float(x) for x in self.d],
            "alpha_G": self.alpha_G,
            "alpha_L": self.alpha_L,
            "kappa_hat": self.kappa_hat,
            "consistency": self.consistency,
            "verdict": self.verdict,
            "W0": self.W0,
            "n": self.n,
            "flags": list(self.flags),
        }


def kappa_from_alpha(alpha_G: float, n: int) -> float:
    """Invert ``alpha_G = (n + 2) kappa / (1 - kappa)``."""
    return alpha_G / (n + 2 + alpha_G)


def _slope(r: np.ndarray, y: np.ndarray) -> float:
    keep = y > 0
    if keep.sum() < 3:
        return float("nan")
    return float(np.polyfit(np.log(r[keep]), np.log(y[keep]), 1)[0])


def decay_from_series(radii, G, d, n: int, *, W0: float | None = None, tol_G: float = 0.0) -> DecayReport:
    """Fit the two decay exponents from tabulated ``G(r)`` and ``d(r)``."""
    radii = np.asarray(radii, dtype=float)
    G = np.asarray(G, dtype=float)
    d = np.asarray(d, dtype=float)
    flags = []
    if np.any(G < -tol_G):
        flags.append("monotonicity-violation")
    if np.all(np.abs(G) <= max(tol_G, 1e-12)):
        return DecayReport(radii, G, d, float("nan"), float("nan"), float("nan"), float("nan"),
                           "already homogeneous", W0, n, flags)
    aG = _slope(radii, G)
    aL = _slope(radii, d)
    kappa = kappa_from_alpha(aG, n) if np.isfinite(aG) else float("nan")
    consistency = abs(aL - aG / 2.0) / aL if np.isfinite(aL) and aL != 0 else float("nan")
    ok = np.isfinite(aG) and np.isfinite(aL) and aG > 0 and aL > 0
    verdict = "decay confirmed" if ok else "decay not confirmed"
    return DecayReport(radii, G, d, aG, aL, kappa, consistency, verdict, W0, n, flags)


def decay_measurement(
    u,
    N,
    x0,
    radii,
    u0=None,
    *,
    classification: Classification | None = None,
    orders=None,
    min_decades: float = 1.5,
) -> DecayReport:
    """Measure ``G(r)`` and ``d(r)`` at a regular point and fit their exponents.

    The reference blow-up ``u0`` defaults to the half-space projection of
    the rescaling at the smallest radius.
    """
    x0 = np.asarray(x0, dtype=float)
    radii = np.asarray(radii, dtype=float)
    h = grid_spacing(u)
    floor = MIN_RADIUS_CELLS * h if h is not None else radii.min()
    if radii.min() < floor * (1 - 1e-12):
        raise InsufficientDataError(f"radii below {MIN_RADIUS_CELLS:g}h are not admissible")
    if math.log10(radii.max() / max(radii.min(), floor)) < min_decades - 1e-9:
        raise InsufficientDataError(f"radii ladder spans less than {min_decades} decades above the floor")
    cls = classification or classify_point(u, N, x0, radii, orders=orders)
    if cls.label != REGULAR:
        raise PreconditionError(f"x0 is classified {cls.label}, not Regular")
    report = cls.report
    if report is None or not np.array_equal(report.radii, radii):
        from .weiss import monotonicity_audit

        report = monotonicity_audit(u, N, x0, radii, orders=orders)
    W0 = cls.W0
    G = report.W - W0
    if u0 is None:
        u0 = project_to_halfspace(rescale(u, x0, float(radii.min()), orders), N.f0).half_space()
    d = np.array([sphere_distance_l1(rescale(u, x0, float(r), orders), u0) for r in radii])
    tol = 1e-3 * (1.0 + abs(W0))
    return decay_from_series(radii, G, d, x0.size, W0=W0, tol_G=tol)
