"""Two-homogeneous cones near half-space solutions and empirical epiperimetric constants.

A cone is stored analytically: a half-space solution plus a combination of
homogeneous polynomials ``p`` of degree ``k``, each extended as
``|x|^(2-k) p(x)`` so the extension is exactly 2-homogeneous.

For a cone ``c`` and scale ``s`` the competitor ``v`` minimizes ``H(., s)``
among fields with trace ``c`` on the unit sphere; it is computed by the
production solver on a Cartesian grid whose nodes outside the open unit
ball are pinned to ``c``. ``H(c, s)`` and ``M(h*)`` are evaluated with the
polar quadrature; the competitor value is
``H(v, s) = H(c, s) - (E_h(c) - E_h(v))``, the discrete energy gain
measured on the grid. The solve starts from the cone and never raises
the energy, so a negative gain signals a failed solve and is flagged.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .blowup import project_to_halfspace
from .energy import DiscreteEnergy
from .errors import FBRegError, InputError
from .geometry import UnitBallField, sample_unit_ball, sphere_rule, unit_quadrature
from .model import Grid, HalfSpaceSolution, VectorField
from .solver import SolveOptions, minimize
from .weiss import alpha_n, functional_H, functional_M

EPS_DEN = 1e-8


def _basis(n: int, K: int) -> list[tuple]:
    """Homogeneous polynomial basis of degree ``0..K``.

    2-D: ``("re" | "im", k)`` for ``Re/Im (x1 + i x2)^k``; 3-D: monomial exponents.
    """
    if n == 2:
        out = [("re", 0)]
        for k in range(1, K + 1):
            out += [("re", k), ("im", k)]
        return out
    if n == 3:
        out = []
        for k in range(K + 1):
            for a in range(k, -1, -1):
                for b in range(k - a, -1, -1):
                    out.append(("mono", (a, b, k - a - b)))
        return out
    raise InputError("cones are supported for n = 2 and n = 3")


def _degree(term) -> int:
    return term[1] if term[0] != "mono" else sum(term[1])


def _poly(term, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Value ``(P,)`` and gradient ``(P, n)`` of one basis polynomial."""
    kind, k = term
    if kind == "mono":
        vals = np.prod(x ** np.asarray(k), axis=1)
        grads = np.zeros_like(x)
        for i, a in enumerate(k):
            if a == 0:
                continue
            e = np.asarray(k).copy()
            e[i] -= 1
            grads[:, i] = a * np.prod(x**e, axis=1)
        return vals, grads
    z = x[:, 0] + 1j * x[:, 1]
    zk = z**k
    dz = k * z ** (k - 1) if k > 0 else np.zeros_like(z)
    if kind == "re":
        return zk.real, np.stack([dz.real, -dz.imag], axis=1)
    return zk.imag, np.stack([dz.imag, dz.real], axis=1)


@dataclass(frozen=True, eq=False)
class ConeTrace:
    """``c = base + sum_j coeffs[j] * ext(p_j)`` with ``ext(p)(x) = |x|^(2-k) p(x)``.

    ``dist_w12`` and ``dist_linf`` record the ``W^{1,2}(dB_1)`` and
    ``L^inf(dB_1)`` size of the perturbation ``c - base``.
    """

    n: int
    m: int
    base: HalfSpaceSolution | None
    terms: tuple
    coeffs: np.ndarray
    delta: float = 0.0
    seed: int | None = None
    dist_w12: float = 0.0
    dist_linf: float = 0.0

    def _perturbation(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        P = x.shape[0]
        val = np.zeros((P, self.m))
        grad = np.zeros((P, self.m, self.n))
        if not self.terms:
            return val, grad
        r = np.linalg.norm(x, axis=1)
        nz = r > 0
        for term, c in zip(self.terms, self.coeffs):
            if not np.any(c):
                continue
            k = _degree(term)
            p, dp = _poly(term, x)
            rk = np.zeros_like(r)
            rk[nz] = r[nz] ** (2 - k)
            drk = np.zeros_like(r)
            drk[nz] = (2 - k) * r[nz] ** (-k)
            ext = rk * p
            dext = drk[:, None] * p[:, None] * x + rk[:, None] * dp
            ext[~nz] = 0.0
            dext[~nz] = 0.0
            val += ext[:, None] * c[None, :]
            grad += c[None, :, None] * dext[:, None, :]
        return val, grad

    def value(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        val, _ = self._perturbation(x)
        if self.base is not None:
            val = val + self.base.value(x)
        return val

    def gradient(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        _, grad = self._perturbation(x)
        if self.base is not None:
            grad = grad + self.base.gradient(x)
        return grad

    def samples(self, directions) -> np.ndarray:
        """Trace values at unit ``directions``."""
        return self.value(directions)

    def permuted(self, perm) -> "ConeTrace":
        """Same cone with the ``R^m`` axes relabelled by ``perm``."""
        perm = np.asarray(perm)
        base = None
        if self.base is not None:
            e = np.asarray(self.base.e)[perm]
            base = HalfSpaceSolution(self.base.nu, tuple(e), self.base.f0)
        return ConeTrace(self.n, self.m, base, self.terms, self.coeffs[:, perm], self.delta,
                         self.seed, self.dist_w12, self.dist_linf)


def _sphere_norms(trace: ConeTrace, with_base: bool = False) -> tuple[float, float]:
    """``W^{1,2}(dB_1)`` and ``L^inf(dB_1)`` norms of the perturbation part."""
    dirs, w = sphere_rule(trace.n, 512 if trace.n == 2 else 48)
    val, grad = trace._perturbation(dirs)
    tang = grad - 2.0 * val[:, :, None] * dirs[:, None, :]
    w12 = math.sqrt(float(np.dot(w, np.sum(val * val, axis=1) + np.sum(tang * tang, axis=(1, 2)))))
    linf = float(np.max(np.linalg.norm(val, axis=1))) if len(val) else 0.0
    return w12, linf


def trace_from_harmonics(n: int, m: int, coefficients: dict, base: HalfSpaceSolution | None = None) -> ConeTrace:
    """Cone with trace ``sum_term coefficients[term] * p_term`` (plus ``base``).

    Keys are basis terms as produced by the module (``("re", k)``,
    ``("im", k)`` in 2-D, ``("mono", (a, b, c))`` in 3-D); values are
    ``m``-vectors.
    """
    terms = tuple(coefficients)
    for term in terms:
        if term[0] not in ("re", "im", "mono") or (n == 2) == (term[0] == "mono"):
            raise InputError(f"basis term {term!r} does not match dimension {n}")
    coeffs = np.array([np.broadcast_to(np.asarray(coefficients[t], dtype=float), (m,)) for t in terms])
    coeffs = coeffs.reshape(len(terms), m)
    trace = ConeTrace(n, m, base, terms, coeffs)
    w12, linf = _sphere_norms(trace)
    return ConeTrace(n, m, base, terms, coeffs, 0.0, None, w12, linf)


def half_space_cone(n: int = 2, m: int = 2, f0: float = 1.0, nu=None, e=None) -> ConeTrace:
    nu = np.eye(n)[n - 1] if nu is None else np.asarray(nu, dtype=float)
    e = np.eye(m)[0] if e is None else np.asarray(e, dtype=float)
    H = HalfSpaceSolution.from_directions(nu, e, f0)
    return ConeTrace(n, m, H, (), np.zeros((0, m)))


def sample_cone_near_halfspace(
    delta: float,
    K: int,
    seed: int,
    *,
    n: int = 2,
    m: int = 2,
    f0: float = 1.0,
    nu=None,
    e=None,
) -> ConeTrace:
    """Half-space trace plus ``delta`` times a random unit ``W^{1,2}(dB_1)`` perturbation.

    The perturbation combines basis terms of degree ``<= K`` with Gaussian
    coefficients on a random nonempty subset of the ``m`` components.
    """
    if delta < 0:
        raise InputError("delta must be nonnegative")
    if K < 1:
        raise InputError("K must be at least 1")
    base = half_space_cone(n, m, f0, nu, e)
    if delta == 0:
        return ConeTrace(n, m, base.base, (), np.zeros((0, m)), 0.0, seed)
    rng = np.random.default_rng(seed)
    terms = tuple(_basis(n, K))
    n_comp = int(rng.integers(1, m + 1))
    comps = np.sort(rng.choice(m, size=n_comp, replace=False))
    coeffs = np.zeros((len(terms), m))
    coeffs[:, comps] = rng.standard_normal((len(terms), n_comp))
    raw = ConeTrace(n, m, base.base, terms, coeffs)
    w12, _ = _sphere_norms(raw)
    coeffs = coeffs * (delta / w12)
    scaled = ConeTrace(n, m, base.base, terms, coeffs, delta, seed)
    w12, linf = _sphere_norms(scaled)
    return ConeTrace(n, m, base.base, terms, coeffs, delta, seed, w12, linf)


def cone_from_trace(trace: ConeTrace, orders=None) -> UnitBallField:
    """Samples of the 2-homogeneous extension on the polar unit-ball rule."""
    quad = unit_quadrature(trace.n, orders or _default_orders(trace.n))
    return sample_unit_ball(trace, np.zeros(trace.n), 1.0, quad)


def _default_orders(n: int) -> tuple[int, int]:
    return (64, 256) if n == 2 else (32, 48)


@dataclass(frozen=True, eq=False)
class Competitor:
    v: VectorField
    cone_nodal: VectorField
    energy_cone: float
    energy_competitor: float
    stats: object


def cone_grid(n: int, h: float) -> Grid:
    L = h * math.ceil((1.0 + 2.0 * h) / h - 1e-9)
    return Grid.from_bounds([-L] * n, [L] * n, h)


def competitor(c: ConeTrace, N, s: float, *, h: float = 1.0 / 64, opts: SolveOptions | None = None) -> Competitor:
    """Minimize the grid energy with ``F_s`` over fields equal to ``c`` off the open unit ball."""
    if not 0 < s <= 1:
        raise InputError("s must lie in (0, 1]")
    grid = cone_grid(c.n, h)
    pts = grid.coords().reshape(-1, c.n)
    mask = (np.linalg.norm(pts, axis=1) >= 1.0).reshape(grid.dims) | grid.boundary_mask()
    cone = VectorField(grid, c.value(pts).reshape(grid.dims + (c.m,)), mask)
    Ns = N.rescaled(s)
    # starting from the cone itself: the monotone scheme can only lower the energy
    v, stats = minimize(grid, cone, Ns, opts, u0=cone.values)
    E = DiscreteEnergy(grid, Ns)
    return Competitor(v, cone, E(cone.values, mask), E(v.values, mask), stats)


@dataclass
class EpiResult:
    delta: float
    s: float
    seed: int | None
    H_c: float
    H_v: float
    M_h: float
    kappa: float | None
    denominator: float
    dist_w12: float
    dist_linf: float
    M_c: float
    reason: str = ""
    flags: list[str] = field(default_factory=list)

    @property
    def defined(self) -> bool:
        return self.kappa is not None

    def row(self) -> dict:
        return {
            "delta": self.delta,
            "s": self.s,
            "seed": self.seed,
            "H_c": self.H_c,
            "H_v": self.H_v,
            "M_h": self.M_h,
            "kappa_best": self.kappa,
            "flags": ";".join(self.flags + ([self.reason] if self.reason else [])),
        }


def kappa_ratio(H_c: float, H_v: float, M_h: float, eps_den: float = EPS_DEN) -> float | None:
    """``(H_c - H_v) / (H_c - M_h)``, or ``None`` when the denominator is below ``eps_den``."""
    den = H_c - M_h
    if den <= eps_den:
        return None
    return (H_c - H_v) / den


def kappa_estimate(
    c: ConeTrace,
    N,
    s: float,
    *,
    h: float = 1.0 / 64,
    eps_den: float = EPS_DEN,
    opts: SolveOptions | None = None,
    orders=None,
) -> EpiResult:
    """Contraction ratio of the constrained minimizer against the cone ``c``."""
    f0 = N.f0
    cf = cone_from_trace(c, orders)
    H_c = functional_H(cf, N, s)
    M_c = functional_M(cf, f0)
    comp = competitor(c, N, s, h=h, opts=opts)
    gain = comp.energy_cone - comp.energy_competitor
    H_v = H_c - gain
    proj = project_to_halfspace(cf, f0)
    hs = proj.half_space()
    hf = sample_unit_ball(hs, np.zeros(c.n), 1.0, cf.quad)
    M_h = functional_M(hf, f0)
    diff_v = cf.values - hf.values
    diff_g = cf.grads - hf.grads
    dist_w = math.sqrt(cf.integrate(np.sum(diff_v**2, axis=1) + np.sum(diff_g**2, axis=(1, 2))))
    dist_inf = float(np.max(np.linalg.norm(cf.surface_values - hf.surface_values, axis=1)))
    den = H_c - M_h
    kappa = kappa_ratio(H_c, H_v, M_h, eps_den)
    reason = "" if kappa is not None else f"denominator {den:.3g} below {eps_den:g}"
    flags = []
    if kappa is not None and kappa < 0:
        flags.append("negative-kappa")
    if M_c < alpha_n(c.n, f0) / 2.0 - 1e-3:
        flags.append("non-solution-cone")
    if gain < 0:
        flags.append("competitor-above-cone")
    if not comp.stats.converged:
        flags.append("competitor-not-converged")
    return EpiResult(c.delta, s, c.seed, H_c, H_v, M_h, kappa, den, dist_w, dist_inf, M_c, reason, flags)


@dataclass
class ScanResult:
    rows: list[EpiResult]
    min_kappa: float | None
    argmin: int | None
    min_M_c: float
    errors: list[str]

    @property
    def defined_rows(self) -> list[EpiResult]:
        return [r for r in self.rows if r.defined]


def batch_scan(
    deltas: Iterable[float],
    s_values: Iterable[float],
    K: int,
    seeds,
    N,
    *,
    n: int = 2,
    m: int = 2,
    h: float = 1.0 / 64,
    eps_den: float = EPS_DEN,
    opts: SolveOptions | None = None,
    map_fn=map,
) -> ScanResult:
    """Evaluate :func:`kappa_estimate` over the grid ``deltas x s_values x seeds``.

    ``seeds`` is a count (seeds ``0..seeds-1``) or an explicit list. Row
    order is fixed; failing rows are kept with their error text.
    """
    seed_list = list(range(seeds)) if isinstance(seeds, int) else list(seeds)
    jobs = list(itertools.product(list(deltas), list(s_values), seed_list))

    def run(job):
        delta, s, seed = job
        try:
            cone = sample_cone_near_halfspace(delta, K, seed, n=n, m=m, f0=N.f0)
            return kappa_estimate(cone, N, s, h=h, eps_den=eps_den, opts=opts)
        except FBRegError as exc:
            nan = float("nan")
            return EpiResult(delta, s, seed, nan, nan, nan, None, nan, nan, nan, nan, f"error: {exc}")

    rows = list(map_fn(run, jobs))
    kappas = [(r.kappa, i) for i, r in enumerate(rows) if r.kappa is not None]
    if kappas:
        kmin, imin = min(kappas)
    else:
        kmin, imin = None, None
    m_vals = [r.M_c for r in rows if np.isfinite(r.M_c)]
    errors = [r.reason for r in rows if r.reason.startswith("error")]
    return ScanResult(rows, kmin, imin, min(m_vals) if m_vals else float("nan"), errors)
