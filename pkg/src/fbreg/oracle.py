"""Reference solutions used as ground truth.

* :func:`exact_linear_1d` is the closed-form 1-D contact solution for constant ``f``.
* :class:`PlanarProfile` is the exact flat-interface solution ``U(x . nu - d) e``
  for any admissible nonlinearity, from the first integral ``U'^2 = F(U)``.
* :func:`reference_solve_1d` reruns the production solver on a refined grid.
* :func:`reference_radial` solves the radial reduction by shooting from the
  contact radius (or from the centre when there is no contact set).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import DomainError, InputError, NumericError
from .model import Grid, VectorField
from .solver import SolveOptions, minimize

_ODE_TOL = dict(method="DOP853", rtol=1e-12, atol=1e-15)


@dataclass(frozen=True)
class Contact1D:
    """``u'' = lam`` on ``{u > 0}`` over ``[a, b]`` with ``u(a) = p``, ``u(b) = q``.

    When the data are too large for a contact set, ``contact`` is False and
    the solution is the parabola ``lam x^2/2 + c1 x + c0`` through the data.
    """

    lam: float
    a: float
    b: float
    p: float
    q: float
    x1: float
    x2: float
    contact: bool = True

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.contact:
            left = np.maximum(self.x1 - x, 0.0)
            right = np.maximum(x - self.x2, 0.0)
            return 0.5 * self.lam * (left * left + right * right)
        L = self.b - self.a
        t = x - self.a
        slope = (self.q - self.p) / L - 0.5 * self.lam * L
        return self.p + slope * t + 0.5 * self.lam * t * t

    def derivative(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.contact:
            return self.lam * (np.maximum(x - self.x2, 0.0) - np.maximum(self.x1 - x, 0.0))
        L = self.b - self.a
        slope = (self.q - self.p) / L - 0.5 * self.lam * L
        return slope + self.lam * (x - self.a)


def exact_linear_1d(lam: float, a: float, b: float, p: float, q: float) -> Contact1D:
    """Closed-form minimizer for ``F(s) = 2 lam s`` on an interval."""
    if p < 0 or q < 0:
        raise InputError("boundary values must be nonnegative")
    if not lam > 0 or not b > a:
        raise InputError("need lam > 0 and b > a")
    x1 = a + math.sqrt(2.0 * p / lam)
    x2 = b - math.sqrt(2.0 * q / lam)
    if x1 <= x2:
        return Contact1D(lam, a, b, p, q, x1, x2, True)
    return Contact1D(lam, a, b, p, q, float("nan"), float("nan"), False)


class PlanarProfile:
    """Exact flat-interface solution ``U(x . nu - offset) e``.

    ``U`` vanishes for negative argument and solves ``U'' = f(U)`` with
    ``U(0) = U'(0) = 0``, so ``U' = sqrt(F(U))``. Writing ``U = w^2`` the
    equation ``w' = sqrt(F(w^2)) / (2 w)`` is regular at ``w = 0``; it is
    integrated once up to ``t_max`` with dense output.
    """

    def __init__(self, N, nu, e, offset: float = 0.0, t_max: float = 4.0):
        self.N = N
        nu = np.asarray(nu, dtype=float)
        e = np.asarray(e, dtype=float)
        self.nu = nu / np.linalg.norm(nu)
        self.e = e / np.linalg.norm(e)
        self.offset = float(offset)
        self.t_max = float(t_max)
        self.f0 = float(N.f0)
        if N.is_linear:
            self._sol = None
        else:
            slope0 = math.sqrt(2.0 * self.f0) / 2.0

            def rhs(_t, y):
                w = y[0]
                if w <= 1e-8:
                    return [slope0]
                return [math.sqrt(float(N.F(w * w))) / (2.0 * w)]

            sol = solve_ivp(rhs, (0.0, self.t_max), [0.0], dense_output=True, **_ODE_TOL)
            if not sol.success:
                raise NumericError(f"planar profile integration failed: {sol.message}")
            self._sol = sol.sol

    @property
    def n(self) -> int:
        return self.nu.size

    @property
    def m(self) -> int:
        return self.e.size

    def profile(self, t) -> tuple[np.ndarray, np.ndarray]:
        """``(U(t), U'(t))``."""
        t = np.asarray(t, dtype=float)
        tp = np.maximum(t, 0.0)
        if np.any(tp > self.t_max):
            raise DomainError(f"profile evaluated beyond t_max = {self.t_max}")
        if self._sol is None:
            return 0.5 * self.f0 * tp * tp, self.f0 * tp
        w = self._sol(tp.ravel())[0].reshape(tp.shape)
        w = np.where(t > 0, w, 0.0)
        U = w * w
        return U, np.sqrt(np.maximum(self.N.F(U), 0.0))

    def value(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        U, _ = self.profile(x @ self.nu - self.offset)
        return U[:, None] * self.e[None, :]

    def gradient(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        _, dU = self.profile(x @ self.nu - self.offset)
        return dU[:, None, None] * np.outer(self.e, self.nu)[None]


@dataclass(frozen=True)
class DenseSolution1D:
    x: np.ndarray
    u: np.ndarray
    h: float

    def __call__(self, x) -> np.ndarray:
        return np.interp(np.asarray(x, dtype=float), self.x, self.u)


def reference_solve_1d(
    N,
    a: float,
    b: float,
    p: float,
    q: float,
    h: float,
    refinement: int = 4,
    opts: SolveOptions | None = None,
) -> DenseSolution1D:
    """Production solver on ``[a, b]`` at spacing ``h / refinement``, tolerances tightened 100x."""
    if refinement < 4:
        raise InputError("refinement must be at least 4")
    if p < 0 or q < 0:
        raise InputError("boundary values must be nonnegative")
    base = opts or SolveOptions()
    tight = SolveOptions(
        step=base.step,
        acceleration=base.acceleration,
        tol_fp=base.tol_fp / 100.0,
        tol_E=base.tol_E / 100.0,
        max_iters=base.max_iters,
        trace_every=base.trace_every,
        energy_window=base.energy_window,
    )
    h_ref = h / refinement
    grid = Grid.from_bounds([a], [b], h_ref)
    vals = np.zeros(grid.dims + (1,))
    vals[0, 0] = p
    vals[-1, 0] = q
    g = VectorField(grid, vals, grid.boundary_mask())
    u, _ = minimize(grid, g, N, tight)
    return DenseSolution1D(grid.axes()[0], u.values[:, 0].copy(), h_ref)


class RadialProfile:
    """Radial solution ``u(x) = U(|x - center|) e`` on ``B_R(center)``.

    ``contact_radius`` is the radius of the zero set (0 when ``U > 0``
    everywhere except possibly the centre).
    """

    def __init__(self, n, R, contact_radius, U0, sol, e, center=None, f_center=0.0):
        self.n_dim = int(n)
        self._f_center = float(f_center)
        self.R = float(R)
        self.contact_radius = float(contact_radius)
        self.U0 = float(U0)
        self._sol = sol
        e = np.asarray(e, dtype=float)
        self.e = e / np.linalg.norm(e)
        self.center = np.zeros(self.n_dim) if center is None else np.asarray(center, dtype=float)

    @property
    def n(self) -> int:
        return self.n_dim

    @property
    def m(self) -> int:
        return self.e.size

    def profile(self, r) -> tuple[np.ndarray, np.ndarray]:
        r = np.asarray(r, dtype=float)
        if np.any(r > self.R * (1 + 1e-12)):
            raise DomainError(f"radial profile evaluated beyond R = {self.R}")
        U = np.zeros_like(r)
        dU = np.zeros_like(r)
        if self._sol is None:
            return U, dU
        rc, r_start = self.contact_radius, self._sol.t_min
        live = r > rc if rc > 0 else np.ones(r.shape, dtype=bool)
        if np.any(live):
            rr = np.clip(r[live], r_start, self.R)
            y = self._sol(rr)
            U[live], dU[live] = y[0], y[1]
            if rc == 0.0:
                inner = r[live] < r_start
                if np.any(inner):
                    # series U0 + f(U0) r^2 / (2n) below the start radius
                    c = self._f_center / (2.0 * self.n_dim)
                    ri = r[live][inner]
                    U_live, dU_live = U[live], dU[live]
                    U_live[inner] = self.U0 + c * ri * ri
                    dU_live[inner] = 2.0 * c * ri
                    U[live], dU[live] = U_live, dU_live
        return U, dU

    def value(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float)) - self.center
        U, _ = self.profile(np.linalg.norm(x, axis=1))
        return U[:, None] * self.e[None, :]

    def gradient(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float)) - self.center
        r = np.linalg.norm(x, axis=1)
        _, dU = self.profile(r)
        unit = np.divide(x, r[:, None], out=np.zeros_like(x), where=r[:, None] > 0)
        return dU[:, None, None] * self.e[None, :, None] * unit[:, None, :]

    def contains_ball(self, center, r: float) -> bool:
        return float(np.linalg.norm(np.asarray(center) - self.center)) + r <= self.R * (1 + 1e-12)


def _shoot(N, n: int, R: float, r0: float, U0: float):
    """Integrate ``U'' = f(U) - (n-1) U'/r`` outward from ``r0`` (``U(r0) = U0``, ``U'(r0) = 0``)."""

    def rhs(r, y):
        return [y[1], 0.5 * float(N.dF(max(y[0], 0.0))) - (n - 1) * y[1] / r]

    if r0 > 0:
        start, y0 = r0, [0.0, 0.0]
    else:
        # regular centre: start slightly off the origin on the Taylor series
        start = 1e-6 * R
        c = 0.5 * float(N.dF(U0)) / (2.0 * n)
        y0 = [U0 + c * start * start, 2.0 * c * start]
    if start >= R:
        return None, 0.0
    sol = solve_ivp(rhs, (start, R), y0, dense_output=True, **_ODE_TOL)
    if not sol.success:
        raise NumericError(f"radial shooting failed: {sol.message}")
    return sol.sol, float(sol.y[0, -1])


def reference_radial(N, n: int, R: float, b: float, e=None, *, center=None) -> RadialProfile:
    """Radial minimizer on ``B_R`` with boundary value ``b e``.

    The contact radius ``rho`` (or the centre value when no contact set
    exists) is found by bracketing root search on the end value of the
    shooting trajectory, which is monotone in both parameters.
    """
    if b < 0:
        raise InputError("boundary magnitude must be nonnegative")
    if n < 1 or not R > 0:
        raise InputError("need n >= 1 and R > 0")
    e = np.eye(1)[0] if e is None else np.asarray(e, dtype=float)
    if b == 0.0:
        return RadialProfile(n, R, R, 0.0, None, e, center)
    _, b_crit = _shoot(N, n, R, 0.0, 0.0)
    if b <= b_crit:
        def gap(rho):
            return _shoot(N, n, R, rho, 0.0)[1] - b

        rho = brentq(gap, 0.0, R * (1 - 1e-12), xtol=1e-15, rtol=1e-14)
        sol, _ = _shoot(N, n, R, rho, 0.0)
        return RadialProfile(n, R, rho, 0.0, sol, e, center)

    def gap(U0):
        return _shoot(N, n, R, 0.0, U0)[1] - b

    U0 = brentq(gap, 0.0, b, xtol=1e-15, rtol=1e-14)
    sol, _ = _shoot(N, n, R, 0.0, U0)
    return RadialProfile(n, R, 0.0, U0, sol, e, center, f_center=0.5 * float(N.dF(U0)))
