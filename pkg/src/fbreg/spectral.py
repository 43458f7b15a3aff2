"""Axisymmetric eigenproblem for ``L = -Laplace-Beltrami + q`` on spherical caps.

The cap is ``{theta < theta_cap}`` on the unit sphere of ``R^n``, with
``theta`` the angle from the axis and potential ``q(theta) = 2 / cos^2 theta``.
For axisymmetric ``v`` the operator reads
``-(rho v')' / rho + q v`` with ``rho = sin^(n-2) theta``, and on the half
cap ``cos^2 theta`` is an eigenfunction with eigenvalue ``2n``.

Two cell-centered finite-volume discretizations are provided:

``transform=True``
    ground-state form ``v = cos^2(theta) w``, giving the degenerate
    Sturm-Liouville problem ``-(rho phi^2 w')' = (lambda - 2n) rho phi^2 w``
    with ``phi = cos^2 theta``; the singular potential disappears.
``transform=False``
    the operator discretized directly, ``q`` sampled at cell centers.

Dirichlet data at ``theta_cap`` use a ghost cell, and the axis carries the
natural (zero flux) condition. Both discretizations are symmetric
tridiagonal after diagonal scaling and are solved with
:func:`scipy.linalg.eigh_tridiagonal`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import InputError

Q_MIN = 2.0
MIN_CELLS = 64
POTENTIALS = ("singular", "constant", "none")


def potential_q(theta) -> np.ndarray:
    """``q(theta) = 2 / cos^2 theta``."""
    return 2.0 / np.cos(np.asarray(theta, dtype=float)) ** 2


@dataclass(frozen=True)
class CapProblem:
    """Cap of opening ``theta_cap`` in ``R^n`` on ``M`` cell-centered nodes."""

    n: int
    theta_cap: float = math.pi / 2
    M: int = 256
    transform: bool = True

    def __post_init__(self):
        if self.n < 2:
            raise InputError("the sphere eigenproblem needs n >= 2")
        if not 0 < self.theta_cap <= math.pi / 2 + 1e-15:
            raise InputError("theta_cap must lie in (0, pi/2]")
        if self.M < MIN_CELLS:
            raise InputError(f"M must be at least {MIN_CELLS}")

    @property
    def dtheta(self) -> float:
        return self.theta_cap / self.M

    def nodes(self, M: int | None = None) -> np.ndarray:
        M = self.M if M is None else M
        return (np.arange(M) + 0.5) * (self.theta_cap / M)

    def weight(self, theta) -> np.ndarray:
        return np.sin(theta) ** (self.n - 2)

    def with_cells(self, M: int) -> "CapProblem":
        return CapProblem(self.n, self.theta_cap, M, self.transform)


def _tridiagonal(p: CapProblem, M: int, potential: str):
    """Symmetric tridiagonal ``(diag, off)``, the mass vector and the eigenvalue shift."""
    dt = p.theta_cap / M
    theta = (np.arange(M) + 0.5) * dt
    faces = np.arange(M + 1) * dt
    rho_c = p.weight(theta)
    rho_f = p.weight(faces)
    if p.n == 2:
        rho_f = np.ones_like(faces)
    if p.transform:
        if potential != "singular":
            raise InputError("the ground-state transform applies only to the singular potential")
        phi_c = np.cos(theta) ** 2
        phi_f = np.cos(faces) ** 2
        mass = rho_c * phi_c**2
        a = rho_f * phi_f**2
        pot = np.zeros(M)
        shift = 2.0 * p.n
    else:
        mass = rho_c
        a = rho_f.copy()
        if potential == "singular":
            pot = potential_q(theta)
        elif potential == "constant":
            pot = np.full(M, Q_MIN)
        elif potential == "none":
            pot = np.zeros(M)
        else:
            raise InputError(f"unknown potential {potential!r}; expected one of {POTENTIALS}")
        shift = 0.0
    a[0] = 0.0  # zero flux through the axis
    if p.theta_cap >= math.pi / 2 - 1e-15 and p.transform:
        a[-1] = 0.0
    # stiffness: sum of face fluxes; Dirichlet ghost at the cap doubles the last face
    diag = (a[:-1] + a[1:]) / dt**2
    diag[-1] = (a[-2] + 2.0 * a[-1]) / dt**2
    off = -a[1:-1] / dt**2
    diag = diag + pot * mass
    s = 1.0 / np.sqrt(mass)
    return diag * s * s, off * s[:-1] * s[1:], s, shift


def _solve(p: CapProblem, M: int, k: int, potential: str):
    d, e, s, shift = _tridiagonal(p, M, potential)
    vals, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, k - 1))
    w = vecs * s[:, None]
    theta = (np.arange(M) + 0.5) * (p.theta_cap / M)
    if p.transform:
        w = w * (np.cos(theta) ** 2)[:, None]
    return vals + shift, w.T


@dataclass(frozen=True)
class CapSpectrum:
    """Lowest ``k`` eigenvalues; ``eigenvalues`` is the Richardson value when extrapolated."""

    problem: CapProblem
    potential: str
    eigenvalues: np.ndarray
    coarse: np.ndarray
    fine: np.ndarray
    nodes: np.ndarray
    eigenfunctions: np.ndarray

    def correlation(self, target, index: int = 0) -> float:
        """``rho``-weighted cosine between eigenfunction ``index`` and ``target(theta)``."""
        rho = self.problem.weight(self.nodes)
        v = self.eigenfunctions[index]
        t = np.asarray(target(self.nodes), dtype=float)
        num = float(np.sum(rho * v * t))
        den = math.sqrt(float(np.sum(rho * v * v)) * float(np.sum(rho * t * t)))
        return abs(num) / den


def cap_eigen(p: CapProblem, k: int = 1, *, potential: str = "singular", extrapolate: bool = True) -> CapSpectrum:
    """Lowest ``k`` eigenvalues of ``L`` on the cap, Richardson-extrapolated over ``M`` and ``2M``.

    Eigenfunctions are sampled on the ``2M`` grid, normalized in the
    ``rho``-weighted norm and signed to be positive on the axis.
    """
    if k < 1:
        raise InputError("k must be at least 1")
    if k > p.M // 8:
        raise InputError(f"k = {k} exceeds the resolution of M = {p.M} cells (at most M/8)")
    if potential not in POTENTIALS:
        raise InputError(f"unknown potential {potential!r}; expected one of {POTENTIALS}")
    coarse, _ = _solve(p, p.M, k, potential)
    fine, vecs = _solve(p, 2 * p.M, k, potential)
    nodes = p.nodes(2 * p.M)
    rho = p.weight(nodes)
    vecs = vecs / np.sqrt(np.sum(rho * vecs * vecs, axis=1, keepdims=True) * (p.theta_cap / (2 * p.M)))
    vecs = vecs * np.where(vecs[:, :1] < 0, -1.0, 1.0)
    lam = (4.0 * fine - coarse) / 3.0 if extrapolate else fine
    return CapSpectrum(p, potential, lam, coarse, fine, nodes, vecs)


@dataclass(frozen=True)
class ShiftBoundReport:
    """``lambda_k(L)`` against ``q0 + lambda_k(-Laplace-Beltrami)``."""

    k: int
    lambda_L: float
    lambda_LB: float
    q0: float
    margin: float
    tol: float

    @property
    def holds(self) -> bool:
        return self.margin >= -self.tol

    @property
    def strict(self) -> bool:
        return self.margin > self.tol


def shift_bound_check(p: CapProblem, k: int = 1, *, potential: str = "singular", tol: float = 1e-6) -> ShiftBoundReport:
    """Compare ``lambda_k`` of ``L`` with ``2 + lambda_k`` of the bare operator.

    The bare operator always uses the direct discretization;
    ``potential="constant"`` replaces ``q`` by its minimum ``2``, where the
    bound is an equality.
    """
    lam_L = cap_eigen(p, k, potential=potential).eigenvalues[k - 1]
    bare = CapProblem(p.n, p.theta_cap, p.M, transform=False)
    lam_B = cap_eigen(bare, k, potential="none").eigenvalues[k - 1]
    return ShiftBoundReport(k, float(lam_L), float(lam_B), Q_MIN, float(lam_L - Q_MIN - lam_B), tol)


def cap_ladder(n: int, caps, M: int = 256, k: int = 1, *, transform: bool = True) -> np.ndarray:
    """``lambda_k`` for each cap opening in ``caps``."""
    return np.array(
        [cap_eigen(CapProblem(n, float(c), M, transform), k).eigenvalues[k - 1] for c in caps]
    )


def convergence_order(spacings, errors) -> float:
    """Least-squares slope of ``log error`` against ``log spacing``."""
    spacings = np.asarray(spacings, dtype=float)
    errors = np.abs(np.asarray(errors, dtype=float))
    if np.any(errors <= 0):
        raise InputError("errors must be nonzero to estimate an order")
    return float(np.polyfit(np.log(spacings), np.log(errors), 1)[0])
