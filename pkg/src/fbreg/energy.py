"""Discrete energy, its smooth-part gradient and the proximal map of ``F(|.|)``.

The Dirichlet integral is discretized by forward differences on grid edges
(weight ``h**(n-2)``) and ``F(|u|)`` by the nodal rectangle rule (weight
``h**n``). Only edges with at least one free endpoint and only free nodes
contribute, so masked boundary nodes act as hard constraints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericError
from .model import Grid, VectorField

PROX_MAX_ITERS = 200


@dataclass(frozen=True, eq=False)
class DiscreteEnergy:
    grid: Grid
    N: object

    @property
    def edge_weight(self) -> float:
        return self.grid.h ** (self.grid.n - 2)

    @property
    def cell_weight(self) -> float:
        return self.grid.h**self.grid.n

    def dirichlet(self, values: np.ndarray, mask: np.ndarray) -> float:
        total = 0.0
        for a in range(self.grid.n):
            d = np.diff(values, axis=a)
            lo = [slice(None)] * self.grid.n
            hi = [slice(None)] * self.grid.n
            lo[a] = slice(None, -1)
            hi[a] = slice(1, None)
            active = ~(mask[tuple(lo)] & mask[tuple(hi)])
            total += float(np.sum(np.sum(d * d, axis=-1) * active))
        return self.edge_weight * total

    def nonsmooth(self, values: np.ndarray, mask: np.ndarray) -> float:
        r = np.sqrt(np.sum(values * values, axis=-1))
        return self.cell_weight * float(np.sum(self.N.F(r) * ~mask))

    def __call__(self, values: np.ndarray, mask: np.ndarray) -> float:
        return self.dirichlet(values, mask) + self.nonsmooth(values, mask)

    def gradient(self, values: np.ndarray, mask: np.ndarray) -> np.ndarray:
        n = self.grid.n
        if _covers_hull(mask):
            return self._stencil_gradient(values, mask)
        g = np.zeros_like(values)
        for a in range(n):
            d = np.diff(values, axis=a)
            lo = [slice(None)] * n
            hi = [slice(None)] * n
            lo[a] = slice(None, -1)
            hi[a] = slice(1, None)
            g[tuple(lo)] -= d
            g[tuple(hi)] += d
        g *= 2.0 * self.edge_weight
        g[mask] = 0.0
        return g


    def bind(self, mask: np.ndarray):
        """Return ``(energy, gradient)`` callables specialised to a fixed mask.

        The masked values must not change between calls; their constant
        contributions are computed on first use and subtracted.
        """
        full_stencil = _covers_hull(mask)
        free = ~mask
        cache: dict[str, float] = {}
        ew, cw = self.edge_weight, self.cell_weight
        n = self.grid.n

        def edge_sum(values):
            total = 0.0
            for a in range(n):
                d = np.diff(values, axis=a).ravel()
                total += float(np.dot(d, d))
            return total

        def energy(values):
            if "pinned_edges" not in cache:
                # edges joining two pinned nodes only see fixed values
                cache["pinned_edges"] = edge_sum(values) - self.dirichlet(values, mask) / ew
            r = np.sqrt(np.einsum("...i,...i->...", values, values))
            dirichlet = ew * (edge_sum(values) - cache["pinned_edges"])
            return dirichlet + cw * float(np.sum(self.N.F(r), where=free))

        if full_stencil:
            core = (slice(1, -1),) * n
            scale = (2.0 * ew) * free[core][..., None].astype(float)

            def gradient(values):
                g = np.zeros_like(values)
                acc = (2.0 * n) * values[core]
                for a in range(n):
                    up = list(core)
                    dn = list(core)
                    up[a] = slice(2, None)
                    dn[a] = slice(None, -2)
                    acc -= values[tuple(up)]
                    acc -= values[tuple(dn)]
                acc *= scale
                g[core] = acc
                return g
        else:
            def gradient(values):
                return self.gradient(values, mask)

        return energy, gradient

    def _stencil_gradient(self, values: np.ndarray, mask: np.ndarray) -> np.ndarray:
        # every hull node is pinned, so the full stencil applies to all free nodes
        n = self.grid.n
        g = np.zeros_like(values)
        core = (slice(1, -1),) * n
        acc = (2.0 * n) * values[core]
        for a in range(n):
            up = list(core)
            dn = list(core)
            up[a] = slice(2, None)
            dn[a] = slice(None, -2)
            acc -= values[tuple(up)]
            acc -= values[tuple(dn)]
        g[core] = (2.0 * self.edge_weight) * acc
        g[mask] = 0.0
        return g


def _covers_hull(mask: np.ndarray) -> bool:
    for a in range(mask.ndim):
        if not (np.take(mask, 0, axis=a).all() and np.take(mask, -1, axis=a).all()):
            return False
    return True


def discrete_energy(u: VectorField, E: DiscreteEnergy) -> float:
    """Return the discrete energy of ``u``."""
    if u.grid != E.grid:
        raise InputError("field does not conform to the energy grid")
    if not np.all(np.isfinite(u.values)):
        raise InputError("non-finite value in field")
    return E(u.values, u.mask)


def dirichlet_gradient(u: VectorField, E: DiscreteEnergy) -> VectorField:
    """Gradient of the Dirichlet sum with respect to the free nodal values.

    Equals ``2 h**(n-2)`` times the graph Laplacian of ``u``; zero on masked nodes.
    """
    if u.grid != E.grid:
        raise InputError("field does not conform to the energy grid")
    return VectorField(u.grid, E.gradient(u.values, u.mask), u.mask)


def lipschitz_bound(E: DiscreteEnergy) -> float:
    """Upper bound ``8 n h**(n-2)`` on the Lipschitz constant of the Dirichlet gradient."""
    return 8.0 * E.grid.n * E.grid.h ** (E.grid.n - 2)


def prox_field(w: np.ndarray, tau, N) -> np.ndarray:
    """Vectorized proximal map of ``tau * F(|.|)`` over the last axis of ``w``.

    ``tau`` may be a scalar or broadcast against ``w[..., 0]``.
    """
    w = np.asarray(w, dtype=float)
    r = np.sqrt(np.einsum("...i,...i->...", w, w))
    tau = np.asarray(tau, dtype=float)
    hi = r - tau * float(N.dF(0.0))
    active = hi > 0
    if getattr(N, "is_linear", False):
        s = hi
    else:
        s = _shrink_radius(r, tau, N, np.maximum(hi, 0.0), active)
    scale = np.divide(s, r, out=np.zeros_like(r), where=active)
    return w * scale[..., None]


def _shrink_radius(r, tau, N, hi, active) -> np.ndarray:
    """Solve ``s + tau F'(s) = r`` on ``(0, r - tau F'(0)]`` by safeguarded Newton.

    ``F'`` is nondecreasing, so the left side is strictly increasing and the
    bracket ``[0, r - tau F'(0)]`` always contains the root.
    """
    lo = np.zeros_like(r)
    s = hi
    tol = 1e-12 * np.maximum(1.0, r)
    for _ in range(PROX_MAX_ITERS):
        phi = s + tau * N.dF(s) - r
        if np.all((np.abs(phi) <= tol) | ~active):
            return s
        pos = phi > 0
        hi = np.where(pos, s, hi)
        lo = np.where(pos, lo, s)
        cand = s - phi / (1.0 + tau * N.d2F(s))
        bad = (cand < lo) | (cand > hi)
        s_new = np.where(bad, 0.5 * (lo + hi), cand)
        if np.all((np.abs(s_new - s) <= tol) | ~active):
            return s_new
        s = s_new
    raise NumericError("prox root finder did not converge")


def prox_pointwise(w, tau: float, N) -> np.ndarray:
    """``argmin_v |v - w|^2 / 2 + tau F(|v|)`` for a single ``m``-vector ``w``."""
    if not tau > 0:
        raise InputError("prox step tau must be positive")
    return prox_field(np.asarray(w, dtype=float)[None, :], tau, N)[0]
