"""Forward-backward splitting for the discrete energy.

Each iteration takes a gradient step on the Dirichlet part and applies the
exact nodal prox of ``h**n F(|.|)``. Boundary nodes stay pinned to ``g``.
Nesterov momentum is restarted whenever the energy would increase, which
keeps the recorded energy trace nonincreasing.
"""

from __future__ import annotations

import logging
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .energy import DiscreteEnergy, lipschitz_bound, prox_field
from .errors import InputError, NumericError
from .model import Grid, VectorField

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolveOptions:
    """Options for :func:`minimize`.

    ``step`` defaults to ``1/L``; ``tol_fp`` is multiplied by ``h**2`` before
    it is compared with the sup-norm change between iterates. The relative
    energy decrease is measured across ``energy_window`` iterations
    (default: twice the largest node count per axis, about one e-fold of
    the accelerated contraction), never across a single step.
    """

    step: float | None = None
    acceleration: bool = True
    tol_fp: float = 1e-8
    tol_E: float = 1e-12
    max_iters: int = 200_000
    trace_every: int = 10
    energy_window: int | None = None

    def __post_init__(self):
        if self.step is not None and not self.step > 0:
            raise InputError("step must be positive")
        if not (self.tol_fp > 0 and self.tol_E > 0):
            raise InputError("tolerances must be positive")
        if self.max_iters < 1:
            raise InputError("max_iters must be at least 1")


@dataclass
class SolveStats:
    iterations: int
    energy: float
    energy_trace: list[float] = field(default_factory=list)
    fixed_point_residual: float = 0.0
    wall_time: float = 0.0
    converged: bool = True
    stop_reason: str = ""
    restarts: int = 0

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "energy": self.energy,
            "energy_trace": list(self.energy_trace),
            "fixed_point_residual": self.fixed_point_residual,
            "wall_time": self.wall_time,
            "converged": self.converged,
            "stop_reason": self.stop_reason,
            "restarts": self.restarts,
        }


def _initial_values(g: VectorField, u0) -> np.ndarray:
    if u0 is None:
        x = np.zeros_like(g.values)
    else:
        x = np.array(u0.values if isinstance(u0, VectorField) else u0, dtype=float)
        if x.shape != g.values.shape:
            raise InputError(f"initial field shape {x.shape} differs from {g.values.shape}")
    x[g.mask] = g.values[g.mask]
    return x


def minimize(
    grid: Grid,
    g: VectorField,
    N,
    opts: SolveOptions | None = None,
    u0=None,
) -> tuple[VectorField, SolveStats]:
    """Minimize the discrete energy with Dirichlet data ``g`` on ``g.mask``.

    Returns the final iterate and its statistics. Reaching ``max_iters``
    is not an error: the best iterate comes back with ``converged=False``.
    """
    opts = opts or SolveOptions()
    if g.grid != grid:
        raise InputError("boundary data does not conform to the grid")
    if not np.all(np.isfinite(g.values[g.mask])):
        raise InputError("boundary data must be finite")
    t_start = time.perf_counter()
    E = DiscreteEnergy(grid, N)
    mask = g.mask
    L = lipschitz_bound(E)
    tau = min(opts.step, 1.0 / L) if opts.step is not None else 1.0 / L
    tau_prox = tau * E.cell_weight
    tol_fp = opts.tol_fp * grid.h**2
    gb = g.values[mask]
    energy, gradient = E.bind(mask)
    window = opts.energy_window or 2 * max(grid.dims)

    def step(y):
        z = prox_field(y - tau * gradient(y), tau_prox, N)
        z[mask] = gb
        return z

    x = _initial_values(g, u0)
    Ex = energy(x)
    if not np.isfinite(Ex):
        raise NumericError("initial energy is not finite")
    trace = [Ex]
    history = deque([Ex], maxlen=window + 1)
    y = x
    plain = True
    t = 1.0
    restarts = 0
    diff = np.inf
    reason = "max_iters"
    converged = False
    k = 0
    for k in range(1, opts.max_iters + 1):
        xn = step(y)
        En = energy(xn)
        if En > Ex and not plain:
            restarts += 1
            t = 1.0
            xn = step(x)
            En = energy(xn)
        if not np.isfinite(En):
            raise NumericError(f"energy became non-finite at iteration {k}")
        diff = float(np.max(np.abs(xn - x))) if x.size else 0.0
        history.append(En)
        rel = (history[0] - En) / max(abs(En), 1e-300)
        if opts.acceleration:
            tn = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            beta = (t - 1.0) / tn
            y = xn + beta * (xn - x)
            y[mask] = gb
            plain = beta == 0.0
            t = tn
        else:
            y = xn
        x, Ex = xn, En
        if k % opts.trace_every == 0:
            trace.append(Ex)
        if diff <= tol_fp:
            reason, converged = "fixed_point", True
            break
        if len(history) > window and 0.0 <= rel < opts.tol_E:
            reason, converged = "energy", True
            break
    if k % opts.trace_every != 0:
        trace.append(Ex)
    r_max = float(np.max(np.sqrt(np.sum(x * x, axis=-1))))
    if r_max > N.s_max:
        logger.warning("max |u| = %.3g exceeds the validated range s_max = %.3g", r_max, N.s_max)
    stats = SolveStats(
        iterations=k,
        energy=float(Ex),
        energy_trace=trace,
        fixed_point_residual=diff,
        wall_time=time.perf_counter() - t_start,
        converged=converged,
        stop_reason=reason,
        restarts=restarts,
    )
    return VectorField(grid, x, mask), stats


def uniqueness_audit(
    grid: Grid,
    g: VectorField,
    N,
    opts: SolveOptions | None = None,
    seeds: int = 3,
    *,
    rng_seed: int = 0,
) -> float:
    """Largest pairwise sup-norm gap between minimizers from different starts.

    Starts are the zero field, the boundary data itself, and ``seeds - 2``
    random fields scaled to the size of ``g``.
    """
    if seeds < 2:
        raise InputError("uniqueness audit needs at least two starts")
    rng = np.random.default_rng(rng_seed)
    scale = float(np.max(np.abs(g.values))) if g.values.size else 0.0
    starts = [None, g.values]
    for _ in range(seeds - 2):
        starts.append(scale * rng.standard_normal(g.values.shape))
    solutions = [minimize(grid, g, N, opts, u0=s)[0].values for s in starts]
    gap = 0.0
    for i in range(len(solutions)):
        for j in range(i + 1, len(solutions)):
            gap = max(gap, float(np.max(np.abs(solutions[i] - solutions[j]))))
    return gap


def discrete_laplacian(u: VectorField) -> np.ndarray:
    """Standard ``(2n+1)``-point Laplacian; zero on hull nodes."""
    n = u.n
    h2 = u.grid.h**2
    vals = u.values
    out = np.zeros_like(vals)
    core = (slice(1, -1),) * n
    acc = -(2.0 * n) * vals[core]
    for a in range(n):
        up = list(core)
        dn = list(core)
        up[a] = slice(2, None)
        dn[a] = slice(None, -2)
        acc = acc + vals[tuple(up)] + vals[tuple(dn)]
    out[core] = acc / h2
    return out


def el_residual(u: VectorField, N, theta_pos: float) -> np.ndarray:
    """Nodal residual of ``Delta u = f(|u|) u/|u|`` on the positivity set.

    Where ``|u| <= theta_pos`` the residual is the distance of ``Delta_h u``
    to the closed ball of radius ``f(0)`` (the subdifferential there).
    Masked and hull nodes report zero.
    """
    if not theta_pos > 0:
        raise InputError("theta_pos must be positive")
    lap = discrete_laplacian(u)
    r = u.norm()
    pos = r > theta_pos
    direction = np.divide(u.values, r[..., None], out=np.zeros_like(u.values), where=pos[..., None])
    rhs = N.f(r)[..., None] * direction
    res_pos = np.sqrt(np.sum((lap - rhs) ** 2, axis=-1))
    res_zero = np.maximum(np.sqrt(np.sum(lap * lap, axis=-1)) - N.f0, 0.0)
    out = np.where(pos, res_pos, res_zero)
    interior = np.zeros(u.grid.dims, dtype=bool)
    interior[(slice(1, -1),) * u.n] = True
    out[~interior | u.mask] = 0.0
    return out
