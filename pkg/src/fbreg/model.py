"""Domain types: nonlinearities, grids, vector fields and half-space solutions.

The nonlinearity ``F`` enters the energy through ``F(|u|)``; the right-hand
side of the Euler-Lagrange system is ``f(|u|) u/|u|`` with ``f = F'/2``.
Structural bounds ``c0 <= f <= C0`` and ``0 <= F'' <= C0`` are only checked on
a declared range ``[0, s_max]``, since solutions are bounded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import InputError, ValidationError

FAMILIES = ("linear", "affine-quadratic", "exp-saturating", "custom")

_REL = 1e-12


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    """Convex nonlinearity ``F`` with its first two derivatives.

    ``c0`` and ``C0`` are the declared structural constants, ``s_max`` the
    range on which they were validated.
    """

    family: str
    params: tuple[float, ...]
    c0: float
    C0: float
    s_max: float
    _F: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    _dF: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    _d2F: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    def F(self, s):
        return self._F(np.asarray(s, dtype=float))

    def dF(self, s):
        return self._dF(np.asarray(s, dtype=float))

    def d2F(self, s):
        return self._d2F(np.asarray(s, dtype=float))

    def f(self, s):
        return 0.5 * self.dF(s)

    @property
    def f0(self) -> float:
        return float(0.5 * self.dF(0.0))

    @property
    def is_linear(self) -> bool:
        return self.family == "linear"

    def rescaled(self, s: float) -> "RescaledNonlinearity":
        return RescaledNonlinearity(self, s)


@dataclass(frozen=True, eq=False)
class RescaledNonlinearity:
    """The family ``F_s(t) = F(s^2 t) / s^2`` with ``f_s(t) = f(s^2 t)``.

    Satisfies the same structural bounds as the base nonlinearity; as ``s``
    decreases to zero it tends to ``2 f(0) t``.
    """

    base: Nonlinearity
    s: float

    def __post_init__(self):
        if not self.s > 0:
            raise InputError(f"rescaling parameter must be positive, got {self.s}")

    @property
    def family(self) -> str:
        return self.base.family

    @property
    def c0(self) -> float:
        return self.base.c0

    @property
    def C0(self) -> float:
        return self.base.C0

    @property
    def s_max(self) -> float:
        return self.base.s_max / self.s**2

    @property
    def is_linear(self) -> bool:
        return self.base.is_linear

    def F(self, t):
        s2 = self.s**2
        return self.base.F(s2 * np.asarray(t, dtype=float)) / s2

    def dF(self, t):
        return self.base.dF(self.s**2 * np.asarray(t, dtype=float))

    def d2F(self, t):
        s2 = self.s**2
        return s2 * self.base.d2F(s2 * np.asarray(t, dtype=float))

    def f(self, t):
        return 0.5 * self.dF(t)

    @property
    def f0(self) -> float:
        return self.base.f0

    def rescaled(self, s: float) -> "RescaledNonlinearity":
        return RescaledNonlinearity(self.base, self.s * s)


def _linear(lam: float):
    def F(s):
        return 2.0 * lam * s

    def dF(s):
        return np.full_like(s, 2.0 * lam, dtype=float)

    def d2F(s):
        return np.zeros_like(s, dtype=float)

    return F, dF, d2F


def _affine_quadratic(a: float, b: float):
    def F(s):
        return 2.0 * a * s + b * s * s

    def dF(s):
        return 2.0 * a + 2.0 * b * s

    def d2F(s):
        return np.full_like(s, 2.0 * b, dtype=float)

    return F, dF, d2F


def _exp_saturating(c: float, C: float):
    d = C - c

    def F(s):
        return 2.0 * C * s + d * np.expm1(-2.0 * s)

    def dF(s):
        return 2.0 * C - 2.0 * d * np.exp(-2.0 * s)

    def d2F(s):
        return 4.0 * d * np.exp(-2.0 * s)

    return F, dF, d2F


def _custom_table(s_nodes: np.ndarray, dF_nodes: np.ndarray):
    # monotone cubic interpolation of F' keeps F'' >= 0 between samples
    p = PchipInterpolator(s_nodes, dF_nodes, extrapolate=False)
    P = p.antiderivative()
    dp = p.derivative()
    s_last = float(s_nodes[-1])
    dF_last = float(dF_nodes[-1])

    def F(s):
        inside = np.minimum(s, s_last)
        return P(inside) + dF_last * np.maximum(s - s_last, 0.0)

    def dF(s):
        return np.where(s < s_last, p(np.minimum(s, s_last)), dF_last)

    def d2F(s):
        return np.where(s < s_last, dp(np.minimum(s, s_last)), 0.0)

    return F, dF, d2F


def _tight_bounds(family: str, params: Sequence[float], F, dF, d2F, s_max: float):
    if family == "linear":
        lam = params[0]
        return lam, lam
    if family == "affine-quadratic":
        a, b = params
        return a, max(a + b * s_max, 2.0 * b)
    if family == "exp-saturating":
        c, C = params
        return c, max(C, 4.0 * (C - c))
    s = np.linspace(0.0, s_max, 4097)
    f = 0.5 * dF(s)
    return float(f.min()), float(max(f.max(), d2F(s).max()))


def make_nonlinearity(
    family: str,
    params: Sequence[float],
    *,
    c0: float | None = None,
    C0: float | None = None,
    s_max: float = 10.0,
    samples: int = 2001,
) -> Nonlinearity:
    """Build a nonlinearity from a family tag and parameter list.

    Parameters
    ----------
    family : str
        ``linear`` (``F = 2 lam s``), ``affine-quadratic`` (``F = 2 a s + b s^2``),
        ``exp-saturating`` (``F = 2 C s - (C - c)(1 - exp(-2 s))``, params ``[c, C]``
        so that ``f(0) = c`` and ``f(inf) = C``) or ``custom`` (params are
        interleaved pairs ``s_0, F'(s_0), s_1, F'(s_1), ...`` starting at ``s_0 = 0``).
    c0, C0 : float, optional
        Declared structural constants. When omitted the tightest constants on
        ``[0, s_max]`` are used. Declared constants are validated and a
        :class:`ValidationError` names the first violated bound.
    """
    params = tuple(float(p) for p in params)
    if family == "linear":
        if len(params) != 1 or not params[0] > 0:
            raise ValidationError("linear family needs one parameter lam > 0")
        funcs = _linear(*params)
    elif family == "affine-quadratic":
        if len(params) != 2 or not params[0] > 0 or params[1] < 0:
            raise ValidationError("affine-quadratic family needs a > 0, b >= 0")
        funcs = _affine_quadratic(*params)
    elif family == "exp-saturating":
        if len(params) != 2 or not 0 < params[0] <= params[1]:
            raise ValidationError("exp-saturating family needs 0 < c <= C")
        funcs = _exp_saturating(*params)
    elif family == "custom":
        if len(params) < 4 or len(params) % 2:
            raise ValidationError("custom table needs at least two (s, F') pairs")
        table = np.asarray(params).reshape(-1, 2)
        s_nodes, dF_nodes = table[:, 0], table[:, 1]
        if s_nodes[0] != 0.0 or np.any(np.diff(s_nodes) <= 0):
            raise ValidationError("custom table abscissae must start at 0 and increase")
        if np.any(np.diff(dF_nodes) < 0):
            raise ValidationError("custom table F' samples must be nondecreasing (F'' >= 0)")
        if not dF_nodes[0] > 0:
            raise ValidationError("custom table needs F'(0) > 0 (f(0) > 0)")
        funcs = _custom_table(s_nodes, dF_nodes)
    else:
        raise ValidationError(f"unknown nonlinearity family {family!r}; expected one of {FAMILIES}")

    if not s_max > 0:
        raise ValidationError("s_max must be positive")
    tc0, tC0 = _tight_bounds(family, params, *funcs, s_max)
    declared = c0 is not None or C0 is not None
    N = Nonlinearity(
        family=family,
        params=params,
        c0=float(tc0 if c0 is None else c0),
        C0=float(tC0 if C0 is None else C0),
        s_max=float(s_max),
        _F=funcs[0],
        _dF=funcs[1],
        _d2F=funcs[2],
    )
    if not N.c0 > 0:
        raise ValidationError(f"c0 must be positive, got {N.c0}")
    report = validate_nonlinearity(N, s_max, samples)
    if not report.passed:
        bad = ", ".join(report.violations)
        origin = "declared constants" if declared else "parameters"
        raise ValidationError(f"{family} nonlinearity violates {bad} on [0, {s_max}] ({origin})")
    return N


@dataclass(frozen=True)
class NonlinearityReport:
    s_max: float
    samples: int
    c0: float
    C0: float
    f_min: float
    f_max: float
    d2F_min: float
    d2F_max: float
    checks: dict[str, bool]

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    @property
    def violations(self) -> list[str]:
        return [name for name, ok in self.checks.items() if not ok]


def validate_nonlinearity(
    N: Nonlinearity,
    s_max: float,
    samples: int,
    *,
    c0: float | None = None,
    C0: float | None = None,
) -> NonlinearityReport:
    """Check the structural bounds on a uniform sample of ``[0, s_max]``.

    Failures are report entries, never exceptions.
    """
    if not s_max > 0 or samples < 2:
        raise InputError("need s_max > 0 and at least two samples")
    c0 = N.c0 if c0 is None else float(c0)
    C0 = N.C0 if C0 is None else float(C0)
    s = np.linspace(0.0, s_max, int(samples))
    F = N.F(s)
    f = 0.5 * N.dF(s)
    d2 = N.d2F(s)
    f0 = f[0]
    tol = _REL * max(1.0, C0)
    checks = {
        "F(0)=0": abs(float(N.F(0.0))) <= tol,
        "f>=c0": bool(np.all(f >= c0 - tol)),
        "f<=C0": bool(np.all(f <= C0 + tol)),
        "F''>=0": bool(np.all(d2 >= -tol)),
        "F''<=C0": bool(np.all(d2 <= C0 + tol)),
        "F>=2f(0)s": bool(np.all(F >= 2.0 * f0 * s - tol * (1 + s))),
        "F<=2f(s)s": bool(np.all(F <= 2.0 * f * s + tol * (1 + s))),
    }
    return NonlinearityReport(
        s_max=float(s_max),
        samples=int(samples),
        c0=c0,
        C0=C0,
        f_min=float(f.min()),
        f_max=float(f.max()),
        d2F_min=float(d2.min()),
        d2F_max=float(d2.max()),
        checks=checks,
    )


@dataclass(frozen=True)
class Grid:
    """Uniform isotropic grid: node ``i`` sits at ``origin + i * h``."""

    n: int
    dims: tuple[int, ...]
    origin: tuple[float, ...]
    h: float

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise InputError(f"grid dimension must be 1, 2 or 3, got {self.n}")
        if len(self.dims) != self.n or len(self.origin) != self.n:
            raise InputError("dims and origin must have one entry per axis")
        if any(d < 3 for d in self.dims):
            raise InputError(f"need at least 3 nodes per axis, got {self.dims}")
        if not self.h > 0:
            raise InputError(f"grid spacing must be positive, got {self.h}")
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        object.__setattr__(self, "h", float(self.h))

    @classmethod
    def from_bounds(cls, lower: Sequence[float], upper: Sequence[float], h: float) -> "Grid":
        lower = [float(v) for v in lower]
        upper = [float(v) for v in upper]
        dims = tuple(int(round((b - a) / h)) + 1 for a, b in zip(lower, upper))
        return cls(len(lower), dims, tuple(lower), h)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.dims

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    @property
    def lower(self) -> np.ndarray:
        return np.asarray(self.origin)

    @property
    def upper(self) -> np.ndarray:
        return np.asarray(self.origin) + self.h * (np.asarray(self.dims) - 1)

    def axes(self) -> list[np.ndarray]:
        return [o + self.h * np.arange(d) for o, d in zip(self.origin, self.dims)]

    def coords(self) -> np.ndarray:
        """Node coordinates, shape ``dims + (n,)``."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.dims, dtype=bool)
        for a in range(self.n):
            idx = [slice(None)] * self.n
            idx[a] = 0
            mask[tuple(idx)] = True
            idx[a] = -1
            mask[tuple(idx)] = True
        return mask


@dataclass(frozen=True, eq=False)
class VectorField:
    """Nodal values of ``u: grid -> R^m`` plus the Dirichlet mask.

    Masked nodes carry the boundary data ``g``.
    """

    grid: Grid
    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim == self.grid.n:
            values = values[..., None]
        if values.shape[:-1] != self.grid.dims:
            raise InputError(f"values shape {values.shape} does not match grid {self.grid.dims}")
        if not np.all(np.isfinite(values)):
            raise InputError("vector field contains non-finite values")
        mask = np.array(self.mask, dtype=bool)
        if mask.shape != self.grid.dims:
            raise InputError("mask shape does not match grid")
        values.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def from_function(
        cls,
        grid: Grid,
        func: Callable[[np.ndarray], np.ndarray],
        mask: np.ndarray | None = None,
    ) -> "VectorField":
        """Sample ``func`` (points ``(P, n)`` -> ``(P, m)``) at every node."""
        pts = grid.coords().reshape(-1, grid.n)
        vals = np.asarray(func(pts), dtype=float)
        vals = vals.reshape(grid.dims + (-1,))
        return cls(grid, vals, grid.boundary_mask() if mask is None else mask)

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def m(self) -> int:
        return self.values.shape[-1]

    def norm(self) -> np.ndarray:
        return np.sqrt(np.sum(self.values**2, axis=-1))

    def with_values(self, values: np.ndarray) -> "VectorField":
        return VectorField(self.grid, values, self.mask)


@dataclass(frozen=True)
class HalfSpaceSolution:
    """``f0 * max(x . nu, 0)^2 / 2 * e``; exact blow-up profile at regular points."""

    nu: tuple[float, ...]
    e: tuple[float, ...]
    f0: float

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=float)
        e = np.asarray(self.e, dtype=float)
        if abs(np.linalg.norm(nu) - 1.0) > 1e-9 or abs(np.linalg.norm(e) - 1.0) > 1e-9:
            raise InputError("half-space directions nu and e must be unit vectors")
        if not self.f0 > 0:
            raise InputError("f0 must be positive")
        object.__setattr__(self, "nu", tuple(float(v) for v in nu))
        object.__setattr__(self, "e", tuple(float(v) for v in e))
        object.__setattr__(self, "f0", float(self.f0))

    @classmethod
    def from_directions(cls, nu, e, f0: float) -> "HalfSpaceSolution":
        nu = np.asarray(nu, dtype=float)
        e = np.asarray(e, dtype=float)
        return cls(tuple(nu / np.linalg.norm(nu)), tuple(e / np.linalg.norm(e)), f0)

    @property
    def n(self) -> int:
        return len(self.nu)

    @property
    def m(self) -> int:
        return len(self.e)

    def value(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        t = np.maximum(x @ np.asarray(self.nu), 0.0)
        return (0.5 * self.f0 * t * t)[:, None] * np.asarray(self.e)[None, :]

    def gradient(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        t = np.maximum(x @ np.asarray(self.nu), 0.0)
        outer = np.outer(self.e, self.nu)
        return (self.f0 * t)[:, None, None] * outer[None, :, :]


def half_space_eval(H: HalfSpaceSolution, x) -> np.ndarray:
    """Evaluate ``H`` at a single point."""
    return H.value(np.asarray(x, dtype=float)[None, :])[0]
