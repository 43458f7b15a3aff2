"""Run configuration: TOML sections with documented defaults and strict key checking."""

from __future__ import annotations

import math
import re
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError

# section -> key -> (default, kind, description)
SCHEMA: dict[str, dict[str, tuple[Any, str, str]]] = {
    "grid": {
        "n": (2, "int", "space dimension (1, 2 or 3)"),
        "half_width": (1.0, "float", "domain is the cube [-half_width, half_width]^n"),
        "h": (0.015625, "float", "grid spacing"),
    },
    "nonlinearity": {
        "family": ("linear", "str", "linear | affine-quadratic | exp-saturating | custom"),
        "params": ([1.0], "floats", "family parameters (exp-saturating: [c, C])"),
        "s_max": (10.0, "float", "upper end of the range on which structural constants are checked"),
    },
    "boundary": {
        "kind": ("half-space", "str", "half-space | planar | constant | radial | file"),
        "m": (2, "int", "number of components"),
        "angle": (0.3, "float", "angle of the half-space normal from the last axis (half-space, planar)"),
        "value": ([0.1, 0.0], "floats", "constant boundary vector (constant)"),
        "b": (0.05, "float", "boundary magnitude at |x| = half_width (radial)"),
        "path": ("", "str", "field file supplying the boundary data (file)"),
    },
    "solver": {
        "step": (0.0, "float", "gradient step; 0 selects 1/L"),
        "acceleration": (True, "bool", "Nesterov momentum with adaptive restart"),
        "tol_fp": (1e-8, "float", "fixed-point tolerance, multiplied by h^2"),
        "tol_E": (1e-12, "float", "windowed relative energy decrease tolerance"),
        "max_iters": (200000, "int", "iteration cap"),
    },
    "audit": {
        "point": ([], "floats", "audit centre; empty selects the degenerate free-boundary point nearest the origin"),
        "radii_count": (10, "int", "number of radii in the geometric ladder"),
        "r_min_cells": (8.0, "float", "smallest radius in grid cells"),
        "r_max": (0.5, "float", "largest radius (clipped to the domain)"),
        "tau_class": (0.05, "float", "relative tolerance of the density classification"),
        "growth_min_cells": (10.0, "float", "smallest radius of the growth fit in grid cells"),
        "xi_center": ([0.1, 0.05], "floats", "centre of the bump vector field for the domain variation"),
        "xi_radius": (0.6, "float", "support radius of the bump vector field"),
        "holder_r_max": (0.3, "float", "largest pair distance in the Hoelder fit"),
        "kappa": (0.0, "float", "epiperimetric constant for the reference exponent; 0 disables it"),
    },
    "epi": {
        "deltas": ([0.01, 0.05], "floats", "distances of the sampled cones to the half-space trace"),
        "s_values": ([0.001, 0.01], "floats", "nonlinearity scales s"),
        "K": (3, "int", "largest angular degree of the perturbations"),
        "seeds": (5, "int", "cones per (delta, s) pair; seeds start at --seed"),
        "h": (0.03125, "float", "grid spacing of the competitor solves"),
        "n": (2, "int", "space dimension of the cones"),
        "m": (2, "int", "number of components of the cones"),
        "eps_den": (1e-8, "float", "smallest admissible denominator H(c) - M(h*)"),
    },
    "spectral": {
        "n": (2, "int", "space dimension"),
        "theta_caps": ([math.pi / 3, 1.2, 1.4, math.pi / 2], "floats", "cap openings"),
        "M": (256, "int", "cells on the coarse grid (Richardson uses M and 2M)"),
        "k": (1, "int", "number of eigenvalues"),
    },
    "oracle": {
        "kind": ("contact-1d", "str", "contact-1d | reference-1d | radial | planar"),
        "lam": (1.0, "float", "f(0) of the closed-form 1-D solution"),
        "a": (0.0, "float", "left end of the 1-D interval"),
        "b": (1.0, "float", "right end of the 1-D interval"),
        "p": (0.125, "float", "boundary value at a"),
        "q": (0.0, "float", "boundary value at b"),
        "h": (0.00390625, "float", "spacing of the grid under test; the 1-D reference runs at h / 4"),
        "radius": (1.0, "float", "outer radius of the radial profile"),
        "magnitude": (0.05, "float", "boundary magnitude of the radial profile"),
        "samples": (257, "int", "number of output samples"),
    },
}


def defaults() -> dict[str, dict[str, Any]]:
    return {sec: {k: _copy(v[0]) for k, v in keys.items()} for sec, keys in SCHEMA.items()}


def _copy(v):
    return list(v) if isinstance(v, list) else v


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, list):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return repr(v)


def defaults_toml() -> str:
    """All defaults as a commented TOML document."""
    lines = []
    for sec, keys in SCHEMA.items():
        lines.append(f"[{sec}]")
        for key, (default, _, desc) in keys.items():
            lines.append(f"# {desc}")
            lines.append(f"{key} = {_fmt(default)}")
        lines.append("")
    return "\n".join(lines)


def _line_of(text: str, section: str | None, key: str) -> int | None:
    current = None
    for i, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        m = re.match(r"^\[([^\]]+)\]", s)
        if m:
            current = m.group(1).strip()
            if section is None and current == key:
                return i
            continue
        if current == section and re.match(rf"^{re.escape(key)}\s*=", s):
            return i
    return None


def _where(text: str, section: str | None, key: str) -> str:
    line = _line_of(text, section, key)
    return f" (line {line})" if line is not None else ""


def _coerce(value, kind: str, label: str):
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{label} must be an integer")
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{label} must be a number")
        return float(value)
    if kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{label} must be true or false")
        return value
    if kind == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{label} must be a string")
        return value
    if kind == "floats":
        if not isinstance(value, list) or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in value):
            raise ConfigError(f"{label} must be a list of numbers")
        return [float(x) for x in value]
    raise ConfigError(f"unknown value kind {kind}")


def parse_config(text: str) -> dict[str, dict[str, Any]]:
    """Merge ``text`` over the defaults, rejecting unknown sections and keys."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    cfg = defaults()
    for sec, body in raw.items():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]{_where(text, None, sec)}")
        if not isinstance(body, dict):
            raise ConfigError(f"{sec} must be a table{_where(text, None, sec)}")
        for key, value in body.items():
            if key not in SCHEMA[sec]:
                raise ConfigError(f"unknown key {sec}.{key}{_where(text, sec, key)}")
            kind = SCHEMA[sec][key][1]
            try:
                cfg[sec][key] = _coerce(value, kind, f"{sec}.{key}")
            except ConfigError as exc:
                raise ConfigError(f"{exc}{_where(text, sec, key)}") from None
    return cfg


def load_config(path) -> dict[str, dict[str, Any]]:
    if path is None:
        return defaults()
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config(p.read_text(encoding="utf-8"))
