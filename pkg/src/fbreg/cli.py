"""Command-line entry point: ``fbreg <command> [options]``.

Every command reads an optional TOML config (``--config``), writes its
artifacts into ``--out`` and is deterministic given the config and
``--seed``. ``--threads`` (or ``FBREG_THREADS``) sets the number of worker
threads for independent sub-tasks; results are collected in input order,
so the thread count never changes the artifacts.

Exit status is 0 on success, 1 when a numerical module raises, and 2 for
usage or configuration errors. Audit outcomes such as monotonicity
violations are report content and do not change the exit status.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__
from .blowup import decay_measurement, homogeneity_defect, project_to_halfspace, rescale
from .config import defaults_toml, load_config
from .epiperimetric import batch_scan
from .errors import ConfigError, FBRegError, InputError, PreconditionError
from .fieldio import read_field, write_field
from .freeboundary import extract, growth_audit, holder_exponent, nondegeneracy_audit, normal_field
from .geometry import sample_unit_ball
from .model import HalfSpaceSolution, VectorField, make_nonlinearity
from .oracle import PlanarProfile, RadialProfile, exact_linear_1d, reference_radial, reference_solve_1d
from .scenarios import (
    constant_scenario,
    half_space_scenario,
    planar_scenario,
    radial_scenario,
    Scenario,
)
from .solver import SolveOptions, minimize
from .spectral import CapProblem, cap_eigen, shift_bound_check
from .weiss import (
    RadialBump,
    alpha_n,
    classify_point,
    domain_variation_residual,
    functional_M,
    monotonicity_audit,
    radii_ladder,
)

logger = logging.getLogger("fbreg")

FIELD_FILE = "field.vfb"
STATS_FILE = "solve_stats.json"
AUDITS = ("weiss", "nondeg", "growth", "variation", "holder")

# acceptance thresholds applied by ``report``
GROWTH_U = (1.85, 2.15)
GROWTH_GRAD = (0.85, 1.15)
DECAY_CONSISTENCY = 0.3
KAPPA_FLOOR = 0.01
DENSITY_REL = 0.05
EIGEN_TOL = 1e-3


# ----------------------------------------------------------------------------- output


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(row[k]) for k in header])


@contextmanager
def _mapper(threads: int):
    if threads <= 1:
        yield map
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        yield pool.map


# ----------------------------------------------------------------------------- setup


def build_nonlinearity(cfg):
    sec = cfg["nonlinearity"]
    return make_nonlinearity(sec["family"], sec["params"], s_max=sec["s_max"])


def build_scenario(cfg, N) -> Scenario:
    g, b = cfg["grid"], cfg["boundary"]
    n, h, hw = g["n"], g["h"], g["half_width"]
    kind = b["kind"]
    if kind == "half-space":
        return half_space_scenario(N, h, n=n, m=b["m"], angle=b["angle"], half_width=hw)
    if kind == "planar":
        return planar_scenario(N, h, n=n, m=b["m"], angle=b["angle"], half_width=hw)
    if kind == "constant":
        return constant_scenario(N, h, b["value"], n=n, half_width=hw)
    if kind == "radial":
        if n != 2:
            raise ConfigError("radial boundary data are available for n = 2 only")
        return radial_scenario(N, h, b=b["b"], m=b["m"], half_width=hw)
    if kind == "file":
        if not b["path"]:
            raise ConfigError("boundary.path is required for kind = file")
        data = read_field(b["path"])
        return Scenario("file", data.grid, data, N)
    raise ConfigError(f"unknown boundary kind {kind!r}")


def solver_options(cfg) -> SolveOptions:
    s = cfg["solver"]
    return SolveOptions(
        step=s["step"] or None,
        acceleration=s["acceleration"],
        tol_fp=s["tol_fp"],
        tol_E=s["tol_E"],
        max_iters=s["max_iters"],
    )


def _exact_point(exact) -> np.ndarray | None:
    if isinstance(exact, HalfSpaceSolution):
        return np.zeros(exact.n)
    if isinstance(exact, PlanarProfile):
        return exact.offset * exact.nu
    if isinstance(exact, RadialProfile) and exact.contact_radius > 0:
        return exact.center + exact.contact_radius * np.eye(exact.n)[0]
    return None


class Context:
    """Resolved inputs shared by the analysis commands."""

    def __init__(self, args, cfg):
        self.args = args
        self.cfg = cfg
        self.N = build_nonlinearity(cfg)
        self.out = Path(args.out)
        self._scenario = None

    @property
    def scenario(self) -> Scenario:
        if self._scenario is None:
            self._scenario = build_scenario(self.cfg, self.N)
        return self._scenario

    def field(self):
        """The solved field, or the exact solution with ``--source exact``."""
        if getattr(self.args, "source", "field") == "exact":
            ex = self.scenario.exact
            if ex is None:
                raise InputError("this boundary configuration has no exact solution")
            return ex
        path = Path(self.args.field) if getattr(self.args, "field", None) else self.out / FIELD_FILE
        return read_field(path)

    def h(self, u) -> float:
        return u.grid.h if isinstance(u, VectorField) else self.cfg["grid"]["h"]

    def point(self, u) -> np.ndarray:
        a = self.cfg["audit"]
        if a["point"]:
            return np.asarray(a["point"], dtype=float)
        if not isinstance(u, VectorField):
            p = _exact_point(u)
            if p is None:
                raise InputError("set audit.point for this exact solution")
            return p
        fb = extract(u, f0=self.N.f0)
        pts = fb.gamma0
        if len(pts) == 0:
            raise PreconditionError("the field has no degenerate free boundary point")
        centre = 0.5 * (u.grid.lower + u.grid.upper)
        return pts[int(np.argmin(np.linalg.norm(pts - centre, axis=1)))]

    def radii(self, u, x0, *, min_cells: float | None = None) -> np.ndarray:
        a = self.cfg["audit"]
        h = self.h(u)
        cells = a["r_min_cells"] if min_cells is None else min_cells
        r_min = cells * h
        r_max = a["r_max"]
        if isinstance(u, VectorField):
            reach = float(np.min(np.minimum(x0 - u.grid.lower, u.grid.upper - x0))) - 2.5 * h
            r_max = min(r_max, reach)
        if r_max <= r_min:
            raise InputError(f"the audit point leaves no room for radii between {r_min:.3g} and {r_max:.3g}")
        return radii_ladder(r_min, r_max, a["radii_count"])


# ----------------------------------------------------------------------------- commands


def cmd_solve(ctx: Context) -> None:
    sc = ctx.scenario
    u, stats = minimize(sc.grid, sc.g, ctx.N, solver_options(ctx.cfg))
    ctx.out.mkdir(parents=True, exist_ok=True)
    write_field(ctx.out / FIELD_FILE, u)
    record = stats.to_dict()
    logger.info("solve finished in %.3f s after %d iterations", record.pop("wall_time"), stats.iterations)
    record["scenario"] = sc.name
    write_json(ctx.out / STATS_FILE, record)


def _audit_weiss(ctx, u, x0, map_fn):
    radii = ctx.radii(u, x0)
    rep = monotonicity_audit(u, ctx.N, x0, radii, map_fn=map_fn)
    rows = rep.rows()
    for i, row in enumerate(rows):
        row["violation"] = i in rep.violations
    return ["r", "W", "dW/dr", "T1", "T2", "violation"], rows


def _audit_nondeg(ctx, u, x0, map_fn):
    radii = ctx.radii(u, x0, min_cells=10.0)
    rows = nondegeneracy_audit(u, x0, radii, ctx.N.f0)
    return ["r", "sup", "bound", "margin", "flagged"], [vars(r) for r in rows]


def _audit_growth(ctx, u, x0, map_fn):
    a = ctx.cfg["audit"]
    radii = ctx.radii(u, x0, min_cells=a["growth_min_cells"])
    res = growth_audit(u, x0, radii, f0=ctx.N.f0, min_cells=a["growth_min_cells"])
    rows = [
        {"r": r, "sup_u": su, "sup_grad": sg, "exponent_u": res.exponent_u, "exponent_grad": res.exponent_grad}
        for r, su, sg in zip(res.radii, res.sup_u, res.sup_grad)
    ]
    return ["r", "sup_u", "sup_grad", "exponent_u", "exponent_grad"], rows


def _audit_variation(ctx, u, x0, map_fn):
    if not isinstance(u, VectorField):
        raise InputError("the domain variation audit needs a grid field")
    a = ctx.cfg["audit"]
    xi = RadialBump(tuple(a["xi_center"]), a["xi_radius"])
    res = domain_variation_residual(u, ctx.N, xi)
    return ["h", "residual"], [{"h": u.grid.h, "residual": res}]


def _audit_holder(ctx, u, x0, map_fn):
    if not isinstance(u, VectorField):
        raise InputError("the Hoelder audit needs a grid field")
    a = ctx.cfg["audit"]
    fb = extract(u, f0=ctx.N.f0)
    nf = normal_field(fb, u)
    res = holder_exponent(
        nf.valid_points, nf.valid_normals, u.grid.h, r_max=a["holder_r_max"], kappa=a["kappa"] or None
    )
    header = ["beta_hat", "residual", "pairs", "at_ceiling", "beta_reference"]
    return header, [vars(res)]


_AUDIT_FUNCS = {
    "weiss": _audit_weiss,
    "nondeg": _audit_nondeg,
    "growth": _audit_growth,
    "variation": _audit_variation,
    "holder": _audit_holder,
}


def cmd_audit(ctx: Context) -> None:
    u = ctx.field()
    x0 = ctx.point(u) if ctx.args.kind != "variation" and ctx.args.kind != "holder" else None
    with _mapper(ctx.args.threads) as map_fn:
        header, rows = _AUDIT_FUNCS[ctx.args.kind](ctx, u, x0, map_fn)
    ctx.out.mkdir(parents=True, exist_ok=True)
    write_csv(ctx.out / f"audit_{ctx.args.kind}.csv", header, rows)


def cmd_blowup(ctx: Context) -> None:
    u = ctx.field()
    x0 = ctx.point(u)
    r = ctx.args.radius if ctx.args.radius is not None else float(ctx.radii(u, x0)[0])
    v = rescale(u, x0, r, (64, 256) if x0.size == 2 else (32, 48))
    proj = project_to_halfspace(v, ctx.N.f0)
    hs = sample_unit_ball(proj.half_space(), np.zeros(x0.size), 1.0, v.quad)
    out = {
        "center": x0,
        "radius": r,
        "M": functional_M(v, ctx.N.f0),
        "M_projection": functional_M(hs, ctx.N.f0),
        "alpha_half": alpha_n(x0.size, ctx.N.f0) / 2.0,
        "homogeneity_defect": homogeneity_defect(v),
        "projection": {
            "nu": proj.nu,
            "e": proj.e,
            "residual_constrained": proj.residual_constrained,
            "residual_free": proj.residual_free,
            "amplitude": proj.amplitude,
        },
    }
    ctx.out.mkdir(parents=True, exist_ok=True)
    write_json(ctx.out / "blowup.json", out)


def cmd_decay(ctx: Context) -> None:
    u = ctx.field()
    x0 = ctx.point(u)
    a = ctx.cfg["audit"]
    r_min = ctx.args.r_min if ctx.args.r_min is not None else a["r_min_cells"] * ctx.h(u)
    radii = radii_ladder(r_min, a["r_max"], a["radii_count"])
    with _mapper(ctx.args.threads) as map_fn:
        cls = classify_point(u, ctx.N, x0, radii, a["tau_class"], map_fn=map_fn)
    rep = decay_measurement(u, ctx.N, x0, radii, classification=cls)
    out = rep.to_dict()
    out["center"] = x0
    out["classification"] = cls.label
    ctx.out.mkdir(parents=True, exist_ok=True)
    write_json(ctx.out / "decay.json", out)


EPI_HEADER = ["delta", "s", "seed", "H_c", "H_v", "M_h", "kappa_best", "flags"]


def cmd_epi(ctx: Context) -> None:
    e = ctx.cfg["epi"]
    seeds = list(range(ctx.args.seed, ctx.args.seed + e["seeds"]))
    with _mapper(ctx.args.threads) as map_fn:
        scan = batch_scan(
            e["deltas"], e["s_values"], e["K"], seeds, ctx.N, n=e["n"], m=e["m"], h=e["h"],
            eps_den=e["eps_den"], opts=solver_options(ctx.cfg), map_fn=map_fn,
        )
    ctx.out.mkdir(parents=True, exist_ok=True)
    write_csv(ctx.out / "epi_scan.csv", EPI_HEADER, [r.row() for r in scan.rows])
    logger.info("min kappa_best = %s, min M(c) = %.6f", scan.min_kappa, scan.min_M_c)


def cmd_spectral(ctx: Context) -> None:
    s = ctx.cfg["spectral"]
    k = s["k"]
    header = ["theta_cap", "M"] + [f"lambda_{i}" for i in range(1, k + 1)] + [f"margin_{i}" for i in range(1, k + 1)]
    caps = s["theta_caps"]

    def row(cap):
        p = CapProblem(s["n"], cap, s["M"])
        spectrum = cap_eigen(p, k)
        out = {"theta_cap": cap, "M": s["M"]}
        for i in range(k):
            out[f"lambda_{i + 1}"] = spectrum.eigenvalues[i]
            out[f"margin_{i + 1}"] = shift_bound_check(p, i + 1).margin
        return out

    with _mapper(ctx.args.threads) as map_fn:
        rows = list(map_fn(row, caps))
    ctx.out.mkdir(parents=True, exist_ok=True)
    write_csv(ctx.out / "spectral.csv", header, rows)


def cmd_oracle(ctx: Context) -> None:
    o = ctx.cfg["oracle"]
    kind = o["kind"]
    ctx.out.mkdir(parents=True, exist_ok=True)
    path = ctx.out / f"oracle_{kind}.csv"
    if kind in ("contact-1d", "reference-1d"):
        x = np.linspace(o["a"], o["b"], o["samples"])
        if kind == "contact-1d":
            sol = exact_linear_1d(o["lam"], o["a"], o["b"], o["p"], o["q"])
            u, du = sol(x), sol.derivative(x)
        else:
            dense = reference_solve_1d(ctx.N, o["a"], o["b"], o["p"], o["q"], o["h"])
            u = np.interp(x, dense.x, dense.u)
            du = np.gradient(u, x)
        write_csv(path, ["x", "u", "du"], [{"x": a, "u": b, "du": c} for a, b, c in zip(x, u, du)])
        return
    if kind == "radial":
        prof = reference_radial(ctx.N, ctx.cfg["grid"]["n"], o["radius"], o["magnitude"])
        r = np.linspace(0.0, o["radius"], o["samples"])
        U, dU = prof.profile(r)
        write_csv(path, ["r", "U", "dU"], [{"r": a, "U": b, "dU": c} for a, b, c in zip(r, U, dU)])
        return
    if kind == "planar":
        prof = PlanarProfile(ctx.N, [1.0], [1.0], t_max=o["radius"] + 1.0)
        t = np.linspace(-0.25 * o["radius"], o["radius"], o["samples"])
        U, dU = prof.profile(t)
        write_csv(path, ["t", "U", "dU"], [{"t": a, "U": b, "dU": c} for a, b, c in zip(t, U, dU)])
        return
    raise ConfigError(f"unknown oracle kind {kind!r}")


def _read_csv(path: Path) -> list[dict]:
    with path.open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _num(v: str) -> float:
    return float(v) if v not in ("", None) else float("nan")


def summarize(out: Path, cfg) -> dict:
    """Collect the artifacts present in ``out`` and judge them against the acceptance thresholds."""
    summary: dict = {}
    n = cfg["grid"]["n"]
    f0 = build_nonlinearity(cfg).f0
    p = out / STATS_FILE
    if p.is_file():
        st = json.loads(p.read_text())
        summary["solve"] = {"iterations": st["iterations"], "energy": st["energy"], "pass": bool(st["converged"])}
    p = out / "audit_weiss.csv"
    if p.is_file():
        rows = _read_csv(p)
        W = [_num(r["W"]) for r in rows]
        t1 = [_num(r["T1"]) for r in rows]
        t2 = [_num(r["T2"]) for r in rows]
        ok = not any(r["violation"] == "true" for r in rows) and min(t1) >= -1e-10 and min(t2) >= -1e-10
        summary["weiss"] = {"radii": len(rows), "W_min": min(W), "W_max": max(W), "pass": ok}
    p = out / "audit_nondeg.csv"
    if p.is_file():
        rows = _read_csv(p)
        ratio = min(_num(r["sup"]) / _num(r["bound"]) for r in rows)
        summary["nondeg"] = {"min_ratio": ratio, "pass": ratio >= 0.95}
    p = out / "audit_growth.csv"
    if p.is_file():
        rows = _read_csv(p)
        eu, eg = _num(rows[0]["exponent_u"]), _num(rows[0]["exponent_grad"])
        ok = GROWTH_U[0] <= eu <= GROWTH_U[1] and GROWTH_GRAD[0] <= eg <= GROWTH_GRAD[1]
        summary["growth"] = {"exponent_u": eu, "exponent_grad": eg, "pass": ok}
    p = out / "audit_variation.csv"
    if p.is_file():
        rows = _read_csv(p)
        summary["variation"] = {"h": _num(rows[0]["h"]), "residual": _num(rows[0]["residual"])}
    p = out / "audit_holder.csv"
    if p.is_file():
        rows = _read_csv(p)
        summary["holder"] = {"beta_hat": _num(rows[0]["beta_hat"]), "at_ceiling": rows[0]["at_ceiling"] == "true"}
    p = out / "blowup.json"
    if p.is_file():
        b = json.loads(p.read_text())
        summary["blowup"] = {"M": b["M"], "pass": b["M"] >= b["alpha_half"] - 1e-3}
    p = out / "decay.json"
    if p.is_file():
        d = json.loads(p.read_text())
        c = d.get("consistency")
        ok = (d["alpha_G"] or 0) > 0 and (d["alpha_L"] or 0) > 0 and c is not None and c <= DECAY_CONSISTENCY
        summary["decay"] = {"alpha_G": d["alpha_G"], "alpha_L": d["alpha_L"], "consistency": c, "pass": ok}
        if d.get("W0") is not None:
            a = alpha_n(d["n"], f0)
            summary["density"] = {"W0": d["W0"], "pass": abs(d["W0"] - a / 2) <= DENSITY_REL * a / 2}
    p = out / "epi_scan.csv"
    if p.is_file():
        rows = _read_csv(p)
        defined = [r for r in rows if r["kappa_best"] != ""]
        kappas = [_num(r["kappa_best"]) for r in defined]
        ok = all(_num(r["H_v"]) <= _num(r["H_c"]) for r in defined) and all(k >= KAPPA_FLOOR for k in kappas)
        summary["epi"] = {"rows": len(rows), "defined": len(defined),
                          "min_kappa": min(kappas) if kappas else None, "pass": ok}
    p = out / "spectral.csv"
    if p.is_file():
        rows = _read_csv(p)
        sn = cfg["spectral"]["n"]
        lam = [_num(r["lambda_1"]) for r in rows]
        caps = [_num(r["theta_cap"]) for r in rows]
        order = np.argsort(caps)
        decreasing = all(lam[order[i]] > lam[order[i + 1]] for i in range(len(order) - 1))
        half = [l for l, c in zip(lam, caps) if abs(c - math.pi / 2) < 1e-12]
        ok = decreasing and all(_num(r["margin_1"]) > 0 for r in rows)
        if half:
            ok = ok and abs(half[0] - 2 * sn) <= EIGEN_TOL
        summary["spectral"] = {"lambda_half_cap": half[0] if half else None, "decreasing": decreasing, "pass": ok}
    return summary


def cmd_report(ctx: Context) -> None:
    summary = summarize(ctx.out, ctx.cfg)
    ctx.out.mkdir(parents=True, exist_ok=True)
    write_json(ctx.out / "report.json", summary)


# ----------------------------------------------------------------------------- parser


def _threads_default() -> int:
    raw = os.environ.get("FBREG_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration (defaults apply when omitted)")
    common.add_argument("--out", default=".", help="artifact directory (default: current directory)")
    common.add_argument("--seed", type=int, default=0, help="base random seed (default: 0)")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads; defaults to FBREG_THREADS or 1")
    common.add_argument("--log-level", default="WARNING", help="logging level (default: WARNING)")

    field = argparse.ArgumentParser(add_help=False)
    field.add_argument("--field", help=f"field file (default: OUT/{FIELD_FILE})")
    field.add_argument("--source", choices=("field", "exact"), default="field",
                       help="analyse the solved field or the exact solution of the configuration")

    parser = argparse.ArgumentParser(prog="fbreg", description="Vector free boundary solver and regularity audits.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--print-defaults", action="store_true", help="print the default configuration and exit")
    sub = parser.add_subparsers(dest="command")

    sub.add_parser("solve", parents=[common], help="solve the configured boundary value problem")
    audit = sub.add_parser("audit", parents=[common, field], help="run one audit and write a CSV")
    audit.add_argument("kind", choices=AUDITS)
    blow = sub.add_parser("blowup", parents=[common, field], help="rescale at a point and project onto half-spaces")
    blow.add_argument("--radius", type=float, help="rescaling radius (default: smallest audit radius)")
    decay = sub.add_parser("decay", parents=[common, field], help="fit the decay exponents at a regular point")
    decay.add_argument("--r-min", type=float, help="smallest radius (default: audit.r_min_cells * h)")
    epi = sub.add_parser("epi", help="epiperimetric experiments")
    epi_sub = epi.add_subparsers(dest="epi_command", required=True)
    epi_sub.add_parser("scan", parents=[common], help="scan cones near the half-space solution")
    sub.add_parser("spectral", parents=[common], help="cap eigenvalues and shift bound")
    sub.add_parser("oracle", parents=[common], help="write a reference profile")
    sub.add_parser("report", parents=[common], help="summarize the artifacts in OUT")
    return parser


COMMANDS = {
    "solve": cmd_solve,
    "audit": cmd_audit,
    "blowup": cmd_blowup,
    "decay": cmd_decay,
    "epi": cmd_epi,
    "spectral": cmd_spectral,
    "oracle": cmd_oracle,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_defaults:
        sys.stdout.write(defaults_toml())
        return 0
    if args.command is None:
        parser.print_help(sys.stderr)
        return 2
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads is None:
        args.threads = _threads_default()
    try:
        cfg = load_config(args.config)
        ctx = Context(args, cfg)
        COMMANDS[args.command](ctx)
    except ConfigError as exc:
        print(f"fbreg: configuration error: {exc}", file=sys.stderr)
        return 2
    except FBRegError as exc:
        print(f"fbreg: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
