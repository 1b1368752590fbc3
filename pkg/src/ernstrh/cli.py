"""Config-driven command line entry points.

Subcommands: ``solve`` (field on a grid), ``verify`` (invariant suite),
``convergence`` (error vs node count against a named exact solution),
``boundary`` (boundary-limit reports), ``linear`` (collinear path with
cross-checks).  Configuration is a single JSON document; command-line
flags override file fields.  Exit codes: 0 all checks passed, 1 solver
failure or failed checks, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import cauchy, diagnostics, euler_darboux, exact_solutions, geometry
from . import rh_solver
from .boundary_data import make_boundary_datum, validate
from .rh_solver import GridConfig

CSV_HEADER = "x,y,re_E,im_E,det_residual,sym_residual,cond"

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_CONFIG = 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    mode: str = "solve"
    data: dict = field(default_factory=lambda: {"pair": "khan-penrose"})
    delta: float = 0.2
    nx: int = 10
    ny: int = 10
    nodes_per_loop: int = 128
    volterra_rtol: float = 1e-11
    out: Optional[str] = None
    format: str = "csv"
    threads: int = 1
    convergence_nodes: tuple = (32, 64, 128)
    boundary_coordinates: tuple = (0.1, 0.3, 0.5)

    def validate_self(self):
        if self.mode not in ("solve", "verify", "convergence", "boundary", "linear"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError("delta must be in (0, 1)")
        if self.nx < 2 or self.ny < 2:
            raise ConfigError("grid must be at least 2x2")
        if self.nodes_per_loop < 16 or self.nodes_per_loop % 2:
            raise ConfigError("nodes_per_loop must be even and >= 16")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")


def _resolve_data(cfg: RunConfig):
    """Datum pair from the config: an exact-solution pair or two specs."""
    spec = cfg.data
    if isinstance(spec, str):
        spec = {"pair": spec}
    if "pair" in spec:
        name = spec["pair"]
        if name in exact_solutions.IDS:
            return exact_solutions.boundary_data_of(name)
        if name == "unit":
            d = make_boundary_datum("unit")
            return d, d
        if name == "collinear-sqrt":
            d = make_boundary_datum({"family": "collinear-sqrt",
                                     "c": spec.get("c", 2.0)})
            return d, d
        raise ConfigError(f"unknown data pair {name!r}")
    try:
        return make_boundary_datum(spec["x"]), make_boundary_datum(spec["y"])
    except KeyError as exc:
        raise ConfigError(f"data spec needs 'pair' or 'x'/'y': {exc}") from exc


def _require_kind(data, kind, mode):
    for d in data:
        if d.kind != kind:
            raise ConfigError(
                f"{mode} mode needs {kind}-type data, got {d.label!r}; "
                f"collinear V-data belong to the linear mode and vice versa")


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _field_rows(fld: rh_solver.ErnstField):
    rows = []
    for i, x in enumerate(fld.x):
        for j, y in enumerate(fld.y):
            rows.append([float(x), float(y),
                         float(fld.values[i, j].real),
                         float(fld.values[i, j].imag),
                         float(fld.det_residual[i, j]),
                         float(fld.sym_residual[i, j]),
                         float(fld.cond[i, j])])
    return rows


def _write_rows(rows, header: str, cfg: RunConfig):
    if cfg.format == "csv":
        text = header + "\n" + "\n".join(
            ",".join(_fmt(v) for v in row) for row in rows) + "\n"
    else:
        cols = header.split(",")
        text = json.dumps([dict(zip(cols, row)) for row in rows], indent=1) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def _write_report(report: dict, cfg: RunConfig):
    text = json.dumps(report, indent=1, default=str) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# mode runners

def run_solve(cfg: RunConfig) -> int:
    data = _resolve_data(cfg)
    _require_kind(data, "ernst", "solve")
    grid = GridConfig(delta=cfg.delta, nx=cfg.nx, ny=cfg.ny,
                      nodes_per_loop=cfg.nodes_per_loop,
                      volterra_rtol=cfg.volterra_rtol)
    try:
        fld = rh_solver.solve_grid(grid, data, threads=cfg.threads)
    except rh_solver.GridSolveError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    _write_rows(_field_rows(fld), CSV_HEADER, cfg)
    return EXIT_OK


def run_verify(cfg: RunConfig) -> int:
    data = _resolve_data(cfg)
    _require_kind(data, "ernst", "verify")
    contours = geometry.build_contour_system(cfg.delta, cfg.nodes_per_loop)
    checks = []

    def check(name, passed, detail=""):
        checks.append({"name": name, "passed": bool(passed), "detail": detail})

    for axis, d in zip("xy", data):
        rep = validate(d, cfg.delta)
        check(f"datum-{axis}-valid", rep.ok,
              "; ".join(f"{c.name}:{'ok' if c.passed else 'FAIL'}"
                        for c in rep.checks))

    # Cauchy layer: exact winding and jump relation
    ident = cauchy.Density.identity(contours)
    cminus_one = cauchy.cauchy_minus(ident, contours).values
    check("cauchy-winding", np.max(np.abs(cminus_one + np.eye(2))) <= 1e-10,
          f"max |C-(1) + 1| = {np.max(np.abs(cminus_one + np.eye(2))):.2e}")
    dens = cauchy.Density.from_scalar(
        contours, lambda z: np.sin(0.3 * np.log(np.abs(z))) + 0.2j / z)
    plus = cauchy.cauchy_plus(dens, contours).values
    minus = cauchy.cauchy_minus(dens, contours).values
    jumprel = np.max(np.abs(plus - minus - dens.values))
    check("cauchy-plemelj", jumprel <= 1e-10, f"C+ - C- - I: {jumprel:.2e}")

    margin = min(geometry.containment_margin(contours, x, y)
                 for x, y in [(0.0, 0.0), (1.0 - cfg.delta, 0.0),
                              (0.0, 1.0 - cfg.delta),
                              ((1.0 - cfg.delta) / 2, (1.0 - cfg.delta) / 2)])
    check("containment-margin", margin >= contours.epsilon / 2,
          f"margin = {margin:.4g}, eps/2 = {contours.epsilon / 2:.4g}")

    grid = GridConfig(delta=cfg.delta, nx=min(cfg.nx, 5), ny=min(cfg.ny, 5),
                      nodes_per_loop=cfg.nodes_per_loop,
                      volterra_rtol=cfg.volterra_rtol)
    try:
        fld = rh_solver.solve_grid(grid, data, contours=contours,
                                   threads=cfg.threads)
    except rh_solver.GridSolveError as exc:
        check("grid-solve", False, str(exc))
        fld = None
    if fld is not None:
        check("det-mhat", np.max(fld.det_residual) <= 1e-8,
              f"max |det m0 - 1| = {np.max(fld.det_residual):.2e}")
        interior = ~fld.boundary_mask
        check("rh-symmetries", np.max(fld.sym_residual[interior]) <= 1e-7,
              f"max residual = {np.max(fld.sym_residual[interior]):.2e}")
        xs, ys = grid.coordinates()
        jump = rh_solver.assemble_jump(xs[-1], ys[-1], data[0], data[1],
                                       contours, rtol=cfg.volterra_rtol)
        check("jump-det-constancy", jump.det_residual <= 1e-8,
              f"residual = {jump.det_residual:.2e}")
        sym = rh_solver.jump_symmetry_residual(jump, contours)
        check("jump-symmetries", sym <= 1e-8, f"residual = {sym:.2e}")

    passed = sum(1 for c in checks if c["passed"])
    report = {"mode": "verify", "delta": cfg.delta, "nodes": cfg.nodes_per_loop,
              "passed": passed, "failed": len(checks) - passed, "checks": checks}
    _write_report(report, cfg)
    return EXIT_OK if passed == len(checks) else EXIT_SOLVER


def run_convergence(cfg: RunConfig) -> int:
    spec = cfg.data if isinstance(cfg.data, dict) else {"pair": cfg.data}
    name = spec.get("pair", "khan-penrose")
    if name not in exact_solutions.IDS:
        raise ConfigError("convergence mode needs an exact-solution pair")
    data = exact_solutions.boundary_data_of(name)
    point = spec.get("point", (0.25, 0.25))
    x0, y0 = float(point[0]), float(point[1])
    exact = exact_solutions.evaluate_exact(name, x0, y0)
    rows = []
    errs = []
    for n in cfg.convergence_nodes:
        contours = geometry.build_contour_system(cfg.delta, n)
        sol = rh_solver.solve_rh_point(x0, y0, data, contours,
                                       rtol=cfg.volterra_rtol)
        err = abs(sol.ernst - exact)
        errs.append(err)
        rows.append([float(n), x0, y0, err])
    _write_rows(rows, "nodes,x,y,max_error", cfg)
    ok = all(e2 <= e1 / 10.0 or e2 <= 1e-10
             for e1, e2 in zip(errs[:-1], errs[1:]))
    return EXIT_OK if ok else EXIT_SOLVER


def run_boundary(cfg: RunConfig) -> int:
    data = _resolve_data(cfg)
    _require_kind(data, "ernst", "boundary")
    contours = geometry.build_contour_system(cfg.delta, cfg.nodes_per_loop)

    def solver(x, y):
        return rh_solver.solve_rh_point(x, y, data, contours,
                                        rtol=cfg.volterra_rtol,
                                        with_symmetry_check=False).ernst

    reports = []
    ok = True
    for coord in cfg.boundary_coordinates:
        rep = diagnostics.boundary_limit_report("x=0", coord, data, solver)
        ok = ok and rep.abs_error <= 1e-3 and not rep.flags
        entry = asdict(rep)
        for key in ("predicted", "extrapolated"):
            value = complex(entry[key])
            entry[key] = [value.real, value.imag]
        reports.append(entry)
    _write_report({"mode": "boundary", "reports": reports}, cfg)
    return EXIT_OK if ok else EXIT_SOLVER


def run_linear(cfg: RunConfig) -> int:
    data = _resolve_data(cfg)
    _require_kind(data, "linear", "linear")
    grid = GridConfig(delta=cfg.delta, nx=cfg.nx, ny=cfg.ny,
                      nodes_per_loop=cfg.nodes_per_loop)
    contours = geometry.build_contour_system(cfg.delta, cfg.nodes_per_loop)
    abel = euler_darboux.solve_linear_grid(grid, data, route="abel")
    scal = euler_darboux.solve_linear_grid(grid, data, contours=contours,
                                           route="scalar-rh")
    gap = float(np.max(np.abs(abel.values - scal.values)))
    rows = []
    for i, x in enumerate(abel.x):
        for j, y in enumerate(abel.y):
            rows.append([float(x), float(y), float(abel.values[i, j]),
                         float(scal.values[i, j]),
                         float(abs(abel.values[i, j] - scal.values[i, j]))])
    _write_rows(rows, "x,y,V_abel,V_scalar_rh,route_gap", cfg)
    print(f"max route gap: {gap:.3e}", file=sys.stderr)
    return EXIT_OK if gap <= 1e-8 else EXIT_SOLVER


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ernstrh",
        description="Goursat solver for the hyperbolic Ernst equation")
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in ("solve", "verify", "convergence", "boundary", "linear"):
        p = sub.add_parser(mode)
        p.add_argument("--config", type=str, default=None,
                       help="JSON config file; flags override its fields")
        p.add_argument("--data", type=str, default=None,
                       help="data family (khan-penrose, nutku-halil, unit, "
                            "collinear-sqrt)")
        p.add_argument("--delta", type=float, default=None)
        p.add_argument("--nodes", type=int, default=None,
                       help="quadrature nodes per loop")
        p.add_argument("--grid", type=str, default=None, metavar="NX,NY")
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--format", type=str, default=None,
                       choices=("csv", "json"))
        p.add_argument("--threads", type=int, default=None)
    return parser


def load_config(args) -> RunConfig:
    cfg = RunConfig(mode=args.mode)
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        cfg.data = raw.get("data", cfg.data)
        grid = raw.get("grid", {})
        cfg.delta = float(grid.get("delta", cfg.delta))
        cfg.nx = int(grid.get("nx", cfg.nx))
        cfg.ny = int(grid.get("ny", cfg.ny))
        solver = raw.get("solver", {})
        cfg.nodes_per_loop = int(solver.get("nodes_per_loop", cfg.nodes_per_loop))
        cfg.volterra_rtol = float(solver.get("volterra_rtol", cfg.volterra_rtol))
        output = raw.get("output", {})
        cfg.out = output.get("path", cfg.out)
        cfg.format = output.get("format", cfg.format)
        cfg.mode = raw.get("mode", cfg.mode)
        if "convergence_nodes" in raw:
            cfg.convergence_nodes = tuple(raw["convergence_nodes"])
        if "boundary_coordinates" in raw:
            cfg.boundary_coordinates = tuple(raw["boundary_coordinates"])
    cfg.mode = args.mode
    if args.data is not None:
        cfg.data = {"pair": args.data}
    if args.delta is not None:
        cfg.delta = args.delta
    if args.nodes is not None:
        cfg.nodes_per_loop = args.nodes
    if args.grid is not None:
        try:
            nx, ny = args.grid.split(",")
            cfg.nx, cfg.ny = int(nx), int(ny)
        except ValueError as exc:
            raise ConfigError(f"--grid expects NX,NY: {exc}") from exc
    if args.out is not None:
        cfg.out = args.out
    if args.format is not None:
        cfg.format = args.format
    if args.threads is not None:
        cfg.threads = args.threads
    cfg.validate_self()
    return cfg


RUNNERS = {"solve": run_solve, "verify": run_verify,
           "convergence": run_convergence, "boundary": run_boundary,
           "linear": run_linear}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    t0 = time.perf_counter()
    try:
        code = RUNNERS[cfg.mode](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # solver-level failure
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    print(f"[{cfg.mode}] done in {time.perf_counter() - t0:.2f}s",
          file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
