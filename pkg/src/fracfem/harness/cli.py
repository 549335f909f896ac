"""Command-line entry point: ``fracfem <command> [options]``."""
from __future__ import annotations

import argparse
import configparser
import logging
import os
import sys

from ..errors import InvalidState
from ..estimator import eta_indicators, xi_indicators
from ..fem.functionals import solve_problem
from ..fem.space import FESpace
from ..mesh.core import Mesh, validate
from ..mesh.io import read_mesh_text
from .export import ensure_dir, export_records, export_table, export_vtk
from .scenarios import SCENARIOS, get_scenario, initial_mesh
from .studies import run_afem_study, run_estimator_comparison, run_uniform_study

log = logging.getLogger("fracfem")


def _common(p):
    p.add_argument("--config", help="INI file whose [run] or [<command>] keys set defaults")
    p.add_argument("--scenario", default="case3", help="scenario name (see list-scenarios)")
    p.add_argument("--degree", type=int, choices=(1, 2), default=1)
    p.add_argument("--seedmesh", choices=("unionjack", "conforming"), default=None)
    p.add_argument("--n", type=int, default=None, help="cells per side of the seed grid")
    p.add_argument("--pattern", choices=("diagonal", "alternating", "crisscross"), default=None)
    p.add_argument("--mesh-file", default=None, help="initial mesh in the text format")
    p.add_argument("--rtol", type=float, default=1e-12)
    p.add_argument("--out", default="out")
    p.add_argument("-v", "--verbose", action="store_true")


def _afem_opts(p):
    p.add_argument("--theta", type=float, default=0.25)
    p.add_argument("--iters", type=int, default=50)
    p.add_argument("--reg-r", type=float, default=0.05)
    p.add_argument("--max-dofs", type=int, default=None,
                   help="stop once the number of unknowns reaches this")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracfem",
                                 description="Finite elements for Poisson problems with line sources")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve once on the initial mesh")
    _common(p)
    p.add_argument("--estimator", choices=("eta", "xi"), default="eta")
    p.add_argument("--reg-r", type=float, default=0.05)

    p = sub.add_parser("uniform", help="rate study under red refinement")
    _common(p)
    p.add_argument("--levels", type=int, default=6)
    p.add_argument("--mode", choices=("conforming", "clipped"), default=None)

    p = sub.add_parser("afem", help="adaptive loop with bulk marking")
    _common(p)
    _afem_opts(p)
    p.add_argument("--estimator", choices=("eta", "xi"), default="eta")

    p = sub.add_parser("compare", help="adaptive loops driven by eta and by xi")
    _common(p)
    _afem_opts(p)

    sub.add_parser("list-scenarios", help="print the built-in scenarios")

    p = sub.add_parser("validate-mesh", help="check a mesh file or a scenario seed mesh")
    _common(p)
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv):
    """Re-parse with defaults taken from the --config file, flags winning."""
    args = ap.parse_args(argv)
    path = getattr(args, "config", None)
    if not path:
        return args
    cp = configparser.ConfigParser()
    if not cp.read(path):
        ap.error(f"cannot read config file {path}")
    values = {}
    for section in ("run", args.command):
        if cp.has_section(section):
            for k, v in cp.items(section):
                values[k.replace("-", "_")] = v
    sub = ap._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for k, v in values.items():
        if k not in known:
            ap.error(f"unknown key {k!r} in {path}")
        act = known[k]
        defaults[k] = act.type(v) if act.type is not None else v
        if act.choices is not None and defaults[k] not in act.choices:
            ap.error(f"{k}={v} in {path} is not one of {list(act.choices)}")
    sub.set_defaults(**defaults)
    return ap.parse_args(argv)


def _initial(args, sc) -> Mesh:
    if args.mesh_file:
        m = read_mesh_text(args.mesh_file)
        m = Mesh.from_triangles(m.vertices, m.triangles, sc.spec.segments)
        return m
    return initial_mesh(sc, args.seedmesh, args.n, args.pattern)


def cmd_list(args):
    for name, sc in SCENARIOS.items():
        print(f"{name:18s} {sc.study:8s} {sc.description}")
    return 0


def cmd_validate(args):
    if args.mesh_file:
        mesh = read_mesh_text(args.mesh_file)
    else:
        mesh = initial_mesh(get_scenario(args.scenario), args.seedmesh, args.n, args.pattern)
    rep = validate(mesh)
    print(f"vertices {mesh.nv}  triangles {mesh.nt}  edges {mesh.ne}")
    print(rep)
    return 0 if rep.ok else 1


def cmd_solve(args):
    sc = get_scenario(args.scenario)
    mesh = _initial(args, sc)
    space = FESpace(mesh, args.degree)
    conforming = mesh.tiles_fractures(sc.spec.segments)
    sol = solve_problem(space, sc.spec, "conforming" if conforming else "clipped", args.rtol)
    ind = None
    if args.estimator == "xi":
        ind = xi_indicators(sol, sc.spec, args.reg_r)
    elif conforming:
        ind = eta_indicators(sol, sc.spec)
    out = ensure_dir(args.out)
    export_vtk(os.path.join(out, "mesh_final.vtk"), mesh, indicators=ind)
    export_vtk(os.path.join(out, "solution_final.vtk"), mesh, sol, ind)
    print(f"N = {space.ndof}  estimate = {ind.total if ind else float('nan'):.6e}")
    return 0


def cmd_uniform(args):
    sc = get_scenario(args.scenario)
    mesh = _initial(args, sc)
    table = run_uniform_study(sc, args.degree, args.levels, mode=args.mode, rtol=args.rtol,
                              mesh=mesh)
    out = ensure_dir(args.out)
    export_table(os.path.join(out, "table.csv"), table)
    sol = table.final
    export_vtk(os.path.join(out, "mesh_final.vtk"), sol.space.mesh)
    export_vtk(os.path.join(out, "solution_final.vtk"), sol.space.mesh, sol)
    print(f"{'j':>3} {'N':>9} {'|u(j+1)-u(j)|':>14} {'rate':>7}")
    for r in table.rows:
        print(f"{r.j:3d} {r.ndof:9d} {r.diff:14.6e} {r.rate:7.3f}")
    return 0


def cmd_afem(args):
    sc = get_scenario(args.scenario)
    mesh = _initial(args, sc)
    st = run_afem_study(sc, args.degree, args.theta, args.iters, args.estimator, args.reg_r,
                        args.rtol, args.max_dofs, mesh=mesh)
    out = ensure_dir(args.out)
    export_records(os.path.join(out, "records.csv"), st.records)
    res = st.result
    export_vtk(os.path.join(out, "mesh_final.vtk"), res.mesh, indicators=res.indicators)
    export_vtk(os.path.join(out, "solution_final.vtk"), res.mesh, res.solution, res.indicators)
    last = st.records[-1]
    print(f"iterations {len(st.records)}  N = {last.ndof}  estimate = {last.estimate:.6e}  "
          f"slope = {st.slope:.3f} (last {st.window})")
    return 0


def cmd_compare(args):
    sc = get_scenario(args.scenario)
    cmp_ = run_estimator_comparison(sc, args.degree, args.theta, args.iters, args.reg_r,
                                    args.rtol, args.max_dofs)
    out = ensure_dir(args.out)
    rows = []
    for label, st in (("eta", cmp_.eta), ("xi", cmp_.xi)):
        rows.extend((label, r) for r in st.records)
        res = st.result
        export_vtk(os.path.join(out, f"mesh_final_{label}.vtk"), res.mesh, indicators=res.indicators)
        export_vtk(os.path.join(out, f"solution_final_{label}.vtk"), res.mesh, res.solution,
                   res.indicators)
        print(f"{label}: iterations {len(st.records)}  N = {st.records[-1].ndof}  "
              f"slope = {st.slope:.3f}")
    from .export import RECORD_COLUMNS, export_csv
    export_csv(os.path.join(out, "records.csv"), ["estimator"] + RECORD_COLUMNS,
               [[lab] + [getattr(r, c) for c in RECORD_COLUMNS] for lab, r in rows])
    res = cmp_.eta.result
    export_vtk(os.path.join(out, "mesh_final.vtk"), res.mesh, indicators=res.indicators)
    export_vtk(os.path.join(out, "solution_final.vtk"), res.mesh, res.solution, res.indicators)
    return 0


HANDLERS = {"solve": cmd_solve, "uniform": cmd_uniform, "afem": cmd_afem,
            "compare": cmd_compare, "list-scenarios": cmd_list, "validate-mesh": cmd_validate}


def main(argv=None) -> int:
    ap = build_parser()
    args = _apply_config(ap, argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return HANDLERS[args.command](args)
    except (ValueError, KeyError, OSError, MemoryError, InvalidState) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
