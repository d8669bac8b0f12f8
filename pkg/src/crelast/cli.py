"""Command-line entry points.

Subcommands:
  solve    direct eigensolve on one mesh
           CSV columns: index, omega, residual, iterations
  twogrid  one two-grid run (scheme 1 or 2) plus the direct comparison
           CSV columns: nH, H, nh, h, scheme, omega_H, omega_super,
           time_scheme, omega_direct, time_direct
  table    convergence table over uniformly refined meshes
           CSV columns: n, h, omega, ratio
  locking  proxy-error sweep over a list of lambda values
           CSV columns: lambda, omega/err triples for direct and both
           schemes; optional SVG line plot

All subcommands accept --config FILE with key=value lines (keys are the
long flag names without the leading dashes); explicit flags override file
values. Exit code is 0 on success and nonzero with a message on stderr on
any error.
"""

from __future__ import annotations

import argparse
import sys

from .assembly import ElasticParams, build_system
from .eigen import smallest_eigenpairs
from .experiments import (
    DEFAULT_DOF_CAP,
    build_domain_mesh,
    run_locking_sweep,
    run_table,
    run_twogrid_table,
)
from .solve import SolverConfig


def load_config(path) -> dict:
    """Parse a plain key=value file; '#' starts a comment, blanks ignored."""
    out = {}
    with open(path) as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.rstrip()!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def _add_common(p):
    p.add_argument("--domain", choices=("square", "lshape"), required=True)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--csv", default=None)
    p.add_argument("--dof-cap", dest="dof_cap", type=int, default=DEFAULT_DOF_CAP)
    p.add_argument("--seed", type=int, default=SolverConfig.seed)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crelast", description=__doc__.split("\n\n")[0])
    parser.add_argument("--config", default=None, help="key=value defaults file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="direct eigensolve on one mesh")
    _add_common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--tol", type=float, default=SolverConfig.eig_tol)

    p = sub.add_parser("twogrid", help="two-grid eigensolve")
    _add_common(p)
    p.add_argument("--scheme", type=int, choices=(1, 2), required=True)
    p.add_argument("--nH", dest="n_H", type=int, required=True)
    p.add_argument("--nh", dest="n_h", type=int, required=True)
    p.add_argument("--no-direct", dest="direct", action="store_false")

    p = sub.add_parser("table", help="convergence table")
    _add_common(p)
    p.add_argument("--start-n", dest="start_n", type=int, required=True)
    p.add_argument("--levels", type=int, required=True)

    p = sub.add_parser("locking", help="lambda sweep of proxy errors")
    _add_common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--lambdas", required=True, help="comma-separated lambda values")
    p.add_argument("--svg", default=None)
    return parser


def _apply_config_file(parser, argv):
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config", default=None)
    known, _ = probe.parse_known_args(argv)
    if known.config is None:
        return
    values = load_config(known.config)
    mapped = {}
    for key, value in values.items():
        dest = {"lambda": "lam", "nH": "n_H", "nh": "n_h"}.get(key, key.replace("-", "_"))
        mapped[dest] = value
    for action in parser._subparsers._group_actions[0].choices.values():
        defaults = {}
        for act in action._actions:
            if act.dest in mapped:
                raw = mapped[act.dest]
                defaults[act.dest] = raw if act.type is None else act.type(raw)
        action.set_defaults(**defaults)


def _solver_config(args) -> SolverConfig:
    kwargs = {"seed": args.seed}
    if getattr(args, "tol", None) is not None and hasattr(args, "tol"):
        kwargs["eig_tol"] = args.tol
    return SolverConfig(**kwargs)


def cmd_solve(args) -> int:
    mesh = build_domain_mesh(args.domain, args.n)
    system = build_system(mesh, ElasticParams(mu=args.mu, lam=args.lam))
    if system.ndof > args.dof_cap:
        raise SystemExit(f"error: {system.ndof} DOFs exceed the cap of {args.dof_cap}")
    pairs = smallest_eigenpairs(system.A, system.M, args.k, _solver_config(args))
    print(f"# domain={args.domain} n={args.n} h={mesh.h:.9g} mu={args.mu:g} "
          f"lambda={args.lam:g} ndof={system.ndof}")
    for i, p in enumerate(pairs):
        print(f"omega[{i}] = {p.omega:.9f}   residual={p.residual:.2e} iterations={p.iterations}")
    if args.csv:
        with open(args.csv, "w") as f:
            f.write("index,omega,residual,iterations\n")
            for i, p in enumerate(pairs):
                f.write(f"{i},{p.omega:.17g},{p.residual:.17g},{p.iterations}\n")
    return 0


def cmd_twogrid(args) -> int:
    params = ElasticParams(mu=args.mu, lam=args.lam)
    rows = run_twogrid_table(
        args.domain,
        params,
        [(args.n_H, args.n_h)],
        args.scheme,
        config=_solver_config(args),
        dof_cap=args.dof_cap,
        include_direct=args.direct,
        csv_path=args.csv,
    )
    r = rows[0]
    print(f"# domain={args.domain} scheme={r.scheme} H=sqrt(2)/{r.n_H} h=sqrt(2)/{r.n_h} "
          f"mu={args.mu:g} lambda={args.lam:g}")
    print(f"omega_H     = {r.omega_H:.9f}")
    print(f"omega_super = {r.omega_super:.9f}   time={r.time_scheme:.3f}s")
    if r.omega_direct is not None:
        print(f"omega_h     = {r.omega_direct:.9f}   time={r.time_direct:.3f}s")
    return 0


def cmd_table(args) -> int:
    params = ElasticParams(mu=args.mu, lam=args.lam)
    table = run_table(
        args.domain,
        params,
        n_levels=args.levels,
        start_n=args.start_n,
        config=_solver_config(args),
        dof_cap=args.dof_cap,
        csv_path=args.csv,
    )
    print(f"# domain={args.domain} mu={args.mu:g} lambda={args.lam:g}")
    print(f"{'n':>6} {'h':>12} {'omega':>15} {'ratio':>8}")
    for r in table.rows:
        ratio = f"{r.ratio:8.4f}" if r.ratio is not None else "        "
        print(f"{r.n:>6} {r.h:>12.6g} {r.omega:>15.6f} {ratio}")
    return 0


def cmd_locking(args) -> int:
    lambdas = [float(s) for s in args.lambdas.split(",") if s.strip()]
    if not lambdas:
        raise SystemExit("error: --lambdas produced an empty list")
    sweep = run_locking_sweep(
        args.domain,
        lambdas,
        args.n,
        mu=args.mu,
        config=_solver_config(args),
        dof_cap=args.dof_cap,
        csv_path=args.csv,
        svg_path=args.svg,
    )
    print(f"# domain={args.domain} n={args.n} mu={args.mu:g}")
    print(f"{'lambda':>12} {'err_direct':>14} {'err_scheme1':>14} {'err_scheme2':>14}")
    for p in sweep.points:
        print(
            f"{p.lam:>12g} {p.proxy('direct'):>14.6e} "
            f"{p.proxy('scheme1'):>14.6e} {p.proxy('scheme2'):>14.6e}"
        )
    return 0


_COMMANDS = {
    "solve": cmd_solve,
    "twogrid": cmd_twogrid,
    "table": cmd_table,
    "locking": cmd_locking,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    _apply_config_file(parser, argv)
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except SystemExit:
        raise
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
