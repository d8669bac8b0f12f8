"""Batch drivers: convergence tables, two-grid comparisons, Lame sweeps.

Reproduces the reference study layout: eigenvalues of the first mode on
uniformly refined meshes with empirical orders, two-grid versus direct
eigensolves on (H, h) pairs, and the locking study that sweeps the second
Lame parameter at fixed mesh size. Since exact eigenvalues are unknown,
errors are proxied by |omega_h - omega_{h/2}| throughout.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .assembly import ElasticParams, ElasticSystem, assemble_parts, build_system
from .eigen import smallest_eigenpairs
from .mesh import TriangleMesh, build_lshape_mesh, build_unit_square_mesh, refine_times
from .solve import DEFAULT_CONFIG, SolverConfig
from .twogrid import TwoGridResult, scheme_41, scheme_42

DEFAULT_DOF_CAP = 1_500_000

DOMAINS = ("square", "lshape")


class MemoryCapError(RuntimeError):
    """A requested mesh exceeds the configured DOF cap."""


def build_domain_mesh(domain: str, n: int) -> TriangleMesh:
    if domain == "square":
        return build_unit_square_mesh(n)
    if domain == "lshape":
        return build_lshape_mesh(n)
    raise ValueError(f"unknown domain {domain!r}; expected one of {DOMAINS}")


def _check_cap(ndof: int, dof_cap: int, what: str) -> None:
    if ndof > dof_cap:
        raise MemoryCapError(
            f"{what} needs {ndof} DOFs, above the cap of {dof_cap}; "
            "raise dof_cap to force the computation"
        )


def convergence_ratio(w_h: float, w_h2: float, w_h4: float) -> float:
    """Empirical order from three consecutive-level eigenvalues:
    log2 |(w_h - w_h2) / (w_h2 - w_h4)|."""
    num = w_h - w_h2
    den = w_h2 - w_h4
    if num == 0.0 or den == 0.0:
        raise ValueError("consecutive eigenvalues coincide; sequence converged to machine precision")
    return math.log10(abs(num / den)) / math.log10(2.0)


@dataclass
class TableRow:
    n: int
    h: float
    omega: float
    ratio: Optional[float] = None


@dataclass
class ConvergenceTable:
    """First-eigenvalue column on a refinement sequence with empirical
    orders; row i carries a ratio only when rows i+1, i+2 exist."""

    domain: str
    mu: float
    lam: float
    rows: list[TableRow] = field(default_factory=list)


def run_table(
    domain: str,
    params: ElasticParams,
    n_levels: int,
    start_n: int,
    config: SolverConfig = DEFAULT_CONFIG,
    dof_cap: int = DEFAULT_DOF_CAP,
    csv_path=None,
) -> ConvergenceTable:
    """Direct first-eigenvalue computation on n_levels uniformly refined
    meshes starting from start_n; needs n_levels >= 3 for any ratio."""
    if n_levels < 1:
        raise ValueError("n_levels must be >= 1")
    table = ConvergenceTable(domain=domain, mu=params.mu, lam=params.lam)
    mesh = build_domain_mesh(domain, start_n)
    n = start_n
    for _ in range(n_levels):
        system = _assemble_capped(mesh, params, dof_cap)
        pair = smallest_eigenpairs(system.A, system.M, 1, config)[0]
        table.rows.append(TableRow(n=n, h=mesh.h, omega=pair.omega))
        mesh = refine_times(mesh, 1)
        n *= 2
    _fill_ratios(table)
    if csv_path is not None:
        write_table_csv(table, csv_path)
    return table


def _assemble_capped(mesh: TriangleMesh, params: ElasticParams, dof_cap: int) -> ElasticSystem:
    ndof = 2 * int((~mesh.edge_boundary).sum())
    _check_cap(ndof, dof_cap, f"mesh with h={mesh.h:g}")
    return build_system(mesh, params)


def _fill_ratios(table: ConvergenceTable) -> None:
    rows = table.rows
    for i in range(len(rows) - 2):
        rows[i].ratio = convergence_ratio(rows[i].omega, rows[i + 1].omega, rows[i + 2].omega)


@dataclass
class TwoGridRow:
    n_H: int
    H: float
    n_h: int
    h: float
    scheme: int
    omega_H: float
    omega_super: float
    time_scheme: float
    omega_direct: Optional[float] = None
    time_direct: Optional[float] = None


def _coarse_fine_systems(domain, params, n_H, n_h, dof_cap):
    if n_H < 1 or n_h < n_H or (n_h % n_H) != 0:
        raise ValueError(f"fine n={n_h} is not a power-of-two refinement of coarse n={n_H}")
    k = int(round(math.log2(n_h // n_H)))
    if n_H * 2**k != n_h:
        raise ValueError(f"fine n={n_h} is not a power-of-two refinement of coarse n={n_H}")
    coarse_mesh = build_domain_mesh(domain, n_H)
    fine_mesh = refine_times(coarse_mesh, k)
    coarse = build_system(coarse_mesh, params)
    fine = _assemble_capped(fine_mesh, params, dof_cap)
    return coarse, fine


def run_twogrid_table(
    domain: str,
    params: ElasticParams,
    pairs: Sequence[tuple[int, int]],
    scheme: int,
    config: SolverConfig = DEFAULT_CONFIG,
    dof_cap: int = DEFAULT_DOF_CAP,
    include_direct: bool = True,
    direct_dof_cap: Optional[int] = None,
    csv_path=None,
) -> list[TwoGridRow]:
    """Run one two-grid scheme on each (n_H, n_h) pair, with the direct
    fine-grid eigensolve alongside for comparison where it fits under
    direct_dof_cap (None marks the skipped entries, as in an out-of-memory
    table column). Timings cover the solve phases, not assembly."""
    if scheme not in (1, 2):
        raise ValueError("scheme must be 1 or 2")
    direct_cap = dof_cap if direct_dof_cap is None else direct_dof_cap
    runner = scheme_41 if scheme == 1 else scheme_42
    rows = []
    for n_H, n_h in pairs:
        coarse, fine = _coarse_fine_systems(domain, params, n_H, n_h, dof_cap)
        result = runner(coarse, fine, config)
        row = TwoGridRow(
            n_H=n_H,
            H=coarse.mesh.h,
            n_h=n_h,
            h=fine.mesh.h,
            scheme=scheme,
            omega_H=result.omega_H,
            omega_super=result.omega_h_super,
            time_scheme=result.timings["total"],
        )
        if include_direct and fine.ndof <= direct_cap:
            t0 = time.perf_counter()
            row.omega_direct = smallest_eigenpairs(fine.A, fine.M, 1, config)[0].omega
            row.time_direct = time.perf_counter() - t0
        rows.append(row)
    if csv_path is not None:
        write_twogrid_csv(rows, csv_path)
    return rows


@dataclass
class LockingPoint:
    lam: float
    direct: tuple[float, float]
    scheme1: tuple[float, float]
    scheme2: tuple[float, float]

    def proxy(self, method: str) -> float:
        a, b = getattr(self, method)
        return abs(a - b)


@dataclass
class LockingSweep:
    """Per-lambda proxy errors |omega(n) - omega(2n)| at fixed mesh size
    for the direct solve and both two-grid schemes."""

    domain: str
    n: int
    mu: float
    points: list[LockingPoint] = field(default_factory=list)


def default_coarse_n(n: int) -> int:
    """Coarse grid for a fine grid of size n, n_H ~ sqrt(n) rounded up to
    a power of two (reproduces the reference pairings 8/64, 16/256, 32/512)."""
    if n < 4:
        return max(2, n)
    return 2 ** math.ceil(math.log2(n) / 2)


def sweep_solver_config(base: SolverConfig, mu: float, lam: float) -> SolverConfig:
    """Scale solver tolerances with the stiffness ratio (mu+lam)/mu.

    For lam >= ~1e4 the default 1e-12 relative residual sits below the
    attainable floating-point floor (backward error grows with the matrix
    norm); the scaled tolerances keep algebraic error far below
    discretization error without demanding the impossible.
    """
    kappa = (mu + lam) / mu
    return SolverConfig(
        eig_tol=max(base.eig_tol, 1e-14 * kappa),
        linear_tol=max(base.linear_tol, 1e-14 * kappa),
        max_iters=base.max_iters,
        shift_regularization=base.shift_regularization,
        seed=base.seed,
        preconditioner=base.preconditioner,
    )


def run_locking_sweep(
    domain: str,
    lambdas: Sequence[float],
    n: int,
    mu: float = 1.0,
    config: SolverConfig = DEFAULT_CONFIG,
    dof_cap: int = DEFAULT_DOF_CAP,
    csv_path=None,
    svg_path=None,
) -> LockingSweep:
    """Proxy-error stability study across lambda at fixed mesh size.

    For each lambda the first eigenvalue is computed at grids n and 2n by
    the direct solver and both two-grid schemes (coarse sizes from
    default_coarse_n); the proxy error is the absolute difference between
    the two levels. The lambda-independent matrix parts are assembled once
    per mesh and recombined per lambda.
    """
    sweep = LockingSweep(domain=domain, n=n, mu=mu)
    levels = []
    for n_level in (n, 2 * n):
        n_H = default_coarse_n(n_level)
        if domain == "lshape" and n_H % 2 != 0:
            n_H *= 2
        k = int(round(math.log2(n_level // n_H)))
        coarse_mesh = build_domain_mesh(domain, n_H)
        fine_mesh = refine_times(coarse_mesh, k)
        ndof = 2 * int((~fine_mesh.edge_boundary).sum())
        _check_cap(ndof, dof_cap, f"sweep level n={n_level}")
        levels.append(
            {
                "coarse_mesh": coarse_mesh,
                "fine_mesh": fine_mesh,
                "coarse_parts": assemble_parts(coarse_mesh),
                "fine_parts": assemble_parts(fine_mesh),
            }
        )

    for lam in lambdas:
        params = ElasticParams(mu=mu, lam=float(lam))
        cfg = sweep_solver_config(config, mu, float(lam))
        per_method = {"direct": [], "scheme1": [], "scheme2": []}
        for level in levels:
            coarse = _combine(level["coarse_mesh"], level["coarse_parts"], params)
            fine = _combine(level["fine_mesh"], level["fine_parts"], params)
            per_method["direct"].append(smallest_eigenpairs(fine.A, fine.M, 1, cfg)[0].omega)
            per_method["scheme1"].append(scheme_41(coarse, fine, cfg).omega_h_super)
            per_method["scheme2"].append(scheme_42(coarse, fine, cfg).omega_h_super)
        sweep.points.append(
            LockingPoint(
                lam=float(lam),
                direct=tuple(per_method["direct"]),
                scheme1=tuple(per_method["scheme1"]),
                scheme2=tuple(per_method["scheme2"]),
            )
        )
    if csv_path is not None:
        write_locking_csv(sweep, csv_path)
    if svg_path is not None:
        write_locking_svg(sweep, svg_path)
    return sweep


def _combine(mesh: TriangleMesh, parts, params: ElasticParams) -> ElasticSystem:
    A_grad, A_div, M_unit, dofmap = parts
    A = (params.mu * A_grad + (params.mu + params.lam) * A_div).tocsr()
    M = (params.rho * M_unit).tocsr()
    return ElasticSystem(mesh=mesh, params=params, dofmap=dofmap, A=A, M=M)


# ---------------------------------------------------------------------------
# CSV and SVG emission


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def write_table_csv(table: ConvergenceTable, path) -> None:
    """Columns: n, h, omega, ratio (empty string when absent)."""
    with open(path, "w") as f:
        f.write("n,h,omega,ratio\n")
        for r in table.rows:
            ratio = "" if r.ratio is None else _fmt(r.ratio)
            f.write(f"{r.n},{_fmt(r.h)},{_fmt(r.omega)},{ratio}\n")


def read_table_csv(path) -> list[TableRow]:
    rows = []
    with open(path) as f:
        header = f.readline().strip()
        if header != "n,h,omega,ratio":
            raise ValueError(f"unexpected table CSV header: {header!r}")
        for line in f:
            n, h, omega, ratio = line.rstrip("\n").split(",")
            rows.append(
                TableRow(
                    n=int(n),
                    h=float(h),
                    omega=float(omega),
                    ratio=None if ratio == "" else float(ratio),
                )
            )
    return rows


def write_twogrid_csv(rows: list[TwoGridRow], path) -> None:
    """Columns: nH, H, nh, h, scheme, omega_H, omega_super, time_scheme,
    omega_direct, time_direct ('-' when the direct solve was skipped)."""
    with open(path, "w") as f:
        f.write("nH,H,nh,h,scheme,omega_H,omega_super,time_scheme,omega_direct,time_direct\n")
        for r in rows:
            f.write(
                ",".join(
                    [
                        str(r.n_H),
                        _fmt(r.H),
                        str(r.n_h),
                        _fmt(r.h),
                        str(r.scheme),
                        _fmt(r.omega_H),
                        _fmt(r.omega_super),
                        _fmt(r.time_scheme),
                        _fmt(r.omega_direct),
                        _fmt(r.time_direct),
                    ]
                )
                + "\n"
            )


def write_locking_csv(sweep: LockingSweep, path) -> None:
    """Columns: lambda, then omega at n, omega at 2n and the proxy error
    for the direct solve and both schemes."""
    cols = [
        "lambda",
        "omega_direct_n",
        "omega_direct_2n",
        "err_direct",
        "omega_s1_n",
        "omega_s1_2n",
        "err_s1",
        "omega_s2_n",
        "omega_s2_2n",
        "err_s2",
    ]
    with open(path, "w") as f:
        f.write(",".join(cols) + "\n")
        for p in sweep.points:
            vals = [p.lam]
            for method in ("direct", "scheme1", "scheme2"):
                a, b = getattr(p, method)
                vals.extend([a, b, abs(a - b)])
            f.write(",".join(_fmt(v) for v in vals) + "\n")


def read_locking_csv(path) -> list[dict]:
    with open(path) as f:
        header = f.readline().rstrip("\n").split(",")
        return [dict(zip(header, map(float, line.rstrip("\n").split(",")))) for line in f]


_SVG_SERIES = (("direct", "#d62728"), ("scheme1", "#1f77b4"), ("scheme2", "#2ca02c"))


def write_locking_svg(sweep: LockingSweep, path, width: int = 640, height: int = 480) -> None:
    """Dependency-free log-log line plot of the proxy errors over lambda."""
    margin = 60
    xs = [math.log10(p.lam) for p in sweep.points]
    ys = []
    for p in sweep.points:
        for m, _ in _SVG_SERIES:
            ys.append(math.log10(max(p.proxy(m), 1e-300)))
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def sx(x):
        return margin + (x - x0) / (x1 - x0) * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
        f'<text x="{width // 2}" y="{height - 15}" text-anchor="middle" '
        f'font-size="13">log10(lambda)</text>',
        f'<text x="15" y="{height // 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 15 {height // 2})">log10 |omega_h - omega_h/2|</text>',
        f'<text x="{width // 2}" y="22" text-anchor="middle" font-size="14">'
        f"{sweep.domain}, n={sweep.n}, mu={sweep.mu:g}</text>",
    ]
    for x in xs:
        parts.append(
            f'<text x="{sx(x):.1f}" y="{height - margin + 18}" text-anchor="middle" '
            f'font-size="11">{x:g}</text>'
        )
    for i, (method, color) in enumerate(_SVG_SERIES):
        pts = " ".join(
            f"{sx(math.log10(p.lam)):.2f},{sy(math.log10(max(p.proxy(method), 1e-300))):.2f}"
            for p in sweep.points
        )
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        ly = margin + 16 * i
        parts.append(
            f'<line x1="{width - margin - 110}" y1="{ly}" x2="{width - margin - 85}" '
            f'y2="{ly}" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{width - margin - 78}" y="{ly + 4}" font-size="12">{method}</text>'
        )
    parts.append("</svg>")
    with open(path, "w") as f:
        f.write("\n".join(parts) + "\n")
