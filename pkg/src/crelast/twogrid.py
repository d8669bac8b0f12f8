"""Two-grid solvers for the elasticity eigenvalue problem.

Both schemes solve the eigenproblem once on a coarse grid and replace the
fine-grid eigensolve by a single linear solve followed by a Rayleigh
quotient:

  scheme_41 (inverse iteration):        A_h u = omega_H * b(u_H, .)
  scheme_42 (shifted-inverse iteration): (A_h - omega_H M_h) u = b(u_H, .)

The coarse function u_H is carried to the fine grid exactly: the fine mesh
is a repeated red refinement of the coarse mesh, each fine triangle knows
its coarse ancestor, u_H is linear on that ancestor, and the fine-edge
midpoint rule integrates products of two linears exactly. Nothing is
interpolated or approximated in the transfer.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .assembly import ElasticSystem, _areas, _check_vec
from .eigen import rayleigh_quotient, smallest_eigenpairs
from .mesh import TriangleMesh, ancestor_triangles
from .solve import DEFAULT_CONFIG, ShiftSingularError, SolverConfig, spd_solve, sym_indefinite_solve


@dataclass
class TwoGridResult:
    """Outcome of one two-grid run.

    omega_h_super is the Rayleigh quotient of the stored fine vector
    u_h_super (energy-normalized), computed with the fine matrices.
    timings holds wall-clock seconds per step plus 'total'.
    """

    scheme: int
    omega_H: float
    omega_h_super: float
    u_h_super: np.ndarray
    timings: dict = field(default_factory=dict)


def _barycentric(points: np.ndarray, tri_pts: np.ndarray) -> np.ndarray:
    """Barycentric coordinates of points[i] w.r.t. triangle tri_pts[i].

    points: (N, 2); tri_pts: (N, 3, 2). Returns (N, 3).
    """
    a = tri_pts[:, 0]
    e1 = tri_pts[:, 1] - a
    e2 = tri_pts[:, 2] - a
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    r = points - a
    l1 = (r[:, 0] * e2[:, 1] - r[:, 1] * e2[:, 0]) / det
    l2 = (e1[:, 0] * r[:, 1] - e1[:, 1] * r[:, 0]) / det
    return np.stack([1.0 - l1 - l2, l1, l2], axis=1)


def eval_cr_at_ancestor_midpoints(
    edge_values: np.ndarray, coarse: TriangleMesh, fine: TriangleMesh
) -> np.ndarray:
    """Evaluate the coarse C-R field at the fine-edge midpoints of every
    fine triangle, using each triangle's coarse ancestor.

    edge_values: (E_coarse, 2) per-edge coefficients. Returns (T_fine, 3, 2)
    with entry [t, i] the value at the midpoint of fine edge tri_edges[t, i]
    seen from triangle t's side (one-sided across coarse interfaces).
    """
    amap = ancestor_triangles(fine, coarse)
    fpts = fine.vertices[fine.triangles]  # (T, 3, 2)
    mids = 0.5 * (fpts[:, [1, 2, 0]] + fpts[:, [2, 0, 1]])  # (T, 3, 2), mid i opp. vertex i
    cpts = coarse.vertices[coarse.triangles[amap]]  # (T, 3, 2)
    out = np.empty((fine.n_triangles, 3, 2))
    coeffs = edge_values[coarse.tri_edges[amap]]  # (T, 3, 2)
    for i in range(3):
        lam = _barycentric(mids[:, i], cpts)  # (T, 3)
        phi = 1.0 - 2.0 * lam
        out[:, i, :] = np.einsum("tj,tjc->tc", phi, coeffs)
    return out


def transfer_load(
    u_H: np.ndarray,
    coarse: ElasticSystem,
    fine: ElasticSystem,
) -> np.ndarray:
    """Fine-grid load vector with entries b(u_H, v) = rho * int u_H . v.

    u_H is a reduced coarse coefficient vector. Each fine triangle lies in
    one coarse triangle, so both factors are linear there and the 3-edge-
    midpoint rule (exact for quadratics) gives the integral exactly:
    the entry for fine edge e accumulates rho * |K_f| / 3 times the value
    of u_H at the midpoint of e, over the fine triangles K_f containing e.
    Raises ValueError if the fine mesh is not a refinement of the coarse.
    """
    u_H = _check_vec(u_H, coarse.ndof)
    full = coarse.dofmap.to_full(u_H)
    vals = eval_cr_at_ancestor_midpoints(full, coarse.mesh, fine.mesh)  # (T, 3, 2)
    area = _areas(fine.mesh.vertices[fine.mesh.triangles])
    rho = fine.params.rho
    per_edge = np.zeros((fine.mesh.n_edges, 2))
    w = (rho / 3.0) * area
    np.add.at(per_edge, fine.mesh.tri_edges.ravel(), (w[:, None, None] * vals).reshape(-1, 2))
    return fine.dofmap.from_full(per_edge)


def _coarse_step(coarse: ElasticSystem, config: SolverConfig):
    t0 = time.perf_counter()
    pair = smallest_eigenpairs(coarse.A, coarse.M, 1, config)[0]
    return pair.omega, pair.u, time.perf_counter() - t0


def _finish(scheme, omega_H, u, fine, timings):
    t0 = time.perf_counter()
    omega = rayleigh_quotient(u, fine.A, fine.M)
    u = u / np.sqrt(float(u @ (fine.A @ u)))
    timings["rayleigh"] = time.perf_counter() - t0
    timings["total"] = sum(timings.values())
    return TwoGridResult(
        scheme=scheme, omega_H=omega_H, omega_h_super=omega, u_h_super=u, timings=timings
    )


def scheme_41(
    coarse: ElasticSystem, fine: ElasticSystem, config: SolverConfig = DEFAULT_CONFIG
) -> TwoGridResult:
    """Two-grid discretization based on inverse iteration.

    Coarse eigensolve, then one fine solve A_h u = omega_H b(u_H, .), then
    the Rayleigh quotient of u on the fine grid.
    """
    timings = {}
    omega_H, u_H, timings["coarse_eig"] = _coarse_step(coarse, config)
    t0 = time.perf_counter()
    load = omega_H * transfer_load(u_H, coarse, fine)
    timings["transfer"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    u = spd_solve(fine.A, load, config)
    timings["fine_solve"] = time.perf_counter() - t0
    return _finish(1, omega_H, u, fine, timings)


def scheme_42(
    coarse: ElasticSystem, fine: ElasticSystem, config: SolverConfig = DEFAULT_CONFIG
) -> TwoGridResult:
    """Two-grid discretization based on shifted-inverse iteration.

    Coarse eigensolve, then one fine solve
    (A_h - omega_H M_h) u' = b(u_H, .), u = u' / ||u'||_h, then the
    Rayleigh quotient. A numerically singular shift is retried once with
    omega_H * (1 + shift_regularization).
    """
    timings = {}
    omega_H, u_H, timings["coarse_eig"] = _coarse_step(coarse, config)
    t0 = time.perf_counter()
    load = transfer_load(u_H, coarse, fine)
    timings["transfer"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    try:
        u = sym_indefinite_solve(fine.A - omega_H * fine.M, load, config)
    except ShiftSingularError:
        shifted = fine.A - (omega_H * (1.0 + config.shift_regularization)) * fine.M
        u = sym_indefinite_solve(shifted, load, config)
    timings["fine_solve"] = time.perf_counter() - t0
    return _finish(2, omega_H, u, fine, timings)
