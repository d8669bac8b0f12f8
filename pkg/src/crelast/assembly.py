"""Crouzeix-Raviart vector element space and matrix assembly.

The displacement field is approximated componentwise by nonconforming P1
elements whose degrees of freedom are edge-midpoint values (equivalently
edge means). The stiffness form is

    mu * (grad u : grad v) + (mu + lam) * (div u)(div v)

integrated elementwise; both integrands are constant per triangle, so all
local integrals are closed form. Homogeneous Dirichlet data is imposed by
eliminating boundary-edge DOFs, which is exactly the zero-edge-mean
condition defining the constrained space.

DOF layout: interior edges only, two components per edge, interleaved
(x-displacement first), in the order of the mesh edge list.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .mesh import TriangleMesh


@dataclass(frozen=True)
class ElasticParams:
    """Lame constants and density. The reference experiments use rho = 1."""

    mu: float
    lam: float
    rho: float = 1.0

    def __post_init__(self):
        if not (self.mu > 0 and self.lam > 0 and self.rho > 0):
            raise ValueError(f"mu, lam, rho must be positive, got {self}")


class DofMap:
    """Reduced numbering for the boundary-constrained C-R vector space.

    Boundary edges carry no DOF. Interior edge e with rank r in the
    interior list owns global indices 2*r (x component) and 2*r+1.
    """

    def __init__(self, mesh: TriangleMesh):
        self.n_edges = mesh.n_edges
        self.interior_edges = np.flatnonzero(~mesh.edge_boundary)
        self._rank = -np.ones(mesh.n_edges, dtype=np.int64)
        self._rank[self.interior_edges] = np.arange(len(self.interior_edges))
        self.ndof = 2 * len(self.interior_edges)

    def dof_of(self, edge: int, component: int) -> int:
        """Global index of (edge, component); -1 for boundary edges."""
        r = self._rank[edge]
        return -1 if r < 0 else 2 * int(r) + component

    def edge_rank(self) -> np.ndarray:
        """(E,) array of interior ranks, -1 on boundary edges."""
        return self._rank

    def to_full(self, u: np.ndarray) -> np.ndarray:
        """Expand a reduced vector to per-edge values (E, 2), zero on the
        boundary."""
        if u.shape != (self.ndof,):
            raise ValueError(f"expected shape ({self.ndof},), got {u.shape}")
        full = np.zeros((self.n_edges, 2))
        full[self.interior_edges, 0] = u[0::2]
        full[self.interior_edges, 1] = u[1::2]
        return full

    def from_full(self, full: np.ndarray) -> np.ndarray:
        """Restrict per-edge values (E, 2) to the reduced vector."""
        return full[self.interior_edges].ravel()


def local_basis_gradients(tri_pts: np.ndarray) -> np.ndarray:
    """Gradients of the three C-R basis functions phi_i = 1 - 2*lambda_i.

    tri_pts: (3, 2) vertex coordinates, counterclockwise. Returns (3, 2);
    row i is the constant gradient of the basis function attached to the
    edge opposite vertex i. Raises ValueError on degenerate triangles.
    """
    g = _gradients(np.asarray(tri_pts, dtype=float)[None, :, :])
    return g[0]


def _gradients(pts: np.ndarray) -> np.ndarray:
    """Vectorized C-R basis gradients for (T, 3, 2) vertex coordinates."""
    x = pts[..., 0]
    y = pts[..., 1]
    two_area = (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (
        y[:, 1] - y[:, 0]
    )
    if np.any(two_area <= 0.0):
        raise ValueError("degenerate or inverted triangle")
    nxt = [1, 2, 0]
    prv = [2, 0, 1]
    # grad lambda_i = (y_{i+1} - y_{i+2}, x_{i+2} - x_{i+1}) / (2|K|)
    gx = y[:, nxt] - y[:, prv]
    gy = x[:, prv] - x[:, nxt]
    g = np.stack([gx, gy], axis=-1) / two_area[:, None, None]
    return -2.0 * g


def local_stiffness(tri_pts: np.ndarray, mu: float, lam: float) -> np.ndarray:
    """6x6 element stiffness, DOF order (e0x, e0y, e1x, e1y, e2x, e2y).

    K[(i,c),(j,d)] = mu*|K|*delta_cd*(g_i . g_j) + (mu+lam)*|K|*g_i[c]*g_j[d]
    with g_i the C-R basis gradients. Symmetric positive semidefinite;
    rigid translations lie in the nullspace.
    """
    pts = np.asarray(tri_pts, dtype=float)[None, :, :]
    return _local_stiffness_batch(pts, mu, lam)[0]


def _local_stiffness_batch(pts: np.ndarray, mu: float, lam: float) -> np.ndarray:
    grad_blk, div_blk = _local_stiffness_parts(pts)
    return mu * grad_blk + (mu + lam) * div_blk


def _local_stiffness_parts(pts: np.ndarray):
    """Gradient-term and divergence-term element matrices, (T, 6, 6) each."""
    g = _gradients(pts)  # (T, 3, 2)
    area = _areas(pts)
    dot = np.einsum("tic,tjc->tij", g, g)  # (T, 3, 3)
    T = pts.shape[0]
    grad_blk = np.zeros((T, 6, 6))
    grad_blk[:, 0::2, 0::2] = dot
    grad_blk[:, 1::2, 1::2] = dot
    grad_blk *= area[:, None, None]
    d = g.reshape(T, 6)  # div contribution of (i, c) is g_i[c]
    div_blk = area[:, None, None] * np.einsum("ta,tb->tab", d, d)
    return grad_blk, div_blk


def _areas(pts: np.ndarray) -> np.ndarray:
    x = pts[..., 0]
    y = pts[..., 1]
    return 0.5 * (
        (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0])
    )


def local_mass(tri_pts: np.ndarray, rho: float = 1.0) -> np.ndarray:
    """6x6 element mass matrix: exactly diagonal, rho*|K|/3 per DOF.

    The C-R basis is L2-orthogonal on each triangle, so no off-diagonal
    terms arise. Raises ValueError on degenerate triangles.
    """
    pts = np.asarray(tri_pts, dtype=float)[None, :, :]
    area = _areas(pts)[0]
    if area <= 0.0:
        raise ValueError("degenerate or inverted triangle")
    return np.diag(np.full(6, rho * area / 3.0))


def _element_dofs(mesh: TriangleMesh, dofmap: DofMap) -> np.ndarray:
    """(T, 6) global DOF indices per element, -1 where eliminated."""
    rank = dofmap.edge_rank()[mesh.tri_edges]  # (T, 3)
    dofs = np.empty((mesh.n_triangles, 6), dtype=np.int64)
    dofs[:, 0::2] = 2 * rank
    dofs[:, 1::2] = 2 * rank + 1
    dofs[rank.repeat(2, axis=1) < 0] = -1
    return dofs


def _scatter(K: np.ndarray, dofs: np.ndarray, ndof: int) -> sp.csr_array:
    """Sum (T, 6, 6) element blocks into a CSR matrix, dropping -1 DOFs."""
    rows = np.repeat(dofs, 6, axis=1).ravel()
    cols = np.tile(dofs, (1, 6)).ravel()
    vals = K.ravel()
    keep = (rows >= 0) & (cols >= 0)
    A = sp.coo_array((vals[keep], (rows[keep], cols[keep])), shape=(ndof, ndof))
    return A.tocsr()


def assemble(mesh: TriangleMesh, params: ElasticParams):
    """Assemble the stiffness and mass matrices on the reduced DOF set.

    Returns (A, M, dofmap): A is symmetric positive definite, M is the
    diagonal mass matrix with entries sum_{K containing e} rho*|K|/3.
    Raises ValueError if no interior edge exists.
    """
    dofmap = DofMap(mesh)
    if dofmap.ndof == 0:
        raise ValueError("mesh has no interior edges; the constrained space is empty")
    pts = mesh.vertices[mesh.triangles]
    K = _local_stiffness_batch(pts, params.mu, params.lam)
    dofs = _element_dofs(mesh, dofmap)
    A = _scatter(K, dofs, dofmap.ndof)
    M = _assemble_mass(mesh, dofmap, params.rho)
    return A, M, dofmap


def assemble_parts(mesh: TriangleMesh):
    """Assemble the lambda-independent pieces: (A_grad, A_div, M_unit, dofmap).

    The full stiffness for parameters (mu, lam) is mu*A_grad + (mu+lam)*A_div
    and the mass matrix is rho*M_unit. Useful when sweeping lam on a fixed
    mesh.
    """
    dofmap = DofMap(mesh)
    if dofmap.ndof == 0:
        raise ValueError("mesh has no interior edges; the constrained space is empty")
    pts = mesh.vertices[mesh.triangles]
    grad_blk, div_blk = _local_stiffness_parts(pts)
    dofs = _element_dofs(mesh, dofmap)
    A_grad = _scatter(grad_blk, dofs, dofmap.ndof)
    A_div = _scatter(div_blk, dofs, dofmap.ndof)
    M_unit = _assemble_mass(mesh, dofmap, 1.0)
    return A_grad, A_div, M_unit, dofmap


def _assemble_mass(mesh: TriangleMesh, dofmap: DofMap, rho: float) -> sp.csr_array:
    area = _areas(mesh.vertices[mesh.triangles])
    per_edge = np.zeros(mesh.n_edges)
    np.add.at(per_edge, mesh.tri_edges.ravel(), np.repeat(rho * area / 3.0, 3))
    diag = np.repeat(per_edge[dofmap.interior_edges], 2)
    return sp.csr_array(sp.diags_array(diag))


def assemble_full(mesh: TriangleMesh, params: ElasticParams) -> sp.csr_array:
    """Stiffness without boundary elimination (all edges carry DOFs).

    Used by the patch test: constant-strain fields produce zero residual
    rows on interior edges.
    """
    pts = mesh.vertices[mesh.triangles]
    K = _local_stiffness_batch(pts, params.mu, params.lam)
    rank = mesh.tri_edges
    dofs = np.empty((mesh.n_triangles, 6), dtype=np.int64)
    dofs[:, 0::2] = 2 * rank
    dofs[:, 1::2] = 2 * rank + 1
    return _scatter(K, dofs, 2 * mesh.n_edges)


@dataclass
class ElasticSystem:
    """An assembled discrete problem: mesh, DOF map and the (A, M) pencil."""

    mesh: TriangleMesh
    params: ElasticParams
    dofmap: DofMap
    A: sp.csr_array
    M: sp.csr_array

    @property
    def ndof(self) -> int:
        return self.dofmap.ndof


def build_system(mesh: TriangleMesh, params: ElasticParams) -> ElasticSystem:
    A, M, dofmap = assemble(mesh, params)
    return ElasticSystem(mesh=mesh, params=params, dofmap=dofmap, A=A, M=M)


# 2-point Gauss rule on [0, 1], exact through cubics
_GAUSS2 = (0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0))


def edge_means(f: Callable, mesh: TriangleMesh) -> np.ndarray:
    """Per-edge mean values of a vector field, (E, 2).

    The mean over each edge is computed with the 2-point Gauss rule, which
    is exact for polynomial components up to degree 3 along the edge. f
    maps an (N, 2) array of points to an (N, 2) array of values.
    """
    a = mesh.vertices[mesh.edges[:, 0]]
    b = mesh.vertices[mesh.edges[:, 1]]
    vals = 0.0
    for t in _GAUSS2:
        pts = (1.0 - t) * a + t * b
        vals = vals + 0.5 * np.asarray(f(pts), dtype=float).reshape(-1, 2)
    return vals


def cr_interpolate(f: Callable, mesh: TriangleMesh, dofmap: DofMap) -> np.ndarray:
    """C-R interpolant of a vector field as a reduced coefficient vector.

    The DOF on edge e is the edge mean of f; boundary edges are dropped
    (their means are constrained to zero in the discrete space).
    """
    return dofmap.from_full(edge_means(f, mesh))


def elementwise_divergence(mesh: TriangleMesh, edge_values: np.ndarray) -> np.ndarray:
    """Broken divergence per triangle of the C-R field with the given
    per-edge values (E, 2); constant on each element."""
    g = _gradients(mesh.vertices[mesh.triangles])  # (T, 3, 2)
    vals = edge_values[mesh.tri_edges]  # (T, 3, 2)
    return np.einsum("tic,tic->t", g, vals)


def energy_norm(u: np.ndarray, A: sp.csr_array) -> float:
    """sqrt(u^T A u), the discrete energy norm."""
    u = _check_vec(u, A.shape[0])
    return float(np.sqrt(u @ (A @ u)))


def l2_norm(u: np.ndarray, M: sp.csr_array) -> float:
    """sqrt(u^T M u), the weighted L2 norm."""
    u = _check_vec(u, M.shape[0])
    return float(np.sqrt(u @ (M @ u)))


def broken_h1_seminorm(u: np.ndarray, mesh: TriangleMesh) -> float:
    """Elementwise H1 seminorm of the C-R field with reduced coefficients u."""
    dofmap = DofMap(mesh)
    u = _check_vec(u, dofmap.ndof)
    full = dofmap.to_full(u)
    g = _gradients(mesh.vertices[mesh.triangles])
    area = _areas(mesh.vertices[mesh.triangles])
    # gradient of component c on triangle t: sum_i values[t,i,c] * g[t,i,:]
    vals = full[mesh.tri_edges]  # (T, 3, 2)
    grads = np.einsum("tic,tid->tcd", vals, g)  # (T, 2, 2)
    return float(np.sqrt(np.sum(area * np.einsum("tcd,tcd->t", grads, grads))))


def _check_vec(u: np.ndarray, n: int) -> np.ndarray:
    u = np.asarray(u, dtype=float).ravel()
    if u.shape[0] != n:
        raise ValueError(f"vector length {u.shape[0]} does not match dimension {n}")
    return u


def check_symmetric(A: sp.csr_array, tol: float = 1e-12) -> bool:
    """True iff ||A - A^T||_max <= tol * ||A||_max."""
    d = abs(A - A.T)
    amax = abs(A).max() if A.nnz else 0.0
    dmax = d.max() if d.nnz else 0.0
    return bool(dmax <= tol * amax)


def save_matrix_txt(A: sp.csr_array, path) -> None:
    """Coordinate text export: `i j value` per line, 0-based."""
    coo = sp.coo_array(A)
    with open(path, "w") as f:
        for i, j, v in zip(coo.row, coo.col, coo.data):
            f.write(f"{i} {j} {v!r}\n")


def save_vector_txt(u: np.ndarray, path) -> None:
    """One value per line."""
    with open(path, "w") as f:
        for v in np.asarray(u).ravel():
            f.write(f"{v!r}\n")
