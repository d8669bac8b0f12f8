"""Generalized symmetric eigensolver for the discrete pencil (A, M).

M is diagonal for the C-R mass form, so the pencil is symmetrized by the
cheap congruence D^{-1/2} A D^{-1/2} and the smallest eigenvalues are
found by shift-invert Lanczos at sigma = 0 (ARPACK) with a deterministic
seeded start vector; small problems fall back to a dense solve. Every
returned pair is verified against the residual tolerance and polished by
deflated inverse iteration if needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh, splu

from .solve import DEFAULT_CONFIG, SolverConfig, SolverError

_DENSE_CUTOFF = 400


@dataclass
class EigenPair:
    """One converged eigenpair of A u = omega M u.

    u is normalized in the energy norm, u^T A u = 1. residual is
    ||A u - omega M u||_2 relative to ||A u||_2 at return time; iterations
    counts polish steps applied on top of the Lanczos run (0 when none
    were needed).
    """

    omega: float
    u: np.ndarray
    residual: float
    iterations: int


def rayleigh_quotient(u: np.ndarray, A: sp.csr_array, M: sp.csr_array) -> float:
    """u^T A u / u^T M u. Raises ValueError when u^T M u vanishes."""
    u = np.asarray(u, dtype=float).ravel()
    mu = float(u @ (M @ u))
    if mu == 0.0:
        raise ValueError("u^T M u = 0; zero or corrupted vector")
    return float(u @ (A @ u)) / mu


def _check_diagonal_mass(M: sp.csr_array) -> np.ndarray:
    d = M.diagonal()
    if np.any(d <= 0.0):
        raise ValueError("mass matrix has non-positive diagonal entries")
    off = M - sp.diags_array(d)
    if off.nnz and abs(off).max() > 1e-14 * d.max():
        raise ValueError("mass matrix is not diagonal")
    return d


def smallest_eigenpairs(
    A: sp.csr_array, M: sp.csr_array, k: int, config: SolverConfig = DEFAULT_CONFIG
) -> list[EigenPair]:
    """The k algebraically smallest eigenpairs of A u = omega M u.

    A must be symmetric positive definite and M diagonal positive. Pairs
    come back sorted ascending, M-orthogonal, each energy-normalized and
    satisfying the relative residual bound config.eig_tol.
    """
    n = A.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    d = _check_diagonal_mass(M)
    s = 1.0 / np.sqrt(d)
    At = sp.csr_array(A.multiply(s[:, None]).multiply(s[None, :]))

    if n <= max(_DENSE_CUTOFF, 3 * k + 2):
        vals, vecs = scipy.linalg.eigh(At.toarray(), subset_by_index=[0, k - 1])
        lu = None
    else:
        lu = splu(sp.csc_matrix(At), permc_spec="MMD_AT_PLUS_A")
        opinv = LinearOperator(At.shape, matvec=lu.solve)
        rng = np.random.default_rng(config.seed)
        v0 = rng.standard_normal(n)
        try:
            vals, vecs = eigsh(At, k=k, sigma=0.0, which="LM", v0=v0, OPinv=opinv, tol=0)
        except ArpackNoConvergence as exc:
            got = len(exc.eigenvalues)
            raise SolverError(
                f"Lanczos converged only {got}/{k} eigenpairs "
                f"(n={n}, seed={config.seed}); consider raising max_iters or k"
            ) from exc
        order = np.argsort(vals)
        vals = vals[order]
        vecs = vecs[:, order]

    pairs = []
    for i in range(k):
        y = vecs[:, i]
        res, it = _residual(At, y, float(vals[i])), 0
        while res > config.eig_tol and lu is not None and it < config.max_iters:
            y = lu.solve(y)
            for j in range(k):
                if j != i:
                    y -= (vecs[:, j] @ y) * vecs[:, j]
            y /= np.linalg.norm(y)
            res = _residual(At, y, float(y @ (At @ y)))
            it += 1
        vecs[:, i] = y
        u = s * y
        omega = rayleigh_quotient(u, A, M)
        u = u / np.sqrt(float(u @ (A @ u)))
        r = A @ u - omega * (M @ u)
        rel = float(np.linalg.norm(r) / np.linalg.norm(A @ u))
        if rel > config.eig_tol:
            raise SolverError(
                f"eigenpair {i} residual {rel:.3e} exceeds tolerance {config.eig_tol:g} "
                f"after {it} polish steps (n={n})",
                achieved=rel,
            )
        pairs.append(EigenPair(omega=omega, u=u, residual=rel, iterations=it))
    pairs.sort(key=lambda p: p.omega)
    return pairs


def _residual(At: sp.csr_array, y: np.ndarray, val: float) -> float:
    r = At @ y - val * y
    return float(np.linalg.norm(r) / np.linalg.norm(At @ y))
