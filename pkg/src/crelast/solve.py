"""Sparse linear solvers with explicit residual guarantees.

spd_solve is a preconditioned conjugate-gradient iteration; the default
preconditioner is a complete sparse LU factorization (the drop-free limit
of an incomplete factorization), which makes CG behave like
Krylov-accelerated iterative refinement and keeps the residual contract
checkable. sym_indefinite_solve factorizes the (possibly indefinite)
matrix directly and refines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg, splu, spilu


class SolverError(RuntimeError):
    """Linear or eigen solve failed to meet its tolerance.

    Carries the relative residual actually achieved, when known.
    """

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class ShiftSingularError(SolverError):
    """The shifted matrix is numerically singular.

    Callers running shifted-inverse iteration should regularize the shift
    (replace omega by omega * (1 + eps_shift)) and retry.
    """


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and knobs shared by the linear and eigen solvers.

    eig_tol: relative eigen-residual ||Au - w Mu|| <= eig_tol * ||Au||.
    linear_tol: relative residual for linear solves.
    max_iters: CG / polish iteration cap.
    shift_regularization: relative shift perturbation for singular
        shifted systems.
    seed: seed for the deterministic pseudorandom start vector.
    preconditioner: 'lu' (complete factorization), 'ilu' or 'jacobi'.
    """

    eig_tol: float = 1e-10
    linear_tol: float = 1e-12
    max_iters: int = 200
    shift_regularization: float = 1e-8
    seed: int = 20240601
    preconditioner: str = "lu"

    def __post_init__(self):
        if not (0.0 < self.eig_tol < 1.0 and 0.0 < self.linear_tol < 1.0):
            raise ValueError("tolerances must lie in (0, 1)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.preconditioner not in ("lu", "ilu", "jacobi"):
            raise ValueError(f"unknown preconditioner {self.preconditioner!r}")


DEFAULT_CONFIG = SolverConfig()


def _make_preconditioner(A: sp.csr_array, kind: str) -> LinearOperator:
    if kind == "jacobi":
        d = A.diagonal()
        if np.any(d == 0.0):
            raise SolverError("zero diagonal entry; jacobi preconditioner unusable")
        inv = 1.0 / d
        return LinearOperator(A.shape, matvec=lambda x: inv * x)
    csc = sp.csc_matrix(A)
    if kind == "ilu":
        fac = spilu(csc, drop_tol=1e-5, fill_factor=20)
    else:
        fac = splu(csc, permc_spec="MMD_AT_PLUS_A")
    return LinearOperator(A.shape, matvec=fac.solve)


def spd_solve(A: sp.csr_array, b: np.ndarray, config: SolverConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Solve Ax = b for symmetric positive definite A.

    Preconditioned CG; returns x with ||Ax - b|| <= linear_tol * ||b||,
    otherwise raises SolverError carrying the residual that was achieved.
    """
    b = np.asarray(b, dtype=float).ravel()
    nb = np.linalg.norm(b)
    if nb == 0.0:
        return np.zeros_like(b)
    M = _make_preconditioner(A, config.preconditioner)
    x, _ = cg(A, b, rtol=config.linear_tol, atol=0.0, maxiter=config.max_iters, M=M)
    achieved = float(np.linalg.norm(A @ x - b) / nb)
    if achieved > config.linear_tol:
        raise SolverError(
            f"CG did not reach relative residual {config.linear_tol:g} within "
            f"{config.max_iters} iterations (achieved {achieved:.3e})",
            achieved=achieved,
        )
    return x


def sym_indefinite_solve(
    A: sp.csr_array, b: np.ndarray, config: SolverConfig = DEFAULT_CONFIG
) -> np.ndarray:
    """Solve Ax = b for symmetric, possibly indefinite A.

    Direct sparse factorization plus iterative refinement. Acceptance is
    the residual bound of spd_solve, or backward stability
    ||Ax - b|| <= linear_tol * ||A||_1 ||x|| for nearly singular shifted
    systems, where the huge solution norm is the point of the solve (the
    direction is converged even though the b-relative residual cannot
    reach the tolerance in floating point). Exact singularity raises
    ShiftSingularError.
    """
    b = np.asarray(b, dtype=float).ravel()
    nb = np.linalg.norm(b)
    if nb == 0.0:
        return np.zeros_like(b)
    try:
        fac = splu(sp.csc_matrix(A), permc_spec="MMD_AT_PLUS_A")
    except RuntimeError as exc:
        raise ShiftSingularError(
            f"factorization failed ({exc}); regularize the shift "
            f"(omega -> omega * (1 + {config.shift_regularization:g})) and retry"
        ) from exc
    x = fac.solve(b)
    if not np.all(np.isfinite(x)):
        raise ShiftSingularError(
            "factorization produced non-finite solution; regularize the shift "
            f"(omega -> omega * (1 + {config.shift_regularization:g})) and retry"
        )
    norm_a = sp.linalg.norm(A, 1)
    for _ in range(3):
        r = b - A @ x
        achieved = float(np.linalg.norm(r) / nb)
        if achieved <= config.linear_tol:
            return x
        if np.linalg.norm(r) <= config.linear_tol * norm_a * np.linalg.norm(x):
            return x
        x = x + fac.solve(r)
    achieved = float(np.linalg.norm(A @ x - b) / nb)
    if achieved <= config.linear_tol or np.linalg.norm(A @ x - b) <= (
        config.linear_tol * norm_a * np.linalg.norm(x)
    ):
        return x
    raise SolverError(
        f"indefinite solve stalled at relative residual {achieved:.3e} "
        f"(tolerance {config.linear_tol:g})",
        achieved=achieved,
    )
