"""Jacobi-preconditioned conjugate gradients for the assembled SPD systems."""

import math
from dataclasses import dataclass

import numpy as np

from .operator import Field, SparseOperator


@dataclass(frozen=True)
class LinearSolveStats:
    iterations: int
    final_residual: float
    converged: bool


class LinearSolveError(RuntimeError):
    def __init__(self, message, stats, solution=None):
        super().__init__(message)
        self.stats = stats
        self.solution = solution


def default_maxiter(dimension: int) -> int:
    return max(1, math.ceil(20 * math.sqrt(dimension)))


def pcg(A, b, x0=None, tol=1e-10, maxiter=None, diag=None):
    """Solve ``A x = b`` for SPD ``A``.

    Stops when the recurrence residual drops below ``tol * ||b||``; the
    reported residual is recomputed as ``||b - A x|| / ||b||``.
    Returns ``(x, LinearSolveStats)``; never raises.
    """
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    if maxiter is None:
        maxiter = default_maxiter(n)
    if diag is None:
        diag = A.diagonal()
    inv_diag = 1.0 / diag

    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), LinearSolveStats(0, 0.0, True)

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    target = tol * bnorm
    k = 0
    r = b - A @ x
    if x0 is not None and np.linalg.norm(r) > bnorm:
        # warm start worse than zero (e.g. wrong scale): discard it
        x = np.zeros(n)
        r = b.copy()
    # restart from the true residual if the recurrence drifted below target
    while np.linalg.norm(r) > target and k < maxiter:
        z = inv_diag * r
        p = z.copy()
        rz = r @ z
        while k < maxiter:
            Ap = A @ p
            alpha = rz / (p @ Ap)
            x += alpha * p
            r -= alpha * Ap
            k += 1
            if np.linalg.norm(r) <= target:
                break
            z = inv_diag * r
            rz_new = r @ z
            p *= rz_new / rz
            p += z
            rz = rz_new
        r = b - A @ x

    final = np.linalg.norm(r) / bnorm
    return x, LinearSolveStats(k, float(final), bool(final <= tol))


def solve_spd(op: SparseOperator, rhs: Field, tol=1e-10, maxiter=None, x0=None):
    """Solve ``-Delta_lam u = rhs`` with zero Dirichlet data.

    ``x0`` is an optional warm start (a Field or interior vector). Raises
    LinearSolveError, carrying the stats and last iterate, on non-convergence.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not rhs.grid.same_as(op.grid):
        raise ValueError("rhs and operator live on different grids")
    if isinstance(x0, Field):
        x0 = x0.interior
    x, stats = pcg(op.matrix, rhs.interior, x0=x0, tol=tol, maxiter=maxiter, diag=op.diagonal)
    u = Field.from_interior(op.grid, x)
    if not stats.converged:
        raise LinearSolveError(
            f"CG did not converge in {stats.iterations} iterations "
            f"(relative residual {stats.final_residual:.3e} > {tol:.1e})",
            stats,
            u,
        )
    return u, stats
