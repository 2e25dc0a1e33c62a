"""Truncated singular problems ``-Delta_lam u_n = f_n / (u_n + 1/n)**nu``.

Each truncated problem is solved by damped Picard iteration::

    r   = f_n / (max(u, 0) + 1/n)**nu
    u~  = (-Delta_lam)^{-1} r
    u  <- omega * u~ + (1 - omega) * u

The map ``u -> u~`` is order-reversing. Its linearisation at the positive
solution has the solution itself as an eigenvector with eigenvalue ``-nu``
(exactly so as ``n -> oo``), so plain substitution only contracts for
``nu < 1``. The default ``omega = 2 / (2 + nu_max)`` balances the two ends of
the spectrum ``[-nu, 0]`` and contracts at rate ``nu / (2 + nu)``.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

import numpy as np

from . import analysis
from .geometry import Grid
from .linsolve import LinearSolveError, solve_spd
from .operator import Field, SparseOperator, apply, assemble_grushin

SourceLike = Union[Field, np.ndarray, Callable, float]


class PicardError(RuntimeError):
    def __init__(self, message, iterations, residual, n=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual
        self.n = n


@dataclass(frozen=True)
class ProblemSpec:
    """One instance of the truncated singular problem.

    ``exponent`` is a constant ``nu > 0``, a node array, or a callable
    ``nu(X, Y)``; ``source`` likewise (a float means a constant source).
    """

    lam: float
    exponent: SourceLike
    source: SourceLike
    n: float = 1
    picard_tol: float = 1e-9
    picard_maxiter: int = 2000
    relaxation: Optional[float] = None
    linear_tol: float = 1e-12

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0 (got {self.lam})")
        if not self.n >= 1:
            raise ValueError(f"truncation level n must be >= 1 (got {self.n})")
        if self.relaxation is not None and not 0.0 < self.relaxation <= 1.0:
            raise ValueError(f"relaxation must lie in (0, 1] (got {self.relaxation})")
        if self.picard_tol <= 0 or self.linear_tol <= 0:
            raise ValueError("tolerances must be positive")
        if np.isscalar(self.exponent) and not self.exponent > 0:
            raise ValueError(f"nu must be > 0 (got {self.exponent})")
        if np.isscalar(self.source):
            if not self.source > 0:
                raise ValueError("source must be nonnegative and not identically zero")

    @property
    def constant_exponent(self) -> bool:
        return np.isscalar(self.exponent)

    def _on_grid(self, value, grid):
        if isinstance(value, Field):
            if not value.grid.same_as(grid):
                raise ValueError("field lives on a different grid")
            return np.array(value.values)
        if callable(value):
            X, Y = grid.coords
            with np.errstate(divide="ignore"):
                out = value(X, Y)
            return np.broadcast_to(np.asarray(out, dtype=float), grid.shape).copy()
        arr = np.asarray(value, dtype=float)
        return np.broadcast_to(arr, grid.shape).copy()

    def source_on(self, grid: Grid) -> Field:
        f = self._on_grid(self.source, grid)
        if np.any(np.isnan(f)) or np.any(f < 0):
            raise ValueError("source must be nonnegative at every node")
        if not np.any(f > 0):
            raise ValueError("source must not vanish identically")
        return Field(grid, f)

    def exponent_on(self, grid: Grid) -> np.ndarray:
        nu = self._on_grid(self.exponent, grid)
        if not np.all(nu > 0):
            raise ValueError("nu must be > 0 at every node")
        return nu

    def default_relaxation(self, grid: Grid) -> float:
        if self.relaxation is not None:
            return self.relaxation
        return 2.0 / (2.0 + float(np.max(self.exponent_on(grid))))


@dataclass
class ApproxSolution:
    u: Field
    n: float
    picard_iterations: int
    nonlinear_residual: float
    increment: float
    converged: bool
    min_iterate: float
    linear_iterations: int = 0
    report: Optional["analysis.SolveReport"] = None
    spec: Optional[ProblemSpec] = field(default=None, repr=False)


def truncate_source(f: Field, n: float) -> Field:
    """Nodewise ``min(f, n)``."""
    if np.any(np.isnan(f.values)) or np.any(f.values < 0):
        raise ValueError("source must be nonnegative")
    if not n >= 1:
        raise ValueError(f"truncation level must be >= 1 (got {n})")
    return Field(f.grid, np.minimum(f.values, n))


def singular_rhs(fn: np.ndarray, u: np.ndarray, nu, n) -> np.ndarray:
    return fn / (np.maximum(u, 0.0) + 1.0 / n) ** nu


def picard_solve(
    spec: ProblemSpec,
    grid: Grid,
    init: Optional[Field] = None,
    op: Optional[SparseOperator] = None,
    raise_on_failure: bool = True,
) -> ApproxSolution:
    if op is None:
        op = assemble_grushin(grid, spec.lam)
    elif op.lam != spec.lam or not op.grid.same_as(grid):
        raise ValueError("operator does not match spec/grid")
    fn = truncate_source(spec.source_on(grid), spec.n).values
    nu = spec.exponent_on(grid)
    if spec.constant_exponent:
        nu = float(spec.exponent)
    omega = spec.default_relaxation(grid)

    if init is None:
        u = np.zeros(grid.shape)
    else:
        if not init.grid.same_as(grid):
            raise ValueError("initial field lives on a different grid")
        if not init.dirichlet or np.any(init.values < 0):
            raise ValueError("initial field must be nonnegative with zero boundary values")
        u = np.array(init.values)

    utilde = None
    min_iterate = float(u.min())
    increment = np.inf
    lin_its = 0
    converged = False
    k = 0
    while k < spec.picard_maxiter:
        r = Field(grid, singular_rhs(fn, u, nu, spec.n))
        utilde, stats = solve_spd(op, r, tol=spec.linear_tol, x0=utilde)
        lin_its += stats.iterations
        u_next = omega * utilde.values + (1.0 - omega) * u
        increment = float(np.max(np.abs(u_next - u)) / (1.0 + np.max(u_next)))
        u = u_next
        min_iterate = min(min_iterate, float(u.min()))
        k += 1
        if increment <= spec.picard_tol:
            converged = True
            break

    u = np.maximum(u, 0.0)
    # sup |u - S(u)| with S the undamped Picard map
    check, stats = solve_spd(
        op, Field(grid, singular_rhs(fn, u, nu, spec.n)), tol=spec.linear_tol, x0=utilde
    )
    lin_its += stats.iterations
    residual = float(np.max(np.abs(u - check.values)))

    sol = ApproxSolution(
        u=Field(grid, u),
        n=spec.n,
        picard_iterations=k,
        nonlinear_residual=residual,
        increment=increment,
        converged=converged,
        min_iterate=min_iterate,
        linear_iterations=lin_its,
        spec=spec,
    )
    sol.report = analysis.basic_report(sol.u, spec.lam)
    if not converged and raise_on_failure:
        raise PicardError(
            f"Picard iteration did not converge in {k} steps for n={spec.n} "
            f"(last increment {increment:.3e} > {spec.picard_tol:.1e})",
            k,
            increment,
            spec.n,
        )
    return sol


@dataclass
class SequenceStudy:
    solutions: list
    monotonicity_defects: list
    interior_minima: list


def solve_sequence(spec_base: ProblemSpec, grid: Grid, n_list, subrect=None) -> SequenceStudy:
    """Solve for every ``n`` in ``n_list``, warm-starting from the previous level.

    ``monotonicity_defects[k] = min(u_{n[k+1]} - u_{n[k]})`` over interior nodes
    (both vanish on the boundary).
    ``interior_minima[k]`` is ``min u_{n[k]}`` over the closed sub-rectangle
    ``subrect = (x0, x1, y0, y1)`` (omitted when ``subrect`` is None).
    """
    n_list = list(n_list)
    if not n_list:
        raise ValueError("n_list is empty")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError(f"n_list must be strictly increasing (got {n_list})")
    op = assemble_grushin(grid, spec_base.lam)
    mask = None if subrect is None else grid.submask(*subrect) & ~grid.boundary_mask
    if mask is not None and not mask.any():
        raise ValueError("sub-rectangle contains no interior nodes")

    solutions, defects, minima = [], [], []
    prev = None
    for n in n_list:
        try:
            init = None if prev is None else prev.u
            sol = picard_solve(replace(spec_base, n=n), grid, init=init, op=op)
        except (PicardError, LinearSolveError) as exc:
            raise PicardError(f"solve failed at n={n}: {exc}", getattr(exc, "iterations", 0),
                              getattr(exc, "residual", np.nan), n) from exc
        if prev is not None:
            defects.append(float(np.min((sol.u.values - prev.u.values)[1:-1, 1:-1])))
        if mask is not None:
            minima.append(float(sol.u.values[mask].min()))
            sol.report.interior_min = minima[-1]
        solutions.append(sol)
        prev = sol
    return SequenceStudy(solutions, defects, minima)


def limit_estimate(solutions):
    """Return the last field as the limit proxy and the last Cauchy gap."""
    if len(solutions) < 2:
        raise ValueError("need at least two solutions")
    last, prev = solutions[-1], solutions[-2]
    gap = float(np.max(np.abs(last.u.values - prev.u.values)))
    return last.u, gap


def cauchy_gaps(solutions):
    return [
        float(np.max(np.abs(b.u.values - a.u.values))) for a, b in zip(solutions, solutions[1:])
    ]


def uniqueness_probe(spec: ProblemSpec, grid: Grid, init_a: Field, init_b: Field) -> float:
    op = assemble_grushin(grid, spec.lam)
    ua = picard_solve(spec, grid, init=init_a, op=op)
    ub = picard_solve(spec, grid, init=init_b, op=op)
    return float(np.max(np.abs(ua.u.values - ub.u.values)))


def scaling_check(spec: ProblemSpec, grid: Grid, t: float) -> float:
    """Relative sup deviation of ``u[t f]`` from ``t**(1/(1+nu)) u[f]``.

    The scaled problem uses truncation level ``t * n`` so that
    ``min(t f, t n) = t min(f, n)``; the ``1/n`` shift is not rescaled, which
    leaves an O(1/n) deviation.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if not spec.constant_exponent:
        raise ValueError("scaling check needs a constant exponent")
    nu = float(spec.exponent)
    f = spec.source_on(grid)
    op = assemble_grushin(grid, spec.lam)
    base = picard_solve(replace(spec, source=f), grid, op=op)
    if t == 1:
        return 0.0
    scaled = picard_solve(
        replace(spec, source=Field(grid, t * f.values), n=t * spec.n), grid, op=op
    )
    predicted = t ** (1.0 / (1.0 + nu)) * base.u.values
    return float(np.max(np.abs(scaled.u.values - predicted)) / np.max(np.abs(predicted)))


def weak_form_defect(sol: ApproxSolution, op: Optional[SparseOperator] = None) -> float:
    """sup over interior nodes of ``|(-Delta_lam u) - f_n / (u + 1/n)**nu|``."""
    spec = sol.spec
    grid = sol.u.grid
    if op is None:
        op = assemble_grushin(grid, spec.lam)
    nu = float(spec.exponent) if spec.constant_exponent else spec.exponent_on(grid)
    fn = truncate_source(spec.source_on(grid), sol.n).values
    lhs = apply(op, sol.u).values[1:-1, 1:-1]
    rhs = singular_rhs(fn, sol.u.values, nu, sol.n)[1:-1, 1:-1]
    return float(np.max(np.abs(lhs - rhs)))
