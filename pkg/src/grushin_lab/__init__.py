"""Finite-difference laboratory for -Delta_lam u = f / u**nu with zero Dirichlet data.

Delta_lam u = u_xx + |x|**(2 lam) u_yy is the Grushin operator on a rectangle.
"""

from .analysis import (
    BoundCheck,
    Exponents,
    LInfinityRegime,
    SolveReport,
    check_bounds,
    critical_exponent,
    energy,
    exponents,
    holder_conjugate,
    homogeneous_dimension,
    level_set_measure,
    lp_norm,
    regularity_exponent,
    stampacchia_threshold,
    trapezoid_weights,
)
from .geometry import Domain, Grid, build_grid, contains_degeneracy
from .linsolve import LinearSolveError, LinearSolveStats, solve_spd
from .operator import Field, SparseOperator, apply, assemble_grushin
from .semilinear import (
    ApproxSolution,
    PicardError,
    ProblemSpec,
    limit_estimate,
    picard_solve,
    scaling_check,
    solve_sequence,
    truncate_source,
    uniqueness_probe,
)

__version__ = "0.1.0"

__all__ = [
    "BoundCheck",
    "Exponents",
    "LInfinityRegime",
    "SolveReport",
    "check_bounds",
    "critical_exponent",
    "energy",
    "exponents",
    "holder_conjugate",
    "homogeneous_dimension",
    "level_set_measure",
    "lp_norm",
    "regularity_exponent",
    "stampacchia_threshold",
    "trapezoid_weights",
    "Domain",
    "Grid",
    "build_grid",
    "contains_degeneracy",
    "LinearSolveError",
    "LinearSolveStats",
    "solve_spd",
    "Field",
    "SparseOperator",
    "apply",
    "assemble_grushin",
    "ApproxSolution",
    "PicardError",
    "ProblemSpec",
    "limit_estimate",
    "picard_solve",
    "scaling_check",
    "solve_sequence",
    "truncate_source",
    "uniqueness_probe",
]
