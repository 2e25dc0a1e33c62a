import numpy as np
import pytest

from grushin_lab import (
    Field,
    PicardError,
    ProblemSpec,
    apply,
    assemble_grushin,
    build_grid,
    limit_estimate,
    picard_solve,
    scaling_check,
    solve_sequence,
    truncate_source,
    uniqueness_probe,
)
from grushin_lab.semilinear import cauchy_gaps, weak_form_defect


@pytest.fixture
def grid(strip):
    return build_grid(strip, 33, 33)


def test_truncate_below_level(grid):
    f = truncate_source(Field(grid, np.full(grid.shape, 0.5)), 1)
    assert np.all(f.values == 0.5)


def test_truncate_caps(grid):
    f = truncate_source(Field(grid, np.full(grid.shape, 7.0)), 3)
    assert np.all(f.values == 3.0)


def test_truncate_radial_spike(unit_square):
    g = build_grid(unit_square, 101, 101)
    X, Y = g.coords
    with np.errstate(divide="ignore"):
        raw = 1 / np.hypot(X, Y)
    assert raw[1, 0] == pytest.approx(100.0)
    f = truncate_source(Field(g, raw), 10)
    assert f.values[1, 0] == 10 and f.values[0, 0] == 10
    far = raw < 10
    np.testing.assert_array_equal(f.values[far], raw[far])


def test_truncate_rejects_negative(grid):
    with pytest.raises(ValueError):
        truncate_source(Field(grid, -np.ones(grid.shape)), 2)


@pytest.mark.parametrize("source", [0.0, lambda x, y: 0 * x])
def test_zero_source_rejected(grid, source):
    with pytest.raises(ValueError):
        picard_solve(ProblemSpec(1.0, 1.0, source, n=4), grid)


@pytest.mark.parametrize("kwargs", [dict(lam=-1), dict(exponent=0.0), dict(n=0.5),
                                    dict(relaxation=0.0), dict(relaxation=1.5),
                                    dict(picard_tol=0)])
def test_spec_validation(kwargs):
    base = dict(lam=1.0, exponent=1.0, source=1.0, n=4)
    base.update(kwargs)
    with pytest.raises(ValueError):
        ProblemSpec(**base)


def test_default_relaxation(grid):
    assert ProblemSpec(1.0, 1.0, 1.0).default_relaxation(grid) == pytest.approx(2 / 3)
    assert ProblemSpec(1.0, 3.0, 1.0).default_relaxation(grid) == pytest.approx(0.4)
    assert ProblemSpec(1.0, 3.0, 1.0, relaxation=0.9).default_relaxation(grid) == 0.9


def test_self_consistency_large_n(unit_square):
    g = build_grid(unit_square, 33, 33)
    n, tol = 1e6, 1e-9
    sol = picard_solve(ProblemSpec(0.0, 1.0, 1.0, n=n, picard_tol=tol), g)
    Lu = apply(assemble_grushin(g, 0.0), sol.u).values
    u = sol.u.values
    core = g.submask(0.25, 0.75, 0.25, 0.75)
    # truncated equation holds to the Picard tolerance
    assert np.max(np.abs(Lu * (u + 1 / n) - 1)[core]) <= 10 * tol
    # the untruncated product differs only by the 1/n shift
    assert np.max(np.abs(Lu * u - 1)[core]) <= 1.0 / (n * u[core].min()) * (1 + 1e-3)


@pytest.mark.parametrize("nu", [0.5, 1.0, 3.0])
def test_nonnegative_iterates_and_weak_form(grid, nu):
    spec = ProblemSpec(1.0, nu, 1.0, n=8, picard_tol=1e-11)
    sol = picard_solve(spec, grid)
    assert sol.converged
    assert sol.min_iterate >= -1e-12
    assert np.all(sol.u.values >= 0) and sol.u.dirichlet
    scale = np.max(truncate_source(spec.source_on(grid), 8).values) * 8**nu
    assert weak_form_defect(sol) <= 1e-6 * scale
    assert sol.nonlinear_residual <= 1e-9


def test_interior_strictly_positive(grid):
    sol = picard_solve(ProblemSpec(1.0, 1.0, 1.0, n=2), grid)
    assert np.all(sol.u.values[1:-1, 1:-1] > 0)


@pytest.mark.parametrize("nu", [0.5, 3.0])
def test_even_in_x(grid, nu):
    sol = picard_solve(ProblemSpec(1.0, nu, lambda x, y: 1 + x**2, n=16, picard_tol=1e-11), grid)
    u = sol.u.values
    assert np.max(np.abs(u - u[::-1, :])) <= 1e-9


def test_monotone_in_n_warm_start(grid):
    spec = ProblemSpec(1.0, 1.0, 1.0, n=4, picard_tol=1e-11)
    u4 = picard_solve(spec, grid)
    u9 = picard_solve(ProblemSpec(1.0, 1.0, 1.0, n=9, picard_tol=1e-11), grid, init=u4.u)
    assert np.min(u9.u.values - u4.u.values) >= -1e-10


def test_sequence_singleton(grid):
    study = solve_sequence(ProblemSpec(1.0, 1.0, 1.0), grid, [1])
    assert len(study.solutions) == 1 and study.monotonicity_defects == []


def test_sequence_dyadic(grid):
    study = solve_sequence(ProblemSpec(1.0, 1.0, 1.0, picard_tol=1e-11), grid, [1, 2, 4, 8, 16],
                           subrect=(-0.5, 0.5, 0.25, 0.75))
    assert all(d >= -1e-10 for d in study.monotonicity_defects)
    mins = study.interior_minima
    assert mins[0] > 0 and all(b >= a for a, b in zip(mins, mins[1:]))


def test_sequence_rejects_unsorted(grid):
    with pytest.raises(ValueError):
        solve_sequence(ProblemSpec(1.0, 1.0, 1.0), grid, [1, 4, 2])


def test_sequence_reports_failing_n(grid):
    spec = ProblemSpec(1.0, 1.0, 1.0, picard_maxiter=3)
    with pytest.raises(PicardError) as info:
        solve_sequence(spec, grid, [1, 2])
    assert info.value.n == 1


def test_limit_estimate(grid):
    sol = picard_solve(ProblemSpec(1.0, 1.0, 1.0, n=2), grid)
    u, gap = limit_estimate([sol, sol])
    assert gap == 0.0 and u is sol.u
    with pytest.raises(ValueError):
        limit_estimate([sol])


def test_cauchy_gaps_shrink(grid):
    n_list = [4, 8, 16, 32, 64, 128, 256]
    study = solve_sequence(ProblemSpec(1.0, 1.0, 1.0, picard_tol=1e-11), grid, n_list)
    gaps = cauchy_gaps(study.solutions)
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    _, last = limit_estimate(study.solutions)
    assert last == gaps[-1]


def test_uniqueness_identical_inits(grid):
    init = Field.zeros(grid)
    assert uniqueness_probe(ProblemSpec(1.0, 1.0, 1.0, n=4), grid, init, init) == 0.0


@pytest.mark.parametrize("nu", [1.0, 3.0])
def test_uniqueness_distinct_inits(grid, nu):
    ones = Field(grid, np.where(grid.boundary_mask, 0.0, 1.0))
    spec = ProblemSpec(1.0, nu, 1.0, n=16, picard_tol=1e-9)
    assert uniqueness_probe(spec, grid, Field.zeros(grid), ones) <= 1e-8


def test_init_must_be_dirichlet(grid):
    with pytest.raises(ValueError):
        picard_solve(ProblemSpec(1.0, 1.0, 1.0), grid, init=Field(grid, np.ones(grid.shape)))


def test_picard_failure_reported(grid):
    with pytest.raises(PicardError) as info:
        picard_solve(ProblemSpec(1.0, 3.0, 1.0, n=64, picard_maxiter=2), grid)
    assert info.value.iterations == 2 and info.value.residual > 0
    sol = picard_solve(ProblemSpec(1.0, 3.0, 1.0, n=64, picard_maxiter=2), grid,
                       raise_on_failure=False)
    assert not sol.converged


def test_scaling_identity_t1(grid):
    assert scaling_check(ProblemSpec(1.0, 1.0, 1.0, n=100), grid, 1.0) == 0.0


@pytest.mark.parametrize("nu", [1.0, 3.0])
def test_scaling_deviation_is_order_one_over_n(grid, nu):
    devs = [scaling_check(ProblemSpec(1.0, nu, 1.0, n=n, picard_tol=1e-12), grid, 16.0)
            for n in (500, 1000)]
    assert devs[1] < devs[0]
    assert devs[0] / devs[1] == pytest.approx(2.0, rel=0.05)


def test_scaling_needs_constant_nu(grid):
    with pytest.raises(ValueError):
        scaling_check(ProblemSpec(1.0, lambda x, y: 1 + 0 * x, 1.0, n=10), grid, 2.0)


def test_variable_exponent_converges(grid):
    nu = lambda x, y: np.where((abs(x) <= 0.25) & (abs(y - 0.5) <= 0.25), 2.0, 0.5)
    spec = ProblemSpec(1.0, nu, 1.0, picard_tol=1e-11)
    assert spec.default_relaxation(grid) == pytest.approx(0.5)
    study = solve_sequence(spec, grid, [1, 4, 16], subrect=(-0.5, 0.5, 0.25, 0.75))
    assert all(s.converged for s in study.solutions)
    assert all(d >= -1e-10 for d in study.monotonicity_defects)
    assert np.all(study.solutions[-1].u.values[1:-1, 1:-1] > 0)


def test_node_field_exponent(grid):
    nu_const = picard_solve(ProblemSpec(1.0, 0.5, 1.0, n=4, picard_tol=1e-11), grid)
    nu_field = picard_solve(ProblemSpec(1.0, np.full(grid.shape, 0.5), 1.0, n=4,
                                        picard_tol=1e-11), grid)
    np.testing.assert_allclose(nu_field.u.values, nu_const.u.values, atol=1e-12)
