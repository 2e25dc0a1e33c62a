import numpy as np
import pytest

from grushin_lab import Domain, Field


@pytest.fixture
def strip():
    """The standard degenerate domain [-1, 1] x [0, 1]."""
    return Domain(-1.0, 1.0, 0.0, 1.0)


@pytest.fixture
def unit_square():
    return Domain(0.0, 1.0, 0.0, 1.0)


def random_dirichlet(grid, rng):
    return Field.from_interior(grid, rng.standard_normal(grid.n_interior))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE = {}


@pytest.fixture
def accept(request):
    """Record one pass/fail line for an acceptance criterion."""

    def record(number, passed, detail):
        ACCEPTANCE[number] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        mark = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{mark}] criterion {number:2d}: {detail}")
