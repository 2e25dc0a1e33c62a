"""Experiment runner: turns an ExperimentConfig into tables and verdicts."""

import csv
import json
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import analysis
from .analysis import BoundCheck, check_bounds, exponents, homogeneous_dimension
from .config import ExperimentConfig
from .geometry import Domain, build_grid
from .linsolve import LinearSolveError, solve_spd
from .operator import Field, assemble_grushin, grushin_weight
from .semilinear import (
    PicardError,
    ProblemSpec,
    cauchy_gaps,
    picard_solve,
    scaling_check,
    solve_sequence,
)

SEQUENCE_COLUMNS = [
    "n", "sup_norm", "energy", "interior_min", "monotonicity_defect", "picard_iterations",
]
TABLE_COLUMNS = {
    "manufactured": ["nx", "ny", "hx", "hy", "max_error", "ratio", "cg_iterations"],
    "sequence_study": SEQUENCE_COLUMNS,
    "variable_exponent": SEQUENCE_COLUMNS,
    "regularity_sweep": ["nx", "ny", "hx", "sup_norm", "rel_change", "energy", "l2_norm",
                         "picard_iterations"],
    "scaling_check": ["nu", "n", "t", "predicted_factor", "deviation"],
    "uniqueness_probe": ["nu", "n", "init_a", "init_b", "gap", "tolerance"],
}
MAIN_TABLE = {
    "manufactured": "convergence",
    "sequence_study": "sequence",
    "variable_exponent": "sequence",
    "regularity_sweep": "sweep",
    "scaling_check": "scaling",
    "uniqueness_probe": "uniqueness",
}


@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)

    def add(self, *row):
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} entries, table has {len(self.columns)} columns")
        self.rows.append([_plain(v) for v in row])


@dataclass
class ExperimentReport:
    config: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    runs: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.errors and all(v.passed for v in self.verdicts)

    def verdict(self, name, lhs, rhs, passed):
        self.verdicts.append(BoundCheck(name, float(lhs), float(rhs), bool(passed)))

    def to_dict(self) -> dict:
        return _plain({
            "config": self.config,
            "tables": {k: {"columns": t.columns, "rows": t.rows} for k, t in self.tables.items()},
            "runs": self.runs,
            "verdicts": [
                {"name": v.name, "lhs": v.lhs, "rhs": v.rhs, "passed": v.passed}
                for v in self.verdicts
            ],
            "errors": self.errors,
            "extras": self.extras,
            "passed": self.passed,
        })


def _plain(value):
    """Convert numpy scalars and containers to plain Python for serialisation."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


# --- helpers -----------------------------------------------------------------


def _domain(cfg):
    return Domain(*cfg.domain)


def _grid(cfg, size):
    return build_grid(_domain(cfg), *size)


def _default_subrect(cfg):
    ax, bx, ay, by = cfg.domain
    qx, qy = (bx - ax) / 4, (by - ay) / 4
    return (ax + qx, bx - qx, ay + qy, by - qy)


def _spec(cfg, nu, n):
    return ProblemSpec(
        lam=cfg.lam,
        exponent=nu,
        source=cfg.source_function(),
        n=n,
        picard_tol=cfg.picard_tol,
        picard_maxiter=cfg.picard_maxiter,
        relaxation=cfg.relaxation,
        linear_tol=cfg.linear_tol,
    )


def _run_label(**kw):
    return " ".join(f"{k}={v}" for k, v in kw.items())


def manufactured_solution(domain: Domain, lam):
    """``u* = (x-ax)(bx-x) sin(pi (y-ay)/Ly)`` and ``f* = -Delta_lam u*``."""
    ly = domain.by - domain.ay
    k = np.pi / ly

    def exact(X, Y):
        return (X - domain.ax) * (domain.bx - X) * np.sin(k * (Y - domain.ay))

    def source(X, Y):
        s = np.sin(k * (Y - domain.ay))
        return 2.0 * s + grushin_weight(X, lam) * k**2 * exact(X, Y)

    return exact, source


# --- experiment kinds --------------------------------------------------------


def _manufactured(cfg, rep):
    table = rep.tables["convergence"]
    exact, source = manufactured_solution(_domain(cfg), cfg.lam)
    prev = None
    lo, hi = cfg.ratio_band
    for size in cfg.grid:
        grid = _grid(cfg, size)
        op = assemble_grushin(grid, cfg.lam)
        u, stats = solve_spd(op, Field.from_function(grid, source), tol=cfg.linear_tol)
        err = float(np.max(np.abs(u.values - Field.from_function(grid, exact).values)))
        ratio = prev / err if prev is not None else math.nan
        table.add(grid.nx, grid.ny, grid.hx, grid.hy, err, ratio, stats.iterations)
        if prev is not None:
            rep.verdict(f"error_ratio {size[0]}x{size[1]} in [{lo:g}, {hi:g}]",
                        ratio, hi, lo <= ratio <= hi)
        prev = err


def _sequence(cfg, rep, variable):
    size = cfg.grid[0]
    grid = _grid(cfg, size)
    subrect = cfg.subrect or _default_subrect(cfg)
    nu = cfg.exponent_function() if variable else cfg.nu[0]
    spec = _spec(cfg, nu, cfg.n_list[0])
    f = spec.source_on(grid)
    study = solve_sequence(spec, grid, cfg.n_list, subrect=subrect)
    rep.extras["subrect"] = list(subrect)

    table = rep.tables["sequence"]
    for k, sol in enumerate(study.solutions):
        defect = study.monotonicity_defects[k - 1] if k > 0 else math.nan
        table.add(sol.n, sol.report.sup_norm, sol.report.energy, study.interior_minima[k],
                  defect, sol.picard_iterations)
        if variable:
            sr = analysis.basic_report(sol.u, cfg.lam, ps=cfg.lp, levels=cfg.levels,
                                       subrect=subrect)
            rep.verdict(f"energy_finite n={sol.n:g}", sr.energy, math.inf,
                        math.isfinite(sr.energy))
        else:
            if nu < 1 and cfg.lam == 0:
                # the L3 chain needs Q > 2
                sr = analysis.basic_report(sol.u, cfg.lam, ps=cfg.lp, levels=cfg.levels,
                                           subrect=subrect)
            else:
                sr = check_bounds(sol, f, sol.spec, ps=cfg.lp, levels=cfg.levels,
                                  subrect=subrect)
            for chk in sr.bound_checks:
                rep.verdicts.append(replace(chk, name=f"{chk.name} n={sol.n:g}"))
        rep.verdict(f"interior_min_positive n={sol.n:g}", 0.0, study.interior_minima[k],
                    study.interior_minima[k] > 0)
        rep.runs.append({"label": _run_label(n=sol.n), **sr.to_dict()})

    for k, defect in enumerate(study.monotonicity_defects):
        a, b = cfg.n_list[k], cfg.n_list[k + 1]
        rep.verdict(f"monotone n={a:g}->{b:g}", -defect, cfg.monotone_tol,
                    -defect <= cfg.monotone_tol)
        m0, m1 = study.interior_minima[k], study.interior_minima[k + 1]
        rep.verdict(f"interior_min_nondecreasing n={a:g}->{b:g}", m0, m1, m0 <= m1)

    gaps = rep.tables["gaps"] = Table(["n_prev", "n", "cauchy_gap"])
    for (a, b), gap in zip(zip(cfg.n_list, cfg.n_list[1:]), cauchy_gaps(study.solutions)):
        gaps.add(a, b, gap)

    if variable:
        x0, x1, y0, y1 = cfg.nu_zone
        ax, bx, ay, by = cfg.domain
        compact = ax < x0 and x1 < bx and ay < y0 and y1 < by
        rep.verdict("hypothesis lambda >= 1", 1.0, cfg.lam, cfg.lam >= 1)
        rep.verdict("hypothesis 0 < nu <= 1 off the zone", cfg.nu_outer, 1.0,
                    0 < cfg.nu_outer <= 1)
        rep.verdict("hypothesis zone compactly inside domain", 0.0, float(compact), compact)


def _regularity(cfg, rep):
    table = rep.tables["sweep"]
    nu = cfg.nu[0]
    Q = homogeneous_dimension(1, cfg.lam)
    rep.extras["Q"] = Q
    rep.extras["r_threshold"] = Q / 2
    if cfg.source == "radial" and cfg.source_gamma > 0:
        # |X|^-gamma is in L^r(R^2 bounded) iff gamma * r < 2
        r_sup = 2.0 / cfg.source_gamma
    else:
        r_sup = math.inf
    rep.extras["source_r_sup"] = r_sup
    rep.verdict("hypothesis f in L^r for some r > Q/2", Q / 2, r_sup, Q / 2 < r_sup)

    prev = None
    for size in cfg.grid:
        grid = _grid(cfg, size)
        sol = picard_solve(_spec(cfg, nu, cfg.n), grid)
        sup = sol.report.sup_norm
        change = abs(sup - prev) / sup if prev is not None else math.nan
        table.add(grid.nx, grid.ny, grid.hx, sup, change, sol.report.energy,
                  analysis.lp_norm(sol.u, 2), sol.picard_iterations)
        if prev is not None:
            rep.verdict(f"sup_norm_stable {size[0]}x{size[1]}", change, cfg.stabilization_tol,
                        change < cfg.stabilization_tol)
        sr = analysis.basic_report(sol.u, cfg.lam, ps=cfg.lp, levels=cfg.levels)
        rep.runs.append({"label": _run_label(grid=f"{grid.nx}x{grid.ny}"), **sr.to_dict()})
        prev = sup


def _scaling(cfg, rep):
    table = rep.tables["scaling"]
    grid = _grid(cfg, cfg.grid[0])
    for nu in cfg.nu:
        devs = []
        for n in (cfg.n, 2 * cfg.n):
            dev = scaling_check(_spec(cfg, nu, n), grid, cfg.t)
            devs.append(dev)
            table.add(nu, n, cfg.t, cfg.t ** (1 / (1 + nu)), dev)
        rep.verdict(f"scaling_deviation nu={nu:g} n={cfg.n:g}", devs[0], cfg.scaling_tol,
                    devs[0] <= cfg.scaling_tol)
        rep.verdict(f"scaling_deviation_decreases nu={nu:g} n={cfg.n:g}->{2 * cfg.n:g}",
                    devs[1], devs[0], devs[1] < devs[0])


def _uniqueness(cfg, rep):
    table = rep.tables["uniqueness"]
    grid = _grid(cfg, cfg.grid[0])
    op = assemble_grushin(grid, cfg.lam)
    init_a = Field.zeros(grid)
    init_b = Field(grid, np.where(grid.boundary_mask, 0.0, cfg.init_b))
    tol = cfg.uniqueness_factor * cfg.picard_tol
    for nu in cfg.nu:
        spec = _spec(cfg, nu, cfg.n)
        ua = picard_solve(spec, grid, init=init_a, op=op)
        ub = picard_solve(spec, grid, init=init_b, op=op)
        gap = float(np.max(np.abs(ua.u.values - ub.u.values)))
        table.add(nu, cfg.n, 0.0, cfg.init_b, gap, tol)
        rep.verdict(f"uniqueness nu={nu:g} n={cfg.n:g}", gap, tol, gap <= tol)


RUNNERS = {
    "manufactured": _manufactured,
    "sequence_study": lambda cfg, rep: _sequence(cfg, rep, variable=False),
    "variable_exponent": lambda cfg, rep: _sequence(cfg, rep, variable=True),
    "regularity_sweep": _regularity,
    "scaling_check": _scaling,
    "uniqueness_probe": _uniqueness,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run one configured experiment.

    Solver failures are recorded in ``report.errors`` (which fails the
    report) rather than raised.
    """
    rep = ExperimentReport(config=cfg.echo())
    rep.tables[MAIN_TABLE[cfg.kind]] = Table(list(TABLE_COLUMNS[cfg.kind]))
    if cfg.lam > 0:
        exps = exponents(1, cfg.lam)
        rep.extras.update({"Q": exps.Q, "two_star": exps.two_star})
    try:
        RUNNERS[cfg.kind](cfg, rep)
    except (PicardError, LinearSolveError) as exc:
        rep.errors.append(f"{cfg.kind}: {type(exc).__name__}: {exc}")
    return rep


# --- output ------------------------------------------------------------------


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _write_csv(path, columns, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def emit_report(report: ExperimentReport, fmt, path):
    """Write the report; returns the list of files written.

    ``json``: one document at ``path``. ``csv``: the main table at ``path``,
    further tables at ``<stem>.<table>.csv`` and the verdicts at
    ``<stem>.verdicts.csv``.
    """
    path = os.fspath(path)
    if fmt == "json":
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
        return [path]
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")

    stem = path[:-4] if path.endswith(".csv") else path
    written = []
    verdict_rows = [[v.name, v.lhs, v.rhs, v.passed] for v in report.verdicts]
    verdict_columns = ["name", "lhs", "rhs", "passed"]
    names = list(report.tables)
    if not names:
        _write_csv(path, verdict_columns, verdict_rows)
        return [path]
    for k, name in enumerate(names):
        target = path if k == 0 else f"{stem}.{name}.csv"
        _write_csv(target, report.tables[name].columns, report.tables[name].rows)
        written.append(target)
    target = f"{stem}.verdicts.csv"
    _write_csv(target, verdict_columns, verdict_rows)
    written.append(target)
    return written


def load_report(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
