"""Discrete norms, weighted energy, level sets, exponents and lemma-bound checks.

All integrals use composite-trapezoid node weights, so that the weighted
energy coincides with the operator's quadratic form up to rounding.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .operator import Field, grushin_weight

CASES = ("nu_eq_1", "nu_gt_1", "nu_lt_1", "sobolev_q")


class LInfinityRegime(ValueError):
    """Raised when ``r >= Q/2``: the solution is bounded and no L^s exponent applies."""


# --- exponents ---------------------------------------------------------------


@dataclass(frozen=True)
class Exponents:
    m: int
    lam: float
    Q: float
    two_star: float


def homogeneous_dimension(m, lam):
    if m < 1 or lam < 0:
        raise ValueError(f"need m >= 1 and lambda >= 0 (got m={m}, lambda={lam})")
    return (m + 1) + lam * m


def critical_exponent(Q):
    if Q <= 2:
        raise ValueError(f"critical exponent needs Q > 2 (got Q={Q})")
    return 2 * Q / (Q - 2)


def exponents(m, lam) -> Exponents:
    Q = homogeneous_dimension(m, lam)
    return Exponents(m, lam, Q, critical_exponent(Q))


def holder_conjugate(r):
    """r / (r - 1); ``math.inf`` for r = 1."""
    if r < 1:
        raise ValueError(f"Hoelder conjugate needs r >= 1 (got {r})")
    if r == 1:
        return math.inf
    return r / (r - 1)


def lower_r_nu_lt_1(nu, Q):
    """Smallest admissible integrability ``(2*/(1 - nu))'`` for nu < 1."""
    return holder_conjugate(critical_exponent(Q) / (1 - nu))


def sobolev_r_bound(nu, Q):
    return 2 * Q / ((Q + 2) + nu * (Q - 2))


def regularity_exponent(case, nu, r, Q):
    """Integrability exponent of the limit solution for f in L^r.

    ``nu_eq_1``: s = 2Qr/(Q - 2r).  ``nu_gt_1`` and ``nu_lt_1``:
    s = Qr(nu + 1)/(Q - 2r).  ``sobolev_q``: gradient exponent
    q = Qr(nu + 1)/(Q - r(1 - nu)).

    Works on any numeric type closed under + - * / (floats, Fractions).
    Raises LInfinityRegime for the s-cases when r >= Q/2.
    """
    if case not in CASES:
        raise ValueError(f"unknown case {case!r}; expected one of {CASES}")
    if r < 1:
        raise ValueError(f"r must be >= 1 (got {r})")
    if case == "sobolev_q":
        if not nu < 1:
            raise ValueError("sobolev_q needs nu < 1")
        if Q <= 2:
            raise ValueError(f"sobolev_q needs Q > 2 (got Q={Q})")
        bound = sobolev_r_bound(nu, Q)
        if not r < bound:
            raise ValueError(f"sobolev_q needs r < {bound} (got {r})")
        return Q * r * (nu + 1) / (Q - r * (1 - nu))

    if case == "nu_eq_1" and nu != 1:
        raise ValueError(f"case nu_eq_1 needs nu = 1 (got {nu})")
    if case == "nu_gt_1" and not nu > 1:
        raise ValueError(f"case nu_gt_1 needs nu > 1 (got {nu})")
    if case == "nu_lt_1" and not (0 < nu < 1):
        raise ValueError(f"case nu_lt_1 needs 0 < nu < 1 (got {nu})")
    if 2 * r >= Q:
        raise LInfinityRegime(f"r = {r} >= Q/2 = {Q / 2}: bounded solution")
    if case == "nu_lt_1":
        lower = lower_r_nu_lt_1(nu, Q)
        if r < lower:
            raise ValueError(f"case nu_lt_1 needs r >= (2*/(1-nu))' = {lower} (got {r})")
    if case == "nu_eq_1":
        return 2 * Q * r / (Q - 2 * r)
    return Q * r * (nu + 1) / (Q - 2 * r)


# --- quadrature --------------------------------------------------------------


def trapezoid_weights(grid) -> np.ndarray:
    wx = np.full(grid.nx, grid.hx)
    wx[[0, -1]] *= 0.5
    wy = np.full(grid.ny, grid.hy)
    wy[[0, -1]] *= 0.5
    return np.outer(wx, wy)


def integrate(u: Field) -> float:
    return float(np.sum(trapezoid_weights(u.grid) * u.values))


def lp_norm(u: Field, p) -> float:
    if p == math.inf or p == "inf":
        return float(np.max(np.abs(u.values)))
    if p < 1:
        raise ValueError(f"p must be >= 1 (got {p})")
    w = trapezoid_weights(u.grid)
    return float(np.sum(w * np.abs(u.values) ** p) ** (1.0 / p))


def energy(u: Field, lam) -> float:
    """Discrete ``int <A grad u, grad u>`` as a sum of weighted squared differences.

    x-differences are taken along interior rows and y-differences along
    interior columns, each column weighted by ``|x_i|**(2 lam)``. For a field
    with zero boundary values this equals ``hx*hy*<L u, u>``.
    """
    g = u.grid
    v = u.values
    dx = np.diff(v[:, 1:-1], axis=0)
    dy = np.diff(v[1:-1, :], axis=1)
    w = grushin_weight(g.x[1:-1], lam)
    ex = np.sum(dx * dx) / g.hx**2
    ey = np.sum(w * np.sum(dy * dy, axis=1)) / g.hy**2
    return float(g.hx * g.hy * (ex + ey))


def level_set_measure(u: Field, k) -> float:
    """Quadrature measure of ``{u >= k}``."""
    return float(np.sum(trapezoid_weights(u.grid)[u.values >= k]))


def stampacchia_threshold(C, alpha, beta, k0, phi_k0):
    """``k0 + d`` with ``d**alpha = C * 2**(alpha*beta/(beta-1)) * phi_k0**(beta-1)``."""
    if not beta > 1:
        raise ValueError(f"beta must be > 1 (got {beta})")
    if C <= 0 or alpha <= 0 or phi_k0 < 0:
        raise ValueError("need C > 0, alpha > 0, phi(k0) >= 0")
    d = (C * 2 ** (alpha * beta / (beta - 1)) * phi_k0 ** (beta - 1)) ** (1 / alpha)
    return k0 + d


# --- reports -----------------------------------------------------------------


@dataclass
class BoundCheck:
    name: str
    lhs: float
    rhs: float
    passed: bool

    @classmethod
    def compare(cls, name, lhs, rhs, rel=1e-8):
        lhs, rhs = float(lhs), float(rhs)
        return cls(name, lhs, rhs, bool(lhs <= rhs * (1 + rel)))


@dataclass
class SolveReport:
    lp_norms: dict = field(default_factory=dict)
    energy: float = 0.0
    sup_norm: float = 0.0
    interior_min: float = math.nan
    level_sets: list = field(default_factory=list)
    bound_checks: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.bound_checks)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lp_norms"] = {str(k): v for k, v in self.lp_norms.items()}
        return d


def basic_report(u: Field, lam, ps=(1, 2), levels=(), subrect=None) -> SolveReport:
    rep = SolveReport(
        lp_norms={p: lp_norm(u, p) for p in ps},
        energy=energy(u, lam),
        sup_norm=lp_norm(u, math.inf),
        level_sets=[(float(k), level_set_measure(u, k)) for k in levels],
    )
    if subrect is not None:
        mask = u.grid.submask(*subrect) & ~u.grid.boundary_mask
        rep.interior_min = float(u.values[mask].min())
    return rep


LEMMAS = ("L1", "L2", "L3")


def _lemmas_for(nu):
    if nu == 1:
        return ("L1",)
    if nu > 1:
        return ("L2",)
    return ("L3",)


def check_bounds(solution, f: Field, spec, exps: Exponents = None, lemmas=None,
                 ps=(1, 2), levels=(), subrect=None) -> SolveReport:
    """Evaluate the energy bounds that apply to the exponent regime.

    L1 (nu = 1):  energy(u_n) <= int f.
    L2 (nu > 1):  energy(u_n**((nu+1)/2)) <= (nu+1)**2/(4 nu) * int f.
    L3 (nu < 1):  energy(u_n) <= ||f||_r * (int u_n**2*)**((1-nu)/2*),
                  r = (2*/(1-nu))'; the raw terms go into ``extras``.
    """
    if not spec.constant_exponent:
        raise ValueError("energy bounds are stated for a constant exponent")
    nu = float(spec.exponent)
    lam = spec.lam
    u = solution.u
    if exps is None:
        exps = exponents(1, lam)
    if lemmas is None:
        lemmas = _lemmas_for(nu)
    rep = basic_report(u, lam, ps=ps, levels=levels, subrect=subrect)
    int_f = integrate(f)

    for name in lemmas:
        if name not in LEMMAS:
            raise ValueError(f"unknown lemma {name!r}")
        if name not in _lemmas_for(nu):
            raise ValueError(f"{name} does not apply for nu = {nu}")
        if name == "L1":
            rep.bound_checks.append(BoundCheck.compare("L1", rep.energy, int_f))
        elif name == "L2":
            power = Field(u.grid, u.values ** ((nu + 1) / 2))
            factor = (nu + 1) ** 2 / (4 * nu)
            rep.bound_checks.append(
                BoundCheck.compare("L2", energy(power, lam), factor * int_f)
            )
            rep.extras["L2_factor"] = factor
        else:
            two_star = exps.two_star
            r = holder_conjugate(two_star / (1 - nu))
            f_r = lp_norm(f, r)
            u_2s = lp_norm(u, two_star)
            rhs = f_r * u_2s ** (1 - nu)
            rep.bound_checks.append(BoundCheck.compare("L3_chain", rep.energy, rhs))
            rep.extras.update({"L3_r": r, "f_Lr": f_r, "u_L2star": u_2s, "two_star": two_star})
    rep.extras["int_f"] = int_f
    return rep
