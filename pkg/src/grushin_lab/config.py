"""Flat ``key = value`` experiment configuration.

One assignment per line, ``#`` starts a comment, list values are comma
separated. The accepted keys are listed in ``SCHEMA`` and documented in
CONFIG.md at the repository root.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

KINDS = (
    "manufactured",
    "sequence_study",
    "regularity_sweep",
    "scaling_check",
    "variable_exponent",
    "uniqueness_probe",
)
SOURCES = ("constant", "radial", "sines", "indicator")


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


def _floats(text, count=None):
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if count is not None and len(parts) != count:
        raise ValueError(f"expected {count} comma-separated numbers")
    return [float(p) for p in parts]


def _float(text):
    return float(text)


def _int(text):
    value = float(text)
    if value != int(value):
        raise ValueError("expected an integer")
    return int(value)


def _rect(text):
    x0, x1, y0, y1 = _floats(text, 4)
    if not (x0 < x1 and y0 < y1):
        raise ValueError("need x0 < x1 and y0 < y1")
    return (x0, x1, y0, y1)


def _grid_sizes(text):
    sizes = []
    for part in text.split(","):
        part = part.strip().lower()
        if not part:
            continue
        if "x" in part:
            nx, ny = (int(s) for s in part.split("x"))
        else:
            nx = ny = int(part)
        if nx < 3 or ny < 3:
            raise ValueError(f"grid size {part} has no interior nodes (need >= 3)")
        sizes.append((nx, ny))
    if not sizes:
        raise ValueError("empty grid ladder")
    return sizes


def _nu(text):
    text = text.strip()
    if text == "two_zone":
        return text
    values = _floats(text)
    if not values:
        raise ValueError("empty nu")
    return values


def _p_list(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if part in ("inf", "infinity"):
            out.append(math.inf)
        elif part:
            out.append(float(part))
    return out


def _choice(options):
    def parse(text):
        text = text.strip()
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text

    return parse


# key -> value parser; defaults live on ExperimentConfig
SCHEMA = {
    "kind": _choice(KINDS),
    "domain": lambda t: tuple(_floats(t, 4)),
    "grid": _grid_sizes,
    "lambda": _float,
    "nu": _nu,
    "nu_inner": _float,
    "nu_outer": _float,
    "nu_zone": _rect,
    "source": _choice(SOURCES),
    "source_scale": _float,
    "source_gamma": _float,
    "source_center": lambda t: tuple(_floats(t, 2)),
    "source_rect": _rect,
    "n": _float,
    "n_list": _floats,
    "subrect": _rect,
    "t": _float,
    "init_b": _float,
    "picard_tol": _float,
    "picard_maxiter": _int,
    "relaxation": _float,
    "linear_tol": _float,
    "monotone_tol": _float,
    "scaling_tol": _float,
    "stabilization_tol": _float,
    "ratio_band": lambda t: tuple(_floats(t, 2)),
    "uniqueness_factor": _float,
    "lp": _p_list,
    "levels": _floats,
    "output": str.strip,
    "format": _choice(("csv", "json")),
}

REQUIRED = {
    "manufactured": ("kind", "grid", "lambda"),
    "sequence_study": ("kind", "grid", "lambda", "nu", "n_list"),
    "variable_exponent": ("kind", "grid", "lambda", "n_list"),
    "regularity_sweep": ("kind", "grid", "lambda", "nu", "n"),
    "scaling_check": ("kind", "grid", "lambda", "nu", "n"),
    "uniqueness_probe": ("kind", "grid", "lambda", "nu", "n"),
}


@dataclass
class ExperimentConfig:
    kind: str
    grid: list
    lam: float
    domain: tuple = (-1.0, 1.0, 0.0, 1.0)
    nu: Optional[object] = None
    nu_inner: float = 2.0
    nu_outer: float = 0.5
    nu_zone: tuple = (-0.25, 0.25, 0.25, 0.75)
    source: str = "constant"
    source_scale: float = 1.0
    source_gamma: float = 0.5
    source_center: tuple = (0.0, 0.0)
    source_rect: tuple = (-0.5, 0.5, 0.25, 0.75)
    n: Optional[float] = None
    n_list: Optional[list] = None
    subrect: Optional[tuple] = None
    t: float = 16.0
    init_b: float = 1.0
    picard_tol: float = 1e-9
    picard_maxiter: int = 2000
    relaxation: Optional[float] = None
    linear_tol: float = 1e-12
    monotone_tol: float = 1e-10
    scaling_tol: float = 1e-3
    stabilization_tol: float = 0.05
    ratio_band: tuple = (3.0, 5.0)
    uniqueness_factor: float = 10.0
    lp: list = field(default_factory=lambda: [1.0, 2.0, math.inf])
    levels: list = field(default_factory=list)
    output: Optional[str] = None
    format: str = "csv"

    @property
    def nu_values(self):
        return self.nu if isinstance(self.nu, list) else None

    def source_function(self):
        """Closed-form source ``f(X, Y)`` from the catalog."""
        c = self.source_scale
        if self.source == "constant":
            return lambda X, Y: np.full(np.shape(X), c)
        if self.source == "radial":
            g = self.source_gamma
            x0, y0 = self.source_center

            def radial(X, Y):
                with np.errstate(divide="ignore"):
                    return c * np.hypot(X - x0, Y - y0) ** (-g)

            return radial
        if self.source == "sines":
            ax, bx, ay, by = self.domain
            return lambda X, Y: c * np.sin(np.pi * (X - ax) / (bx - ax)) * np.sin(
                np.pi * (Y - ay) / (by - ay)
            )
        x0, x1, y0, y1 = self.source_rect
        return lambda X, Y: c * ((X >= x0) & (X <= x1) & (Y >= y0) & (Y <= y1)).astype(float)

    def exponent_function(self):
        """Two-zone ``nu(X, Y)``: ``nu_inner`` on ``nu_zone``, ``nu_outer`` elsewhere."""
        x0, x1, y0, y1 = self.nu_zone
        inner, outer = self.nu_inner, self.nu_outer
        return lambda X, Y: np.where(
            (X >= x0) & (X <= x1) & (Y >= y0) & (Y <= y1), inner, outer
        )

    def echo(self) -> dict:
        """Normalised key/value view used in reports."""
        out = {}
        for key in SCHEMA:
            attr = "lam" if key == "lambda" else key
            value = getattr(self, attr)
            if isinstance(value, tuple):
                value = list(value)
            if key == "grid":
                value = [f"{nx}x{ny}" for nx, ny in value]
            out[key] = value
        return out


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate; raises ConfigError listing every problem found."""
    errors = []
    values = {}
    lines = {}
    malformed = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in values:
            errors.append(f"line {lineno}: duplicate key {key!r} (first on line {lines[key]})")
            continue
        try:
            values[key] = SCHEMA[key](value)
        except ValueError as exc:
            errors.append(f"line {lineno}: {key}: {exc}")
            malformed.add(key)
            continue
        lines[key] = lineno

    def where(key):
        return f"line {lines[key]}: " if key in lines else ""

    kind = values.get("kind")
    if kind is None and "kind" not in malformed:
        errors.append("missing required key 'kind'")
    for key in REQUIRED.get(kind, ()):
        if key not in values and key not in malformed:
            errors.append(f"missing required key {key!r} for kind {kind}")

    def check(key, ok, message):
        if key in values and not ok(values[key]):
            errors.append(f"{where(key)}{key}: {message}")

    check("lambda", lambda v: v >= 0, "must be >= 0")
    check("domain", lambda v: v[0] < v[1] and v[2] < v[3], "need ax < bx and ay < by")
    check("nu", lambda v: v == "two_zone" or all(x > 0 for x in v), "must be > 0")
    check("nu_inner", lambda v: v > 0, "must be > 0")
    check("nu_outer", lambda v: v > 0, "must be > 0")
    check("source_scale", lambda v: v > 0, "must be > 0")
    check("source_gamma", lambda v: v >= 0, "must be >= 0")
    check("n", lambda v: v >= 1, "must be >= 1")
    check("n_list", lambda v: len(v) > 0 and all(x >= 1 for x in v), "entries must be >= 1")
    check("n_list", lambda v: all(b > a for a, b in zip(v, v[1:])), "must be strictly increasing")
    check("t", lambda v: v > 0, "must be > 0")
    check("init_b", lambda v: v >= 0, "must be >= 0")
    for key in ("picard_tol", "linear_tol", "monotone_tol", "scaling_tol", "stabilization_tol",
                "uniqueness_factor"):
        check(key, lambda v: v > 0, "must be > 0")
    check("picard_maxiter", lambda v: v >= 1, "must be >= 1")
    check("relaxation", lambda v: 0 < v <= 1, "must lie in (0, 1]")
    check("ratio_band", lambda v: 0 < v[0] < v[1], "need 0 < lo < hi")
    check("lp", lambda v: len(v) > 0 and all(p >= 1 for p in v), "entries must be >= 1")

    if kind in ("sequence_study", "variable_exponent", "uniqueness_probe", "scaling_check"):
        check("grid", lambda v: len(v) == 1, f"kind {kind} takes a single grid size")
    if kind in ("manufactured", "regularity_sweep"):
        check("grid", lambda v: len(v) >= 2, f"kind {kind} needs a ladder of >= 2 sizes")
    if kind in ("sequence_study", "regularity_sweep"):
        check("nu", lambda v: v != "two_zone" and len(v) == 1,
              f"kind {kind} takes a single constant nu")
    if kind == "variable_exponent":
        check("nu", lambda v: v == "two_zone", "variable_exponent uses nu = two_zone")
    if kind in ("uniqueness_probe", "scaling_check"):
        check("nu", lambda v: v != "two_zone", f"kind {kind} needs constant nu values")

    if errors:
        raise ConfigError(errors)

    kwargs = {("lam" if k == "lambda" else k): v for k, v in values.items()}
    if kind == "variable_exponent":
        kwargs["nu"] = "two_zone"
    return ExperimentConfig(**kwargs)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
