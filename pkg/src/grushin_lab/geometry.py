"""Rectangular domains and uniform tensor-product grids in the (x, y) plane."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class Domain:
    """The open rectangle (ax, bx) x (ay, by)."""

    ax: float
    bx: float
    ay: float
    by: float

    def __post_init__(self):
        if not (self.ax < self.bx and self.ay < self.by):
            raise ValueError(
                f"invalid rectangle [{self.ax}, {self.bx}] x [{self.ay}, {self.by}]"
            )

    @property
    def degenerate(self) -> bool:
        return contains_degeneracy(self)

    @property
    def area(self) -> float:
        return (self.bx - self.ax) * (self.by - self.ay)


def contains_degeneracy(domain: Domain) -> bool:
    """True when the closed x-interval touches the plane x = 0."""
    return domain.ax <= 0.0 <= domain.bx


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform node lattice with ``nx * ny`` nodes, boundary included.

    Node values are stored as arrays of shape ``(nx, ny)`` indexed ``[i, j]``.
    Interior node ``(i, j)`` maps to the linear index ``(i - 1) * (ny - 2) + (j - 1)``.
    """

    domain: Domain
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3:
            raise ValueError(f"grid needs nx, ny >= 3 (got {self.nx}, {self.ny})")

    @property
    def hx(self) -> float:
        return (self.domain.bx - self.domain.ax) / (self.nx - 1)

    @property
    def hy(self) -> float:
        return (self.domain.by - self.domain.ay) / (self.ny - 1)

    @property
    def shape(self) -> tuple:
        return (self.nx, self.ny)

    @property
    def n_interior(self) -> int:
        return (self.nx - 2) * (self.ny - 2)

    @cached_property
    def x(self) -> np.ndarray:
        return self.domain.ax + np.arange(self.nx) * self.hx

    @cached_property
    def y(self) -> np.ndarray:
        return self.domain.ay + np.arange(self.ny) * self.hy

    @cached_property
    def coords(self) -> tuple:
        """Node coordinate arrays ``(X, Y)`` of shape ``(nx, ny)``."""
        return np.meshgrid(self.x, self.y, indexing="ij")

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[[0, -1], :] = True
        mask[:, [0, -1]] = True
        return mask

    def interior_index(self, i: int, j: int) -> int:
        if not (0 < i < self.nx - 1 and 0 < j < self.ny - 1):
            raise IndexError(f"({i}, {j}) is not an interior node")
        return (i - 1) * (self.ny - 2) + (j - 1)

    def interior_node(self, k: int) -> tuple:
        if not 0 <= k < self.n_interior:
            raise IndexError(f"interior index {k} out of range")
        i, j = divmod(k, self.ny - 2)
        return i + 1, j + 1

    def submask(self, x0, x1, y0, y1) -> np.ndarray:
        """Boolean node mask of the closed sub-rectangle [x0, x1] x [y0, y1]."""
        X, Y = self.coords
        return (X >= x0) & (X <= x1) & (Y >= y0) & (Y <= y1)

    def same_as(self, other: "Grid") -> bool:
        return (
            self is other
            or (self.domain == other.domain and self.nx == other.nx and self.ny == other.ny)
        )

    def __eq__(self, other):
        return isinstance(other, Grid) and self.same_as(other)

    def __hash__(self):
        return hash((self.domain, self.nx, self.ny))


def build_grid(domain: Domain, nx: int, ny: int) -> Grid:
    return Grid(domain, int(nx), int(ny))


def refine(grid: Grid) -> Grid:
    """Halve both spacings (``n -> 2n - 1``)."""
    return Grid(grid.domain, 2 * grid.nx - 1, 2 * grid.ny - 1)
