"""Finite-difference assembly of the negative Grushin operator.

For interior node ``(i, j)`` the assembled row is::

    (-u[i-1,j] + 2 u[i,j] - u[i+1,j]) / hx**2
        + w[i] * (-u[i,j-1] + 2 u[i,j] - u[i,j+1]) / hy**2,   w[i] = |x_i|**(2 lam)

with homogeneous Dirichlet data, so couplings to boundary nodes drop out.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .geometry import Grid


@dataclass(frozen=True, eq=False)
class Field:
    """Node values on a grid, shape ``(nx, ny)``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise ValueError(f"field shape {values.shape} != grid shape {self.grid.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def from_function(cls, grid, func):
        X, Y = grid.coords
        return cls(grid, np.broadcast_to(func(X, Y), grid.shape).astype(float))

    @classmethod
    def from_interior(cls, grid, interior):
        values = np.zeros(grid.shape)
        values[1:-1, 1:-1] = np.reshape(interior, (grid.nx - 2, grid.ny - 2))
        return cls(grid, values)

    @property
    def interior(self) -> np.ndarray:
        """Interior values flattened in the grid's linear order."""
        return self.values[1:-1, 1:-1].ravel()

    @property
    def dirichlet(self) -> bool:
        return bool(np.all(self.values[self.grid.boundary_mask] == 0.0))

    def with_dirichlet(self) -> "Field":
        return Field.from_interior(self.grid, self.values[1:-1, 1:-1])


def grushin_weight(x, lam):
    """|x|**(2 lam); numpy's 0.0**0 == 1 keeps lam = 0 the plain Laplacian."""
    return np.abs(x) ** (2.0 * lam)


@dataclass(frozen=True, eq=False)
class SparseOperator:
    grid: Grid
    lam: float
    matrix: sp.csr_matrix

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()

    def triplets(self):
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return coo.row[order], coo.col[order], coo.data[order]


def assemble_grushin(grid: Grid, lam: float) -> SparseOperator:
    if lam < 0:
        raise ValueError(f"lambda must be >= 0 (got {lam})")
    mx, my = grid.nx - 2, grid.ny - 2
    cx = 1.0 / grid.hx**2
    cy = 1.0 / grid.hy**2
    w = grushin_weight(grid.x[1:-1], lam)

    I, J = np.meshgrid(np.arange(mx), np.arange(my), indexing="ij")
    k = (I * my + J).ravel()
    wk = np.repeat(w, my)
    diag = 2.0 * cx + wk * (2.0 * cy)

    rows = [k]
    cols = [k]
    vals = [diag]
    # x-neighbours (i, i+1): weight-free
    east = (I < mx - 1).ravel()
    rows += [k[east], k[east] + my]
    cols += [k[east] + my, k[east]]
    vals += [np.full(east.sum(), -cx)] * 2
    # y-neighbours (j, j+1): same column, same weight on both sides
    north = (J < my - 1).ravel()
    wy = -wk[north] * cy
    rows += [k[north], k[north] + 1]
    cols += [k[north] + 1, k[north]]
    vals += [wy, wy]

    n = mx * my
    matrix = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    # y-couplings at x = 0 are explicit zeros
    matrix.eliminate_zeros()
    matrix.sort_indices()
    return SparseOperator(grid, float(lam), matrix)


def apply(op: SparseOperator, u: Field) -> Field:
    """Stencil applied on interior nodes; boundary of the result is zero."""
    if not u.grid.same_as(op.grid):
        raise ValueError("field and operator live on different grids")
    return Field.from_interior(op.grid, op.matrix @ u.interior)


def dump_triplets(op: SparseOperator, stream) -> None:
    """Write ``row col value`` lines (0-based, row-major order)."""
    for r, c, v in zip(*op.triplets()):
        stream.write(f"{r} {c} {v:.17g}\n")
