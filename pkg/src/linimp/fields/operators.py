"""Spatial realisations of the linear operator L.

Every operator acts on plain value arrays in the storage representation
of its grid: point values for finite differences and finite volumes,
Fourier coefficients for the spectral variant. Products ``gamma * u``
are therefore elementwise for all three variants.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .grids import FourierGrid, Grid1D, check_finite
from .mesh import TriMesh


class SpatialOperator:
    kind: str = ""
    grid: object
    factor: complex

    @property
    def size(self) -> int:
        return self.grid.size

    def apply(self, u: np.ndarray) -> np.ndarray:
        with np.errstate(invalid="ignore", over="ignore"):
            out = self._apply(np.asarray(u))
        return check_finite(out, "L u")

    def shifted_solve(self, sigma: complex, rhs: np.ndarray, diag: np.ndarray | None = None) -> np.ndarray:
        """Solve ``(I - sigma (L + diag(g))) x = rhs``."""
        out = self._shifted_solve(sigma, np.asarray(rhs, dtype=complex), diag)
        return check_finite(out, "shifted solve")

    def to_dense(self) -> np.ndarray:
        return self.apply(np.eye(self.size, dtype=complex).T).T


@dataclass(frozen=True)
class FDOperator(SpatialOperator):
    """``factor * (u_{j-1} - 2 u_j + u_{j+1}) / dx^2`` with zero boundary values."""

    grid: Grid1D
    factor: complex = 1.0
    kind: str = field(default="tridiagonalFD", init=False)

    @property
    def coeffs(self) -> tuple[complex, complex]:
        """(off-diagonal, diagonal) entries."""
        c = self.factor / self.grid.dx**2
        return c, -2 * c

    def _apply(self, u):
        off, d = self.coeffs
        out = d * u.astype(complex)
        out[..., 1:] += off * u[..., :-1]
        out[..., :-1] += off * u[..., 1:]
        return out

    def banded(self):
        from ..solvers.banded import BandedMatrixC

        off, d = self.coeffs
        n = self.size
        data = np.zeros((n, 3), dtype=complex)
        data[:, 0], data[:, 1], data[:, 2] = off, d, off
        data[0, 0] = data[-1, 2] = 0
        return BandedMatrixC(n, 1, 1, data)

    def _shifted_solve(self, sigma, rhs, diag):
        from ..solvers.banded import BandedMatrixC, banded_lu_solve

        off, d = self.coeffs
        n = self.size
        data = np.zeros((n, 3), dtype=complex)
        data[:, 0] = data[:, 2] = -sigma * off
        data[:, 1] = 1 - sigma * d
        if diag is not None:
            data[:, 1] -= sigma * diag
        data[0, 0] = data[-1, 2] = 0
        return banded_lu_solve(BandedMatrixC(n, 1, 1, data), rhs)


@dataclass(frozen=True)
class FourierOperator(SpatialOperator):
    """Diagonal action ``symbol(k) * c_k`` on Fourier coefficients."""

    grid: FourierGrid
    symbol: np.ndarray = None
    factor: complex = 1.0
    kind: str = field(default="fourierDiagonal", init=False)

    def _apply(self, u):
        return self.symbol * u

    def _shifted_solve(self, sigma, rhs, diag):
        d = self.symbol if diag is None else self.symbol + diag
        return rhs / (1 - sigma * d)


@dataclass(frozen=True)
class FVOperator(SpatialOperator):
    """Two-point flux finite volume operator stored as CSR."""

    grid: TriMesh
    matrix: sp.csr_matrix = None
    factor: complex = 1.0
    kind: str = field(default="sparseFV", init=False)

    def _apply(self, u):
        if u.ndim == 1:
            return self.matrix @ u
        return (self.matrix @ u.T).T

    def _shifted_solve(self, sigma, rhs, diag):
        from ..solvers.krylov import bicgstab

        M = sp.identity(self.size, format="csr") - sigma * self.matrix
        if diag is not None:
            M = M - sigma * sp.diags(diag)
        M = M.tocsr()
        inv_d = 1.0 / M.diagonal()
        return bicgstab(lambda v: M @ v, lambda v: inv_d * v, rhs, tol=1e-12, maxit=10_000)


def fd_laplacian(g: Grid1D, factor: complex = 1.0) -> FDOperator:
    return FDOperator(g, factor)


def fourier_operator(
    g: FourierGrid, symbol: Callable[[np.ndarray], np.ndarray] | np.ndarray, factor: complex = 1.0
) -> FourierOperator:
    """Operator with the given symbol; ``lambda k: -1j * k**2`` with ``factor=1j`` realises i d_xx.

    ``factor`` only records the scalar in front of the Laplacian (used by the
    energy functional); the action is given by ``symbol`` alone.
    """
    values = symbol(g.wavenumbers) if callable(symbol) else np.asarray(symbol)
    values = np.broadcast_to(np.asarray(values, dtype=complex), (g.K,)).copy()
    return FourierOperator(g, values, factor)


def fv_laplacian(m: TriMesh, factor: complex = 1.0) -> FVOperator:
    """Row k: factor/m_k * (sum_int (U_j - U_k) l/d - sum_ext U_k l/d)."""
    w = m.edge_length / m.edge_dist
    c0, c1 = m.edge_cells[:, 0], m.edge_cells[:, 1]
    inner = c1 >= 0
    J = m.size
    diag = np.zeros(J)
    np.add.at(diag, c0, -w)
    np.add.at(diag, c1[inner], -w[inner])
    rows = np.concatenate([np.arange(J), c0[inner], c1[inner]])
    cols = np.concatenate([np.arange(J), c1[inner], c0[inner]])
    vals = np.concatenate([diag, w[inner], w[inner]])
    S = sp.csr_matrix((vals, (rows, cols)), shape=(J, J))
    L = sp.diags(factor / m.areas) @ S
    return FVOperator(m, L.tocsr().astype(complex), factor)
