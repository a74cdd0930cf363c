"""Assembly and solution of the linear stage system

    (I - h A (x) L) U - h A (Gamma . U) = u_n 1

for the three operator backends. Stage arrays have shape (s, n).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
import scipy.sparse as sp

from ..errors import GridMismatch, ResonantSingularity, SingularSystem
from ..fields.grids import check_finite
from ..fields.operators import FDOperator, FourierOperator, FVOperator, SpatialOperator
from ..tableau import ButcherTableau
from .banded import BandedMatrixC, banded_lu_factor
from .krylov import bicgstab

DET_TOL = 1e-13
RESIDUAL_TOL = 1e-9


@dataclass
class StageSystem:
    tableau: ButcherTableau
    operator: SpatialOperator
    h: float
    gamma: np.ndarray
    backend: str
    matrix: Any

    @property
    def s(self) -> int:
        return self.tableau.s

    @property
    def n(self) -> int:
        return self.operator.size

    def apply(self, U: np.ndarray) -> np.ndarray:
        """Matrix-free action U - h (A (x) L) U - h A (Gamma . U)."""
        A = self.tableau.A
        LU = self.operator.apply(U)
        return U - self.h * (A @ (LU + self.gamma * U))

    def apply_assembled(self, U: np.ndarray) -> np.ndarray:
        """The same action through the assembled matrix (for cross-checks)."""
        s, n = self.s, self.n
        if self.backend == "banded":
            return self.matrix.matvec(U.T.reshape(-1)).reshape(n, s).T
        if self.backend == "blocks":
            return np.einsum("kij,jk->ik", self.matrix, U)
        return (self.matrix @ U.reshape(-1)).reshape(s, n)


def _banded_fd(t: ButcherTableau, L: FDOperator, gamma: np.ndarray, h: float) -> BandedMatrixC:
    s, n = t.s, L.size
    A = t.A
    off, d = L.coeffs
    bw = 2 * s - 1
    data = np.zeros((n * s, 2 * bw + 1), dtype=complex)
    rows = np.arange(n * s)
    p, i = rows // s, rows % s
    for j in range(s):
        # same point: delta_ij - h a_ij (L_pp + gamma_j(p))
        col_off = j - i + bw
        data[rows, col_off] = (i == j) - h * A[i, j] * (d + gamma[j, p])
        # neighbouring points: -h a_ij L_{p, p +- 1}
        data[rows, col_off + s] = np.where(p < n - 1, -h * A[i, j] * off, 0)
        data[rows, col_off - s] = np.where(p > 0, -h * A[i, j] * off, 0)
    return BandedMatrixC(n * s, bw, bw, data)


def assemble_stage_system(t: ButcherTableau, L: SpatialOperator, gamma: np.ndarray, h: float) -> StageSystem:
    """Assemble the stage matrix in the native format of the operator backend.

    Finite differences use point-major ordering (index ``p * s + i``), which
    gives semi-bandwidth ``2 s - 1``. The Fourier backend stores one s x s
    block per mode. Finite volumes use stage-major CSR (index ``i * J + k``).
    """
    gamma = np.asarray(gamma, dtype=complex)
    if gamma.shape != (t.s, L.size):
        raise GridMismatch(f"Gamma shape {gamma.shape} != {(t.s, L.size)}")
    A = t.A
    if isinstance(L, FDOperator):
        return StageSystem(t, L, h, gamma, "banded", _banded_fd(t, L, gamma, h))
    if isinstance(L, FourierOperator):
        lam = L.symbol[None, :] + gamma  # (s, K): value multiplying stage j
        blocks = np.eye(t.s)[None] - h * A[None, :, :] * lam.T[:, None, :]
        return StageSystem(t, L, h, gamma, "blocks", blocks)
    if isinstance(L, FVOperator):
        J = L.size
        M = sp.identity(t.s * J, format="csr") - h * (
            sp.kron(sp.csr_matrix(A), L.matrix) + sp.kron(sp.csr_matrix(A), sp.identity(J)) @ sp.diags(gamma.reshape(-1))
        )
        return StageSystem(t, L, h, gamma, "sparse", M.tocsr())
    raise TypeError(f"unsupported operator {type(L).__name__}")


def solve_stage_system(sys: StageSystem, u_n: np.ndarray, check_residual: bool = False) -> np.ndarray:
    """Stage vector U with ``U_i`` approximating u(t_n + c_i h)."""
    u_n = np.asarray(u_n, dtype=complex)
    s, n = sys.s, sys.n
    rhs = np.broadcast_to(u_n, (s, n))
    if sys.backend == "banded":
        lu = banded_lu_factor(sys.matrix)
        U = lu.solve(np.ascontiguousarray(rhs.T).reshape(-1)).reshape(n, s).T
    elif sys.backend == "blocks":
        B = sys.matrix
        det = np.linalg.det(B)
        hadamard = np.prod(np.linalg.norm(B, axis=2), axis=1)
        bad = np.nonzero(np.abs(det) < DET_TOL * hadamard)[0]
        if bad.size:
            k = int(bad[0])
            raise ResonantSingularity(k, f"stage block of mode index {k} is singular (|det| = {abs(det[k]):.3e})")
        U = np.linalg.solve(B, rhs.T[:, :, None])[:, :, 0].T
    else:
        M = sys.matrix
        inv_d = 1.0 / M.diagonal()
        U = bicgstab(lambda v: M @ v, lambda v: inv_d * v, np.ascontiguousarray(rhs).reshape(-1), tol=1e-12).reshape(s, n)
    check_finite(U, "stage solution")
    if check_residual:
        res = np.linalg.norm(sys.apply(U) - rhs)
        if res > RESIDUAL_TOL * max(np.linalg.norm(u_n), np.finfo(float).tiny):
            raise SingularSystem(f"stage residual {res:.3e} exceeds tolerance")
    return U
