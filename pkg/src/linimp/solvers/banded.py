"""Complex banded LU with partial pivoting inside the band."""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from ..errors import InvalidInput, SingularSystem

PIVOT_TOL = 1e-14


@dataclass(frozen=True)
class BandedMatrixC:
    """Row-wise band storage: ``data[i, j - i + kl] = M[i, j]`` for ``-kl <= j - i <= ku``."""

    n: int
    kl: int
    ku: int
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape != (self.n, self.kl + self.ku + 1):
            raise InvalidInput(f"band storage shape {self.data.shape} != {(self.n, self.kl + self.ku + 1)}")
        if self.n > 1 and (self.kl >= self.n or self.ku >= self.n):
            raise InvalidInput("bandwidth must be smaller than the dimension")

    @classmethod
    def from_dense(cls, M: np.ndarray, kl: int, ku: int) -> "BandedMatrixC":
        n = M.shape[0]
        data = np.zeros((n, kl + ku + 1), dtype=complex)
        for d in range(-kl, ku + 1):
            i = np.arange(max(0, -d), min(n, n - d))
            data[i, d + kl] = M[i, i + d]
        return cls(n, kl, ku, data)

    def to_dense(self) -> np.ndarray:
        M = np.zeros((self.n, self.n), dtype=complex)
        for d in range(-self.kl, self.ku + 1):
            i = np.arange(max(0, -d), min(self.n, self.n - d))
            M[i, i + d] = self.data[i, d + self.kl]
        return M

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        out = np.zeros(self.n, dtype=complex)
        for d in range(-self.kl, self.ku + 1):
            i = np.arange(max(0, -d), min(self.n, self.n - d))
            out[i] += self.data[i, d + self.kl] * x[i + d]
        return out

    def norm_max(self) -> float:
        return float(np.max(np.abs(self.data))) if self.data.size else 0.0


@numba.njit(cache=True)
def _factor(W, n, kl, ku, tol, row_scale):
    # W[r, c - r + kl] holds row r, columns r - kl .. r + kl + ku (room for fill-in)
    piv = np.empty(n, dtype=np.int64)
    for k in range(n):
        last = min(n - 1, k + kl)
        p = k
        best = abs(W[k, kl])
        scale = row_scale[k]
        for r in range(k + 1, last + 1):
            v = abs(W[r, k - r + kl])
            scale = max(scale, row_scale[r])
            if v > best:
                best = v
                p = r
        piv[k] = p
        if best <= tol * scale:
            return piv, k
        cend = min(n - 1, k + kl + ku)
        if p != k:
            for c in range(k, cend + 1):
                a = W[k, c - k + kl]
                W[k, c - k + kl] = W[p, c - p + kl]
                W[p, c - p + kl] = a
        pivot = W[k, kl]
        for r in range(k + 1, last + 1):
            m = W[r, k - r + kl] / pivot
            W[r, k - r + kl] = m
            if m != 0:
                for c in range(k + 1, cend + 1):
                    W[r, c - r + kl] -= m * W[k, c - k + kl]
    return piv, -1


@numba.njit(cache=True)
def _solve(W, piv, n, kl, ku, b):
    x = b.copy()
    for k in range(n):
        p = piv[k]
        if p != k:
            t = x[k]
            x[k] = x[p]
            x[p] = t
        for r in range(k + 1, min(n - 1, k + kl) + 1):
            x[r] -= W[r, k - r + kl] * x[k]
    for k in range(n - 1, -1, -1):
        acc = x[k]
        for c in range(k + 1, min(n - 1, k + kl + ku) + 1):
            acc -= W[k, c - k + kl] * x[c]
        x[k] = acc / W[k, kl]
    return x


@dataclass(frozen=True)
class BandedLU:
    W: np.ndarray
    piv: np.ndarray
    n: int
    kl: int
    ku: int

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.ascontiguousarray(rhs, dtype=complex)
        if rhs.ndim == 1:
            return _solve(self.W, self.piv, self.n, self.kl, self.ku, rhs)
        return np.stack([_solve(self.W, self.piv, self.n, self.kl, self.ku, col) for col in rhs.T], axis=1)


def banded_lu_factor(M: BandedMatrixC) -> BandedLU:
    n, kl, ku = M.n, M.kl, M.ku
    W = np.zeros((n, 2 * kl + ku + 1), dtype=complex)
    W[:, : kl + ku + 1] = M.data
    # the threshold is relative to the rows competing for the pivot, so that
    # badly scaled but regular rows are not reported as singular
    row_scale = np.maximum(np.max(np.abs(M.data), axis=1), np.finfo(float).tiny)
    piv, bad = _factor(W, n, kl, ku, PIVOT_TOL, row_scale)
    if bad >= 0:
        raise SingularSystem(f"pivot in column {bad} below {PIVOT_TOL:g} x row scale")
    return BandedLU(W, piv, n, kl, ku)


def banded_lu_solve(M: BandedMatrixC, rhs: np.ndarray) -> np.ndarray:
    """Solve ``M x = rhs``; raises SingularSystem on a negligible pivot."""
    rhs = np.asarray(rhs, dtype=complex)
    if rhs.shape[0] != M.n:
        raise InvalidInput(f"rhs length {rhs.shape[0]} != {M.n}")
    return banded_lu_factor(M).solve(rhs)
