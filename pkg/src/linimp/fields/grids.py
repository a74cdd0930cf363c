"""One-dimensional grids, Fourier mode sets and the Field container."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ..errors import BlowUpDetected, GridMismatch, InvalidInput
from .fft import fft, ifft


@dataclass(frozen=True)
class Grid1D:
    """Interior points of a homogeneous Dirichlet grid on (left, right).

    The boundary values are zero and not stored, so ``x_j = left + j dx``
    for ``j = 1..M`` with ``dx = (right - left) / (M + 1)``.
    """

    left: float
    right: float
    M: int

    def __post_init__(self):
        if self.M < 2:
            raise InvalidInput(f"need at least 2 interior points, got {self.M}")
        if not self.right > self.left:
            raise InvalidInput("right endpoint must exceed left endpoint")

    @property
    def dx(self) -> float:
        return (self.right - self.left) / (self.M + 1)

    @property
    def size(self) -> int:
        return self.M

    @property
    def x(self) -> np.ndarray:
        return self.left + self.dx * np.arange(1, self.M + 1)

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.M, self.dx)

    def coords(self) -> np.ndarray:
        return self.x[:, None]


@dataclass(frozen=True)
class FourierGrid:
    """Fourier modes ``k = k_min .. k_min + K - 1`` on a torus of given length.

    Fields on this grid store Fourier coefficients, not samples. ``conv_scale``
    is the constant in ``c_k(u * u * u) = conv_scale c_k(u)^3``.
    """

    K: int
    length: float = 2 * np.pi
    k_min: int = 0
    conv_scale: float = -1.0

    def __post_init__(self):
        if self.K < 1:
            raise InvalidInput("need at least one mode")

    @property
    def modes(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_min + self.K)

    @property
    def wavenumbers(self) -> np.ndarray:
        return 2 * np.pi / self.length * self.modes

    @property
    def size(self) -> int:
        return self.K

    @property
    def weights(self) -> np.ndarray:
        # Parseval: int |u|^2 = length * sum |c_k|^2
        return np.full(self.K, self.length)

    @property
    def n_physical(self) -> int:
        """Smallest power of two holding every mode without aliasing."""
        span = int(np.max(np.abs(self.modes))) * 2 + 1
        n = 1
        while n < span:
            n *= 2
        return n

    def x(self) -> np.ndarray:
        n = self.n_physical
        return self.length * np.arange(n) / n

    def coords(self) -> np.ndarray:
        return self.modes[:, None].astype(float)

    def to_physical(self, coeffs: np.ndarray) -> np.ndarray:
        """Samples ``u(x_j) = sum_k c_k e^{i k x_j}`` on the padded grid."""
        n = self.n_physical
        full = np.zeros(coeffs.shape[:-1] + (n,), dtype=complex)
        full[..., self.modes % n] = coeffs
        return np.sqrt(n) * ifft(full)

    def from_physical(self, values: np.ndarray) -> np.ndarray:
        n = self.n_physical
        full = fft(values) / np.sqrt(n)
        return full[..., self.modes % n]


@dataclass
class Field:
    """Complex values attached to a grid, mode set or mesh.

    Parameters
    ----------
    values : ndarray
        One complex value per grid location.
    grid : Grid1D, FourierGrid or TriMesh
    """

    values: np.ndarray
    grid: object = field(repr=False)

    def __post_init__(self):
        self.values = np.array(self.values, dtype=complex)
        if self.values.shape != (self.grid.size,):
            raise GridMismatch(f"{self.values.shape} values for a grid of size {self.grid.size}")

    def copy(self) -> "Field":
        return Field(self.values.copy(), self.grid)

    def check_finite(self) -> "Field":
        check_finite(self.values)
        return self

    def norm(self) -> float:
        """Discrete L2 norm with the grid quadrature weights."""
        return float(np.sqrt(np.sum(self.grid.weights * np.abs(self.values) ** 2)))

    def to_csv(self) -> str:
        xy = self.grid.coords()
        cols = ["index"] + (["x"] if xy.shape[1] == 1 else ["x", "y"]) + ["re", "im"]
        lines = [",".join(cols)]
        for i, v in enumerate(self.values):
            pos = ",".join(repr(float(c)) for c in xy[i])
            lines.append(f"{i},{pos},{float(v.real)!r},{float(v.imag)!r}")
        return "\n".join(lines) + "\n"


Grid = Union[Grid1D, FourierGrid]


def check_finite(values: np.ndarray, what: str = "field") -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise BlowUpDetected(f"{what} has non-finite values")
    return values
