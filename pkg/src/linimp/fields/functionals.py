"""Invariant functionals and the cubic convolution."""

from __future__ import annotations

import numpy as np

from ..errors import GridMismatch
from .grids import Field, FourierGrid
from .operators import SpatialOperator


def mass(u: Field) -> float:
    """sum_k w_k |u_k|^2 with the quadrature weights of the grid."""
    return float(np.sum(u.grid.weights * np.abs(u.values) ** 2))


def energy_nls(u: Field, L: SpatialOperator, q: float, imag_tol: float = 1e-10) -> float:
    """E(U) = 1/2 sum w U* (-Delta_h U) - q/4 sum w |U|^4.

    ``-Delta_h = -L / factor`` is the nonnegative stiffness action recovered
    from the operator (``factor = i`` for Schroedinger problems).
    """
    w = u.grid.weights
    U = u.values
    stiff = -L.apply(U) / L.factor
    quad = 0.5 * np.sum(w * np.conj(U) * stiff)
    E = quad - 0.25 * q * np.sum(w * np.abs(U) ** 4)
    if abs(E.imag) > imag_tol * max(abs(E), 1.0):
        raise ArithmeticError(f"energy has imaginary part {E.imag:.3e}")
    return float(E.real)


def convolve_cubic(u: Field) -> Field:
    """u * u * u on a Fourier grid, mode by mode: conv_scale * c_k^3."""
    if not isinstance(u.grid, FourierGrid):
        raise GridMismatch("cubic convolution needs a Fourier grid")
    return Field(u.grid.conv_scale * u.values**3, u.grid)

