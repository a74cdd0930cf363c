"""Grids, meshes, fields and spatial operators."""

from .fft import dft_direct, fft, ifft
from .functionals import convolve_cubic, energy_nls, mass
from .grids import Field, FourierGrid, Grid1D, check_finite
from .mesh import TriMesh, read_mesh, star_mesh, write_mesh
from .operators import (
    FDOperator,
    FourierOperator,
    FVOperator,
    SpatialOperator,
    fd_laplacian,
    fourier_operator,
    fv_laplacian,
)

__all__ = [
    "FDOperator",
    "Field",
    "FourierGrid",
    "FourierOperator",
    "FVOperator",
    "Grid1D",
    "SpatialOperator",
    "TriMesh",
    "check_finite",
    "convolve_cubic",
    "dft_direct",
    "energy_nls",
    "fd_laplacian",
    "fft",
    "fourier_operator",
    "fv_laplacian",
    "ifft",
    "mass",
    "read_mesh",
    "star_mesh",
    "write_mesh",
]
