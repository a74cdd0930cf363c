"""Banded LU, BiCGStab and the stage-system solve."""

from .banded import BandedLU, BandedMatrixC, banded_lu_factor, banded_lu_solve
from .krylov import bicgstab
from .stage import StageSystem, assemble_stage_system, solve_stage_system

__all__ = [
    "BandedLU",
    "BandedMatrixC",
    "StageSystem",
    "assemble_stage_system",
    "banded_lu_factor",
    "banded_lu_solve",
    "bicgstab",
    "solve_stage_system",
]
