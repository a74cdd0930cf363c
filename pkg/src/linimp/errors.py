"""Exception types raised across the package."""


class LinimpError(Exception):
    """Base class for all package errors."""


class DegenerateNodes(LinimpError, ValueError):
    """Collocation nodes are not pairwise distinct."""


class UnknownMethod(LinimpError, KeyError):
    """Requested tableau name is not in the registry."""


class InvalidInput(LinimpError, ValueError):
    pass


class InvalidLength(LinimpError, ValueError):
    """Transform length is not a power of two."""


class SingularTargetSystem(LinimpError, ArithmeticError):
    """Eigenvalue assignment for the auxiliary update is singular."""


class SpectralRadiusTooLarge(LinimpError, ValueError):
    pass


class GridMismatch(LinimpError, ValueError):
    pass


class BlowUpDetected(LinimpError, FloatingPointError):
    """A field acquired non-finite values."""


class SingularSystem(LinimpError, ArithmeticError):
    pass


class ResonantSingularity(SingularSystem):
    """A per-mode stage block is singular.

    Attributes
    ----------
    mode : int
        Index (position in the mode array) of the offending Fourier mode.
    """

    def __init__(self, mode, message=None):
        self.mode = mode
        super().__init__(message or f"singular stage block for mode index {mode}")


class IterationLimit(LinimpError, RuntimeError):
    def __init__(self, message, x=None, residual=None):
        super().__init__(message)
        self.x = x
        self.residual = residual


class Breakdown(LinimpError, RuntimeError):
    pass


class NoConvergence(LinimpError, RuntimeError):
    pass


class CannotInitialize(LinimpError, ValueError):
    pass


class ConfigError(LinimpError, ValueError):
    pass
