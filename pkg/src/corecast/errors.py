"""Exception types shared across the workbench."""


class CorecastError(Exception):
    """Base class for all workbench errors."""


class ValidationError(CorecastError):
    """Malformed input: wrong shape, wrong length, value out of range."""


class DomainError(CorecastError):
    """Mathematically invalid argument (k_eff <= 0, negative time step, ...)."""


class NoFissionSource(CorecastError):
    """Eigenvalue problem has no fissile material anywhere."""


class ConvergenceFailure(CorecastError):
    """Iterative solver exhausted its iteration budget.

    Carries the last residuals so callers can report how close it got.
    """

    def __init__(self, message: str, k_residual: float = float("nan"),
                 source_residual: float = float("nan")):
        super().__init__(message)
        self.k_residual = k_residual
        self.source_residual = source_residual


class NumericalError(CorecastError):
    """Non-finite value encountered during training or optimization."""


class CalibrationError(CorecastError):
    """Physics library produces traces the pipeline cannot use."""
