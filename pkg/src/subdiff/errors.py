"""Exception types shared across the package."""


class SubdiffError(Exception):
    """Base class for all package errors."""


class ParameterError(SubdiffError, ValueError):
    """Invalid scheme or problem parameter (alpha, tau, counts, ...)."""


class MeshMismatchError(SubdiffError, ValueError):
    """Operands live on different grids."""


class ConditioningError(SubdiffError):
    """A starting-weight system is too ill-conditioned to trust.

    The condition estimate of the (column-scaled) system is attached so
    callers can report it.
    """

    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class SingularMatrixError(SubdiffError):
    """A linear solve hit a zero pivot; the offending index is attached."""

    def __init__(self, message: str, index: int = -1):
        super().__init__(message)
        self.index = index


class OracleConvergenceError(SubdiffError):
    """The quadrature oracle did not reach the requested tolerance."""


class StepFailureError(SubdiffError):
    """A time step could not be completed (vanishing diagonal, solver failure)."""

    def __init__(self, message: str, step: int):
        super().__init__(f"step {step}: {message}")
        self.step = step
