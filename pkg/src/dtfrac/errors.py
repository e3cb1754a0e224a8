"""Exception hierarchy shared by all modules."""


class DtfracError(Exception):
    """Base class for library errors."""


class InputError(DtfracError, ValueError):
    """Invalid argument (shape, range or type)."""


class DomainError(DtfracError, ValueError):
    """Argument outside the region where an evaluation is defined or safe."""


class NumericalError(DtfracError, RuntimeError):
    """A numerical procedure failed to reach its tolerance."""


class TruncationError(NumericalError):
    """A series did not reach its tail tolerance within the allowed terms.

    Attributes
    ----------
    achieved : float
        Tail (or error) estimate at the point of giving up.
    """

    def __init__(self, message: str, achieved: float = float("nan")) -> None:
        super().__init__(message)
        self.achieved = achieved


class QuadratureError(NumericalError):
    """Adaptive quadrature did not converge."""


class DivergentError(DtfracError, ArithmeticError):
    """The defining integral diverges (as opposed to a numerical failure)."""
