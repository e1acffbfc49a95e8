"""Exception hierarchy shared by all microcosm modules."""


class MicrocosmError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(MicrocosmError, ValueError):
    """Input violates a shape, symmetry or finiteness requirement."""


class PoleError(MicrocosmError, ArithmeticError):
    """Evaluation hit a pole (or a singular bracket) of a meromorphic expression.

    ``location`` carries the offending argument (a scalar, a parameter
    value ``u`` or an eigenvalue), when known.
    """

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class NumericalError(MicrocosmError, ArithmeticError):
    """A numerical procedure failed to deliver the requested accuracy."""


class DegeneracyError(NumericalError):
    """A construction that should be non-degenerate came out singular."""


class ConsistencyError(NumericalError):
    """A built-in self-check failed; signals a bug or invalid assumptions."""


class AccuracyError(NumericalError):
    """Fixed-step integration could not meet its error target."""
