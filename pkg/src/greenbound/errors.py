"""Exception hierarchy shared by all greenbound modules."""


class GreenboundError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(GreenboundError):
    """An operation was evaluated outside its mathematical domain
    (log of an interval touching zero, division by an interval
    containing zero, singular kernel evaluation, ...)."""


class ParseError(GreenboundError):
    """Source expression text could not be parsed."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class GeometryError(GreenboundError):
    """Invalid polygon, evaluation point, or triangulation request."""


class PlacementError(GreenboundError):
    """A fictitious source point landed inside or on the domain boundary."""


class SolveError(GreenboundError):
    """The collocation linear system could not be solved."""


class CertificationError(GreenboundError):
    """An iterative certification loop hit its budget without producing
    a certified sub-/super-solution."""


class NeedsSplitError(GreenboundError):
    """The source term is not certified sign-definite and no decomposition
    into nonnegative parts was supplied."""


class UnsupportedError(GreenboundError):
    """The requested operation is outside the supported problem class
    (e.g. non-smooth source on a singular-quadrature triangle)."""


class InputError(GreenboundError):
    """Problem file or CLI input failed validation."""
