"""Exception taxonomy.

Every error raised by the library derives from :class:`EmdenError` and falls
into one of two families, which the command line maps to exit statuses:

* :class:`PreconditionError` -- the request is outside the regime or domain
  where the computation is defined (exit status 2).
* :class:`NumericalError` -- the computation was attempted and failed
  (exit status 1).
"""


class EmdenError(Exception):
    """Base class for all library errors."""

    exit_status = 1

    @property
    def kind(self):
        return type(self).__name__


class PreconditionError(EmdenError, ValueError):
    exit_status = 2


class NumericalError(EmdenError, ArithmeticError):
    exit_status = 1


class ParamError(PreconditionError):
    """Invalid scalar parameter (dimension, exponent, tolerance, radius)."""


class RegimeError(PreconditionError):
    """The exponent lies outside the regime the operation requires."""


class KindError(PreconditionError):
    """A closed form of the wrong kind was supplied."""


class DomainError(PreconditionError):
    """State outside the domain of the right-hand side."""


class SingularityError(PreconditionError):
    """Evaluation at the pole of a singular solution."""


class DifferentiationError(PreconditionError):
    """Finite-difference stencil would cross the origin."""


class BracketError(PreconditionError):
    """Initial shooting bracket does not straddle the predicate."""


class WindowError(PreconditionError):
    """Decay-fit window holds too few samples."""


class GridError(PreconditionError):
    """Radial grid is not strictly increasing or otherwise malformed."""


class TailError(PreconditionError):
    """Improper radial integral does not converge for the given tail."""


class DecayError(PreconditionError):
    """Entire-space identity requested for a profile that decays too slowly."""


class BoundaryError(PreconditionError):
    """Dirichlet data are not zero on the ball boundary."""


class StiffnessError(NumericalError):
    """Adaptive step size underflowed before an event or the horizon."""


class PositivityError(NumericalError):
    """A component that must be positive is not."""


class ThresholdUnresolved(NumericalError):
    """The shooting threshold does not produce an entire positive profile."""


class GrazeError(NumericalError):
    """A component dropped below the positivity floor without crossing zero."""


class IoError(PreconditionError):
    """A profile or table cannot be written or read."""
