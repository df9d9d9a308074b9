"""Exception and warning classes raised across the package."""


class TwoCenterError(Exception):
    """Base class for all errors raised by :mod:`twocenter`."""


class RootRealityError(TwoCenterError):
    """A root of the quantizing polynomial came out complex or degenerate."""


class SymmetricCaseError(TwoCenterError):
    """Equal charges: the angular equation is of Mathieu type and has no
    polynomial (QES) solutions."""


class BranchOutOfRange(TwoCenterError):
    """Requested branch index j is outside 1..level+1."""


class BranchCrossingError(TwoCenterError):
    """Root continuation along an R scan could not be made unambiguous."""


class DomainError(TwoCenterError, ValueError):
    """Coordinate outside the domain of a separated factor."""


class ConvergenceError(TwoCenterError):
    """An adaptive truncation failed to stabilize."""


class NormalizationDivergence(TwoCenterError):
    """The density integral does not converge (non-normalizable function)."""


class FocalSegmentWarning(RuntimeWarning):
    """Point lies on the focal segment, where the elliptic Jacobian vanishes."""
