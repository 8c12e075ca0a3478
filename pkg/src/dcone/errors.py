"""Exception hierarchy shared by all solver modules."""


class DconeError(Exception):
    """Base class for all errors raised by :mod:`dcone`."""


class InvalidCurveError(DconeError, ValueError):
    """Curve samples violate the sphere or grid invariants."""


class ResolutionError(DconeError, ValueError):
    """Grid too coarse for the requested computation."""


class DomainError(DconeError, ValueError):
    """Argument outside the domain of a formula."""


class BracketError(DconeError, RuntimeError):
    """Root-finding bracket has no sign change."""


class InfeasibleConfigError(DconeError, ValueError):
    """Fold configuration violates the linear-problem constraints."""


class RegimeError(DconeError, RuntimeError):
    """Curve left the graph regime (alpha^2 >= 1) or unsupported epsilon."""


class InsufficientDataError(DconeError, ValueError):
    """Not enough lifted nodes to fit a quantity."""


class ConvergenceError(DconeError, RuntimeError):
    """Iterative solver failed to converge; carries the partial report."""

    def __init__(self, message, report=None, curve=None):
        super().__init__(message)
        self.report = report
        self.curve = curve


class ConsistencyError(DconeError, AssertionError):
    """Two independent evaluations of the same quantity disagree."""
