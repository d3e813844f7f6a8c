"""Exception hierarchy shared across the package."""


class RicciLabError(Exception):
    """Base class for all domain errors raised by this package."""


class ContractViolation(RicciLabError):
    """An input breaks a documented precondition (symmetry, trace, ...)."""


class SingularMetricError(RicciLabError):
    """Metric is not positive definite where it must be."""


class UndefinedInvariantError(RicciLabError):
    """A requested invariant is undefined for this metric (e.g. beta with
    non-positive total sigma2)."""


class ExtinctFlowError(RicciLabError):
    """Flow state has already collapsed past the extinction guard."""
