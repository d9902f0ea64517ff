"""Exception types shared across pufferkit."""


class PufferkitError(Exception):
    """Base class for all pufferkit errors."""


class EmptySupportError(PufferkitError, ValueError):
    """A probability vector was requested from all-zero counts."""


class IngestionError(PufferkitError, ValueError):
    """CSV ingestion failed (missing column, unknown category, absent secret)."""


class NonPositiveEpsilonError(PufferkitError, ValueError):
    """The privacy budget must be strictly positive."""


class NonPositiveThetaError(PufferkitError, ValueError):
    """The Laplace scale must be strictly positive."""


class NonPositiveToleranceError(PufferkitError, ValueError):
    """The root-finding tolerance must be strictly positive."""


class DegenerateColumnError(PufferkitError, ValueError):
    """The transport-plan column has no off-diagonal mass, so no bracket exists."""


class ConditionNotMetError(PufferkitError, ValueError):
    """The closed-form worst-case plan was requested but its condition fails."""


class NotOrderOneError(PufferkitError, ValueError):
    """A closed form valid only for max support distance 1 was applied elsewhere."""


class AllDegenerateError(PufferkitError, ValueError):
    """Every column of every plan is degenerate; the quantity is undefined."""


class AuditFailureError(PufferkitError, RuntimeError):
    """A calibrated scale failed the exact privacy audit."""
