"""Exception types shared across the toolkit."""


class FlyqError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(FlyqError):
    """Operands have incompatible or unsupported dimensions."""


class ValidationError(FlyqError):
    """A schedule, system or config violates its invariants."""


class SingularMatrixError(FlyqError):
    """Linear solve on a (near-)singular matrix.

    Carries the condition-number estimate in ``cond``.
    """

    def __init__(self, msg, cond=None):
        super().__init__(msg)
        self.cond = cond


class ConditioningError(FlyqError):
    """An operation requested at a point where the propagator is too
    ill-conditioned to invert reliably.  Carries ``cond``."""

    def __init__(self, msg, cond=None):
        super().__init__(msg)
        self.cond = cond


class DivergenceError(FlyqError):
    """Non-finite entries appeared during integration.

    ``time`` is the timestamp of the offending step.
    """

    def __init__(self, msg, time=None):
        super().__init__(msg)
        self.time = time


class UnsupportedRegimeError(FlyqError):
    """A closed form was requested outside the regime where it is known;
    callers should fall back to the numeric engine."""


class CapacityError(FlyqError):
    """Requested amplitude tensor exceeds the configured memory budget."""
