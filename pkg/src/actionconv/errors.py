"""Exception types shared across the package."""


class ActionconvError(Exception):
    """Base class for domain errors."""


class UsageError(ActionconvError, ValueError):
    """Malformed input: bad shapes, out-of-range parameters, unknown names."""


class SpaceMismatch(ActionconvError, ValueError):
    """Objects defined on different probability spaces were combined."""


class InvariantViolation(ActionconvError, RuntimeError):
    """A mathematical invariant that the library guarantees was violated."""


class LimitExceeded(ActionconvError, ValueError):
    """An exact method was requested beyond its configured size limit."""
