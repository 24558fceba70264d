"""Shared exception types."""


class ResourceShortageError(RuntimeError):
    """Aggregate capacity cannot cover the requested number of pairs."""


class CapacityError(RuntimeError):
    """A desk-scale enumeration guard was exceeded; use a sampling route instead."""


class InvariantViolationError(RuntimeError):
    """A constructed object or measured outcome violates a structural invariant."""
