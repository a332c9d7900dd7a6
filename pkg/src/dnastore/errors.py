"""Exception hierarchy shared by all modules.

The CLI maps these onto process exit codes: DomainError -> 2,
ShortfallError -> 3, CapacityError -> 4.
"""


class DnastoreError(Exception):
    """Base class for all library errors."""


class DomainError(DnastoreError, ValueError):
    """A parameter is outside the domain where the requested quantity exists,
    or a result's hypothesis is violated."""


class ShortfallError(DnastoreError, RuntimeError):
    """A randomized construction ran out of attempts before reaching the
    requested size.  Carries the partial result so callers can distinguish
    bad parameters from bugs."""

    def __init__(self, message, achieved, target, partial=None):
        super().__init__(message)
        self.achieved = achieved
        self.target = target
        self.partial = partial


class CapacityError(DnastoreError, RuntimeError):
    """A computation would exceed the configured resource cap."""
