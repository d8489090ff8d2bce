"""Exception types raised by the library.

Every error derives from ``GroupoidError`` so the CLI can map domain failures
to a single exit code.
"""

from __future__ import annotations


class GroupoidError(ValueError):
    """Base class for domain errors."""


class NonComposableError(GroupoidError):
    def __init__(self, left: int, right: int, left_source: int, right_target: int):
        self.left = left
        self.right = right
        self.left_source = left_source
        self.right_target = right_target
        super().__init__(
            f"non-composable pair: morphism {left} has source {left_source} "
            f"but morphism {right} has target {right_target}"
        )


class InvalidGroupTableError(GroupoidError):
    pass


class InvalidActionError(GroupoidError):
    pass


class InvalidPartitionError(GroupoidError):
    pass


class SchemaError(GroupoidError):
    """Malformed input document."""


class FibreSupportError(GroupoidError):
    """A measure charges a morphism outside the fibre it must live on."""

    def __init__(self, morphism: int, expected_object: int, message: str | None = None):
        self.morphism = morphism
        self.expected_object = expected_object
        super().__init__(
            message
            or f"morphism {morphism} lies outside the target fibre of object {expected_object}"
        )


class NormalizationError(GroupoidError):
    """A measure that must be a probability measure is not."""


class GroupoidMismatchError(GroupoidError):
    pass


class HorizonExhaustedError(GroupoidError):
    def __init__(self, message: str, stage: int | None = None, worst: object = None):
        self.stage = stage
        self.worst = worst
        super().__init__(message)


class ProductCapError(GroupoidError):
    def __init__(self, message: str, stage: int, size: int):
        self.stage = stage
        self.size = size
        super().__init__(message)


class SupportCapError(GroupoidError):
    """A convolution power outgrew the configured support cap."""

    def __init__(self, n: int, size: int, cap: int, values: list | None = None):
        self.n = n
        self.size = size
        self.cap = cap
        self.values = list(values or [])
        super().__init__(
            f"support cap {cap} exceeded at n={n} (support size {size})"
        )


class UndefinedIncrementError(GroupoidError):
    pass
