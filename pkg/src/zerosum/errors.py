"""Exception types shared across the package."""

from __future__ import annotations


class ZeroSumError(Exception):
    """Base class for all errors raised by this package."""


class DivisibilityViolation(ZeroSumError, ValueError):
    """Invariant factors do not form a divisibility chain."""


class RankMismatch(ZeroSumError, ValueError):
    """An element's coordinate vector does not match the group's rank."""


class UnsupportedGroup(ZeroSumError, ValueError):
    """The operation is only defined for a restricted class of groups."""


class InvalidHomomorphism(ZeroSumError, ValueError):
    """The map descriptor does not respect the group structure."""


class SequenceFormatError(ZeroSumError, ValueError):
    """A sequence file or string failed to parse."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ResourceLimit(ZeroSumError, RuntimeError):
    """A dense table or orbit enumeration would exceed the configured cap."""


class BudgetExceeded(ZeroSumError, RuntimeError):
    """A search ran out of its node or time budget."""


class NonExhaustiveCertificate(ZeroSumError, ValueError):
    """An operation needs an exhaustive certificate but got a partial one."""


class HypothesisViolation(ZeroSumError, ValueError):
    """A threshold formula was called outside its domain of validity."""


class PreconditionViolation(ZeroSumError, ValueError):
    """An application-specific precondition (parity, floor, prime support) fails."""


class OracleFailure(ZeroSumError, RuntimeError):
    """A supplied witness oracle failed, signalling a false premise."""


class CheckpointError(ZeroSumError, ValueError):
    """A checkpoint file is malformed or belongs to a different run."""


class StoreLocked(ZeroSumError, RuntimeError):
    """Another process holds the results store lock."""
