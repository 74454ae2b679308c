"""Exception types shared across the package."""

from __future__ import annotations


class BasinLearnError(Exception):
    """Base class for all package errors."""


class DomainViolation(BasinLearnError):
    """A state coordinate lies outside the declared domain (or unit square).

    Carries the flat index of the first offending coordinate.
    """

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class NonConvergenceError(BasinLearnError):
    """A simulation hit max_time without settling on any attractor."""

    def __init__(self, message: str, final_state, elapsed: float = 0.0):
        super().__init__(message)
        self.final_state = final_state
        self.elapsed = elapsed


class SingleBasinError(BasinLearnError):
    """Bootstrap exhausted its candidate budget with only one label observed."""


class PoolExhaustedError(BasinLearnError):
    """No unlabeled candidates remain to select from."""


class TrainingError(BasinLearnError):
    """Model fitting preconditions violated or the fit degenerated."""


class GenerationError(BasinLearnError):
    """Ground-truth generation failed (some grid node did not converge)."""


class CorruptLogError(BasinLearnError):
    """An event log does not replay against its campaign configuration."""
