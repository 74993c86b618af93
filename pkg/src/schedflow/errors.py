"""Exception hierarchy shared by every module."""

from __future__ import annotations


class SchedFlowError(Exception):
    """Base class for all library errors."""


class InputError(SchedFlowError, ValueError):
    """Malformed or out-of-contract input data."""


class DemandInfeasibleError(SchedFlowError):
    """The requested demand cannot be routed (exceeds max flow, or window too small)."""


class InvariantError(SchedFlowError, AssertionError):
    """An internal invariant failed. Indicates a bug or a corrupted intermediate value."""
