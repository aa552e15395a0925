"""Exception types shared across the package."""

from __future__ import annotations


class OneshotError(Exception):
    """Base class for all package errors."""


class InputError(OneshotError, ValueError):
    """Malformed or invalid input data (exit code 2 on the command line)."""


class ComputationError(OneshotError):
    """A computation finished but a checked claim did not hold (exit code 1)."""


class BudgetExceeded(OneshotError):
    """A search exceeded its node, vertex or stage budget (exit code 3).

    ``best`` carries whatever partial answer the search had when it stopped,
    e.g. the best lower bound found so far.
    """

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best
