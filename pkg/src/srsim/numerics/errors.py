"""Error types raised by the dense solvers."""

from __future__ import annotations


class NumericsError(Exception):
    """Base class for solver and linear-algebra failures."""


class DomainError(NumericsError):
    """An argument left the mathematical domain of an operation
    (non-Hermitian input, nonpositive log argument, singular pencil)."""


class InfeasibleError(NumericsError):
    """No strictly feasible point was found for a constrained subproblem."""


class IterationError(NumericsError):
    """Iteration cap exceeded; carries the best iterate seen so far."""

    def __init__(self, message: str, best=None, residuals=None):
        super().__init__(message)
        self.best = best
        self.residuals = residuals
