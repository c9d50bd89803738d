"""Exception types shared across the solver."""


class CapflowError(Exception):
    """Base class for solver errors."""


class DomainError(CapflowError, ValueError):
    """Input outside the mathematical domain of an operation."""


class ConfigError(CapflowError, ValueError):
    """Malformed or out-of-range run configuration."""


class NumericalFailure(CapflowError, ArithmeticError):
    """Non-finite value produced during evaluation; carries the node index."""

    def __init__(self, message: str, node: int | None = None):
        super().__init__(message)
        self.node = node


class InvariantViolation(CapflowError, RuntimeError):
    """A runtime invariant (e.g. the cap enclosure barrier) failed."""


class FitFailure(CapflowError, RuntimeError):
    """Cap fitting produced a degenerate sphere."""
