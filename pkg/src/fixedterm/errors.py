"""Exception types raised by the solver stack."""


class FixedTermError(Exception):
    """Base class for all package errors."""


class InvalidSpecError(FixedTermError, ValueError):
    """A model parameter violates its domain (e.g. non-positive volatility)."""


class InvalidArgumentError(FixedTermError, ValueError):
    """An operation was called outside its precondition."""


class InfeasibleCapitalError(FixedTermError):
    """Initial capital is below the minimum needed to honour the floors.

    ``required`` carries the minimal capital so callers can report it.
    """

    def __init__(self, message: str, required: float | None = None):
        super().__init__(message)
        self.required = required


class NoFreeCapital(InfeasibleCapitalError):
    """All liquid capital is consumed by replicating the wealth floor."""


class NumericalError(FixedTermError, RuntimeError):
    """A root search failed to bracket or converge."""


class UndefinedStrategyError(FixedTermError, ZeroDivisionError):
    """Relative strategy requested where the underlying wealth is zero."""
