"""Exception types raised across the package."""


class SRBRWError(Exception):
    """Base class for all package errors."""


class ModelAssumptionError(SRBRWError, ValueError):
    """Parameters violate the standing assumption beta > eps**2 / 2 (or N < 1)."""


class NoParent(SRBRWError, ValueError):
    pass


class OffGrid(SRBRWError, ValueError):
    pass


class NotRepresentable(SRBRWError, ValueError):
    pass


class Infeasible(SRBRWError, ValueError):
    pass


class ShapeMismatch(SRBRWError, ValueError):
    pass


class DegenerateRegime(SRBRWError, ValueError):
    pass


class BudgetExceeded(SRBRWError, RuntimeError):
    """Oracle search space is larger than the configured budget."""

    def __init__(self, message, size=None):
        super().__init__(message)
        self.size = size
