"""Exception hierarchy shared by every flowlab module."""


class FlowLabError(Exception):
    """Base class for all flowlab errors."""


class InvalidMetricError(FlowLabError, ValueError):
    """A metric coefficient is non-positive, non-finite or mis-sized."""


class ConfigurationError(FlowLabError, ValueError):
    """Inputs are inconsistent (missing aux field, wrong c, bad config key)."""


class DomainError(FlowLabError, ValueError):
    """A quantity was requested outside its domain (tau <= 0, t >= T*)."""


class PositivityError(FlowLabError, ValueError):
    """A field that must be strictly positive is not."""


class ConstraintError(FlowLabError, ValueError):
    """A normalization constraint such as int e^-phi dy = 1 is violated."""


class BlowUpError(FlowLabError, ArithmeticError):
    """The flow lost positivity or produced non-finite values.

    ``time`` is the first time at which the failure was detected.
    """

    def __init__(self, message, time):
        super().__init__(f"{message} (t = {time:.6g})")
        self.time = time


class StabilityError(FlowLabError, ArithmeticError):
    """The backward heat solve lost positivity; reduce dt."""


class ConservationError(FlowLabError, ArithmeticError):
    """Mass drift of the conjugate heat solution exceeded its bound."""


class ConvergenceError(FlowLabError, ArithmeticError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual = {residual:.3e})")
        self.residual = residual
