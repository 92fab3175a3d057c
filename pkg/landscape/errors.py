"""Exception hierarchy shared by every landscape module."""

from typing import Any, Optional


class LandscapeError(Exception):
    """Base class for all errors raised by the landscape package."""


class IntegrationError(LandscapeError):
    """The ODE integrator could not reach the end of its span."""

    def __init__(self, message: str, last_time: float):
        super().__init__(f"{message} (last good time t={last_time:.17g})")
        self.last_time = last_time


class StepUnderflowError(IntegrationError):
    """Required step fell below what the floating-point grid can represent."""


class StepLimitExceededError(IntegrationError):
    """The configured max_steps budget was used up."""


class ControlDomainError(LandscapeError, ValueError):
    """A control signal was evaluated outside [0, T]."""


class DegenerateInputError(LandscapeError, ValueError):
    """Input that makes a quantity undefined (zero B, dependent basis, ...)."""


class AtGoalError(LandscapeError):
    """End point coincides with the goal; the distance gradient is undefined."""


class NumericalFailureError(LandscapeError):
    """A computation produced a singular or non-finite intermediate."""


class GenerationError(LandscapeError):
    """Random system generation exhausted its rejection budget."""


class RunAbortedError(LandscapeError):
    """An optimization run stopped on an inner failure; carries the partial record."""

    def __init__(self, message: str, record: Optional[Any] = None):
        super().__init__(message)
        self.record = record
