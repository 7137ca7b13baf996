"""Exception hierarchy shared by the model, solver, and simulator."""


class ModelError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ModelError, ValueError):
    """An argument lies outside the domain where the model is defined."""


class DegenerateError(ModelError, ArithmeticError):
    """A closed form has a vanishing denominator or exponent."""


class InfeasibleDistractionError(ModelError):
    """The first-order conditions have no interior solution with s >= 0."""


class NoInteriorMaximumError(ModelError):
    """A grid search ended on the boundary of the feasible box."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class BracketingError(ModelError):
    """No sign change was found while expanding a root bracket."""

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class StepSizeUnderflowError(ModelError):
    """The adaptive integrator could not meet its tolerance."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class IntegrationError(ModelError):
    """A derivative evaluation failed partway through an integration.

    ``partial`` holds whatever was computed before the failure: the raw
    ``(t_out, ys)`` arrays inside the integrator, a trajectory above it.
    """

    def __init__(self, message, t=None, partial=None):
        super().__init__(message)
        self.t = t
        self.partial = partial


class DivergenceError(ModelError):
    """The discounted utility integral does not converge."""


class InsufficientDataError(ModelError):
    """Too few records remain for a regression."""


class ConfigError(ModelError):
    """Malformed or out-of-domain run configuration."""

    def __init__(self, message, line=None, key=None):
        super().__init__(message)
        self.line = line
        self.key = key
