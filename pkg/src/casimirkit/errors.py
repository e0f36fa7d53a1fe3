"""Exception and warning types shared across the package."""


class CasimirError(Exception):
    """Base class for numerical failures raised by casimirkit."""


class ZeroFrequencyError(ValueError):
    """A model with a pole at xi = 0 was evaluated there.

    The Lifshitz code never does this; it switches to the analytic
    zero-frequency reflection limits instead.
    """


class TermBudgetExceeded(CasimirError):
    """A mode sum would need more terms than the configured budget."""


class ConvergenceError(CasimirError):
    """An extrapolation, quadrature or truncation failed to reach tolerance."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class ValidityWarning(UserWarning):
    """An approximation is being used outside its stated range."""
