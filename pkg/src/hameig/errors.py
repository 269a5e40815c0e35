"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class HypothesisFailure(Exception):
    """A computed hypothesis constant is degenerate (for instance a zero lower bound)."""


class IntegrationError(ArithmeticError):
    """The integrand produced a non-finite value at an unflagged point."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class ConvergenceError(RuntimeError):
    """A fixed-point iteration did not converge; carries the last iterate's report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
