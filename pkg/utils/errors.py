class GleLabError(Exception):
    """Base class for every error raised by the library."""


class DomainError(GleLabError, ValueError):
    """Arguments outside the domain of an operation (s > t, grid mismatch, ...)."""


class DivergenceError(GleLabError, ArithmeticError):
    """A state, integral or transform stopped being finite."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class FitError(GleLabError, ValueError):
    pass


class ConfigError(GleLabError, ValueError):
    pass
