"""Exception hierarchy. The CLI maps each class to an exit code."""


class WfaError(Exception):
    """Base class for every error raised by this package."""


class ModelError(WfaError, ValueError):
    """Malformed automaton or document (bad shapes, unknown symbols, ...)."""

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class DivergenceError(WfaError):
    """An infinite quantity: Gramian undefined, function not square-summable."""


class NumericalError(WfaError, ArithmeticError):
    """A numerical routine failed (singular system, indefinite matrix, ...)."""
