"""Exception types shared across the package."""


class SGTError(Exception):
    """Base class for all package errors."""


class GraphFormatError(SGTError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class HypothesisError(SGTError, ValueError):
    """Input violates connectedness, valency >= 3 or genus >= 2."""


class ConvergenceError(SGTError, ArithmeticError):
    """A numerical limit did not settle within its budget."""


class ExtendPrefix(SGTError, ValueError):
    """A finite boundary approximation is too short to decide the question."""


class AmbiguousGenus(SGTError, ValueError):
    pass


class PoleError(SGTError, ZeroDivisionError):
    pass


class ReconstructionError(SGTError):
    """The tripod map is not a well-defined isometry of balls."""

    def __init__(self, message: str, witnesses: list | None = None):
        self.witnesses = witnesses or []
        super().__init__(message)
