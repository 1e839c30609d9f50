"""
Exception types raised by the synthesis pipeline
"""


class ConfigError(ValueError):
    """
    Raised when a run configuration cannot be parsed or validated

    The offending key path (e.g. ``constraints.uMin``) and, when known, the source line are attached.
    """

    def __init__(self, message: str, *, path: str = None, line: int = None):
        self.reason = message
        self.path = path
        self.line = line

        where = []
        if path is not None:
            where.append(f"key '{path}'")

        if line is not None:
            where.append(f"line {line}")

        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class InfeasibleSignalError(ValueError):
    """
    Raised when the current control signal already violates its constraints
    """


class ConvergenceError(RuntimeError):
    """
    Raised when a quadratic program fails to meet its KKT tolerance

    The best iterate found and its residual are kept so callers may still use them.
    """

    def __init__(self, message: str, *, best=None, residual: float = None):
        super().__init__(message)

        self.best = best
        self.residual = residual


class StagnationError(RuntimeError):
    """
    Raised when the outer synthesis loop rejects every retry of an iteration

    Carries the partial `SynthesisReport` and the best pulse seen so far.
    """

    def __init__(self, message: str, *, report=None, pulse=None):
        super().__init__(message)

        self.report = report
        self.pulse = pulse


__all__ = ["ConfigError", "InfeasibleSignalError", "ConvergenceError", "StagnationError"]
