"""Exception types raised across the package."""


class ProbKGError(Exception):
    """Base class for all package errors."""


class GraphError(ProbKGError, ValueError):
    """Invalid graph content or mutation."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class QuerySyntaxError(ProbKGError, ValueError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)
        self.position = position


class CoefficientOverflowError(ProbKGError, OverflowError):
    """A polynomial coefficient left the signed 64-bit range."""


class MissingProbabilityError(ProbKGError, KeyError):
    pass


class OracleCapExceeded(ProbKGError):
    """Too many variables for brute-force enumeration."""


class NodeBudgetExceeded(ProbKGError):
    """Knowledge compilation produced more nodes than allowed."""
