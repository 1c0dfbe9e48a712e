"""Exception types shared across the package."""


class CrowdTeamError(Exception):
    """Base class for package errors."""


class EdgeListParseError(CrowdTeamError):
    """Malformed edge-list input."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class EmptyGraphError(CrowdTeamError):
    """Edge list contained no usable nodes."""


class DataError(CrowdTeamError):
    """Missing or inconsistent input data."""


class InfeasibleError(CrowdTeamError):
    """No feasible team exists for the requested instance."""


class PoolShapeError(CrowdTeamError):
    """Candidate pool cannot support the requested selection."""


class BudgetExceededError(CrowdTeamError):
    """Enumeration would exceed the configured budget."""


class TimeLimitError(CrowdTeamError):
    """Solver hit its wall-clock limit.

    ``best`` carries the incumbent team found so far, if any.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
