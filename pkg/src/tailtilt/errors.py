"""Exception hierarchy.

Every error raised deliberately by the library derives from
:class:`TailTiltError`. The CLI maps :class:`UsageError` subclasses to exit
code 2 and everything else to exit code 3.
"""


class TailTiltError(Exception):
    """Base class for library errors."""


class UsageError(TailTiltError):
    """Bad input supplied by the caller (exit code 2 in the CLI)."""


class ArgumentError(UsageError, ValueError):
    """An argument is out of its permitted range (e.g. k too large)."""


class DomainError(UsageError, ValueError):
    """A parameter or value lies outside the mathematical domain."""


class IngestionError(UsageError):
    """A data or population file could not be read."""


class ConfigError(UsageError):
    """A scenario config failed validation.

    ``path`` names the offending field, e.g. ``methods[2].threshold``.
    """

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class EstimationError(TailTiltError):
    """The estimator cannot be evaluated on this data."""


class InfiniteMeanError(EstimationError):
    """A fitted tail has index >= 1, so its mean does not exist."""


class FitError(EstimationError):
    """A parametric fit failed (degenerate data, non-positive index, ...)."""


class SolverError(EstimationError):
    """An iterative solver did not converge."""

    def __init__(self, message: str, bracket: tuple[float, float] | None = None,
                 iterations: int | None = None):
        self.bracket = bracket
        self.iterations = iterations
        detail = []
        if bracket is not None:
            detail.append(f"bracket=[{bracket[0]:.6g}, {bracket[1]:.6g}]")
        if iterations is not None:
            detail.append(f"iterations={iterations}")
        super().__init__(message + (f" ({', '.join(detail)})" if detail else ""))


class NonExistenceError(EstimationError):
    """The moment-matching equation has no solution."""


class DegenerateError(EstimationError):
    """Input carries no information for the requested fit (e.g. constant T)."""


class SeparationError(EstimationError):
    """Logistic regression classes are perfectly separated."""
