"""Exception types shared across the library."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class BracketError(RuntimeError):
    """A root bracket does not contain a sign change.

    Raised during zero-table construction; indicates an evaluation
    accuracy problem rather than bad user input, so it aborts loudly.
    """


class QuadratureError(RuntimeError):
    """Panel refinement failed to reach the requested agreement."""


class TruncationError(RuntimeError):
    """A spectral truncation is too small for the requested tolerance."""


class CacheError(RuntimeError):
    """An on-disk table failed revalidation or could not be parsed."""


class TruncationWarning(UserWarning):
    """Requested work proceeded, but the truncation lost noticeable weight."""
