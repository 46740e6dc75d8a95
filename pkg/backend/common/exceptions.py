from typing import Iterable, Optional


class IdsError(Exception):
    """Base class for every error raised by the rank-ring IDS toolkit."""


class SpecParseError(IdsError, ValueError):
    """A model or self-similar spec could not be parsed or is invalid."""


class CapExceededError(IdsError):
    """An enumeration, vertex or dense-eigensolver cap was exceeded."""

    def __init__(self, message: str, hint: Optional[str] = None):
        super().__init__(message)
        self.hint = hint


class EigensolverError(IdsError):
    """LAPACK did not converge."""


class SelfSimilarSpecError(IdsError, ValueError):
    """A glue or selection rule broke the self-similar construction."""

    def __init__(self, message: str, edge: Optional[tuple] = None):
        super().__init__(message if edge is None else f"{message} (edge {edge})")
        self.edge = edge


class InvariantViolationError(IdsError):
    """At least one certified inequality failed."""

    def __init__(self, failed_checks: Iterable[str]):
        self.failed_checks = list(failed_checks)
        super().__init__(
            "certified checks failed: " + ", ".join(self.failed_checks)
        )
