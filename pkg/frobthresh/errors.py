"""
Exception hierarchy for frobthresh.
Library code raises these; the CLI maps them to exit codes.
"""

from typing import List, Optional


class FrobThreshError(Exception):
    """Base class for every error raised by the library."""


class RingMismatchError(FrobThreshError):
    """Operands live in different polynomial rings."""


class InfiniteColengthError(FrobThreshError):
    """An ideal that must be m-primary is not."""


class PreconditionError(FrobThreshError):
    """An operation was called outside its documented preconditions."""


class QAdicDomainError(FrobThreshError):
    """The q-adic digit calculus needs t > 0."""


class InadmissibleExponentError(FrobThreshError):
    """Exponent is not a positive rational of the form c/(p^g(p^h-1))."""


class ComputationLimitError(FrobThreshError):
    """A configured cap was exceeded while materialising an object."""

    def __init__(self, message: str, limit: Optional[str] = None):
        super().__init__(message)
        self.limit = limit


class SpecValidationError(FrobThreshError):
    """A job spec was rejected; ``fields`` lists one diagnostic per offending field."""

    def __init__(self, message: str, fields: Optional[List[dict]] = None):
        super().__init__(message)
        self.fields = fields or []
