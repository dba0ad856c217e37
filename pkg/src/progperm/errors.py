"""Exception hierarchy.

``ValidationError`` subclasses signal bad input (CLI exit code 1); anything
else raised from a run is a runtime failure (exit code 2).
"""


class ProgPermError(Exception):
    """Base class for all package errors."""


class ValidationError(ProgPermError, ValueError):
    """Input data or configuration violates a documented invariant."""


class ParseError(ValidationError):
    pass


class DuplicateId(ValidationError):
    pass


class NegativeValue(ValidationError):
    pass


class MissingColumn(ValidationError):
    pass


class UnmatchedSamples(ValidationError):
    pass


class CardinalityError(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class UnknownFeature(ValidationError):
    pass


class MetricError(ProgPermError):
    """A summary metric cannot be computed from the available scenarios."""


class MissingObservedScenario(MetricError):
    pass


class TooFewPoints(MetricError):
    pass


class StrideError(MetricError):
    pass


class MissingFullMixScenario(MetricError):
    pass


class CholeskyError(ProgPermError, ValueError):
    pass
