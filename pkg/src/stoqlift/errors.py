"""Shared exception types."""


class DimensionMismatchError(ValueError):
    """Operands have incompatible shapes or dimensions."""


class ValidationError(ValueError):
    """A domain object failed its invariant checks.

    Carries the structured validation report when one exists.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
