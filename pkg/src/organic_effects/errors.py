"""Typed errors raised across the package.

Every error carries a distinct ``exit_code`` so the command-line front end
can map failures to stable process exit statuses.
"""


class OrganicError(Exception):
    """Base class for all package errors."""

    exit_code = 1

    @property
    def kind(self):
        return type(self).__name__


class MalformedHeader(OrganicError):
    exit_code = 3


class ParseError(OrganicError):
    exit_code = 4

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class ValidationError(OrganicError):
    exit_code = 5

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = tuple(violations)


class IdentificationGap(OrganicError):
    """A cell receiving positive weight in the identification sum has no data."""

    exit_code = 6

    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class DegenerateDesign(OrganicError):
    exit_code = 7


class EmptyArm(OrganicError):
    exit_code = 8


class TooManyFailures(OrganicError):
    exit_code = 9

    def __init__(self, message, causes=()):
        super().__init__(message)
        self.causes = tuple(causes)


class DimensionMismatch(OrganicError, ValueError):
    exit_code = 10


class SpecError(OrganicError, ValueError):
    """Invalid structural-model or run configuration."""

    exit_code = 11


class RankDeficiencyWarning(UserWarning):
    pass


class HeteroscedasticityWarning(UserWarning):
    pass
