"""Exception hierarchy.

Each class carries the CLI exit status it maps to, so the command line layer
can translate failures without a lookup table.
"""


class TagQualityError(Exception):
    exit_code = 2


class ValidationError(TagQualityError, ValueError):
    """A value is outside its declared domain (bad tag, bad config, bad id)."""

    exit_code = 2


class IngestionError(ValidationError):
    """Records violate a structural invariant, e.g. a duplicated triple."""


class ParseError(ValidationError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class ConfigurationError(ValidationError):
    pass


class InsufficientDataError(TagQualityError, ValueError):
    """Not enough pairable values, shared items, or series points."""

    exit_code = 3


class InsufficientSeriesError(InsufficientDataError):
    pass


class DegenerateAgreementError(TagQualityError, ValueError):
    """Every pairable tag falls in one category, so chance-corrected agreement is undefined.

    ``percent_agreement`` is always 1.0 in this situation and is attached for
    callers that still want to report raw agreement.
    """

    exit_code = 4

    def __init__(self, message, percent_agreement=1.0):
        super().__init__(message)
        self.percent_agreement = percent_agreement


class UndefinedKappaError(DegenerateAgreementError):
    pass


class DegenerateInputError(ValidationError):
    """Input is well-typed but carries no usable signal (e.g. all-zero weights)."""


class UsageError(TagQualityError):
    exit_code = 1
