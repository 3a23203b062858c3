"""Exception hierarchy shared by every module."""


class HGMError(ValueError):
    """Base class for domain errors (CLI exit status 1)."""


class ParseError(HGMError):
    pass


class ValidationError(HGMError):
    pass


class DegenerateError(ValidationError):
    """The parameter reduces to rank 0."""


class BadPrimeError(HGMError):
    pass


class NotSplitError(HGMError):
    pass


class PrecisionError(HGMError):
    pass


class InvariantError(HGMError):
    """A self-check failed; the message names the check."""


class FixtureMismatchError(HGMError):
    pass


class MissingDataError(HGMError):
    pass
