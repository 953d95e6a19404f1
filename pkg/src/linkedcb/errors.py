"""Exception hierarchy.

Every error raised on purpose by this package derives from
:class:`LinkedCBError`, so callers can catch the whole family at once.
"""


class LinkedCBError(Exception):
    pass


class InvalidIriError(LinkedCBError, ValueError):
    pass


class InvalidLiteralError(LinkedCBError, ValueError):
    pass


class InvalidTypeError(LinkedCBError, ValueError):
    """Entity type name outside the supported whitelist."""


class InvalidPermalinkError(LinkedCBError, ValueError):
    pass


class InvalidFieldError(LinkedCBError, ValueError):
    pass


class NTriplesSyntaxError(LinkedCBError, ValueError):
    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class WrongPayloadError(LinkedCBError, ValueError):
    pass


class InvalidTrustError(LinkedCBError, ValueError):
    pass


class InvalidDateError(LinkedCBError, ValueError):
    pass


class UpstreamError(LinkedCBError):
    """Base for failures talking to the upstream JSON API."""

    def __init__(self, message, path=None, page=None):
        super().__init__(message)
        self.path = path
        self.page = page

    def __str__(self):
        msg = super().__str__()
        if self.page is not None:
            msg = f"{msg} (page {self.page})"
        return msg


class InvalidKeyError(UpstreamError):
    pass


class UnknownEntityError(UpstreamError):
    pass


class RateExceededError(UpstreamError):
    pass


class UpstreamParseError(UpstreamError):
    pass


class ForeignRedirectError(UpstreamError):
    pass


class AuthError(LinkedCBError):
    status = 400


class UnsupportedSchemeError(AuthError):
    status = 401


class MalformedCredentialsError(AuthError):
    status = 400


class NotAcceptableError(LinkedCBError):
    pass


class UnparseableUrlError(LinkedCBError, ValueError):
    pass


class SeedSchemaError(LinkedCBError, ValueError):
    pass


class CheckpointError(LinkedCBError):
    pass


class FixtureError(LinkedCBError, ValueError):
    pass
