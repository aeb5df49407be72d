"""Exception hierarchy shared by every layer of the codec."""


class CodecError(Exception):
    """Base class for all errors raised by modcodec."""


class CorruptStreamError(CodecError):
    """The bitstream is malformed or fails an integrity check.

    ``section`` carries the logical section index when the failure happened
    inside a TOC section, so callers can report which part was damaged.
    """

    def __init__(self, message, section=None):
        if section is not None:
            message = f"section {section}: {message}"
        super().__init__(message)
        self.section = section


class EndOfStreamError(CorruptStreamError):
    """A read went past the end of the available bytes."""


class UnsupportedError(CodecError):
    """Input is valid but uses a feature this codec does not handle."""


class InvalidRequestError(CodecError, ValueError):
    """The caller asked for something the file cannot provide (e.g. a rect outside the image)."""
