"""Exception hierarchy shared across the library and the CLI exit-code mapping."""


class BezierTextError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(BezierTextError):
    """Bad argument domains, inconsistent shapes, or malformed schemas."""


class DegenerateError(BezierTextError):
    """Geometrically degenerate input: zero-length chains, zero-area regions,
    rank-deficient fitting systems."""


class CorruptFileError(BezierTextError):
    """A file exists but its header or payload does not match the format."""


class IntegerOverflowError(BezierTextError):
    """An integer accumulation would exceed the 64-bit range."""
