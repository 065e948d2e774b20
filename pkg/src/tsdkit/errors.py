"""Exception types shared across the toolkit."""


class TsdkitError(Exception):
    """Base class for every error raised by this package."""


class DegenerateGeometry(TsdkitError):
    """Box or quad without a positive-area axis-aligned extent."""


class InvalidConfig(TsdkitError):
    """Configuration value outside its allowed range."""


class InvalidInput(TsdkitError):
    """Operation input violates a documented precondition."""


class NumericalRange(TsdkitError):
    """Result left the representable floating-point range."""


class ImageTooSmall(TsdkitError):
    """Image cannot hold the requested window or tile."""


class ParseError(TsdkitError):
    """Malformed CSV row or config line; message carries the line number."""


class PlacementFailure(TsdkitError):
    """Scene objects could not be placed without overlap."""
