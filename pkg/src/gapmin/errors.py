"""Exception types shared across the package."""


class GapminError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(GapminError):
    """Operand shapes do not match the owning problem."""


class ConePartitionError(GapminError):
    """Cone blocks do not partition the index range they describe."""


class ParameterError(GapminError):
    """Algorithm parameters violate their admissibility conditions."""


class ParseError(GapminError):
    """Malformed problem file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnsupportedFormatError(ParseError):
    """Problem file uses a keyword or cone outside the supported subset."""
