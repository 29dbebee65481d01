"""Exception hierarchy shared by the library and the command line."""


class OrthoFeaturesError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(OrthoFeaturesError, ValueError):
    """Array shapes or lengths are incompatible with the operation."""


class ConfigurationError(OrthoFeaturesError, ValueError):
    """Invalid parameters (kind, sigma, block counts, grids...)."""


class InputError(OrthoFeaturesError, ValueError):
    """Data supplied by the caller cannot be used (empty, zero vector, too few points)."""


class ParseError(InputError):
    """A dataset file could not be parsed."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(f"{where}{message}")


class NumericalError(OrthoFeaturesError, ArithmeticError):
    """A numerical precondition failed (zero bandwidth, undefined ratio)."""
