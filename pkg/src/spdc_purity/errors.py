"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A physical parameter is out of its allowed range."""


class DegenerateInputError(ValueError):
    """The input carries no usable spectral weight (e.g. an all-zero matrix)."""


class GridMismatchError(ValueError):
    """Two spectral objects live on incompatible frequency grids."""


class JsiFormatError(ValueError):
    """A JSI table could not be parsed or validated.

    ``row`` is the 1-based line number of the offending record when known.
    """

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class ConfigError(ValueError):
    """A scenario configuration failed schema or range validation."""
