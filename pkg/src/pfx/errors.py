"""Exception hierarchy shared by all pipeline stages."""


class PfxError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(PfxError, ValueError):
    pass


class GeometryError(PfxError, ValueError):
    """Landmark or rectangle geometry is unusable (coincident eyes, out of bounds, bad ordering)."""


class ParseError(PfxError, ValueError):
    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class DegenerateDiscriminantError(PfxError, ValueError):
    pass


class StratificationError(PfxError, ValueError):
    pass


class ConvergenceError(PfxError, RuntimeError):
    def __init__(self, message, gap=None):
        super().__init__(message)
        self.gap = gap


class ModelFormatError(PfxError, ValueError):
    """Model file is corrupt, truncated or of an unknown version."""


class ModelIncompatibleError(PfxError, ValueError):
    """Model configuration does not match the data presented to it."""


class DataError(PfxError, IOError):
    """Unreadable or unsupported input file."""
