"""Exception and warning types shared across the package."""


class CenterlineError(Exception):
    """Base class for all package errors."""


class InvalidInput(CenterlineError, ValueError):
    """An argument violates a documented precondition."""


class EmptyMask(CenterlineError):
    """A mask has no foreground cells where at least one is required."""


class EmptyBand(CenterlineError):
    """A supervision band has no active cells."""


class ReconstructionFailed(CenterlineError):
    """Too few usable points to build a curve."""


class EmptyMaskWarning(UserWarning):
    """Rasterization produced an all-zero mask (polyline off-grid)."""
