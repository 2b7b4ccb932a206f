"""Raster-to-vector 3D lane centerlines and road-topology metrics."""

__version__ = "0.1.0"

from .errors import (
    CenterlineError,
    EmptyBand,
    EmptyMask,
    EmptyMaskWarning,
    InvalidInput,
    ReconstructionFailed,
)
from .grid import GridSpec, QuadDirection

__all__ = [
    "__version__",
    "CenterlineError",
    "EmptyBand",
    "EmptyMask",
    "EmptyMaskWarning",
    "InvalidInput",
    "ReconstructionFailed",
    "GridSpec",
    "QuadDirection",
]
