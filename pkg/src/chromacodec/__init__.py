"""Luma-only video compression with a learned chroma colorizer at the decoder."""

__version__ = "0.1.0"

from .errors import (
    ChromaCodecError,
    ConfigError,
    DataError,
    DimensionError,
    NumericError,
)

__all__ = [
    "ChromaCodecError",
    "ConfigError",
    "DataError",
    "DimensionError",
    "NumericError",
    "__version__",
]
