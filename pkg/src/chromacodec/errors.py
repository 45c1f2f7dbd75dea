"""Exception types shared across the toolkit."""


class ChromaCodecError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(ChromaCodecError, ValueError):
    """Shape mismatch; the message names the offending axis."""


class ConfigError(ChromaCodecError, ValueError):
    """Invalid configuration value (channel counts, divisibility, ranges)."""


class DataError(ChromaCodecError, ValueError):
    """Malformed file, payload, or container contents."""


class NumericError(ChromaCodecError, ArithmeticError):
    """Non-finite value where a finite one is required."""
