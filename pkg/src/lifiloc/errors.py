"""Exception types shared across the package.

The CLI maps these onto distinct exit codes (config = 2, IO/format = 3,
numeric = 4) so automated harnesses can discriminate failure classes.
"""


class ConfigError(ValueError):
    """Invalid or inconsistent configuration values."""


class DataFormatError(ValueError):
    """Malformed dataset/model file, or artifacts that do not belong together."""


class NumericsError(ArithmeticError):
    """Numerical failure: singular radiosity system, diverging training, ..."""


class DegenerateGeometryError(NumericsError):
    """Transmitter and receiver closer than the degenerate-distance guard."""
