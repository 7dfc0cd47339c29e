"""Exception types raised across the package."""


class InvalidParameterError(ValueError):
    """An argument is outside its documented domain or has the wrong shape."""


class UnsupportedConfigurationError(ValueError):
    """A configuration the detector cannot handle (e.g. fewer than 3 antennas)."""


class NumericalFailure(ArithmeticError):
    """A numerical routine failed to converge or degenerated."""
