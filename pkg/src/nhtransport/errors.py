"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid parameters, mismatched sizes or malformed configuration."""


class NumericalError(RuntimeError):
    """Integration produced NaN/inf or a zero state."""


class ResourceError(RuntimeError):
    """Requested computation exceeds a hard size cap."""
