"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid dimensions, aspect ratio, or run configuration."""


class DegenerateInputError(ValueError):
    """Input that is valid in shape but degenerate in content (e.g. a zero column)."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class ComputationError(RuntimeError):
    """A numerical routine failed to converge or violated an internal assertion."""
