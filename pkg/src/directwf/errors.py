"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class DegenerateInputError(ValueError):
    """Input data cannot be turned into a normalized estimate.

    Raised e.g. when every reconstruction coefficient vanishes, which is
    what happens for states whose amplitude sum is zero.
    """


class ConfigError(InvalidArgumentError):
    """An experiment configuration is invalid."""
