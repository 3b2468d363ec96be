"""Exception types shared across panoheat.

The CLI maps these onto exit codes: input errors exit 1, numeric and
stability failures exit 2, I/O failures (``OSError``) exit 3.
"""


class InputError(ValueError):
    """Invalid user input: bad geometry, out-of-range values, malformed files."""


class ConfigError(InputError):
    """Invalid configuration value."""


class NumericError(ArithmeticError):
    """A computation produced non-finite values."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class StabilityError(NumericError):
    """Requested time step exceeds the explicit-scheme stability bound."""

    def __init__(self, message, bound=None):
        super().__init__(message)
        self.bound = bound
