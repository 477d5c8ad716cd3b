"""Exception types shared across the package.

The CLI maps InputError to exit code 2 and InfeasibleError to exit code 3.
"""


class InputError(ValueError):
    """Malformed or out-of-range input (bad file, bad vector, bad parameter)."""


class InfeasibleError(ValueError):
    """A constraint specification or point that cannot be satisfied."""
