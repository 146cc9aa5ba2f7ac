"""Exception types shared across the package.

The CLI maps these onto distinct exit codes: validation problems exit
with 2, degenerate numerical input with 3, and resource caps with 4.
"""


class ValidationError(ValueError):
    """Malformed input: bad shapes, out-of-range parameters, empty clouds."""


class DegenerateFieldError(RuntimeError):
    """Numerically degenerate configuration, e.g. a zero maximum gradient."""


class ComplexSizeError(RuntimeError):
    """A filtered complex would exceed the configured simplex cap."""
