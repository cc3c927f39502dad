"""Exception types shared across the package.

The CLI maps these onto exit codes: input problems exit with 2 and
capacity or iteration limits exit with 3.
"""


class RobschedError(Exception):
    """Base class for all package errors."""


class InvalidInputError(RobschedError, ValueError):
    """Malformed instance data, dimension mismatch or out-of-range parameter."""


class InvalidTransitionError(RobschedError, ValueError):
    """A state update that is not allowed, e.g. completing a task that is not running."""


class EmptySetError(RobschedError):
    """An (induced) uncertainty set contains no scenario."""


class UnsupportedSetError(RobschedError, TypeError):
    """The requested operation is not implemented for this kind of uncertainty set."""


class CapacityError(RobschedError):
    """A problem is larger than the configured enumeration or memory budget."""


class LimitError(RobschedError):
    """A node or iteration limit was reached before optimality was proven."""


class NumericalInstabilityError(RobschedError, ArithmeticError):
    """The simplex method hit a pivot too small to trust."""
