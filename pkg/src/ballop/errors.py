"""Exception types raised across the package."""


class BallopError(Exception):
    """Base class for all package errors."""


class InvalidArgument(BallopError, ValueError):
    pass


class OutOfRange(BallopError, IndexError):
    pass


class OutOfDomain(BallopError, ValueError):
    """A point or parameter lies outside the open unit ball."""


class SingularDenominator(BallopError, ZeroDivisionError):
    pass


class SingularPoint(BallopError, ZeroDivisionError):
    """The denominator of a linear fractional map vanishes at the point."""


class NotASelfMap(BallopError, ValueError):
    pass


class NotInvertible(BallopError, ArithmeticError):
    """Truncated operator is numerically singular; its polar part is undefined."""


class WrongVariant(BallopError, ValueError):
    pass
