"""Exception types shared across the package.

The CLI maps these onto stable exit codes: bad input (parse/domain) is 2,
quadrature non-convergence is 3, precision-range and resource blowups are 4.
"""


class Error(Exception):
    """Base class for all valq errors."""


class DomainError(Error, ValueError):
    """Mathematically invalid input (square discriminant, Im tau <= 0, ...)."""


class ParseError(DomainError):
    """Unparseable surd / continued-fraction / form text."""


class PrecisionRangeError(Error, ArithmeticError):
    """Exponent overflow or underflow of the arbitrary-precision type."""


class ConvergenceError(Error, RuntimeError):
    """Quadrature failed to meet the target tolerance within the doubling budget."""

    def __init__(self, message, nodes_used=0):
        super().__init__(message)
        self.nodes_used = nodes_used
