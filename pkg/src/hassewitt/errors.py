"""Error taxonomy shared by every module.

All library-specific failures derive from HasseWittError so callers can
catch the whole family at once; the CLI maps the subclasses to exit codes.
"""

from __future__ import annotations


class HasseWittError(Exception):
    """Base class for all errors raised by this package."""


class RingMismatchError(HasseWittError):
    """Two operands live in different rings and no coercion is defined."""


class NotInvertibleModP(HasseWittError):
    """A matrix (or scalar) that must be a unit mod p is singular mod p."""


class BudgetExceededError(HasseWittError):
    """A computation would exceed the configured term-count budget."""


class PrecisionTooLowError(HasseWittError):
    """The working precision cannot observe the congruence being asserted."""


class EmptyLatticeError(HasseWittError):
    """The requested lattice-point index set is empty (matrix size zero)."""


class ParseError(HasseWittError):
    """Syntax error in a polynomial expression.

    Carries the character offset of the offending token.
    """

    def __init__(self, message, pos):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class DivisibilityError(HasseWittError):
    """A p-divisibility guaranteed by the construction failed to hold."""


class IntegrabilityError(HasseWittError):
    """A connection family is not flat: the frame system has no solution."""


class NonSimpleRootError(HasseWittError):
    """A root is not simple mod p, so it cannot be lifted."""


class InconsistentCountsError(HasseWittError):
    """Point counts do not come from any curve of the stated genus."""
