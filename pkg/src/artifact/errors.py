"""Exception and warning types shared across the package.

Everything raised for bad input derives from :class:`ValidationError`
(a ``ValueError``); numerical failures derive from
:class:`NumericAccuracyError`.  The CLI maps the two families to exit
codes 3 and 4.
"""


class ValidationError(ValueError):
    """Input outside an operation's domain or contract."""


class NumericAccuracyError(ArithmeticError):
    """A computation could not meet its accuracy contract."""


class AccuracyWarning(UserWarning):
    """Evaluation requested outside the validated region."""


class PoleError(ValidationError):
    """Evaluation point too close to a pole."""


class DomainError(ValidationError):
    pass


class MissedZeroError(NumericAccuracyError):
    """Sign-change scan disagrees with the Riemann-von Mangoldt count."""


class ZeroFileError(ValidationError):
    """Malformed or inconsistent zero-table file."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyTableError(ValidationError):
    pass


class InsufficientZerosError(ValidationError):
    """The zero table does not reach the requested index or height."""


class CoefficientOverflowError(NumericAccuracyError):
    pass


class NoContinuationError(NumericAccuracyError):
    """Pole-corrected truncation is not trustworthy at the requested point."""


class BranchJumpError(ValidationError):
    """Adjacent grid phases differ by more than pi/2."""


class VanishingTargetError(ValidationError):
    pass


class MissingPrimeError(ValidationError):
    """omega(n) was requested for n with a prime factor lacking a phase."""
