"""Shared exception types.

Undecided comparisons are ordinary values for the comparison API; the
exceptions below are raised only where an algorithm *needs* a decision
and cannot proceed without one, or where a stated precondition fails.
"""

from __future__ import annotations


class BeurlingError(Exception):
    """Base class for library errors."""


class PrecisionCapExceeded(BeurlingError):
    """The working-precision cap was reached before a result certified."""


class DomainNotCertified(BeurlingError):
    """An operand could not be certified inside the operation's domain
    (log/sqrt/division near a boundary) at the working precision."""


class OrderingUndecided(PrecisionCapExceeded):
    """Two distinct-looking quantities could not be separated at the cap.

    Carries the colliding witnesses so callers can report them; for
    integer snapshots these are the two exponent vectors.
    """

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class WindowExhausted(BeurlingError):
    """No admissible point was found inside a perturbation window."""


class CertificateFailure(BeurlingError):
    """A gap certificate failed; carries the colliding pair as witness."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness
