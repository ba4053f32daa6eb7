"""Exception hierarchy shared by the library and the command line."""

from __future__ import annotations

from fractions import Fraction


class AmpleforgeError(Exception):
    """Base class for every error raised by ampleforge."""


class LengthMismatch(AmpleforgeError):
    """Two vectors that must live in the same H_k have different lengths."""

    def __init__(self, left: int, right: int) -> None:
        super().__init__(f"length mismatch: {left} != {right}")
        self.left = left
        self.right = right


class NonPositiveScalar(AmpleforgeError):
    """A cone operation was asked to scale by c <= 0."""


class VectorSyntaxError(AmpleforgeError, ValueError):
    """Vector text does not match the grammar.

    Attributes:
        position: 0-based offset into the input text where parsing stopped.
    """

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} at position {position}")
        self.position = position


class CremonaIndexError(AmpleforgeError, IndexError):
    """A Cremona generator references a slot outside 1..k."""


class TooFewPoints(AmpleforgeError):
    """A reflection was requested on a vector with fewer than three slots."""


class NonIntegerInput(AmpleforgeError):
    """An integer-only routine received a vector with rational entries."""


class UnresolvedSort(AmpleforgeError):
    """A word still contains a SortDescending that was never bound to a permutation."""


class DegreeMismatch(AmpleforgeError):
    """Gluing site multiplicity differs from the inner vector's degree."""

    def __init__(self, site: int, slot_value: Fraction, inner_degree: Fraction) -> None:
        super().__init__(
            f"DegreeMismatch: slot {site} holds {slot_value} but inner degree is {inner_degree}"
        )
        self.site = site
        self.slot_value = slot_value
        self.inner_degree = inner_degree


class KTooLarge(AmpleforgeError):
    """The (-1)-class oracle only covers k <= 8."""


class SchemaError(AmpleforgeError):
    """A certificate document is malformed.

    Attributes:
        location: JSON-pointer-like path of the offending element.
    """

    def __init__(self, message: str, location: str = "$") -> None:
        super().__init__(f"{location}: {message}")
        self.location = location


class PreconditionViolated(AmpleforgeError):
    """A certificate constructor was called outside its parameter range."""


class PerfectSquare(AmpleforgeError):
    """sqrt(N) is rational, so it has no periodic continued fraction."""


class OutOfConjectureRange(AmpleforgeError):
    """The conjecture target is only defined for square-free N > 9."""


class NotHomogeneous(AmpleforgeError):
    """A remainder bound was requested for a vector with unequal multiplicities."""


class UsageError(AmpleforgeError):
    """Command-line arguments do not match the grammar."""
