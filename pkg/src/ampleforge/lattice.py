"""Exact vectors of the hyperbolic lattice H_k and cone arithmetic.

A ClassVector (d; m_1, ..., m_k) stands for the class d*l - sum m_j*e_j,
where <l,l> = 1, <e_i,e_j> = -delta_ij and <l,e_j> = 0. All entries are
Fractions; integer vectors simply have denominator 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

from ampleforge.errors import LengthMismatch, NonPositiveScalar, VectorSyntaxError

Rational = Fraction


class PositivityKind(Enum):
    """Positivity claim carried by certificates.

    AMPLE is strictly stronger than NEF: anything proved ample is also nef.
    """

    NEF = "nef"
    AMPLE = "ample"

    def implies(self, other: PositivityKind) -> bool:
        """True when a proof of self also justifies other."""
        return self is other or (self is PositivityKind.AMPLE and other is PositivityKind.NEF)

    @classmethod
    def parse(cls, text: str) -> PositivityKind:
        """Parse "nef" or "ample" (case-insensitive)."""
        return cls(text.strip().lower())


def _to_fraction(value: int | str | Fraction) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


@dataclass(frozen=True)
class ClassVector:
    """A degree plus multiplicity list (d; m_1, ..., m_k).

    Instances are immutable and hashable. k = 0 is a class pulled back from
    the plane. No sign constraint is enforced here: Cremona images may have
    negative entries, and positivity is the business of certificates.

    Attributes:
        degree: The coefficient d of the line class l.
        mults: The multiplicities m_1..m_k (coefficients of -e_j).
    """

    degree: Fraction
    mults: tuple[Fraction, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "degree", _to_fraction(self.degree))
        object.__setattr__(self, "mults", tuple(_to_fraction(m) for m in self.mults))

    @property
    def k(self) -> int:
        """Number of multiplicity slots."""
        return len(self.mults)

    @property
    def entries(self) -> tuple[Fraction, ...]:
        """Degree followed by the multiplicities."""
        return (self.degree, *self.mults)

    def is_integral(self) -> bool:
        """True when every entry has denominator 1."""
        return all(x.denominator == 1 for x in self.entries)

    def with_mults(self, mults: Iterable[Fraction | int]) -> ClassVector:
        """Same degree, new multiplicity list."""
        return ClassVector(self.degree, tuple(mults))

    def __str__(self) -> str:
        return format_vector(self)


def vector(degree: int | str | Fraction, *mults: int | str | Fraction) -> ClassVector:
    """Shorthand constructor: vector(10, 3, 3) is (10; 3, 3)."""
    return ClassVector(degree, tuple(mults))


def homogeneous(degree: int | Fraction, mult: int | Fraction, count: int) -> ClassVector:
    """(d; m^count)."""
    return ClassVector(degree, (mult,) * count)


def _check_lengths(v: ClassVector, w: ClassVector) -> None:
    if v.k != w.k:
        raise LengthMismatch(v.k, w.k)


def pairing(v: ClassVector, w: ClassVector) -> Fraction:
    """Hyperbolic form: d_v*d_w - sum_j m_j(v)*m_j(w)."""
    _check_lengths(v, w)
    return v.degree * w.degree - sum((a * b for a, b in zip(v.mults, w.mults)), Fraction(0))


def self_intersection(v: ClassVector) -> Fraction:
    """<v, v> = d^2 - sum m_j^2."""
    return pairing(v, v)


def anticanonical_pairing(v: ClassVector) -> Fraction:
    """Pairing against -K = (3; 1, ..., 1), i.e. 3d - sum m_j."""
    return 3 * v.degree - sum(v.mults, Fraction(0))


def scale(v: ClassVector, c: int | Fraction) -> ClassVector:
    """Multiply every entry by c > 0."""
    c = _to_fraction(c)
    if c <= 0:
        raise NonPositiveScalar(f"scale factor must be positive, got {c}")
    return ClassVector(v.degree * c, tuple(m * c for m in v.mults))


def add(v: ClassVector, w: ClassVector) -> ClassVector:
    """Entrywise sum of two vectors of equal length."""
    _check_lengths(v, w)
    return ClassVector(v.degree + w.degree, tuple(a + b for a, b in zip(v.mults, w.mults)))


def pad_with_zeros(v: ClassVector, k: int) -> ClassVector:
    """Append zero multiplicities up to length k (never truncates)."""
    if k < v.k:
        raise LengthMismatch(v.k, k)
    return v.with_mults(v.mults + (Fraction(0),) * (k - v.k))


def rational_content(values: Sequence[Fraction]) -> Fraction:
    """Largest positive rational c such that every value / c is an integer.

    The gcd of the numerators over the lcm of the denominators; 1 for an
    all-zero sequence.
    """
    nonzero = [x for x in values if x != 0]
    if not nonzero:
        return Fraction(1)
    den = lcm(*(x.denominator for x in nonzero))
    num = gcd(*(abs(x.numerator) * (den // x.denominator) for x in nonzero))
    return Fraction(num, den)


def primitive(v: ClassVector) -> tuple[ClassVector, Fraction]:
    """Split v as c * p with p integral and coprime; returns (p, c)."""
    c = rational_content(v.entries)
    return ClassVector(v.degree / c, tuple(m / c for m in v.mults)), c


def sorted_descending(v: ClassVector) -> ClassVector:
    """Multiplicities in non-increasing order (stable)."""
    return v.with_mults(sorted(v.mults, reverse=True))


# --- text form ---------------------------------------------------------------


def format_rational(x: Fraction) -> str:
    """"p" for integers, "p/q" otherwise."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def format_vector(v: ClassVector) -> str:
    """Canonical text with runs compressed, e.g. "10;3^7,6"."""
    items: list[str] = []
    i = 0
    while i < v.k:
        j = i
        while j + 1 < v.k and v.mults[j + 1] == v.mults[i]:
            j += 1
        run = j - i + 1
        text = format_rational(v.mults[i])
        items.append(f"{text}^{run}" if run > 1 else text)
        i = j + 1
    return f"{format_rational(v.degree)};{','.join(items)}"


_DIGITS = frozenset("0123456789")


class _Scanner:
    """Recursive-descent reader for the vector grammar; skips whitespace."""

    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0

    def _skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self._skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, char: str) -> None:
        if self.peek() != char:
            raise VectorSyntaxError(f"expected {char!r}", self.pos)
        self.pos += 1

    def integer(self, *, signed: bool) -> int:
        self._skip()
        start = self.pos
        if signed and self.pos < len(self.text) and self.text[self.pos] in "+-":
            self.pos += 1
        digits = self.pos
        while self.pos < len(self.text) and self.text[self.pos] in _DIGITS:
            self.pos += 1
        if self.pos == digits:
            raise VectorSyntaxError("expected digits", self.pos)
        return int(self.text[start:self.pos])

    def positive_integer(self) -> int:
        start = self.pos
        value = self.integer(signed=False)
        if value <= 0:
            raise VectorSyntaxError("expected a positive integer", start)
        return value

    def rational(self) -> Fraction:
        num = self.integer(signed=True)
        if self.peek() == "/":
            self.pos += 1
            return Fraction(num, self.positive_integer())
        return Fraction(num)

    def at_end(self) -> bool:
        return self.peek() == ""


def parse_vector(text: str) -> ClassVector:
    """Parse "degree;item,item,..." where item is rational("^"count)?.

    Raises:
        VectorSyntaxError: with the offending position.
    """
    scanner = _Scanner(text)
    degree = scanner.rational()
    scanner.expect(";")
    mults: list[Fraction] = []
    if not scanner.at_end():
        while True:
            value = scanner.rational()
            count = 1
            if scanner.peek() == "^":
                scanner.pos += 1
                count = scanner.positive_integer()
            mults.extend([value] * count)
            if scanner.peek() != ",":
                break
            scanner.pos += 1
    if not scanner.at_end():
        raise VectorSyntaxError("unexpected trailing text", scanner.pos)
    return ClassVector(degree, tuple(mults))
