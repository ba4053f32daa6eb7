"""Continued fractions of sqrt(N), Pell solutions and remainder bounds."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Iterator, Sequence

from ampleforge.errors import (
    NotHomogeneous,
    OutOfConjectureRange,
    PerfectSquare,
    PreconditionViolated,
)
from ampleforge.lattice import ClassVector, homogeneous


def integer_sqrt(n: int) -> int:
    """floor(sqrt(n)) for n >= 0."""
    if n < 0:
        raise ValueError(f"integer_sqrt needs n >= 0, got {n}")
    return isqrt(n)


def is_square_free(n: int) -> bool:
    """True when no prime square divides n (trial division)."""
    if n < 1:
        raise ValueError(f"is_square_free needs n >= 1, got {n}")
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 1
    return True


@dataclass(frozen=True)
class CFExpansion:
    """sqrt(N) = [a0; period repeated], the period ending in 2*a0."""

    a0: int
    period: tuple[int, ...]

    def __str__(self) -> str:
        return f"{self.a0}; {' '.join(map(str, self.period))}"


@dataclass(frozen=True)
class PellSolution:
    """d^2 - N m^2 = 1."""

    d: int
    m: int


def cf_sqrt(n: int) -> CFExpansion:
    """Periodic continued fraction of sqrt(n).

    Raises:
        PerfectSquare: n is a perfect square (including 0).
    """
    if n < 0:
        raise ValueError(f"cf_sqrt needs n >= 0, got {n}")
    a0 = isqrt(n)
    if a0 * a0 == n:
        raise PerfectSquare(f"{n} is a perfect square")
    m, q, a = 0, 1, a0
    period: list[int] = []
    while a != 2 * a0:
        m = q * a - m
        q = (n - m * m) // q
        a = (a0 + m) // q
        period.append(a)
    return CFExpansion(a0, tuple(period))


def convergents(terms: Sequence[int]) -> Iterator[tuple[int, int]]:
    """(p_k, q_k) for each prefix of the finite continued fraction."""
    p_prev, p = 0, 1
    q_prev, q = 1, 0
    for a in terms:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        yield p, q


def convergent(terms: Sequence[int]) -> Fraction:
    """Value of [a0; a1, ..., ak]."""
    if not terms:
        raise ValueError("convergent needs at least one term")
    *_, (p, q) = convergents(terms)
    return Fraction(p, q)


def _truncation(cf: CFExpansion, repeats: int) -> list[int]:
    """[a0; period^repeats, a1..a_{n-1}]."""
    return [cf.a0, *(cf.period * repeats), *cf.period[:-1]]


def pell_solutions(n: int, count: int) -> list[PellSolution]:
    """The first `count` positive solutions of d^2 - n m^2 = 1, increasing in d.

    Raises:
        PerfectSquare: n is a perfect square.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    cf = cf_sqrt(n)
    odd = len(cf.period) % 2 == 1
    solutions: list[PellSolution] = []
    repeats = 1 if odd else 0
    while len(solutions) < count:
        value = convergent(_truncation(cf, repeats))
        solutions.append(PellSolution(value.numerator, value.denominator))
        repeats += 2 if odd else 1
    return solutions


def pell_fundamental(n: int) -> PellSolution:
    """Smallest positive solution of d^2 - n m^2 = 1."""
    return pell_solutions(n, 1)[0]


def conjecture_target(n: int) -> ClassVector:
    """(d; m^n) from the fundamental Pell solution, for square-free n > 9.

    Raises:
        OutOfConjectureRange: n <= 9 or n not square-free.
    """
    if n <= 9 or not is_square_free(n):
        raise OutOfConjectureRange(f"conjecture targets need square-free N > 9, got {n}")
    sol = pell_fundamental(n)
    return homogeneous(sol.d, sol.m, n)


def remainder_bound(v: ClassVector) -> Fraction:
    """(d^2 - N m^2) / d^2 for a homogeneous (d; m^N), assumed nef.

    Raises:
        NotHomogeneous: no slots, or unequal or non-positive multiplicities.
        PreconditionViolated: d <= 0.
    """
    if v.k == 0 or len(set(v.mults)) != 1 or v.mults[0] <= 0:
        raise NotHomogeneous(f"{v} is not of the form (d; m^N) with m > 0")
    if v.degree <= 0:
        raise PreconditionViolated(f"remainder bound needs d > 0, got {v.degree}")
    d, m = v.degree, v.mults[0]
    return (d * d - v.k * m * m) / (d * d)
