"""Remainder-bound table: known, conjectured and certified bounds per N."""

from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Callable, Iterator, Optional, TextIO

from ampleforge.certificates import Certificate, Valid, base_leaf, encode, verify
from ampleforge.constructions import asymp1_part1, asymp1_part2, asymp1_part3
from ampleforge.errors import PreconditionViolated
from ampleforge.lattice import format_rational, homogeneous
from ampleforge.pell import conjecture_target, is_square_free, remainder_bound
from ampleforge.prover import Proved, Prover, SearchLimits

logger = logging.getLogger(__name__)

CSV_HEADER = ("N", "xu", "family", "conjecture", "proved", "certified_file")


@dataclass(frozen=True)
class FamilyMatch:
    """One way N arises from the asymptotic families."""

    part: int
    a: int
    l: int
    bound: Fraction

    def build(self) -> Certificate:
        builders: dict[int, Callable[[int, int], Certificate]] = {
            1: asymp1_part1,
            2: asymp1_part2,
            3: asymp1_part3,
        }
        return builders[self.part](self.a, self.l)


def _part3_allowed(a: int, l: int) -> bool:
    b = a
    while b % 2 == 0:
        b //= 2
    return l > 1 and l > 2 * b


def family_matches(n: int) -> list[FamilyMatch]:
    """Every (part, a, l) whose family vector has exactly n slots and whose preconditions hold."""
    found: list[FamilyMatch] = []
    for l in range(1, n + 1):
        for a in range(1, isqrt(n + 2 * l) // l + 2):
            al2 = a * a * l * l
            if al2 + 2 * l == n and a * l >= 2:
                found.append(FamilyMatch(1, a, l, Fraction(1, (a * a * l + 1) ** 2)))
            if al2 - 2 * l == n and a >= 2 and a * l >= 3 and a * l - l >= 2:
                found.append(FamilyMatch(2, a, l, Fraction(1, (a * a * l - 1) ** 2)))
            if al2 + l == n and _part3_allowed(a, l):
                found.append(FamilyMatch(3, a, l, Fraction(1, (2 * a * a * l + 1) ** 2)))
    return found


@dataclass(frozen=True)
class BoundsRow:
    """One table line; None marks an inapplicable column."""

    n: int
    xu: Fraction
    family: Optional[Fraction]
    conjecture: Optional[Fraction]
    proved: Optional[Fraction]
    certified_file: Optional[str]


def _certified(n: int, prover: Prover) -> Iterator[Certificate]:
    """Candidate certificates for homogeneous vectors with n slots."""
    root = isqrt(n)
    if root * root == n:
        yield base_leaf(homogeneous(root, 1, n))
    for match in family_matches(n):
        try:
            yield match.build()
        except PreconditionViolated as exc:
            logger.warning("N=%d part %d (a=%d, l=%d): %s", n, match.part, match.a, match.l, exc)
    if n > 9 and is_square_free(n):
        outcome = prover.prove(conjecture_target(n))
        if isinstance(outcome, Proved):
            yield outcome.certificate
        else:
            logger.debug("N=%d: conjecture target not proved (%s)", n, type(outcome).__name__)


def bounds_row(n: int, limits: SearchLimits, certificate_dir: str | None = None) -> BoundsRow:
    """Compute one row; only Valid certificates contribute to the proved column."""
    family = min((m.bound for m in family_matches(n)), default=None)
    conjecture = None
    if n > 9 and is_square_free(n):
        conjecture = Fraction(1, conjecture_target(n).degree.numerator ** 2)

    best: Optional[tuple[Fraction, Certificate]] = None
    for cert in _certified(n, Prover(limits)):
        verdict = verify(cert)
        if not isinstance(verdict, Valid):
            logger.warning("N=%d: discarding certificate that failed verification: %s", n, verdict)
            continue
        bound = remainder_bound(verdict.vector)
        if best is None or bound < best[0]:
            best = (bound, cert)

    path = None
    if best is not None and certificate_dir:
        os.makedirs(certificate_dir, exist_ok=True)
        path = os.path.join(certificate_dir, f"N{n}.json")
        with open(path, "w", encoding="utf-8") as f:
            f.write(encode(best[1], indent=2))
    return BoundsRow(
        n=n,
        xu=Fraction(1, n),
        family=family,
        conjecture=conjecture,
        proved=best[0] if best else None,
        certified_file=path,
    )


def bounds_table(
    max_n: int, limits: SearchLimits, certificate_dir: str | None = None
) -> list[BoundsRow]:
    """Rows for 10 <= N <= max_n."""
    rows = []
    for n in range(10, max_n + 1):
        row = bounds_row(n, limits, certificate_dir)
        logger.debug("N=%d: proved=%s", n, row.proved)
        rows.append(row)
    return rows


def _cell(value: Optional[Fraction | str]) -> str:
    if value is None:
        return ""
    if isinstance(value, Fraction):
        return format_rational(value)
    return value


def write_csv(rows: list[BoundsRow], stream: TextIO) -> None:
    """CSV with exact rationals as p/q and empty cells for missing values."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(
            [row.n, _cell(row.xu), _cell(row.family), _cell(row.conjecture),
             _cell(row.proved), _cell(row.certified_file)]
        )
