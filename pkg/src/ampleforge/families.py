"""Base nef/ample families, necessary-condition filters and the del Pezzo oracle."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Iterator, Optional, Union

from ampleforge.errors import KTooLarge
from ampleforge.lattice import (
    ClassVector,
    PositivityKind,
    pairing,
    primitive,
    scale,
    self_intersection,
)

logger = logging.getLogger(__name__)

ORACLE_MAX_K = 8


class BaseFamily(Enum):
    """Vector families known nef (or ample) without further proof."""

    PULLBACK = "pullback"
    SQUARE = "square"
    TWO_HEAVY = "two-heavy"


@dataclass(frozen=True)
class BaseWitness:
    """Evidence that a vector is a positive multiple of a permuted family member.

    Attributes:
        family: Which family matched.
        kind: The positivity the family member has.
        scale: Positive factor c with vector = c * canonical (up to order).
        sorted_permutation: 1-based; sorted[j] = original[p[j] - 1].
        degree, m1, m2, ones, zeros: Parameters of the canonical member
            (d; m1, m2, 1^ones, 0^zeros); m1 and m2 are 0 outside TWO_HEAVY.
        remark_based: Ample two-heavy claims rest on an unproved remark.
    """

    family: BaseFamily
    kind: PositivityKind
    scale: Fraction
    sorted_permutation: tuple[int, ...]
    degree: int
    m1: int = 0
    m2: int = 0
    ones: int = 0
    zeros: int = 0
    remark_based: bool = False

    def canonical(self) -> ClassVector:
        """The sorted, primitive family member."""
        heavy: tuple[int, ...] = ()
        if self.family is BaseFamily.TWO_HEAVY:
            heavy = (self.m1, self.m2) if self.m2 else (self.m1,)
        return ClassVector(self.degree, heavy + (1,) * self.ones + (0,) * self.zeros)

    def rebuild(self) -> ClassVector:
        """Undo normalization: scale the canonical member and unsort it."""
        sorted_vector = scale(self.canonical(), self.scale)
        if len(self.sorted_permutation) != sorted_vector.k:
            raise ValueError("permutation length does not match the family member")
        mults: list[Fraction] = [Fraction(0)] * sorted_vector.k
        for j, src in enumerate(self.sorted_permutation):
            mults[src - 1] = sorted_vector.mults[j]
        return sorted_vector.with_mults(mults)


def _square_is_ample(d: int, ones: int, zeros: int) -> bool:
    # (2; 1^r) with r >= 2 pairs to zero with the line through two points.
    if zeros or d * d <= ones:
        return False
    return d != 2 or ones <= 1


def match_base(v: ClassVector, kind: PositivityKind) -> Optional[BaseWitness]:
    """Find a base-family witness for v of the requested kind.

    After dividing out the rational content and sorting, tries the pullback
    family, then (d; 1^r, 0^s), then (d; m1, m2, 1^r, 0^s) where m2 may be 0.
    Returns None when nothing matches; that is not a disproof.
    """
    if v.degree < 0 or any(m < 0 for m in v.mults):
        return None
    p, c = primitive(v)
    order = sorted(range(v.k), key=lambda j: -p.mults[j])
    perm = tuple(j + 1 for j in order)
    d = p.degree.numerator
    mults = [p.mults[j].numerator for j in order]
    zeros = mults.count(0)
    nonzero = mults[: len(mults) - zeros]

    if not nonzero:
        ample = v.k == 0 and d > 0
        if kind is PositivityKind.AMPLE and not ample:
            return None
        return BaseWitness(BaseFamily.PULLBACK, kind, c, perm, d, zeros=zeros)

    if all(m == 1 for m in nonzero):
        r = len(nonzero)
        if d * d < r:
            return None
        if kind is PositivityKind.AMPLE and not _square_is_ample(d, r, zeros):
            return None
        return BaseWitness(BaseFamily.SQUARE, kind, c, perm, d, ones=r, zeros=zeros)

    if all(m == 1 for m in nonzero[2:]):
        m1, m2 = nonzero[0], (nonzero[1] if len(nonzero) > 1 else 0)
        r = max(len(nonzero) - 2, 0)
        lhs, rhs = d * d, m1 * m1 + m2 * m2 + r
        if kind is PositivityKind.NEF:
            if d >= m1 + m2 and lhs >= rhs:
                return BaseWitness(BaseFamily.TWO_HEAVY, kind, c, perm, d, m1, m2, r, zeros)
        elif d > m1 + m2 and lhs > rhs and zeros == 0:
            return BaseWitness(
                BaseFamily.TWO_HEAVY, kind, c, perm, d, m1, m2, r, zeros, remark_based=True
            )
    return None


def check_witness(w: BaseWitness) -> Optional[str]:
    """Re-check the family inequalities for w's parameters; returns a problem or None."""
    if w.scale <= 0:
        return f"witness scale {w.scale} is not positive"
    if min((w.degree, w.m1, w.m2, w.ones, w.zeros)) < 0:
        return "witness parameters must be non-negative"
    if sorted(w.sorted_permutation) != list(range(1, w.canonical().k + 1)):
        return "witness permutation is not a permutation of the slots"
    d, ample = w.degree, w.kind is PositivityKind.AMPLE
    if w.family is not BaseFamily.TWO_HEAVY and (w.m1 or w.m2):
        return f"{w.family.value} witness must have m1 = m2 = 0"
    if w.remark_based and not (w.family is BaseFamily.TWO_HEAVY and ample):
        return "only ample two-heavy witnesses are remark-based"
    if w.family is BaseFamily.PULLBACK:
        if w.ones:
            return "pullback witness has nonzero multiplicities"
        if ample and (w.zeros or d <= 0):
            return "pullback vectors with blown-up points are never ample"
        return None
    if w.family is BaseFamily.SQUARE:
        if w.ones < 1:
            return "square witness needs at least one unit slot"
        if d * d < w.ones:
            return f"{d}^2 < {w.ones}"
        if ample and not _square_is_ample(d, w.ones, w.zeros):
            return f"(d; 1^{w.ones}, 0^{w.zeros}) with d = {d} is not ample"
        return None
    if w.m1 < w.m2 or w.m1 < 1 or (w.m2 == 0 and w.ones):
        return "two-heavy witness needs m1 >= m2 >= 1, or m2 = 0 with no unit slots"
    rhs = w.m1 * w.m1 + w.m2 * w.m2 + w.ones
    if ample:
        if not w.remark_based:
            return "ample two-heavy witness must be flagged remark-based"
        if w.zeros or d <= w.m1 + w.m2 or d * d <= rhs:
            return "two-heavy ample inequalities fail"
    elif d < w.m1 + w.m2 or d * d < rhs:
        return "two-heavy nef inequalities fail"
    return None


# --- necessary conditions ----------------------------------------------------


@dataclass(frozen=True)
class Pass:
    """All filters passed; not a proof of positivity."""

    passed: bool = True


@dataclass(frozen=True)
class FailReason:
    """A filter that rules the claim out.

    Attributes:
        message: Which inequality failed.
        vector: The vector the failure was detected on.
    """

    message: str
    vector: ClassVector
    passed: bool = False

    def __str__(self) -> str:
        return f"{self.message} on {self.vector}"


ConditionResult = Union[Pass, FailReason]


def necessary_conditions(v: ClassVector, kind: PositivityKind) -> ConditionResult:
    """Cheap checks against the effective classes e_j, l - e_j and l - e_i - e_j.

    A FailReason is a disproof of the stated kind; Pass proves nothing.
    """
    strict = kind is PositivityKind.AMPLE
    ranked = sorted(v.mults, reverse=True)

    def bad(lhs: Fraction, rhs: Fraction) -> bool:
        return lhs <= rhs if strict else lhs < rhs

    rel = "<=" if strict else "<"
    if ranked and bad(ranked[-1], Fraction(0)):
        return FailReason(f"multiplicity {ranked[-1]} {rel} 0", v)
    if bad(v.degree, Fraction(0)):
        return FailReason(f"degree {v.degree} {rel} 0", v)
    if ranked and bad(v.degree, ranked[0]):
        return FailReason(f"degree {v.degree} {rel} multiplicity {ranked[0]}", v)
    if len(ranked) >= 2 and bad(v.degree, ranked[0] + ranked[1]):
        return FailReason(f"degree {v.degree} {rel} {ranked[0]} + {ranked[1]}", v)
    q = self_intersection(v)
    if bad(q, Fraction(0)):
        return FailReason(f"self-intersection {q} {rel} 0", v)
    return Pass()


# --- (-1)-classes and the small-k oracle -------------------------------------


def _distinct_permutations(counts: Counter[int], length: int) -> Iterator[tuple[int, ...]]:
    if length == 0:
        yield ()
        return
    for value in sorted(counts, reverse=True):
        if counts[value] == 0:
            continue
        counts[value] -= 1
        for rest in _distinct_permutations(counts, length - 1):
            yield (value, *rest)
        counts[value] += 1


@lru_cache(maxsize=None)
def minus_one_classes(k: int, max_degree: int = 6, max_mult: int = 3) -> tuple[ClassVector, ...]:
    """Integer classes c with <c,c> = -1 and 3d - sum m = 1, d >= 0.

    Searches degree <= max_degree and |m_j| <= max_mult, which is enough
    for k <= 8. The exceptional classes e_i appear as (0; ..., -1, ...).

    Raises:
        KTooLarge: k > 8.
    """
    if k > ORACLE_MAX_K:
        raise KTooLarge(f"(-1)-classes are only enumerated for k <= {ORACLE_MAX_K}, got {k}")
    values = range(max_mult, -max_mult - 1, -1)
    found: list[ClassVector] = []
    for d in range(max_degree + 1):
        for combo in combinations_with_replacement(values, k):
            if sum(combo) != 3 * d - 1 or sum(m * m for m in combo) != d * d + 1:
                continue
            for mults in _distinct_permutations(Counter(combo), k):
                found.append(ClassVector(d, mults))
    logger.debug("k=%d: %d (-1)-classes", k, len(found))
    return tuple(found)


def delpezzo_nef_oracle(v: ClassVector) -> bool:
    """Ground truth for k <= 8: v pairs non-negatively with every curve generator."""
    if v.k > ORACLE_MAX_K:
        raise KTooLarge(f"the oracle covers k <= {ORACLE_MAX_K}, got {v.k}")
    generators = list(minus_one_classes(v.k))
    if v.k <= 1:
        generators.append(ClassVector(1, (0,) * v.k))
        if v.k == 1:
            generators.append(ClassVector(1, (1,)))
    return all(pairing(v, c) >= 0 for c in generators)
