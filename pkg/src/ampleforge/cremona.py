"""Cremona action on H_k: generators, words and degree reduction.

Indices are 1-based throughout, matching the R_{ijk} notation. A word is a
tuple of ops applied left to right.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import lcm
from typing import Any, Sequence, Union

from ampleforge.errors import (
    CremonaIndexError,
    NonIntegerInput,
    SchemaError,
    TooFewPoints,
    UnresolvedSort,
)
from ampleforge.lattice import ClassVector, scale

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Permute:
    """Reorder multiplicities: new slot j takes old slot order[j-1]."""

    order: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "order", tuple(int(x) for x in self.order))

    def is_identity(self) -> bool:
        return all(src == j for j, src in enumerate(self.order, start=1))


@dataclass(frozen=True)
class Reflect:
    """Reflection in r_ijk = l - e_i - e_j - e_k."""

    i: int
    j: int
    k: int


@dataclass(frozen=True)
class SortDescending:
    """Sort multiplicities non-increasingly (stable); resolved to a Permute on use."""


CremonaOp = Union[Permute, Reflect, SortDescending]
CremonaWord = tuple[CremonaOp, ...]


def sort_permutation(v: ClassVector) -> Permute:
    """The Permute realizing SortDescending on v; ties keep their order."""
    order = sorted(range(v.k), key=lambda j: -v.mults[j])
    return Permute(tuple(j + 1 for j in order))


def resolve_op(op: CremonaOp, v: ClassVector) -> CremonaOp:
    """Bind a SortDescending to the concrete permutation it performs on v."""
    if isinstance(op, SortDescending):
        return sort_permutation(v)
    return op


def apply_op(op: CremonaOp, v: ClassVector) -> ClassVector:
    """Apply a single generator.

    Raises:
        TooFewPoints: Reflect on a vector with k < 3.
        CremonaIndexError: an index outside 1..k, repeated reflection
            indices, or a Permute that is not a permutation of 1..k.
    """
    if isinstance(op, SortDescending):
        return v.with_mults(sorted(v.mults, reverse=True))
    if isinstance(op, Permute):
        if sorted(op.order) != list(range(1, v.k + 1)):
            raise CremonaIndexError(f"{op.order} is not a permutation of 1..{v.k}")
        return v.with_mults(v.mults[src - 1] for src in op.order)
    if isinstance(op, Reflect):
        if v.k < 3:
            raise TooFewPoints(f"reflection needs k >= 3, got k = {v.k}")
        idx = (op.i, op.j, op.k)
        if len(set(idx)) != 3 or not all(1 <= x <= v.k for x in idx):
            raise CremonaIndexError(f"invalid reflection indices {idx} for k = {v.k}")
        delta = v.degree - sum((v.mults[x - 1] for x in idx), Fraction(0))
        mults = list(v.mults)
        for x in idx:
            mults[x - 1] += delta
        return ClassVector(v.degree + delta, tuple(mults))
    raise TypeError(f"not a Cremona op: {op!r}")


def apply_word(word: Sequence[CremonaOp], v: ClassVector) -> ClassVector:
    """Left-to-right composition of apply_op."""
    for op in word:
        v = apply_op(op, v)
    return v


def apply_word_recording(
    word: Sequence[CremonaOp], v: ClassVector
) -> tuple[ClassVector, CremonaWord]:
    """Apply a word and return it with every sort replaced by its permutation."""
    resolved: list[CremonaOp] = []
    for op in word:
        op = resolve_op(op, v)
        v = apply_op(op, v)
        resolved.append(op)
    return v, tuple(resolved)


def invert_word(word: Sequence[CremonaOp]) -> CremonaWord:
    """Inverse word: reversed, reflections kept, permutations inverted.

    Raises:
        UnresolvedSort: the word still contains a SortDescending.
    """
    inverted: list[CremonaOp] = []
    for op in reversed(word):
        if isinstance(op, SortDescending):
            raise UnresolvedSort("bind sorts with apply_word_recording before inverting")
        if isinstance(op, Permute):
            inverse = [0] * len(op.order)
            for j, src in enumerate(op.order, start=1):
                inverse[src - 1] = j
            inverted.append(Permute(tuple(inverse)))
        else:
            inverted.append(op)
    return tuple(inverted)


# --- standard reduction -------------------------------------------------------


class ReductionStatus(Enum):
    """Why standard_reduce stopped."""

    REDUCED_NON_NEGATIVE = "ReducedNonNegative"
    NEGATIVE_ENTRY = "NegativeEntry"
    NON_POSITIVE_DEGREE = "NonPositiveDegree"
    TOO_FEW_POINTS = "TooFewPoints"

    @property
    def disproves(self) -> bool:
        """A vector reaching this status is not nef."""
        return self in (ReductionStatus.NEGATIVE_ENTRY, ReductionStatus.NON_POSITIVE_DEGREE)


@dataclass(frozen=True)
class ReductionStep:
    """One applied generator and the vector it produced."""

    op: CremonaOp
    result: ClassVector


@dataclass(frozen=True)
class ReductionOutcome:
    """Result of standard_reduce.

    Attributes:
        start: The input vector.
        final: Last vector reached.
        word: Every generator applied, sorts recorded as permutations, so
            apply_word(word, start) == final.
        status: Stopping reason.
        steps: Per-generator trace.
    """

    start: ClassVector
    final: ClassVector
    word: CremonaWord
    status: ReductionStatus
    steps: tuple[ReductionStep, ...]


def standard_reduce(v: ClassVector) -> ReductionOutcome:
    """Sort, then reflect in the three largest slots while that lowers the degree.

    Stops when d - m_1 - m_2 - m_3 >= 0 (ReducedNonNegative), a multiplicity
    goes negative (NegativeEntry) or the degree drops to <= 0 with delta
    still negative (NonPositiveDegree). Each reflection strictly lowers an
    integer degree, so the loop terminates.

    Raises:
        NonIntegerInput: v has a non-integral entry.
    """
    if not v.is_integral():
        raise NonIntegerInput(f"standard_reduce needs integer entries, got {v}")
    if v.k < 3:
        return ReductionOutcome(v, v, (), ReductionStatus.TOO_FEW_POINTS, ())

    current = v
    steps: list[ReductionStep] = []
    while True:
        perm = sort_permutation(current)
        if not perm.is_identity():
            current = apply_op(perm, current)
            steps.append(ReductionStep(perm, current))
        if any(m < 0 for m in current.mults):
            status = ReductionStatus.NEGATIVE_ENTRY
            break
        delta = current.degree - sum(current.mults[:3], Fraction(0))
        if delta >= 0:
            status = ReductionStatus.REDUCED_NON_NEGATIVE
            break
        if current.degree <= 0:
            status = ReductionStatus.NON_POSITIVE_DEGREE
            break
        op = Reflect(1, 2, 3)
        current = apply_op(op, current)
        steps.append(ReductionStep(op, current))

    logger.debug("reduced %s -> %s in %d steps (%s)", v, current, len(steps), status.value)
    return ReductionOutcome(v, current, tuple(s.op for s in steps), status, tuple(steps))


def reduce_vector(v: ClassVector) -> tuple[ReductionOutcome, Fraction]:
    """standard_reduce after clearing denominators; returns the factor used."""
    factor = Fraction(lcm(*(x.denominator for x in v.entries)))
    return standard_reduce(scale(v, factor)), factor


# --- serialization -----------------------------------------------------------


def word_to_records(word: Sequence[CremonaOp]) -> list[dict[str, Any]]:
    """Certificate-file records; sorts must already be resolved."""
    records: list[dict[str, Any]] = []
    for op in word:
        if isinstance(op, Reflect):
            records.append({"op": "reflect", "i": op.i, "j": op.j, "k": op.k})
        elif isinstance(op, Permute):
            records.append({"op": "permute", "map": list(op.order)})
        else:
            raise UnresolvedSort("sorts are stored as their realized permutations")
    return records


def word_from_records(records: Any, location: str = "$.word") -> CremonaWord:
    """Inverse of word_to_records.

    Raises:
        SchemaError: unknown op or malformed fields.
    """
    if not isinstance(records, list):
        raise SchemaError("word must be a list", location)
    word: list[CremonaOp] = []
    for n, rec in enumerate(records):
        where = f"{location}[{n}]"
        if not isinstance(rec, dict):
            raise SchemaError("word entry must be an object", where)
        kind = rec.get("op")
        if kind == "reflect":
            try:
                idx = [rec["i"], rec["j"], rec["k"]]
            except KeyError as exc:
                raise SchemaError(f"missing field {exc.args[0]}", where) from None
            if not all(isinstance(x, int) and not isinstance(x, bool) for x in idx):
                raise SchemaError("reflection indices must be integers", where)
            word.append(Reflect(*idx))
        elif kind == "permute":
            order = rec.get("map")
            if not isinstance(order, list) or not all(
                isinstance(x, int) and not isinstance(x, bool) for x in order
            ):
                raise SchemaError("permute map must be a list of integers", where)
            word.append(Permute(tuple(order)))
        else:
            raise SchemaError(f"unknown op {kind!r}", where)
    return tuple(word)
