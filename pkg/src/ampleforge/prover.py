"""Certificate search: Cremona simplification plus glue decompositions.

The search is sound but incomplete. A vector that is nef may still come back
Inconclusive, since no decomposition order is known to always succeed.
"""

from __future__ import annotations

import logging
import threading
from collections import Counter, deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import inf, isqrt, lcm
from typing import TYPE_CHECKING, Iterator, Optional, Union

from ampleforge.certificates import (
    BaseLeaf,
    Certificate,
    Claim,
    CremonaNode,
    GlueNode,
    base_leaf,
    scale_node,
)
from ampleforge.cremona import Reflect, apply_op, standard_reduce
from ampleforge.families import FailReason, match_base, necessary_conditions
from ampleforge.lattice import (
    ClassVector,
    PositivityKind,
    primitive,
    scale,
    self_intersection,
    sorted_descending,
)

if TYPE_CHECKING:
    from ampleforge.config import ProbeConfig, SearchConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchLimits:
    """Bounds on a single prove() call.

    Attributes:
        max_depth: Deepest glue nesting; Cremona steps are free.
        node_budget: Expansions before giving up.
        min_inner_degree, max_inner_degree: Range of s for square-family
            inner vectors (s; 1^{s^2}) before scaling.
        jobs: Threads for root-level branches.
    """

    max_depth: int = 16
    node_budget: int = 1_000_000
    min_inner_degree: int = 1
    max_inner_degree: int = 64
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.max_depth < 0 or self.node_budget <= 0 or self.jobs <= 0:
            raise ValueError("search limits must be positive")
        if not 1 <= self.min_inner_degree <= self.max_inner_degree:
            raise ValueError("inner degree range must satisfy 1 <= min <= max")

    @classmethod
    def from_config(cls, config: SearchConfig) -> SearchLimits:
        return cls(
            max_depth=config.max_depth,
            node_budget=config.node_budget,
            min_inner_degree=config.min_inner_degree,
            max_inner_degree=config.max_inner_degree,
            jobs=config.jobs,
        )


@dataclass(frozen=True)
class Proved:
    """A certificate that verifies for the requested vector and kind."""

    certificate: Certificate


@dataclass(frozen=True)
class Disproved:
    """A necessary condition fails; the vector is not of the requested kind."""

    reason: FailReason


@dataclass(frozen=True)
class Inconclusive:
    """Depth or node budget ran out before a proof or disproof."""

    nodes_used: int


ProveOutcome = Union[Proved, Disproved, Inconclusive]


# --- candidate decompositions ------------------------------------------------


@dataclass(frozen=True)
class Decomposition:
    """v = glue(outer, site, inner) with inner a base-family nef vector."""

    outer: ClassVector
    site: int
    inner: ClassVector

    @property
    def covered(self) -> int:
        return self.inner.k


def _runs(mults: tuple[Fraction, ...]) -> Iterator[tuple[int, int, Fraction]]:
    """(start, length, value) for maximal runs of equal positive entries."""
    i = 0
    while i < len(mults):
        j = i
        while j + 1 < len(mults) and mults[j + 1] == mults[i]:
            j += 1
        if mults[i] > 0:
            yield i, j - i + 1, mults[i]
        i = j + 1


def _splice(v: ClassVector, start: int, covered: int, inner: ClassVector) -> Decomposition:
    outer = v.with_mults(v.mults[:start] + (inner.degree,) + v.mults[start + covered:])
    return Decomposition(outer, start + 1, inner)


def _two_heavy_degree(p: int, q: int, r: int) -> int:
    """Smallest d with d >= p + q and d^2 >= p^2 + q^2 + r."""
    d = p + q
    target = p * p + q * q + r
    root = isqrt(target)
    if root * root < target:
        root += 1
    return max(d, root)


def candidate_decompositions(
    v: ClassVector, limits: SearchLimits = SearchLimits()
) -> list[Decomposition]:
    """Splittings of sorted integer v into an outer vector and a nef inner vector.

    Inner vectors come from runs of equal entries m: m*(s; 1^{s^2}) for s in
    the configured degree range, m*(ceil(sqrt L); 1^L) over a whole run of
    length L, and contiguous two-heavy windows c*(d'; p, q, 1^r). Ordered
    so that self-intersection-0 inners come first, then wider coverage,
    then smaller inner degree.
    """
    found: list[Decomposition] = []
    seen: set[tuple[int, int, ClassVector]] = set()

    def emit(start: int, covered: int, inner: ClassVector) -> None:
        key = (start, covered, inner)
        if key not in seen:
            seen.add(key)
            found.append(_splice(v, start, covered, inner))

    for start, length, m in _runs(v.mults):
        if length < 2:
            continue
        for s in range(max(limits.min_inner_degree, 2), limits.max_inner_degree + 1):
            if s * s > length:
                break
            emit(start, s * s, ClassVector(m * s, (m,) * (s * s)))
        s = isqrt(length)
        if s * s < length:
            s += 1
            if limits.min_inner_degree <= s <= limits.max_inner_degree:
                emit(start, length, ClassVector(m * s, (m,) * length))

    # two-heavy windows (P, Q, c^r): c divides P and Q, P/c >= 2
    for start, length, c in _runs(v.mults):
        if start < 2:
            continue
        p_val, q_val = v.mults[start - 2], v.mults[start - 1]
        if p_val % c or q_val % c:
            continue
        p, q = int(p_val / c), int(q_val / c)
        if p < 2:
            continue
        d = _two_heavy_degree(p, q, length)
        if limits.min_inner_degree <= d <= limits.max_inner_degree:
            inner = ClassVector(c * d, (p_val, q_val) + (c,) * length)
            emit(start - 2, length + 2, inner)

    found.sort(key=lambda dec: (self_intersection(dec.inner) != 0, -dec.covered, dec.inner.degree))
    return found


# --- search ------------------------------------------------------------------


class _BudgetExceeded(Exception):
    pass


_Result = Union[Certificate, FailReason, None]


@dataclass
class _SharedState:
    limits: SearchLimits
    nodes: int = 0
    # (primitive sorted vector, kind) -> depth known to fail; inf = fails at every depth
    failures: dict[tuple[ClassVector, PositivityKind], float] = field(default_factory=dict)
    disproofs: dict[tuple[ClassVector, PositivityKind], FailReason] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)


class Prover:
    """Iterative-deepening search with a failure memo.

    One instance may be reused for several prove() calls; the memo is
    shared between them, which is sound because the search is
    deterministic in its inputs.
    """

    def __init__(self, limits: SearchLimits = SearchLimits()) -> None:
        self.limits = limits
        self._state = _SharedState(limits)
        self._local = threading.local()

    @property
    def nodes_used(self) -> int:
        return self._state.nodes

    def prove(self, v: ClassVector, kind: PositivityKind = PositivityKind.NEF) -> ProveOutcome:
        """Search for a certificate of v, or a disproof.

        Rational inputs are scaled to integers first and the certificate is
        wrapped in a ScaleNode back to v.
        """
        factor = Fraction(lcm(*(x.denominator for x in v.entries)))
        target = scale(v, factor) if factor != 1 else v
        self._state.nodes = 0
        try:
            result = self._deepen(target, kind)
        except _BudgetExceeded:
            logger.info("budget of %d nodes exhausted on %s", self.limits.node_budget, v)
            return Inconclusive(self._state.nodes)

        if isinstance(result, FailReason):
            logger.info("disproved %s %s: %s", kind.value, v, result)
            return Disproved(result)
        if result is None:
            logger.info("no certificate for %s within depth %d", v, self.limits.max_depth)
            return Inconclusive(self._state.nodes)
        if factor != 1:
            result = scale_node(1 / factor, result)
        logger.info("proved %s %s using %d nodes", kind.value, v, self._state.nodes)
        return Proved(result)

    def _deepen(self, v: ClassVector, kind: PositivityKind) -> _Result:
        result: _Result = None
        for depth in range(self.limits.max_depth + 1):
            self._local.cutoff = False
            result = self._search(v, kind, depth, fan_out=self.limits.jobs > 1)
            logger.debug(
                "depth %d: %d nodes, cutoff=%s", depth, self._state.nodes, self._local.cutoff
            )
            if result is not None or not self._local.cutoff:
                break
        return result

    def _tick(self) -> None:
        state = self._state
        with state.lock:
            state.nodes += 1
            if state.nodes > state.limits.node_budget:
                raise _BudgetExceeded

    def _search(self, v: ClassVector, kind: PositivityKind, depth: int, fan_out: bool) -> _Result:
        self._tick()
        check = necessary_conditions(v, kind)
        if isinstance(check, FailReason):
            return check
        witness = match_base(v, kind)
        if witness is not None:
            return BaseLeaf(Claim(v, kind), witness)

        key = (primitive(sorted_descending(v))[0], kind)
        state = self._state
        with state.lock:
            known = state.disproofs.get(key)
            failed_at = state.failures.get(key, -1)
        if known is not None:
            return FailReason(known.message, known.vector)
        if failed_at == inf:
            return None
        if failed_at >= depth:
            self._local.cutoff = True
            return None

        saved = self._local.cutoff
        self._local.cutoff = False
        result = self._simplify_or_expand(v, kind, depth, fan_out)
        subtree_cutoff = self._local.cutoff
        self._local.cutoff = saved or subtree_cutoff

        with state.lock:
            if isinstance(result, FailReason):
                state.disproofs[key] = result
            elif result is None:
                previous = state.failures.get(key, -1)
                state.failures[key] = max(previous, depth if subtree_cutoff else inf)
        return result

    def _simplify_or_expand(
        self, v: ClassVector, kind: PositivityKind, depth: int, fan_out: bool
    ) -> _Result:
        if v.k >= 3:
            outcome = standard_reduce(v)
            if outcome.status.disproves:
                return FailReason(
                    f"standard reduction ends in {outcome.status.value}", outcome.final
                )
            if outcome.final != v:
                child = self._search(outcome.final, kind, depth, fan_out)
                if child is None or isinstance(child, FailReason):
                    return child
                return CremonaNode(Claim(v, kind), outcome.word, child)
        return self._expand(v, kind, depth, fan_out)

    def _expand(self, v: ClassVector, kind: PositivityKind, depth: int, fan_out: bool) -> _Result:
        candidates = candidate_decompositions(v, self.limits)
        if not candidates:
            return None
        if depth == 0:
            self._local.cutoff = True
            return None

        if fan_out:
            outcomes = self._expand_parallel(candidates, kind, depth)
        else:
            outcomes = (self._search(dec.outer, kind, depth - 1, False) for dec in candidates)

        for dec, outer in zip(candidates, outcomes):
            if outer is None or isinstance(outer, FailReason):
                continue
            inner = base_leaf(dec.inner)
            return GlueNode(Claim(v, kind), outer, dec.site, inner)
        return None

    def _expand_parallel(
        self, candidates: list[Decomposition], kind: PositivityKind, depth: int
    ) -> list[_Result]:
        def run(dec: Decomposition) -> tuple[_Result, bool]:
            self._local.cutoff = False
            return self._search(dec.outer, kind, depth - 1, False), self._local.cutoff

        with ThreadPoolExecutor(max_workers=self.limits.jobs) as pool:
            pairs = list(pool.map(run, candidates))
        if any(cut for _, cut in pairs):
            self._local.cutoff = True
        return [result for result, _ in pairs]


def prove(
    v: ClassVector,
    kind: PositivityKind = PositivityKind.NEF,
    limits: SearchLimits = SearchLimits(),
) -> ProveOutcome:
    """One-shot search; see Prover.prove."""
    return Prover(limits).prove(v, kind)


# --- indecomposability probe -------------------------------------------------


class ProbeVerdict(Enum):
    NO_DECOMPOSITION_FOUND = "NoDecompositionFoundWithinBounds"
    DECOMPOSITION_FOUND = "DecompositionFound"


@dataclass(frozen=True)
class NearMiss:
    """A splitting where exactly one factor failed the filters."""

    member: ClassVector
    decomposition: Decomposition
    failed_factor: str
    reason: str


@dataclass(frozen=True)
class ProbeReport:
    """Result of a bounded orbit exploration.

    Attributes:
        verdict: Whether a splitting with both factors plausible was seen.
        witness: The orbit member and its splitting, when found.
        near_misses: Splittings rejected on one factor only.
        members_explored: Distinct sorted orbit members visited.
    """

    verdict: ProbeVerdict
    witness: Optional[tuple[ClassVector, Decomposition]]
    near_misses: tuple[NearMiss, ...]
    members_explored: int


def _plausibly_nef(v: ClassVector) -> Optional[str]:
    """None when v survives the necessary conditions and the reduction test."""
    check = necessary_conditions(v, PositivityKind.NEF)
    if isinstance(check, FailReason):
        return str(check)
    if v.k >= 3:
        outcome = standard_reduce(v)
        if outcome.status.disproves:
            return f"reduction ends in {outcome.status.value} at {outcome.final}"
    return None


def _orbit_neighbours(u: ClassVector) -> Iterator[ClassVector]:
    """Reflections of sorted u in one representative triple per distinct value triple."""
    positions: dict[Fraction, list[int]] = {}
    for j, m in enumerate(u.mults):
        positions.setdefault(m, []).append(j)
    counts = Counter(u.mults)
    values = sorted(counts, reverse=True)
    for a_i, a in enumerate(values):
        for b_i in range(a_i, len(values)):
            for c_i in range(b_i, len(values)):
                triple = (a, values[b_i], values[c_i])
                need = Counter(triple)
                if any(counts[val] < n for val, n in need.items()):
                    continue
                taken: dict[Fraction, int] = {}
                idx = []
                for val in triple:
                    idx.append(positions[val][taken.get(val, 0)] + 1)
                    taken[val] = taken.get(val, 0) + 1
                yield sorted_descending(apply_op(Reflect(*idx), u))


def indecomposability_probe(
    v: ClassVector,
    degree_bound: int = 100,
    max_members: int = 500,
    limits: SearchLimits = SearchLimits(),
) -> ProbeReport:
    """Breadth-first walk of the Cremona orbit looking for a glue splitting.

    A member counts as decomposable when some candidate splitting has both
    factors with fewer slots and both passing the nef filters. Finding none
    is only bounded evidence.
    """
    start = sorted_descending(v)
    queue: deque[ClassVector] = deque([start])
    seen = {start}
    near: list[NearMiss] = []
    explored = 0

    while queue and explored < max_members:
        u = queue.popleft()
        explored += 1
        for dec in candidate_decompositions(u, limits):
            if dec.outer.k >= u.k or dec.inner.k >= u.k:
                continue
            outer_problem = _plausibly_nef(dec.outer)
            inner_problem = _plausibly_nef(dec.inner)
            if outer_problem is None and inner_problem is None:
                logger.info("probe: %s splits as %s #%d %s", u, dec.outer, dec.site, dec.inner)
                return ProbeReport(
                    ProbeVerdict.DECOMPOSITION_FOUND, (u, dec), tuple(near), explored
                )
            if outer_problem is None or inner_problem is None:
                which, why = (
                    ("outer", outer_problem) if outer_problem else ("inner", inner_problem)
                )
                near.append(NearMiss(u, dec, which, str(why)))
        if u.k < 3:
            continue
        for w in _orbit_neighbours(u):
            if 0 < w.degree <= degree_bound and w not in seen:
                seen.add(w)
                queue.append(w)

    logger.info("probe: no splitting among %d orbit members of %s", explored, v)
    return ProbeReport(ProbeVerdict.NO_DECOMPOSITION_FOUND, None, tuple(near), explored)


def probe_from_config(v: ClassVector, probe: ProbeConfig, search: SearchConfig) -> ProbeReport:
    return indecomposability_probe(
        v, probe.degree_bound, probe.max_members, SearchLimits.from_config(search)
    )
