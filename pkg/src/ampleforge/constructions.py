"""Explicit certificates for the homogeneous families with known remainder bounds.

Each builder follows a fixed recipe: glue a scaled square-family vector
into the first slot, push the rest through a chain of reflections
R(1, 2j, 2j+1), and land on a base-family vector.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Sequence

from ampleforge.certificates import (
    Certificate,
    Claim,
    CremonaNode,
    assume_leaf,
    base_leaf,
    glue_fold_node,
    glue_node,
    scale_node,
)
from ampleforge.cremona import (
    CremonaOp,
    Permute,
    Reflect,
    SortDescending,
    apply_word_recording,
)
from ampleforge.errors import PreconditionViolated
from ampleforge.lattice import ClassVector, PositivityKind, homogeneous

logger = logging.getLogger(__name__)


def _pair_chain(first: int, pairs: int) -> list[CremonaOp]:
    """R(1, first, first+1), R(1, first+2, first+3), ... (pairs reflections)."""
    return [Reflect(1, first + 2 * j, first + 2 * j + 1) for j in range(pairs)]


def _reduce_to_base(start: ClassVector, word: Sequence[CremonaOp]) -> Certificate:
    """CremonaNode for start whose child is a base leaf on the sorted image."""
    image, resolved = apply_word_recording([*word, SortDescending()], start)
    resolved = tuple(
        op for op in resolved if not (isinstance(op, Permute) and op.is_identity())
    )
    return CremonaNode(Claim(start, PositivityKind.NEF), resolved, base_leaf(image))


def _square_inner(scale: int, s: int) -> Certificate:
    """scale * (s; 1^{s^2})."""
    return base_leaf(homogeneous(scale * s, scale, s * s))


def _drop_last(cert: Certificate, count: int) -> Certificate:
    """Delete the last `count` slots by gluing the bare plane class of their value."""
    for _ in range(count):
        v = cert.claim.vector
        cert = glue_node(cert, v.k, base_leaf(ClassVector(v.mults[-1])))
    return cert


def asymp1_part1(a: int, l: int, extra_unit: bool = False) -> Certificate:
    """Nef certificate for (a^2 l + 1; a^{a^2 l^2 + 2l}).

    With extra_unit the vector carries one more slot of multiplicity 1,
    which the reflection chain never touches.

    Raises:
        PreconditionViolated: a*l < 2 or a non-positive parameter.
    """
    if a < 1 or l < 1 or a * l < 2:
        raise PreconditionViolated(f"part 1 needs a, l >= 1 and a*l >= 2, got a={a}, l={l}")
    degree = a * a * l + 1
    n = 2 * a * l + 2 * l - 1
    unit = (1,) if extra_unit else ()
    v1 = ClassVector(degree, (a * (a * l - 1),) + (a,) * n + unit)
    chain = _reduce_to_base(v1, _pair_chain(2, (n - 1) // 2))
    cert = glue_node(chain, 1, _square_inner(a, a * l - 1))
    logger.debug("part 1 (a=%d, l=%d): %s", a, l, cert.claim.vector)
    return cert


def asymp1_part2(a: int, l: int) -> Certificate:
    """Nef certificate for (a^2 l - 1; a^{a^2 l^2 - 2l}) via two glue stages.

    Raises:
        PreconditionViolated: unless a >= 2, a*l >= 3 and a*l - l - 2 >= 0.
    """
    if a < 2 or l < 1 or a * l < 3 or a * l - l - 2 < 0:
        raise PreconditionViolated(
            f"part 2 needs a >= 2, a*l >= 3 and a*l - l >= 2, got a={a}, l={l}"
        )
    t = a * l - l - 1
    big = a * a * l - 2 * a * l + l + 1

    # second stage: v2 reduces to (a+l-1; l-1, 1^{2al-2}, a-1)
    v2 = ClassVector(big, ((a - 1) * t,) + (a - 1,) * (2 * a * l - 1))
    stage2 = _reduce_to_base(v2, _pair_chain(2, a * l - 1))
    u2 = base_leaf(ClassVector((a - 1) * t, ((a - 1) * (t - 1),) + (a - 1,) * (2 * t - 1)))
    v1_image = glue_node(stage2, 1, u2)

    # first stage: v1 maps onto v1_image with delta = -1 at every step
    n1 = 4 * a * l - 2 * l - 4
    v1 = ClassVector(a * a * l - 1, (a * (a * l - 2),) + (a,) * n1)
    word = tuple(_pair_chain(2, n1 // 2))
    stage1 = CremonaNode(Claim(v1, PositivityKind.NEF), word, v1_image)
    cert = glue_node(stage1, 1, _square_inner(a, a * l - 2))
    logger.debug("part 2 (a=%d, l=%d): %s", a, l, cert.claim.vector)
    return cert


def _odd_part(a: int) -> int:
    while a % 2 == 0:
        a //= 2
    return a


def _part3_with_unit(a: int, l: int) -> Certificate:
    """(2a^2 l + 1; (2a)^{a^2 l^2 + l}, 1), recursing on the power of two in a."""
    if l % 2 == 0:
        return asymp1_part1(2 * a, l // 2, extra_unit=True)

    if a % 2 == 1:
        # w reduces to ((l+1)/2 + a; (l-1)/2 - a, 1^{2al+l-1}, 1)
        count = 2 * a * l + l - 1
        w = ClassVector(2 * a * a * l + 1, (2 * a * (a * l - 1),) + (2 * a,) * count + (1,))
        chain = _reduce_to_base(w, _pair_chain(2, count // 2))
        return glue_node(chain, 1, _square_inner(2 * a, a * l - 1))

    half = a * l // 2
    x = half * half + l
    smaller = scale_node(2, _part3_with_unit(a // 2, l))
    v2_image = glue_node(smaller, x + 1, base_leaf(homogeneous(2, 1, 4)))
    v1 = ClassVector(2 * a * a * l + 1, (a * a * l,) * 3 + (2 * a,) * x + (1,))
    _, word = apply_word_recording([Reflect(1, 2, 3), SortDescending()], v1)
    cert: Certificate = CremonaNode(Claim(v1, PositivityKind.NEF), word, v2_image)
    inner = _square_inner(2 * a, half)
    for site in (3, 2, 1):
        cert = glue_node(cert, site, inner)
    return cert


def asymp1_part3(a: int, l: int, with_unit: bool = False) -> Certificate:
    """Nef certificate for (2a^2 l + 1; (2a)^{a^2 l^2 + l}).

    With with_unit the certificate concludes the vector with a trailing
    1-slot, whose self-intersection is 0.

    Raises:
        PreconditionViolated: unless l > 1 and l > 2b where b is the odd
            part of a.
    """
    if a < 1 or l <= 1 or l <= 2 * _odd_part(a):
        raise PreconditionViolated(
            f"part 3 needs l > 1 and l > 2 * odd_part(a), got a={a}, l={l}"
        )
    cert = _part3_with_unit(a, l)
    if not with_unit:
        cert = _drop_last(cert, 1)
    logger.debug("part 3 (a=%d, l=%d): %s", a, l, cert.claim.vector)
    return cert


def coef2_certificate(d: int, n: int | None = None) -> Certificate:
    """Nef certificate for (d; 2^n), n <= floor(d^2 / 4) (default: equal).

    Raises:
        PreconditionViolated: d < 2, d = 3, or n out of range.
    """
    if d < 2:
        raise PreconditionViolated(f"coef2 needs d >= 2, got {d}")
    full = d * d // 4
    if n is None:
        n = full
    if not 0 <= n <= full:
        raise PreconditionViolated(f"coef2 needs 0 <= n <= {full}, got {n}")
    k = d // 2
    if d % 2 == 0:
        cert: Certificate = scale_node(2, base_leaf(homogeneous(k, 1, k * k)))
    elif k == 1:
        raise PreconditionViolated("coef2 cannot certify d = 3 with this calculus")
    elif k % 2 == 0:
        cert = asymp1_part1(2, k // 2)
    else:
        cert = asymp1_part3(1, k)
    return _drop_last(cert, full - n)


def nagata_compose(n1: int, n2: int, d: int, m: int, x: Fraction | int) -> Certificate:
    """Conditional certificate for (d; m^{n1*n2}) from two labelled hypotheses.

    Assumes (x; m^{n1}) and (d; x^{n2}) are nef and glues the first into
    every slot of the second.

    Raises:
        PreconditionViolated: parameters not positive, or x outside the
            window d^2 > x^2 n2 and x^2 > m^2 n1.
    """
    x = Fraction(x)
    if min(n1, n2, d, m) <= 0 or x <= 0:
        raise PreconditionViolated("nagata composition needs positive parameters")
    if not (d * d > x * x * n2 and x * x > m * m * n1):
        raise PreconditionViolated(
            f"x = {x} must satisfy {d}^2 > x^2*{n2} and x^2 > {m}^2*{n1}"
        )
    inner = assume_leaf(homogeneous(x, m, n1), f"nagata({n1})")
    outer = assume_leaf(homogeneous(d, x, n2), f"nagata({n2})")
    return glue_fold_node(outer, inner)
