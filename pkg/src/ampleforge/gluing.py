"""The #_i splice of one vector into a slot of another."""

from __future__ import annotations

from ampleforge.errors import CremonaIndexError, DegreeMismatch
from ampleforge.lattice import ClassVector


def glue(outer: ClassVector, site: int, inner: ClassVector) -> ClassVector:
    """Replace slot `site` (1-based) of outer with the multiplicities of inner.

    The slot value must equal inner's degree exactly. An inner vector with
    no slots deletes the site.

    Raises:
        CremonaIndexError: site outside 1..k(outer).
        DegreeMismatch: m_site(outer) != degree(inner).
    """
    if not 1 <= site <= outer.k:
        raise CremonaIndexError(f"glue site {site} outside 1..{outer.k}")
    slot_value = outer.mults[site - 1]
    if slot_value != inner.degree:
        raise DegreeMismatch(site, slot_value, inner.degree)
    return outer.with_mults(outer.mults[: site - 1] + inner.mults + outer.mults[site:])


def glue_fold(outer: ClassVector, inner: ClassVector) -> ClassVector:
    """Glue inner into every slot of outer, from the last slot down to the first.

    Raises:
        DegreeMismatch: naming the first slot whose value is not degree(inner).
    """
    for site, m in enumerate(outer.mults, start=1):
        if m != inner.degree:
            raise DegreeMismatch(site, m, inner.degree)
    result = outer
    for site in range(outer.k, 0, -1):
        result = glue(result, site, inner)
    return result
