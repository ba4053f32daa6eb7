"""Tests for ampleforge.gluing."""

import pytest
from hypothesis import given, strategies as st

from ampleforge.errors import CremonaIndexError, DegreeMismatch
from ampleforge.gluing import glue, glue_fold
from ampleforge.lattice import ClassVector, homogeneous, self_intersection, vector


class TestGlue:
    """Tests for single-site gluing."""

    def test_splices_at_site(self):
        """Verify the inner multiplicities replace the site slot in place."""
        assert glue(vector(10, 3, 6, 3), 2, homogeneous(6, 3, 4)) == vector(10, 3, 3, 3, 3, 3, 3)

    def test_first_and_last_site(self):
        """Verify gluing at both ends of the slot list."""
        outer = vector(5, 2, 1)
        assert glue(outer, 1, vector(2, 1, 1)) == vector(5, 1, 1, 1)
        assert glue(outer, 2, vector(1, 0)) == vector(5, 2, 0)

    def test_pullback_inner_drops_slot(self):
        """Verify that a k = 0 inner deletes the site."""
        assert glue(vector(5, 2, 1), 2, ClassVector(1)) == vector(5, 2)

    def test_self_intersection_adds(self):
        """Verify <glued, glued> = <outer, outer> + <inner, inner>."""
        outer, inner = vector(10, 6, 3, 3, 3, 3, 3, 3, 3), homogeneous(6, 3, 4)
        glued = glue(outer, 1, inner)
        assert glued == homogeneous(10, 3, 11)
        assert self_intersection(glued) == self_intersection(outer) + self_intersection(inner)

    def test_degree_mismatch(self):
        """Verify that the inner degree must equal the slot value."""
        with pytest.raises(DegreeMismatch) as exc_info:
            glue(vector(10, 6, 3), 2, homogeneous(6, 3, 4))
        assert exc_info.value.site == 2
        assert str(exc_info.value).startswith("DegreeMismatch:")

    @pytest.mark.parametrize("site", [0, 3, -1])
    def test_site_out_of_range(self, site):
        """Verify that sites are 1-based within 1..k."""
        with pytest.raises(CremonaIndexError):
            glue(vector(5, 2, 1), site, vector(2, 1))


class TestGlueFold:
    """Tests for gluing one inner vector into every slot."""

    def test_fold(self):
        """Verify (10; 3^4) folded with (3; 1^9) is (10; 1^36)."""
        assert glue_fold(homogeneous(10, 3, 4), homogeneous(3, 1, 9)) == homogeneous(10, 1, 36)

    def test_fold_checks_every_slot(self):
        """Verify that any mismatching slot raises before gluing."""
        with pytest.raises(DegreeMismatch) as exc_info:
            glue_fold(vector(10, 3, 3, 2), homogeneous(3, 1, 9))
        assert exc_info.value.site == 3

    @given(
        st.integers(min_value=0, max_value=12),
        st.lists(st.integers(min_value=0, max_value=5), min_size=1, max_size=4),
        st.lists(st.integers(min_value=0, max_value=4), max_size=4),
    )
    def test_fold_self_intersection(self, d, slots, inner_mults):
        """Verify <fold, fold> = <outer, outer> + k(outer) * <inner, inner>."""
        m = slots[0]
        outer = homogeneous(d, m, len(slots))
        inner = ClassVector(m, tuple(inner_mults))
        folded = glue_fold(outer, inner)
        assert folded.k == outer.k * inner.k
        assert self_intersection(folded) == (
            self_intersection(outer) + outer.k * self_intersection(inner)
        )


def _inner_for(draw, degree):
    mults = draw(st.lists(st.integers(min_value=0, max_value=4), max_size=3))
    return ClassVector(degree, tuple(mults))


@st.composite
def glue_cases(draw):
    """An outer vector with two distinct sites and an inner vector for each."""
    mults = draw(st.lists(st.integers(min_value=0, max_value=6), min_size=2, max_size=5))
    outer = ClassVector(draw(st.integers(min_value=0, max_value=12)), tuple(mults))
    i = draw(st.integers(min_value=1, max_value=outer.k - 1))
    j = draw(st.integers(min_value=i + 1, max_value=outer.k))
    return outer, i, j, _inner_for(draw, mults[i - 1]), _inner_for(draw, mults[j - 1])


class TestGlueProperties:
    """Algebraic properties of gluing."""

    @given(glue_cases())
    def test_self_intersection_additive(self, case):
        """Verify <v #_i u> = <v, v> + <u, u> at any site."""
        outer, i, _, u, _ = case
        glued = glue(outer, i, u)
        assert self_intersection(glued) == self_intersection(outer) + self_intersection(u)

    @given(glue_cases())
    def test_disjoint_sites_commute(self, case):
        """Verify gluing at i < j gives the same vector in either order."""
        outer, i, j, u, w = case
        first_i = glue(glue(outer, i, u), j + u.k - 1, w)
        first_j = glue(glue(outer, j, w), i, u)
        assert first_i == first_j

