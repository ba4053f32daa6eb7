"""Tests for ampleforge.constructions."""

from fractions import Fraction

import pytest

from ampleforge.certificates import (
    AssumeLeaf,
    BaseLeaf,
    ConditionallyValid,
    Invalid,
    Valid,
    verify,
    walk,
)
from ampleforge.constructions import (
    asymp1_part1,
    asymp1_part2,
    asymp1_part3,
    coef2_certificate,
    nagata_compose,
)
from ampleforge.errors import PreconditionViolated
from ampleforge.gluing import glue_fold
from ampleforge.lattice import ClassVector, PositivityKind, homogeneous, self_intersection
from ampleforge.pell import remainder_bound

NEF = PositivityKind.NEF


def _assert_valid(cert, expected):
    assert cert.claim.vector == expected
    assert verify(cert) == Valid(expected, NEF)


class TestPart1:
    """Tests for (a^2 l + 1; a^{a^2 l^2 + 2l})."""

    @pytest.mark.parametrize("a, l, expected", [
        (1, 2, homogeneous(3, 1, 8)),
        (2, 1, homogeneous(5, 2, 6)),
        (2, 2, homogeneous(9, 2, 20)),
        (3, 1, homogeneous(10, 3, 11)),
        (1, 5, homogeneous(6, 1, 35)),
    ])
    def test_valid(self, a, l, expected):
        """Verify the certificate concludes the family vector and verifies."""
        _assert_valid(asymp1_part1(a, l), expected)

    def test_self_intersection_one(self):
        """Verify the family vectors have self-intersection 1."""
        assert self_intersection(asymp1_part1(3, 2).claim.vector) == 1

    def test_extra_unit(self):
        """Verify the optional trailing 1-slot."""
        cert = asymp1_part1(2, 1, extra_unit=True)
        _assert_valid(cert, ClassVector(5, (2,) * 6 + (1,)))

    @pytest.mark.parametrize("a, l", [(1, 1), (0, 3), (2, 0)])
    def test_preconditions(self, a, l):
        """Verify a*l >= 2 is required."""
        with pytest.raises(PreconditionViolated):
            asymp1_part1(a, l)


class TestPart2:
    """Tests for (a^2 l - 1; a^{a^2 l^2 - 2l})."""

    @pytest.mark.parametrize("a, l, expected", [
        (2, 2, homogeneous(7, 2, 12)),
        (3, 1, homogeneous(8, 3, 7)),
        (3, 2, homogeneous(17, 3, 32)),
        (2, 3, homogeneous(11, 2, 30)),
    ])
    def test_valid(self, a, l, expected):
        """Verify the two-stage certificate verifies."""
        _assert_valid(asymp1_part2(a, l), expected)

    @pytest.mark.parametrize("a, l", [(2, 1), (1, 5)])
    def test_preconditions(self, a, l):
        """Verify small parameters are refused."""
        with pytest.raises(PreconditionViolated):
            asymp1_part2(a, l)


class TestPart3:
    """Tests for (2a^2 l + 1; (2a)^{a^2 l^2 + l})."""

    @pytest.mark.parametrize("a, l, expected", [
        (1, 3, homogeneous(7, 2, 12)),
        (1, 5, homogeneous(11, 2, 30)),
        (1, 4, homogeneous(9, 2, 20)),
        (2, 3, homogeneous(25, 4, 39)),
        (2, 5, homogeneous(41, 4, 105)),
    ])
    def test_valid(self, a, l, expected):
        """Verify part 3, including the recursive even-a branch."""
        _assert_valid(asymp1_part3(a, l), expected)

    def test_with_unit(self):
        """Verify the unit-slot variant has self-intersection 0."""
        cert = asymp1_part3(1, 3, with_unit=True)
        _assert_valid(cert, ClassVector(7, (2,) * 12 + (1,)))
        assert self_intersection(cert.claim.vector) == 0
        assert self_intersection(asymp1_part3(1, 3).claim.vector) == 1

    def test_chain_ends_on_square_family(self):
        """Verify the odd-a chain lands on (3; 1^9, 0) after sorting."""
        cert = asymp1_part3(1, 3, with_unit=True)
        leaves = [node.claim.vector for _, node in walk(cert) if isinstance(node, BaseLeaf)]
        assert ClassVector(3, (1,) * 9 + (0,)) in leaves

    @pytest.mark.parametrize("a, l", [(1, 2), (3, 6), (1, 1)])
    def test_preconditions(self, a, l):
        """Verify l > 2 * odd_part(a) and l > 1."""
        with pytest.raises(PreconditionViolated):
            asymp1_part3(a, l)


class TestCoef2:
    """Tests for (d; 2^n)."""

    @pytest.mark.parametrize("d, expected", [
        (2, homogeneous(2, 2, 1)),
        (4, homogeneous(4, 2, 4)),
        (5, homogeneous(5, 2, 6)),
        (7, homogeneous(7, 2, 12)),
        (9, homogeneous(9, 2, 20)),
    ])
    def test_full(self, d, expected):
        """Verify the default n = floor(d^2 / 4)."""
        _assert_valid(coef2_certificate(d), expected)

    def test_fewer_slots(self):
        """Verify smaller n drops trailing slots."""
        _assert_valid(coef2_certificate(7, 5), homogeneous(7, 2, 5))
        _assert_valid(coef2_certificate(6, 0), ClassVector(6))

    @pytest.mark.parametrize("d, n", [(3, None), (1, None), (7, 13), (7, -1)])
    def test_preconditions(self, d, n):
        """Verify d = 3 and out-of-range n are refused."""
        with pytest.raises(PreconditionViolated):
            coef2_certificate(d, n)

    @pytest.mark.slow
    @pytest.mark.parametrize("d", range(4, 32))
    def test_sweep(self, d):
        """Verify every d from 4 to 31."""
        _assert_valid(coef2_certificate(d), homogeneous(d, 2, d * d // 4))


class TestNagata:
    """Tests for conditional composition."""

    def test_sixteen_by_sixteen(self):
        """Verify (17; 1^256) from two labelled 16-point hypotheses."""
        cert = nagata_compose(16, 16, 17, 1, Fraction(33, 8))
        assert cert.claim.vector == homogeneous(17, 1, 256)
        x = Fraction(33, 8)
        assert cert.claim.vector == glue_fold(homogeneous(17, x, 16), homogeneous(x, 1, 16))
        verdict = verify(cert)
        assert verdict == ConditionallyValid(homogeneous(17, 1, 256), NEF,
                                             frozenset({"nagata(16)"}))
        assert isinstance(verify(cert, strict=True), Invalid)

    def test_nine_by_nine(self):
        """Verify (10; 1^81) with x = 31/10."""
        cert = nagata_compose(9, 9, 10, 1, Fraction(31, 10))
        assert cert.claim.vector == homogeneous(10, 1, 81)
        assert isinstance(verify(cert), ConditionallyValid)
        labels = {node.label for _, node in walk(cert) if isinstance(node, AssumeLeaf)}
        assert labels == {"nagata(9)"}

    @pytest.mark.parametrize("x", [Fraction(4), Fraction(5)])
    def test_window(self, x):
        """Verify x must satisfy d^2 > x^2 n2 and x^2 > m^2 n1."""
        with pytest.raises(PreconditionViolated):
            nagata_compose(16, 16, 17, 1, x)


def _grid(limit, slow_from):
    """(a, l) pairs up to limit; pairs with a or l >= slow_from are marked slow."""
    pairs = []
    for a in range(1, limit + 1):
        for l in range(1, limit + 1):
            marks = [pytest.mark.slow] if max(a, l) >= slow_from else []
            pairs.append(pytest.param(a, l, marks=marks, id=f"a{a}-l{l}"))
    return pairs


class TestFamilyGrid:
    """Every admissible (a, l) up to 6 certifies the exact family vector and bound."""

    @pytest.mark.parametrize("a, l", _grid(6, 4))
    def test_part1(self, a, l):
        """Verify part 1 vectors, self-intersection 1 and bound 1/(a^2 l + 1)^2."""
        if a * l < 2:
            return
        d = a * a * l + 1
        expected = homogeneous(d, a, a * a * l * l + 2 * l)
        cert = asymp1_part1(a, l)
        _assert_valid(cert, expected)
        assert self_intersection(expected) == 1
        assert remainder_bound(expected) == Fraction(1, d * d)

    @pytest.mark.parametrize("a, l", _grid(6, 4))
    def test_part2(self, a, l):
        """Verify part 2 vectors, self-intersection 1 and bound 1/(a^2 l - 1)^2."""
        try:
            cert = asymp1_part2(a, l)
        except PreconditionViolated:
            return
        d = a * a * l - 1
        expected = homogeneous(d, a, a * a * l * l - 2 * l)
        _assert_valid(cert, expected)
        assert self_intersection(expected) == 1
        assert remainder_bound(expected) == Fraction(1, d * d)

    @pytest.mark.parametrize("a, l", _grid(6, 4))
    def test_part3(self, a, l):
        """Verify part 3 vectors with and without the unit slot and bound 1/(2a^2 l + 1)^2."""
        try:
            cert = asymp1_part3(a, l)
        except PreconditionViolated:
            return
        d = 2 * a * a * l + 1
        expected = homogeneous(d, 2 * a, a * a * l * l + l)
        _assert_valid(cert, expected)
        assert self_intersection(expected) == 1
        assert remainder_bound(expected) == Fraction(1, d * d)
        with_unit = asymp1_part3(a, l, with_unit=True)
        _assert_valid(with_unit, ClassVector(d, expected.mults + (1,)))
        assert self_intersection(with_unit.claim.vector) == 0

    def test_grid_is_not_vacuous(self):
        """Verify the admissible small parameters are all accepted."""
        for a, l in [(2, 2), (3, 1), (2, 3), (3, 2)]:
            asymp1_part2(a, l)
        for a, l in [(1, 3), (1, 4), (1, 5), (2, 3), (2, 5)]:
            asymp1_part3(a, l)
