from __future__ import annotations

from fractions import Fraction

import pytest
import sympy
from hypothesis import assume, given
from hypothesis import strategies as st

from orbitrep.dynamics import (
    Interval,
    MapSpec,
    address,
    apply_map,
    branch_inverse,
    branch_structure,
    integer_part_branch_count,
    itinerary,
    kneading_data,
    lateral_itinerary,
    partition_from_points,
)
from orbitrep.errors import BoundaryHit, DomainError
from orbitrep.numeric import parse_scalar, rational, scalar_floor, surd

from conftest import SQRT2_MINUS_1, spec_of, unit_fractions, unit_points

DOUBLING = spec_of("2", "0")
FEATURED = spec_of("2", "sqrt(2)-1")
THREE_HALVES = spec_of("3/2", "0")


def frac_map(beta: Fraction, alpha: Fraction, x: Fraction) -> Fraction:
    """Independent oracle on plain fractions."""
    y = beta * x + alpha
    return y - (y.numerator // y.denominator)


class TestMapSpec:
    @pytest.mark.parametrize("beta,alpha", [("1/2", "0"), ("2", "1"), ("2", "-1/4"), ("0", "0")])
    def test_rejects_out_of_range(self, beta, alpha):
        with pytest.raises(DomainError):
            spec_of(beta, alpha)

    def test_accepts_rotation(self):
        assert spec_of("1", "1/4").beta == 1


class TestBranchStructure:
    def test_featured(self):
        bs = branch_structure(FEATURED)
        assert bs.n == 3
        s2 = sympy.sqrt(2)
        want = [(2 - s2) / 2, (3 - s2) / 2]  # oracle: (k - alpha) / beta in sympy
        assert bs.breakpoints == (surd(1, Fraction(-1, 2), 2), surd(Fraction(3, 2), Fraction(-1, 2), 2))
        for g, w in zip(bs.breakpoints, want):
            assert sympy.simplify(sympy.sympify(str(g)) - w) == 0
        assert bs.offsets == (0, 1, 2)

    def test_doubling(self):
        bs = branch_structure(DOUBLING)
        assert bs.n == 2 and bs.breakpoints == (rational(1, 2),)
        assert all(img.left == 0 and img.right == 1 for img in bs.images)

    def test_three_halves(self):
        bs = branch_structure(THREE_HALVES)
        assert bs.breakpoints == (rational(2, 3),)
        assert bs.images[0] == Interval(rational(0), rational(1))
        assert bs.images[1] == Interval(rational(0), rational(1, 2))

    def test_general_rule_exceeds_integer_part_rule(self):
        spec = spec_of("5/2", "3/4")  # beta + alpha = 13/4 > [beta] + 1
        bs = branch_structure(spec)
        assert bs.n == 4
        assert integer_part_branch_count(spec) == 3

    def test_integer_part_rule_agrees_on_featured(self):
        assert integer_part_branch_count(FEATURED) == 3
        assert integer_part_branch_count(DOUBLING) == 2

    def test_invariants(self, battery_spec):
        bs = branch_structure(battery_spec)
        assert bs.n == len(bs.breakpoints) + 1
        assert list(bs.offsets) == sorted(set(bs.offsets)) and bs.offsets[0] == 0
        for c in bs.breakpoints:
            v = battery_spec.beta * c + battery_spec.alpha
            assert v == scalar_floor(v)
        for iv, img in zip(bs.intervals, bs.images):
            assert 0 <= img.left < img.right <= 1
        # interior branches with full images exactly when both ends are breakpoints
        for k in range(1, bs.n - 1):
            assert bs.images[k].left == 0 and bs.images[k].right == 1


class TestApplyMap:
    def test_examples(self):
        assert apply_map(DOUBLING, rational(3, 4)) == rational(1, 2)
        assert apply_map(FEATURED, rational(1, 3)) == surd(Fraction(-4, 3), 1, 2)
        assert apply_map(DOUBLING, 1) == 0

    def test_outside_domain(self):
        with pytest.raises(DomainError):
            apply_map(DOUBLING, rational(3, 2))

    @given(unit_fractions, st.fractions(min_value=1, max_value=4, max_denominator=7),
           st.fractions(min_value=0, max_value=1, max_denominator=9).filter(lambda a: a < 1))
    def test_matches_fraction_oracle(self, x, beta, alpha):
        spec = MapSpec(rational(beta), rational(alpha))
        assert apply_map(spec, rational(x)) == rational(frac_map(beta, alpha, x))

    @given(unit_points(), unit_points(), unit_points())
    def test_increasing_on_branches(self, x, y, z):
        bs = branch_structure(FEATURED)
        assume(len({x, y, z}) == 3)
        a, b, c = sorted({x, y, z})
        if bs.branch_index(a) == bs.branch_index(c):
            assert apply_map(FEATURED, a) < apply_map(FEATURED, b) < apply_map(FEATURED, c)


class TestBranchInverse:
    def test_examples(self):
        bs = branch_structure(DOUBLING)
        assert branch_inverse(bs, 1, rational(1, 3)) == rational(1, 6)
        assert branch_inverse(bs, 2, rational(1, 3)) == rational(2, 3)
        assert branch_inverse(branch_structure(THREE_HALVES), 2, rational(3, 4)) is None

    @given(unit_points())
    def test_inverse_identities(self, y):
        bs = branch_structure(FEATURED)
        for k in range(1, bs.n + 1):
            x = branch_inverse(bs, k, y)
            if x is not None:
                assert bs.intervals[k - 1].left <= x < bs.intervals[k - 1].right
                assert apply_map(FEATURED, x) == y
        k = bs.branch_index(y)
        assert branch_inverse(bs, k, apply_map(FEATURED, y)) == y


class TestAddress:
    def test_examples(self):
        halves = partition_from_points([rational(1, 2)])
        assert address(halves, rational(1, 3)) == 1
        with pytest.raises(BoundaryHit):
            address(halves, rational(1, 2))
        assert address(branch_structure(FEATURED), rational(9, 10)) == 3

    @pytest.mark.parametrize("x", [0, 1])
    def test_unit_interval_ends_are_endpoints(self, x):
        with pytest.raises(BoundaryHit):
            address(branch_structure(DOUBLING), x)


class TestItinerary:
    def test_one_third(self):
        rec = itinerary(DOUBLING, rational(1, 3), 6)
        assert rec.symbols == (1, 2, 1, 2, 1, 2)
        assert rec.periodicity == (0, 2)

    def test_one_fifth(self):
        rec = itinerary(DOUBLING, rational(1, 5), 5)
        assert rec.symbols == (1, 1, 2, 2, 1)
        assert rec.periodicity == (0, 4)

    def test_boundary(self):
        with pytest.raises(BoundaryHit) as info:
            itinerary(DOUBLING, rational(1, 2), 2)
        assert info.value.step == 0

    def test_boundary_later(self):
        with pytest.raises(BoundaryHit) as info:
            itinerary(DOUBLING, rational(1, 4), 3)
        assert info.value.step == 1

    def test_custom_partition(self):
        thirds = partition_from_points([rational(1, 3), rational(2, 3)])
        rec = itinerary(DOUBLING, rational(1, 5), 4, partition=thirds)
        assert rec.symbols == (1, 2, 3, 2)

    @given(unit_points())
    def test_conjugacy(self, x):
        assume(x != 0)
        try:
            rec = itinerary(FEATURED, x, 10)
        except BoundaryHit:
            return
        shifted = itinerary(FEATURED, apply_map(FEATURED, x), 9)
        assert shifted.symbols == rec.symbols[1:]


class TestKneading:
    def test_doubling(self):
        recs = {r.label: r for r in kneading_data(DOUBLING, 6)}
        assert recs["f(c1+)"].symbols == (1,) * 6
        assert recs["f(c1-)"].symbols == (2,) * 6
        assert recs["0"].symbols == (1,) * 6 and recs["0"].periodicity == (0, 1)
        assert recs["1"].symbols == (2,) * 6

    def test_featured_zero_orbit_starts_in_middle_branch(self):
        rec = lateral_itinerary(FEATURED, 0, "+", 4)
        assert rec.symbols[0] == 1
        assert rec.points[1] == SQRT2_MINUS_1
        assert rec.symbols[1] == 2  # sqrt(2)-1 lies in the middle cell

    def test_lateral_values_are_exact_branch_limits(self):
        bs = branch_structure(FEATURED)
        recs = kneading_data(FEATURED, 3)
        for j, c in enumerate(bs.breakpoints):
            plus, minus = recs[2 * j], recs[2 * j + 1]
            assert plus.points[0] == 0 and minus.points[0] == 1

    def test_needs_exact_spec(self):
        with pytest.raises(DomainError):
            kneading_data(MapSpec(rational(2), parse_scalar("0.25")), 3)
