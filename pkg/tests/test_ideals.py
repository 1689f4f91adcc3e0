import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from denslab import ideals as m
from denslab.errors import InputError
from denslab.ideals import (
    ALL,
    DENSITY_ZERO,
    EMPTY,
    FIN,
    SQUARES,
    DensityStatus,
    Membership,
    Progression,
    asymptotic_density,
    complement,
    count_up_to,
    eventual_max_gap,
    finite,
    ideal_from_json,
    in_filter,
    in_ideal,
    index_set_from_json,
    index_set_to_json,
    initial_segment,
    is_cofinite,
    is_empty,
    is_finite,
    max_element,
    member,
    members_up_to,
    profile,
)
from oracles import brute_count, is_square

IN, NOT_IN = Membership.IN, Membership.NOT_IN


def test_small_counts():
    assert count_up_to(SQUARES, 10) == 3
    assert count_up_to(complement(SQUARES), 10) == 7
    assert count_up_to(Progression(1, 2), 10) == 5
    assert members_up_to(SQUARES | finite(2, 3), 10) == [1, 2, 3, 4, 9]


def test_densities():
    assert asymptotic_density(SQUARES).value == 0
    assert asymptotic_density(Progression(0, 2)).value == Fraction(1, 2)
    assert asymptotic_density(complement(SQUARES)).value == 1
    assert asymptotic_density(Progression(2, 3) - SQUARES).value == Fraction(1, 3)


def test_membership_examples():
    assert in_ideal(FIN, finite(1, 5, 9)) is IN
    assert in_ideal(DENSITY_ZERO, SQUARES) is IN
    assert in_ideal(FIN, SQUARES) is NOT_IN
    assert in_ideal(DENSITY_ZERO, Progression(0, 2)) is NOT_IN
    assert in_filter(DENSITY_ZERO, complement(SQUARES)) is IN
    assert in_filter(FIN, complement(SQUARES)) is NOT_IN


def test_non_trivial_and_admissible():
    for ideal in (FIN, DENSITY_ZERO):
        assert in_ideal(ideal, ALL) is NOT_IN
        assert in_ideal(ideal, EMPTY) is IN
        for n in (1, 7, 1000):
            assert in_ideal(ideal, finite(n)) is IN


def test_structure_queries():
    assert is_finite(initial_segment(5)) and not is_finite(SQUARES)
    assert is_cofinite(complement(finite(3, 8)))
    assert max_element(finite(3, 8)) == 8
    assert max_element(SQUARES - SQUARES) == 0
    assert is_empty(SQUARES & complement(SQUARES))
    with pytest.raises(ValueError):
        max_element(SQUARES)


def test_gaps():
    assert eventual_max_gap(ALL) == 1
    assert eventual_max_gap(complement(SQUARES)) == 2
    assert eventual_max_gap(Progression(1, 3)) == 3
    assert eventual_max_gap(SQUARES) is None
    assert eventual_max_gap(finite(4)) is None


def test_json_variants():
    assert index_set_from_json("squares") == SQUARES
    assert index_set_from_json({"set": "initial", "up_to": 3}) == finite(1, 2, 3)
    for bad in ({"set": "nope"}, {"set": "difference", "of": ["all"]}, [1, 2], {"set": "finite", "elements": [0]}):
        with pytest.raises(InputError):
            index_set_from_json(bad)
    assert ideal_from_json({"ideal": "fin"}) is FIN
    with pytest.raises(InputError):
        ideal_from_json({"ideal": "statistical"})


# random symbolic index sets ---------------------------------------------------------

atoms = st.one_of(
    st.just(ALL),
    st.just(SQUARES),
    st.lists(st.integers(1, 40), max_size=5).map(finite),
    st.tuples(st.integers(0, 6), st.integers(1, 6)).map(lambda t: Progression(*t)),
)
index_sets = st.recursive(
    atoms,
    lambda c: st.one_of(
        c.map(complement),
        st.tuples(c, c).map(lambda t: t[0] | t[1]),
        st.tuples(c, c).map(lambda t: t[0] & t[1]),
        st.tuples(c, c).map(lambda t: t[0] - t[1]),
    ),
    max_leaves=5,
)


def raw_member(k, n):
    """Membership by structural recursion, independent of the profile machinery."""
    if isinstance(k, m.Finite):
        return n in k.elements
    if isinstance(k, m.All):
        return True
    if isinstance(k, m.Squares):
        return is_square(n)
    if isinstance(k, m.Progression):
        return n % k.step == k.start % k.step and n >= max(k.start, 1)
    if isinstance(k, m.Complement):
        return not raw_member(k.of, n)
    a, b = raw_member(k.left, n), raw_member(k.right, n)
    return {m.Union: a or b, m.Intersection: a and b, m.Difference: a and not b}[type(k)]


@settings(max_examples=200, deadline=None)
@given(index_sets, st.integers(1, 3000))
def test_count_matches_brute(k, n):
    assert count_up_to(k, n) == brute_count(lambda m: raw_member(k, m), n)
    assert all(member(k, m) == raw_member(k, m) for m in range(1, 60))


@settings(max_examples=80, deadline=None)
@given(index_sets)
def test_density_consistent_with_counts(k):
    d = asymptotic_density(k)
    assert d.status is DensityStatus.EXISTS
    p = profile(k)
    n = 12_000
    slack = Fraction(p.cutoff + 2 * math.isqrt(n) + 2 * p.period, n)
    assert abs(Fraction(brute_count(lambda m: raw_member(k, m), n), n) - d.value) <= slack


@settings(max_examples=150, deadline=None)
@given(index_sets, index_sets)
def test_ideal_axioms(a, b):
    for ideal in (FIN, DENSITY_ZERO):
        sa, sb = in_ideal(ideal, a), in_ideal(ideal, b)
        if sa is IN:
            assert in_ideal(ideal, a & b) is IN
            assert in_ideal(ideal, a - b) is IN
            if sb is IN:
                assert in_ideal(ideal, a | b) is IN
        if sa is IN and in_ideal(ideal, complement(a)) is IN:
            pytest.fail("an ideal cannot hold a set and its complement")
        assert in_filter(ideal, a) is in_ideal(ideal, complement(a))
    if in_ideal(FIN, a) is IN:
        assert in_ideal(DENSITY_ZERO, a) is IN


@settings(max_examples=150, deadline=None)
@given(index_sets)
def test_finiteness_matches_tail(k):
    p = profile(k)
    tail = range(p.cutoff + 1, p.cutoff + 1 + 4 * p.period + 400)
    if is_finite(k):
        assert not any(raw_member(k, m) for m in tail)
        assert all(not raw_member(k, m) for m in range(max_element(k) + 1, p.cutoff + 1))
    else:
        assert any(raw_member(k, m) for m in tail) or any(
            p.square[(j * j) % p.period] for j in range(p.period))


@settings(max_examples=150, deadline=None)
@given(index_sets)
def test_json_roundtrip(k):
    back = index_set_from_json(index_set_to_json(k))
    assert all(member(back, m) == member(k, m) for m in range(1, 200))
    assert index_set_to_json(back) == index_set_to_json(k)
