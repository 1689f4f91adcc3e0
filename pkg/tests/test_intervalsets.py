import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from denslab.errors import GeneratorDefect, InputError
from denslab.exactnum import Enclosure
from denslab.intervalsets import (
    EMPTY_SET,
    GeneratorSet,
    Interval,
    IntervalSet,
    Window,
    closed,
    complement,
    difference,
    intersection,
    measure,
    normalize,
    open_,
    point,
    reflect,
    set_from_json,
    symm_diff_measure,
    translate,
    union,
    window_measure,
)
from oracles import example_generator_mass, in_raw, raw_measure_between

GENERATOR = {"kind": "generator", "left": "1/factorial(n+1)", "right": "1/(factorial(n)*sqrt(n+1))", "domain": "all"}


def test_touching_merge():
    assert normalize([closed(0, 1), closed(1, 2)]) == normalize([closed(0, 2)])


def test_disjoint_open_unchanged():
    s = normalize([open_(0, 1), open_(2, 3)])
    assert s.intervals == (open_(0, 1), open_(2, 3))


def test_overlap_merge_against_grid():
    raw = [(0, 2, True, True), (1, 3, True, True)]
    s = normalize([closed(0, 2), closed(1, 3)])
    assert s == normalize([closed(0, 3)])
    for k in range(-8, 32):
        x = Fraction(k, 8)
        assert s.contains(x) == in_raw(raw, x)


def test_open_touch_keeps_gap():
    s = normalize([open_(0, 1), open_(1, 2)])
    assert len(s) == 2 and not s.contains(1)


def test_left_greater_than_right_rejected():
    with pytest.raises(InputError):
        Interval(2, 1)


def test_measures():
    assert measure(normalize([closed(0, 1), closed(2, 3)])) == 2
    assert measure(EMPTY_SET) == 0
    assert measure(normalize([open_(-1, 1)])) == 2
    assert measure(normalize([point(3)])) == 0


def test_window_inside_set():
    w = Window(0, Enclosure.point(Fraction(1, 24)))
    assert window_measure(normalize([open_(-1, 1)]), w) == Enclosure.point(Fraction(1, 12))


def test_empty_window():
    w = Window(Fraction(1, 3), Enclosure.point(5), "left")
    assert window_measure(EMPTY_SET, w) == Enclosure.point(0)


def test_window_needs_positive_half_width():
    with pytest.raises(ValueError):
        Window(0, Enclosure(0, 1))


@pytest.mark.parametrize("n", [2, 3, 5, 6, 7, 8, 10, 20, 40])
def test_generator_window_bound(n):
    a = set_from_json(GENERATOR)
    h = Fraction(1, math.factorial(n))
    m = a.window_measure(Window(0, Enclosure.point(h), "right"), 64)
    oracle = example_generator_mass(h)
    assert float(m.lo) <= float(oracle) * (1 + 1e-12) and float(oracle) <= float(m.hi) * (1 + 1e-12)
    # hi <= 1/(n! sqrt(n+1)), i.e. (hi * n!)^2 * (n+1) <= 1, decided exactly
    assert (m.hi / h) ** 2 * (n + 1) <= 1


def test_symmetric_difference():
    a, b = normalize([closed(0, 2)]), normalize([closed(1, 3)])
    raw_a, raw_b = [(0, 2, True, True)], [(1, 3, True, True)]
    sweep = sum(hi - lo for lo, hi in zip(range(-1, 4), range(0, 5))
                if in_raw(raw_a, lo + Fraction(1, 2)) != in_raw(raw_b, lo + Fraction(1, 2)))
    assert symm_diff_measure(a, b) == sweep == 2
    assert symm_diff_measure(a, a) == 0
    assert symm_diff_measure(normalize([closed(0, 1)]), EMPTY_SET) == 1


def test_translate_reflect():
    assert translate(normalize([closed(0, 1)]), 2) == normalize([closed(2, 3)])
    assert reflect(normalize([closed(1, 2)])) == normalize([closed(-2, -1)])
    assert reflect(normalize([Interval(1, 2, True, False)])).intervals == (Interval(-2, -1, False, True),)


def test_generator_reflect_flips_orientation():
    a = set_from_json(GENERATOR)
    assert reflect(a).orientation == "negative"
    assert reflect(reflect(a)) == a
    mirrored = set_from_json(dict(GENERATOR, mirror=True))
    assert reflect(mirrored) == mirrored
    assert translate(a, 3).accumulation == 3


def test_generator_disjointness_regression():
    # sqrt(n+1) < n+1 gives 1/(n+1)! < 1/(n! sqrt(n+1)); gaps follow from the next right end
    a = set_from_json(GENERATOR)
    assert a.verify(200) == 200


def test_generator_defect_detected():
    bad = GeneratorSet("1/(n+1)", "2/n")
    with pytest.raises(GeneratorDefect):
        bad.verify(10)


def test_generator_json_roundtrip():
    for body in (GENERATOR, dict(GENERATOR, mirror=True), dict(GENERATOR, orientation="negative", accumulation="1/3")):
        a = set_from_json(body)
        assert set_from_json(a.to_json()) == a


def test_generator_local_structure():
    a = set_from_json(GENERATOR)
    assert a.local_structure(0) is None
    inside = a.local_structure(Fraction(6, 10))
    assert (inside.left, inside.right) == (1, 1)
    gap = a.local_structure(Fraction(4, 10))
    assert (gap.left, gap.right) == (0, 0)


@pytest.mark.parametrize("t", [Fraction(1, 2), Fraction(1, 7), Fraction(1, 5040)])
def test_generator_tail_nesting(t):
    a = set_from_json(GENERATOR)
    for n in (3, 6, 12):
        wide, narrow = a.cumulative(t, 64, horizon=n), a.cumulative(t, 64, horizon=2 * n)
        assert wide.contains(narrow)


# random finite unions --------------------------------------------------------------

coord = st.fractions(-5, 5, max_denominator=4)
raw_piece = st.tuples(coord, coord, st.booleans(), st.booleans()).map(
    lambda t: (min(t[0], t[1]), max(t[0], t[1]), t[2], t[3]))
raw_union = st.lists(raw_piece, max_size=5)
GRID = [Fraction(k, 16) for k in range(-96, 97)]


def build(raw):
    return normalize([Interval(*r) for r in raw])


@settings(max_examples=200, deadline=None)
@given(raw_union)
def test_normalize_matches_raw_membership(raw):
    s = build(raw)
    assert all(s.contains(x) == in_raw(raw, x) for x in GRID)
    assert normalize(s) == s
    ivs = s.intervals
    for a, b in zip(ivs, ivs[1:]):
        assert a.right < b.left or (a.right == b.left and not a.right_closed and not b.left_closed)


@settings(max_examples=200, deadline=None)
@given(raw_union)
def test_measure_matches_sweep(raw):
    assert measure(build(raw)) == raw_measure_between(raw, Fraction(-6), Fraction(6))


@settings(max_examples=200, deadline=None)
@given(raw_union, raw_union)
def test_boolean_operations_pointwise(ra, rb):
    a, b = build(ra), build(rb)
    for x in GRID[::3]:
        ia, ib = in_raw(ra, x), in_raw(rb, x)
        assert intersection(a, b).contains(x) == (ia and ib)
        assert union(a, b).contains(x) == (ia or ib)
        assert difference(a, b).contains(x) == (ia and not ib)
        assert complement(a).contains(x) == (not ia)
    assert complement(complement(a)) == a


@settings(max_examples=200, deadline=None)
@given(raw_union, raw_union)
def test_measure_difference_bound(ra, rb):
    a, b = build(ra), build(rb)
    assert abs(measure(a) - measure(b)) <= symm_diff_measure(a, b)


@settings(max_examples=200, deadline=None)
@given(raw_union, coord, st.fractions(Fraction(1, 64), 4, max_denominator=64))
def test_window_split(raw, p, h):
    s = build(raw)
    whole = window_measure(s, Window(p, Enclosure.point(h)))
    left = window_measure(s, Window(p, Enclosure.point(h), "left"))
    right = window_measure(s, Window(p, Enclosure.point(h), "right"))
    assert whole == left + right
    assert whole.lo == raw_measure_between(raw, p - h, p + h)


@settings(max_examples=200, deadline=None)
@given(raw_union, coord)
def test_translation_and_reflection_preserve_measure(raw, x):
    s = build(raw)
    assert measure(translate(s, x)) == measure(s) == measure(reflect(s))
    assert all(translate(s, x).contains(g + x) == s.contains(g) for g in GRID[::5])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(-20, 20), st.integers(1, 3)), max_size=6))
def test_countable_additivity_on_disjoint_pieces(spec):
    pieces, cursor = [], Fraction(-40)
    for gap, length in spec:
        start = cursor + abs(gap)
        pieces.append(closed(start, start + length))
        cursor = start + length + 1
    assert measure(normalize(pieces)) == sum(measure(normalize([p])) for p in pieces)


def test_unbounded_sets():
    left_ray = normalize([Interval("-inf", 0, False, True)])
    assert math.isinf(measure(left_ray))
    assert complement(left_ray) == normalize([Interval(0, "inf", False, False)])
    assert set_from_json(left_ray.to_json()) == left_ray
    assert isinstance(left_ray, IntervalSet)


def test_generator_rejects_finite_domain():
    from denslab.ideals import finite

    with pytest.raises(InputError):
        GeneratorSet("1/factorial(n+1)", "1/(factorial(n)*sqrt(n+1))", domain=finite(1, 2, 3))
