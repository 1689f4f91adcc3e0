import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from denslab.errors import InputError, PartitionError, PreconditionError
from denslab.ideals import ALL, DENSITY_ZERO, FIN, SQUARES, Progression, complement, finite, initial_segment
from denslab.sequences import (
    STATEMENTS,
    Case,
    CriterionStatus,
    EqualityStatus,
    SequenceFamily,
    WitnessStatus,
    eval_seq,
    eventually_equal,
    liminf_ratio_criterion,
    monotone_witness,
    sequence_from_json,
)
from oracles import is_square

FACTORIAL_SEQ = SequenceFamily((Case(complement(SQUARES), "factorial(n)"), Case(SQUARES, "1/n")))


def factorial_exact(n):
    return Fraction(1, n) if is_square(n) else Fraction(math.factorial(n))


def test_example_values_exact():
    for n in range(1, 65):
        v = eval_seq(FACTORIAL_SEQ, n)
        assert v.is_point and v.lo == factorial_exact(n)


def test_example_witness_under_density_zero():
    w = monotone_witness(FACTORIAL_SEQ, DENSITY_ZERO)
    assert w.status is WitnessStatus.VERIFIED
    assert w.witness == complement(SQUARES)


def test_example_has_no_structural_witness_under_fin():
    assert monotone_witness(FACTORIAL_SEQ, FIN).status is WitnessStatus.UNKNOWN


def test_overlapping_cases_rejected():
    with pytest.raises(PartitionError):
        SequenceFamily((Case(ALL, "n"), Case(SQUARES, "1")))


def test_uncovered_cases_rejected():
    with pytest.raises(PartitionError):
        SequenceFamily((Case(SQUARES, "n"),))


def test_bounded_term_fails():
    assert monotone_witness(SequenceFamily.single("1/n"), FIN).status is WitnessStatus.FAILED_UNBOUNDED


def test_cofinite_witness_under_fin():
    s = SequenceFamily((Case(initial_segment(3), "7"), Case(complement(initial_segment(3)), "n")))
    w = monotone_witness(s, FIN)
    assert w.verified and w.consecutive_from == 4


def test_short_horizon_rejected():
    with pytest.raises(InputError):
        monotone_witness(SequenceFamily.single("n"), FIN, horizon=4)


def test_json_forms():
    assert sequence_from_json("n") == SequenceFamily.single("n")
    body = {"cases": [{"domain": {"set": "complement", "of": {"set": "squares"}}, "term": "factorial(n)"},
                      {"domain": {"set": "squares"}, "term": "1/n"}]}
    assert sequence_from_json(body) == FACTORIAL_SEQ
    assert sequence_from_json(FACTORIAL_SEQ.to_json()) == FACTORIAL_SEQ
    with pytest.raises(InputError):
        sequence_from_json({"terms": []})


# eventual equality against a brute comparison ----------------------------------------

def brute_last_difference(f, g, upto):
    return max((n for n in range(1, upto + 1) if f(n) != g(n)), default=0)


def test_equal_after_finite_patch():
    patched = SequenceFamily((Case(initial_segment(5), "1"), Case(complement(initial_segment(5)), "n")))
    res = eventually_equal(SequenceFamily.single("n"), patched)
    oracle = brute_last_difference(lambda n: n, lambda n: 1 if n <= 5 else n, 200)
    assert res.status is EqualityStatus.EQUAL_FROM and res.index == oracle + 1 == 6


def test_distinct_on_infinite_overlap():
    res = eventually_equal(SequenceFamily.single("n"), SequenceFamily.single("n+1"))
    assert (res.status, res.index) == (EqualityStatus.DISTINCT, 1)
    res = eventually_equal(FACTORIAL_SEQ, SequenceFamily.single("factorial(n)"))
    assert (res.status, res.index) == (EqualityStatus.DISTINCT, 4)


def test_textually_equal_is_equal_from_one():
    assert eventually_equal(FACTORIAL_SEQ, FACTORIAL_SEQ).index == 1


@settings(max_examples=60, deadline=None)
@given(st.dictionaries(st.integers(1, 30), st.integers(1, 50), max_size=6))
def test_finite_patch_keeps_witness(patch):
    base = SequenceFamily((Case(complement(SQUARES), "factorial(n)"), Case(SQUARES, "1/n")))
    if not patch:
        return
    pts = finite(*patch)
    cases = [Case(finite(n), str(v)) for n, v in patch.items()]
    cases += [Case(complement(SQUARES) - pts, "factorial(n)"), Case(SQUARES - pts, "1/n")]
    patched = SequenceFamily(tuple(cases))
    res = eventually_equal(base, patched)
    oracle = brute_last_difference(factorial_exact, lambda n: Fraction(patch[n]) if n in patch else factorial_exact(n), 40)
    assert res.status is EqualityStatus.EQUAL_FROM and res.index == oracle + 1
    # the witness and the criterion outcome depend only on the tail
    w = monotone_witness(patched, DENSITY_ZERO)
    assert w.status is WitnessStatus.VERIFIED
    assert liminf_ratio_criterion(patched, DENSITY_ZERO).status is CriterionStatus.FAILS


# ratio criterion ------------------------------------------------------------------

def test_linear_holds_with_half():
    res = liminf_ratio_criterion(SequenceFamily.single("n"), FIN)
    assert res.status is CriterionStatus.HOLDS and res.sigma_lower == Fraction(1, 2)
    assert res.statement == "T_d = T^I_(s)"


def test_powers_of_two_hold_with_half():
    res = liminf_ratio_criterion(SequenceFamily.single("pow(2,n)"), DENSITY_ZERO)
    assert res.status is CriterionStatus.HOLDS and res.sigma_lower == Fraction(1, 2)
    assert all(r.lo == r.hi == Fraction(1, 2) for _, _, r in res.trace)


def test_example_criterion_fails_with_vanishing_trace():
    res = liminf_ratio_criterion(FACTORIAL_SEQ, DENSITY_ZERO)
    assert res.status is CriterionStatus.FAILS
    assert res.statement == "criterion inconclusive"
    for k, k_next, r in res.trace:
        assert r.lo == r.hi == Fraction(math.factorial(k), math.factorial(k_next))
        assert r.hi <= Fraction(1, k + 1)
    assert res.trace[-1][2].hi < Fraction(1, 60)


def test_statements_never_claim_difference():
    for text in STATEMENTS.values():
        assert "!=" not in text and "differ" not in text and "≠" not in text


def test_criterion_requires_witness():
    with pytest.raises(PreconditionError):
        liminf_ratio_criterion(SequenceFamily.single("1/n"), FIN)
    with pytest.raises(PreconditionError):
        liminf_ratio_criterion(FACTORIAL_SEQ, FIN)


holding_terms = st.one_of(
    st.integers(2, 5).map(lambda c: (f"pow({c},n)", lambda n, c=c: Fraction(c) ** n)),
    st.integers(1, 3).map(lambda k: (f"pow(n,{k})", lambda n, k=k: Fraction(n) ** k)),
    st.tuples(st.integers(1, 4), st.integers(0, 5)).map(
        lambda t: (f"{t[0]}*n+{t[1]}", lambda n, t=t: Fraction(t[0] * n + t[1]))),
)
witness_domains = st.sampled_from([ALL, complement(SQUARES), Progression(1, 2), Progression(0, 3)])


@settings(max_examples=60, deadline=None)
@given(holding_terms, witness_domains)
def test_sigma_is_a_lower_bound(term, domain):
    text, exact = term
    if domain == ALL:
        s = SequenceFamily.single(text)
    else:
        s = SequenceFamily((Case(domain, text), Case(complement(domain), "1/n")))
    if domain in (Progression(1, 2), Progression(0, 3)):
        # these domains are not in the filter, so there is no witness
        with pytest.raises(PreconditionError):
            liminf_ratio_criterion(s, DENSITY_ZERO, horizon=48)
        return
    res = liminf_ratio_criterion(s, DENSITY_ZERO, horizon=48)
    assert res.status is CriterionStatus.HOLDS
    members = [n for n in range(1, 49) if n in res.witness.witness]
    true_ratios = [exact(a) / exact(b) for a, b in zip(members, members[1:])]
    assert res.sigma_lower <= min(true_ratios)
