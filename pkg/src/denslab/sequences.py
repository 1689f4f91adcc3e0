"""Piecewise-symbolic positive sequences, membership in Sigma_I, and the
liminf ratio criterion for equality with the classical density topology.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InputError, InvariantViolation, PartitionError, PreconditionError
from .exactnum import Enclosure, Ordering, TermExpr, compare, eval_term, parse_term, shape, to_text
from .ideals import (
    ALL,
    FIN,
    Ideal,
    IndexSet,
    Membership,
    Union,
    complement,
    eventual_max_gap,
    in_filter,
    index_set_from_json,
    index_set_to_json,
    is_cofinite,
    is_empty,
    is_finite,
    iter_members,
    max_element,
    member,
)

PARTITION_CHECK = 4096


@dataclass(frozen=True)
class Case:
    domain: IndexSet
    term: TermExpr

    def to_json(self) -> dict:
        return {"domain": index_set_to_json(self.domain), "term": to_text(self.term)}


@dataclass(frozen=True)
class SequenceFamily:
    """``s_n = term_j(n)`` for the unique case j whose domain contains n."""

    cases: tuple

    def __post_init__(self):
        cases = tuple(c if isinstance(c, Case) else Case(*c) for c in self.cases)
        cases = tuple(Case(c.domain, parse_term(c.term) if isinstance(c.term, str) else c.term) for c in cases)
        if not cases:
            raise InputError("a sequence family needs at least one case")
        object.__setattr__(self, "cases", cases)
        self._check_partition()

    @classmethod
    def single(cls, term) -> SequenceFamily:
        return cls((Case(ALL, term),))

    def _check_partition(self):
        doms = [c.domain for c in self.cases]
        undecided = False
        for i, a in enumerate(doms):
            for b in doms[i + 1:]:
                verdict = is_empty(a & b)
                if verdict is False:
                    raise PartitionError(f"case domains {a} and {b} overlap")
                undecided |= verdict is None
        cover = functools.reduce(Union, doms)
        verdict = is_empty(complement(cover))
        if verdict is False:
            raise PartitionError(f"case domains do not cover N (missing part of {complement(cover)})")
        if undecided or verdict is None:
            for n in range(1, PARTITION_CHECK + 1):
                self.case_index(n)

    def case_index(self, n: int) -> int:
        hits = [j for j, c in enumerate(self.cases) if member(c.domain, n)]
        if len(hits) != 1:
            raise PartitionError(f"index {n} lies in {len(hits)} case domains")
        return hits[0]

    def term_at(self, n: int) -> TermExpr:
        return self.cases[self.case_index(n)].term

    def to_json(self) -> dict:
        return {"cases": [c.to_json() for c in self.cases]}

    def __str__(self):
        return "; ".join(f"{to_text(c.term)} on {c.domain}" for c in self.cases)


def eval_seq(s: SequenceFamily, n: int, precision: int = 64) -> Enclosure:
    """Enclosure of ``s_n`` to relative precision ``2**-precision``; rejects non-positive values."""
    if n < 1:
        raise ValueError("sequences are indexed by n >= 1")
    value = eval_term(s.term_at(n), n, precision, relative=True)
    if value.hi <= 0:
        raise InvariantViolation(f"sequence term is not positive at n={n}: {value}")
    return value


def verify_positive(s: SequenceFamily, horizon: int, precision: int = 64) -> None:
    for n in range(1, horizon + 1):
        value = eval_seq(s, n, precision)
        if value.lo <= 0:
            raise InvariantViolation(f"positivity of s_{n} not certified: {value}")


def sequence_from_json(obj) -> SequenceFamily:
    if isinstance(obj, str):
        return SequenceFamily.single(parse_term(obj))
    if not isinstance(obj, dict) or "cases" not in obj:
        raise InputError(f"sequence must be an object with 'cases', got {obj!r}")
    try:
        cases = [Case(index_set_from_json(c.get("domain", "all")), parse_term(c["term"])) for c in obj["cases"]]
    except (KeyError, TypeError, AttributeError) as exc:
        raise InputError(f"malformed sequence {obj!r}: {exc}") from None
    return SequenceFamily(tuple(cases))


# monotone witness ------------------------------------------------------------

class WitnessStatus(enum.Enum):
    VERIFIED = "Verified"
    FAILED_UNBOUNDED = "FailedUnbounded"
    FAILED_MONOTONE = "FailedMonotone"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class MonotoneWitness:
    status: WitnessStatus
    witness: IndexSet | None = None
    term: TermExpr | None = None
    horizon: int = 0
    consecutive_from: int | None = None
    detail: str = ""

    @property
    def verified(self) -> bool:
        return self.status is WitnessStatus.VERIFIED

    def to_json(self) -> dict:
        out = {"status": self.status.value, "horizon": self.horizon}
        if self.witness is not None:
            out["witness"] = index_set_to_json(self.witness)
        if self.term is not None:
            out["term"] = to_text(self.term)
        if self.consecutive_from is not None:
            out["consecutive_from"] = self.consecutive_from
        if self.detail:
            out["detail"] = self.detail
        return out


def _grouped(s: SequenceFamily):
    groups = {}
    for c in s.cases:
        key = to_text(c.term)
        if key in groups:
            groups[key] = (groups[key][0] | c.domain, groups[key][1])
        else:
            groups[key] = (c.domain, c.term)
    return list(groups.values())


@functools.lru_cache(maxsize=256)
def monotone_witness(s: SequenceFamily, i: Ideal, horizon: int = 64, precision: int = 64) -> MonotoneWitness:
    """Look for a structural witness that ``s`` lies in Sigma_I.

    The candidate is a case domain (cases sharing a term are merged) that
    belongs to the filter of ``i`` and whose term is tagged increasing and
    unbounded.  Monotonicity along the witness is re-checked by enclosures up
    to ``horizon``.
    """
    if horizon < 8:
        raise InputError("horizon must be >= 8")
    candidates = []
    undecided = False
    for dom, term in _grouped(s):
        status = in_filter(i, dom)
        if status is Membership.IN:
            candidates.append((dom, term))
        undecided |= status is Membership.UNKNOWN
    if not candidates:
        why = "no case domain is provably in the filter" if undecided else "no case domain lies in the filter"
        return MonotoneWitness(WitnessStatus.UNKNOWN, horizon=horizon, detail=why)
    # the filter is closed under intersection, so at most one merged case can be in it
    dom, term = candidates[0]
    sh = shape(term)
    if not (sh.monotone == "inc" and sh.limit == "inf"):
        if sh.limit in ("zero", "const") or sh.monotone in ("dec", "const"):
            return MonotoneWitness(WitnessStatus.FAILED_UNBOUNDED, dom, term, horizon,
                                   detail=f"term {to_text(term)} is bounded")
        return MonotoneWitness(WitnessStatus.UNKNOWN, dom, term, horizon,
                               detail=f"no monotonicity/unboundedness tag for {to_text(term)}")
    prev = None
    for n in iter_members(dom):
        if n > horizon:
            break
        value = eval_term(term, n, precision, relative=True)
        if prev is not None and compare(prev[1], value) is Ordering.GREATER:
            return MonotoneWitness(WitnessStatus.FAILED_MONOTONE, dom, term, horizon,
                                   detail=f"s_{prev[0]} > s_{n}")
        prev = (n, value)
    consecutive = None
    if i == FIN and is_cofinite(dom):
        rest = complement(dom)
        consecutive = max_element(rest) + 1
    return MonotoneWitness(WitnessStatus.VERIFIED, dom, term, horizon, consecutive)


# eventual equality -----------------------------------------------------------

class EqualityStatus(enum.Enum):
    EQUAL_FROM = "EqualFrom"
    DISTINCT = "Distinct"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class EqualityResult:
    status: EqualityStatus
    index: int | None = None

    def to_json(self) -> dict:
        out = {"status": self.status.value}
        if self.index is not None:
            out["n"] = self.index
        return out


def _differ(a: TermExpr, b: TermExpr, n: int, precision: int):
    """True if certified different, False if certified equal, None if undecided."""
    order = compare(eval_term(a, n, precision, True), eval_term(b, n, precision, True))
    if order is Ordering.EQUAL:
        return False
    if order is Ordering.OVERLAP:
        return None
    return True


def eventually_equal(s: SequenceFamily, r: SequenceFamily, horizon: int = 64, precision: int = 64) -> EqualityResult:
    """Decide whether ``s_n = r_n`` for all large n, structurally.

    Case pairs with textually equal terms agree.  Pairs with different
    terms must overlap on a finite set, whose largest disagreement fixes
    ``n0``.  On an infinite overlap the first certified disagreement is
    reported as Distinct; if none shows up before the horizon the answer is
    Unknown.
    """
    last_diff = 0
    first_distinct = None
    undecided = False
    for a in s.cases:
        for b in r.cases:
            if to_text(a.term) == to_text(b.term):
                continue
            overlap = a.domain & b.domain
            fin = is_finite(overlap)
            if fin is None:
                undecided = True
                continue
            if fin:
                if is_empty(overlap):
                    continue
                for n in range(1, max_element(overlap) + 1):
                    if member(overlap, n) and _differ(a.term, b.term, n, precision) is not False:
                        last_diff = max(last_diff, n)
                continue
            found = None
            for n in iter_members(overlap):
                if n > horizon:
                    break
                if _differ(a.term, b.term, n, precision):
                    found = n
                    break
            if found is None:
                undecided = True
            elif first_distinct is None or found < first_distinct:
                first_distinct = found
    if first_distinct is not None:
        return EqualityResult(EqualityStatus.DISTINCT, first_distinct)
    if undecided:
        return EqualityResult(EqualityStatus.UNKNOWN)
    return EqualityResult(EqualityStatus.EQUAL_FROM, last_diff + 1)


# liminf ratio criterion -------------------------------------------------------

class CriterionStatus(enum.Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    UNKNOWN = "Unknown"


STATEMENTS = {
    CriterionStatus.HOLDS: "T_d = T^I_(s)",
    CriterionStatus.FAILS: "criterion inconclusive",
    CriterionStatus.UNKNOWN: "criterion undecided",
}


@dataclass(frozen=True)
class CriterionResult:
    status: CriterionStatus
    sigma_lower: Fraction | None
    witness: MonotoneWitness
    trace: tuple = field(default=())
    detail: str = ""

    @property
    def statement(self) -> str:
        return STATEMENTS[self.status]

    def to_json(self) -> dict:
        out = {"status": self.status.value, "statement": self.statement, "witness": self.witness.to_json()}
        if self.sigma_lower is not None:
            out["sigma_lower"] = _fmt(self.sigma_lower)
        if self.detail:
            out["detail"] = self.detail
        out["trace"] = [{"k": k, "k_next": k2, "ratio": enc.to_json()} for k, k2, enc in self.trace]
        return out


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def ratio_trace(term: TermExpr, witness: IndexSet, horizon: int, precision: int = 64) -> tuple:
    """``(k_n, k_{n+1}, s_{k_n} / s_{k_{n+1}})`` for consecutive witness members up to the horizon."""
    out = []
    members = iter_members(witness)
    k = next(members)
    for k_next in members:
        if k_next > horizon:
            break
        ratio = eval_term(term, k, precision, True) / eval_term(term, k_next, precision, True)
        out.append((k, k_next, ratio))
        k = k_next
    return tuple(out)


def liminf_ratio_criterion(s: SequenceFamily, i: Ideal, horizon: int = 64, precision: int = 64) -> CriterionResult:
    """Check ``liminf s_{k_n} / s_{k_{n+1}} > 0`` along the verified witness.

    With the step ratio ``t(m+1)/t(m) <= q`` for all m and witness gaps
    eventually ``<= G``, every ratio along the witness is ``>= q**-G``.  If
    the step ratio tends to infinity, ratios along any increasing index
    sequence tend to zero.  Fails means only that the sufficient condition
    is not met.
    """
    w = monotone_witness(s, i, horizon, precision)
    if not w.verified:
        raise PreconditionError(f"sequence has no verified monotone witness ({w.status.value}): not in Sigma_I")
    trace = ratio_trace(w.term, w.witness, horizon, precision)
    sh = shape(w.term)
    gap = eventual_max_gap(w.witness)
    if sh.ratio_diverges:
        return CriterionResult(CriterionStatus.FAILS, None, w, trace,
                               f"step ratio of {to_text(w.term)} diverges, so witness ratios tend to 0")
    if sh.ratio_hi is not None and gap is not None and sh.ratio_hi >= 1:
        sigma = 1 / sh.ratio_hi ** gap
        return CriterionResult(CriterionStatus.HOLDS, sigma, w, trace,
                               f"step ratio <= {_fmt(sh.ratio_hi)} and witness gaps <= {gap}")
    return CriterionResult(CriterionStatus.UNKNOWN, None, w, trace, "no symbolic ratio bound")
