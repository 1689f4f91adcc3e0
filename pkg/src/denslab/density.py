"""Density ratios, I-limits and density/dispersion verdicts.

For a set A, point p and positive sequence s the ratio sequence is
``x_n = lambda(A & J_n) / |J_n|`` with windows of half-width ``1/s_n``
around p.  Besides per-n enclosures it carries *symbolic pieces*: on each
case domain of s the behaviour of ``x_n`` is derived from the local shape
of A near p (small windows) or far from p (large windows).  Verdicts come
from these pieces and the ideal, never from the finite list of entries.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InvariantViolation, PreconditionError, PrecisionError
from .exactnum import Enclosure, TermExpr, compare, eval_term, Ordering, parse_term, shape, to_text
from .exactnum.terms import is_constant
from .ideals import (
    EMPTY,
    Difference,
    Ideal,
    IndexSet,
    Membership,
    Union,
    in_ideal,
    index_set_from_json,
    index_set_to_json,
    is_empty,
    iter_members,
    member,
)
from .intervalsets import (
    INF,
    FarStructure,
    GeneratorSet,
    Interval,
    IntervalSet,
    LocalStructure,
    Window,
    difference,
    far_structure,
    local_structure,
    normalize,
)
from .sequences import SequenceFamily, eval_seq, monotone_witness

CUTOFF_SEARCH = 1 << 20
EXACT_KINDS = ("eventually-constant", "convergent")


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Envelope:
    """Claim ``|x_n - limit| <= bound(n)`` for n in ``domain``, with ``bound -> 0``."""

    domain: IndexSet
    limit: Fraction
    bound: TermExpr

    def to_json(self) -> dict:
        return {"domain": index_set_to_json(self.domain), "limit": _fmt(self.limit), "bound": to_text(self.bound)}


def envelope_from_json(obj) -> Envelope:
    return Envelope(index_set_from_json(obj.get("domain", "all")), Fraction(obj["limit"]), parse_term(obj["bound"]))


@dataclass(frozen=True)
class SymbolicPiece:
    """Behaviour of ``x_n`` along ``domain``.

    ``eventually-constant``: equals ``limit`` from ``cutoff`` on (finitely many stragglers below).
    ``convergent``: tends to ``limit`` along the domain.
    ``envelope``: within a verified bound of ``limit`` that tends to zero.
    ``unknown``: no symbolic statement (``limit`` is None).
    """

    domain: IndexSet
    kind: str
    limit: Fraction | None = None
    cutoff: int | None = None
    note: str = ""

    def to_json(self) -> dict:
        out = {"domain": index_set_to_json(self.domain), "kind": self.kind}
        if self.limit is not None:
            out["limit"] = _fmt(self.limit)
        if self.cutoff is not None:
            out["cutoff"] = self.cutoff
        if self.note:
            out["note"] = self.note
        return out


@dataclass(frozen=True)
class RatioSequence:
    point: Fraction
    side: str
    entries: tuple  # of (n, Enclosure)
    pieces: tuple
    horizon: int

    def entry(self, n: int) -> Enclosure:
        return self.entries[n - 1][1]

    def to_json(self, entries: bool = True) -> dict:
        out = {"point": _fmt(self.point), "side": self.side, "horizon": self.horizon,
               "pieces": [p.to_json() for p in self.pieces]}
        if entries:
            out["entries"] = [{"n": n, "x": x.to_json()} for n, x in self.entries]
        return out


# per-n ratios ------------------------------------------------------------------

def _length_factor(side: str) -> int:
    return 2 if side == "two-sided" else 1


def _interval_ratio(a: IntervalSet, p: Fraction, side: str, h: Enclosure) -> Enclosure:
    """Exact hull of ``lambda(a & J(h)) / |J(h)|`` over h in the enclosure.

    Between breakpoints (distances from p to endpoints) the measure is
    affine in h, so the ratio is monotone there and its extremes lie at
    h.lo, h.hi or a breakpoint.
    """
    c = _length_factor(side)
    probes = {h.lo, h.hi}
    probes.update(d for d in (abs(e - p) for e in a.endpoints()) if h.lo < d < h.hi)
    values = []
    for t in probes:
        u = p - t if side in ("two-sided", "left") else p
        v = p + t if side in ("two-sided", "right") else p
        values.append(a.measure_between(u, v) / (c * t))
    return Enclosure(min(values), max(values))


def _generator_ratio(g: GeneratorSet, p: Fraction, side: str, h: Enclosure, precision: int) -> Enclosure:
    c = _length_factor(side)
    ma = g.window_measure(Window(p, Enclosure.point(h.lo), side), precision)
    if h.is_point:
        return Enclosure(ma.lo / (c * h.lo), ma.hi / (c * h.lo)).outward(precision + 8)
    mb = g.window_measure(Window(p, Enclosure.point(h.hi), side), precision)
    a, b = h.lo, h.hi
    # the window grows by c*(b - a) in length across the enclosure
    lo = max(ma.lo / (c * b), (mb.lo - c * (b - a)) / (c * a))
    hi = min(mb.hi / (c * a), (ma.hi + c * (b - a)) / (c * b))
    return Enclosure(lo, hi).outward(precision + 8)


def ratio_at(a, p, side: str, h: Enclosure, precision: int = 64) -> Enclosure:
    """Enclosure of ``x = lambda(a & J) / |J|`` for the window of half-width h at p."""
    p = Fraction(p)
    if isinstance(a, GeneratorSet):
        return _generator_ratio(a, p, side, h, precision)
    return _interval_ratio(a, p, side, h)


def _checked_ratio(a, p, side, s, n, precision) -> Enclosure:
    for bits in (precision, 2 * precision):
        h = 1 / eval_seq(s, n, bits + 8)
        x = ratio_at(a, p, side, h, bits)
        if x.lo >= 0 and x.hi <= 1:
            return x
    raise InvariantViolation(f"ratio enclosure {x} at n={n} leaves [0, 1]")


# symbolic pieces ---------------------------------------------------------------

def _merged_cases(s: SequenceFamily):
    groups = {}
    for case in s.cases:
        key = to_text(case.term)
        dom, term = groups.get(key, (None, case.term))
        groups[key] = (case.domain if dom is None else Union(dom, case.domain), term)
    return list(groups.values())


def _cutoff(term: TermExpr, radius, precision: int) -> int | None:
    """First n with ``term(n) >= 1/radius`` for an increasing term, or None if not found."""
    if radius == INF:
        return 1
    need = 1 / radius
    try:
        if eval_term(term, 1, precision, True).lo >= need:
            return 1
        hi = 2
        while eval_term(term, hi, precision, True).lo < need:
            hi *= 2
            if hi > CUTOFF_SEARCH:
                return None
        lo = hi // 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if eval_term(term, mid, precision, True).lo >= need:
                hi = mid
            else:
                lo = mid
        return hi
    except PrecisionError:
        return None


def _local(a, p, precision):
    if isinstance(a, GeneratorSet):
        return a.local_structure(p, precision)
    return local_structure(a, p)


def _far(a, p) -> FarStructure:
    if isinstance(a, GeneratorSet):
        return FarStructure(0, 0, Fraction(0))
    return far_structure(a, p)


def _empty_side(a, p, side) -> bool:
    """Generator windows that only meet the side of the accumulation point the family avoids."""
    if not isinstance(a, GeneratorSet) or p != a.accumulation:
        return False
    return (a.orientation == "positive" and side == "left") or (a.orientation == "negative" and side == "right")


def _piece_for(a, p, side, dom, term, precision) -> SymbolicPiece:
    sh = shape(term)
    if _empty_side(a, p, side):
        return SymbolicPiece(dom, "eventually-constant", Fraction(0), 1, "window meets only the empty side")
    if sh.limit == "inf":
        loc = _local(a, p, precision)
        if loc is None:
            return SymbolicPiece(dom, "unknown", note="no local closed form at this point")
        cut = _cutoff(term, loc.radius, precision) if sh.monotone == "inc" else None
        return SymbolicPiece(dom, "eventually-constant", loc.density(side), cut,
                             "windows shrink inside the local structure")
    if sh.limit == "zero":
        return SymbolicPiece(dom, "convergent", _far(a, p).density(side), note="windows grow past the set's bounded part")
    if is_constant(term):
        c = eval_term(term, 1, precision, True)
        x = ratio_at(a, p, side, 1 / c, precision)
        if x.is_point:
            return SymbolicPiece(dom, "eventually-constant", x.lo, 1, "constant window")
        return SymbolicPiece(dom, "unknown", note=f"constant window with ratio {x}")
    return SymbolicPiece(dom, "unknown", note=f"no limit tag for {to_text(term)}")


def _apply_envelopes(piece: SymbolicPiece, envelopes, entries, horizon) -> list:
    if piece.kind != "unknown" or not envelopes:
        return [piece]
    out = []
    left = piece.domain
    for env in envelopes:
        part = piece.domain if env.domain == piece.domain else env.domain & piece.domain
        if is_empty(part) is True:
            continue
        if shape(env.bound).limit != "zero":
            raise InvariantViolation(f"envelope bound {to_text(env.bound)} is not known to tend to 0")
        for n in iter_members(part, 1, horizon):
            b = eval_term(env.bound, n, 64, True)
            x = entries[n - 1][1]
            if not (x.hi <= env.limit + b.lo and x.lo >= env.limit - b.lo):
                raise InvariantViolation(f"envelope |x_n - {_fmt(env.limit)}| <= {to_text(env.bound)} fails at n={n}: x_n in {x}")
        out.append(SymbolicPiece(part, "envelope", env.limit,
                                 note=f"|x_n - {_fmt(env.limit)}| <= {to_text(env.bound)} verified for n <= {horizon}"))
        left = Difference(left, env.domain)
    if is_empty(left) is not True:
        out.append(SymbolicPiece(left, "unknown", note=piece.note))
    return out


def ratio_sequence(a, p, s: SequenceFamily, side: str = "two-sided", horizon: int = 64,
                   precision: int = 64, envelopes=()) -> RatioSequence:
    p = Fraction(p)
    entries = tuple((n, _checked_ratio(a, p, side, s, n, precision)) for n in range(1, horizon + 1))
    pieces = []
    for dom, term in _merged_cases(s):
        piece = _piece_for(a, p, side, dom, term, precision)
        if piece.kind == "eventually-constant" and piece.cutoff is not None:
            for n in iter_members(dom, piece.cutoff, horizon):
                if not entries[n - 1][1].contains(piece.limit):
                    raise InvariantViolation(f"closed form {_fmt(piece.limit)} disagrees with x_{n} = {entries[n - 1][1]}")
        pieces.extend(_apply_envelopes(piece, envelopes, entries, horizon))
    return RatioSequence(p, side, entries, tuple(pieces), horizon)


# I-limits ----------------------------------------------------------------------

@dataclass(frozen=True)
class Certificate:
    kind: str  # exact-symbolic | enclosure-bounded | empirical
    exceptional: IndexSet | None = None
    ideal_status: Membership | None = None
    horizon: int | None = None
    empirical: Enclosure | None = None
    schedule: tuple = ()

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.exceptional is not None:
            out["exceptional"] = index_set_to_json(self.exceptional)
        if self.ideal_status is not None:
            out["ideal_status"] = self.ideal_status.value
        if self.schedule:
            out["schedule"] = list(self.schedule)
        if self.horizon is not None:
            out["horizon"] = self.horizon
        if self.empirical is not None:
            out["empirical"] = self.empirical.to_json()
        return out


@dataclass(frozen=True)
class ILimitVerdict:
    kind: str  # Limit | NoILimit | Inconclusive
    value: Fraction | None
    certificate: Certificate

    def to_json(self) -> dict:
        out = {"kind": self.kind, "certificate": self.certificate.to_json()}
        if self.value is not None:
            out["value"] = _fmt(self.value)
        return out


def _union(sets) -> IndexSet:
    sets = list(sets)
    return functools.reduce(Union, sets) if sets else EMPTY


def i_limit(r: RatioSequence, i: Ideal, target: Fraction | None = None) -> ILimitVerdict:
    """I-limit of the ratio sequence from its symbolic pieces.

    ``L`` is the I-limit when the union of piece domains whose limit is not
    ``L`` (together with domains without a closed form) lies in the ideal:
    for every epsilon the exceptional set is contained in it up to finitely
    many indices.
    """
    known = [pc for pc in r.pieces if pc.limit is not None]
    unknown = [pc.domain for pc in r.pieces if pc.limit is None]
    candidates = sorted({pc.limit for pc in known}) if target is None else [Fraction(target)]
    verdicts = {}
    for value in candidates:
        exceptional = _union([pc.domain for pc in known if pc.limit != value] + unknown)
        status = Membership.IN if is_empty(exceptional) is True else in_ideal(i, exceptional)
        if status is Membership.IN:
            support = [pc for pc in known if pc.limit == value]
            exact = all(pc.kind in EXACT_KINDS for pc in support)
            schedule = tuple(pc.note for pc in support if pc.kind == "envelope")
            cert = Certificate("exact-symbolic" if exact else "enclosure-bounded", exceptional, status,
                               schedule=schedule)
            return ILimitVerdict("Limit", value, cert)
        verdicts[value] = in_ideal(i, _union([pc.domain for pc in known if pc.limit != value]))
    if target is None and known and all(v is Membership.NOT_IN for v in verdicts.values()):
        if not unknown or in_ideal(i, _union(pc.domain for pc in known)) is Membership.NOT_IN:
            return ILimitVerdict("NoILimit", None, Certificate("exact-symbolic", ideal_status=Membership.NOT_IN))
    last = r.entries[-1][1] if r.entries else None
    return ILimitVerdict("Inconclusive", None, Certificate("empirical", horizon=r.horizon, empirical=last))


# verdicts ----------------------------------------------------------------------

@dataclass(frozen=True)
class DensityVerdict:
    cls: str  # DensityPoint | DispersionPoint | DensityValue | NoILimit | Inconclusive
    side: str
    certificate: Certificate
    horizon: int
    value: Fraction | None = None
    notes: tuple = field(default=())

    def to_json(self) -> dict:
        out = {"class": self.cls, "side": self.side, "certificate": self.certificate.to_json(), "horizon": self.horizon}
        if self.value is not None:
            out["value"] = _fmt(self.value)
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def verdict_from_limit(lim: ILimitVerdict, side: str, horizon: int) -> DensityVerdict:
    if lim.kind == "Limit":
        cls = {Fraction(1): "DensityPoint", Fraction(0): "DispersionPoint"}.get(lim.value, "DensityValue")
        value = lim.value if cls == "DensityValue" else None
        return DensityVerdict(cls, side, lim.certificate, horizon, value)
    return DensityVerdict(lim.kind, side, lim.certificate, horizon)


def classify_point(a, p, s: SequenceFamily, i: Ideal, side: str = "two-sided", horizon: int = 64,
                   precision: int = 64, envelopes=()) -> DensityVerdict:
    """Classify p as an I_(s)-density point, dispersion point, or neither.

    Refuses unless s has a verified monotone witness for i, i.e. s is in
    Sigma_I.  An inconclusive two-sided verdict is upgraded to DensityPoint
    when both one-sided verdicts are DensityPoint.
    """
    return classify_detailed(a, p, s, i, side, horizon, precision, envelopes)[0]


def classify_detailed(a, p, s: SequenceFamily, i: Ideal, side: str = "two-sided", horizon: int = 64,
                      precision: int = 64, envelopes=()):
    """Like :func:`classify_point`, also returning the ratio sequence behind the verdict."""
    witness = monotone_witness(s, i, max(horizon, 8), precision)
    if not witness.verified:
        raise PreconditionError(f"sequence is not certified in Sigma_I: witness status {witness.status.value}")
    r = ratio_sequence(a, p, s, side, horizon, precision, envelopes)
    verdict = verdict_from_limit(i_limit(r, i), side, horizon)
    if side == "two-sided" and verdict.cls == "Inconclusive":
        halves = [classify_point(a, p, s, i, sd, horizon, precision, envelopes) for sd in ("left", "right")]
        if all(h.cls == "DensityPoint" for h in halves):
            weakest = max((h.certificate for h in halves), key=lambda c: c.kind != "exact-symbolic")
            verdict = DensityVerdict("DensityPoint", side, weakest, horizon,
                                     notes=("both one-sided verdicts are DensityPoint",))
    return verdict, r


def limit_along_witness(a, p, s: SequenceFamily, i: Ideal, side: str = "two-sided", horizon: int = 64,
                        precision: int = 64) -> Fraction | None:
    """Ordinary limit of ``x_{k_n}`` along the sorted witness tail, by direct evaluation.

    Scans witness members in order until the window fits inside the local
    structure radius, then returns the ratio there; past that index the
    ratio is constant because the set looks the same in every smaller
    window.  None when the witness, the local structure or the cutoff is
    unavailable.
    """
    w = monotone_witness(s, i, max(horizon, 8), precision)
    if not w.verified:
        return None
    loc = _local(a, Fraction(p), precision)
    if loc is None:
        return None
    for k in iter_members(w.witness):
        if k > CUTOFF_SEARCH:
            return None
        h = 1 / eval_seq(s, k, precision)
        if loc.radius == INF or h.hi <= loc.radius:
            x = ratio_at(a, p, side, h, precision)
            return x.lo if x.is_point else None
    return None


# the density operator on finite unions ---------------------------------------------

def phi_finite(a: IntervalSet) -> IntervalSet:
    """Density points of a finite union: the interior after merging intervals whose closures touch."""
    pieces = [iv for iv in normalize(a).intervals if not iv.is_degenerate]
    merged = []
    for iv in pieces:
        if merged and iv.left <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], iv.right)
        else:
            merged.append([iv.left, iv.right])
    return IntervalSet(tuple(Interval(lft, rgt, False, False) for lft, rgt in merged))


def topology_member(a: IntervalSet, s: SequenceFamily | None = None, i: Ideal | None = None) -> bool:
    """``a`` is open in the density topology: ``a`` is contained in its density points.

    On finite unions the density points do not depend on the verified
    sequence or the ideal, so ``s`` and ``i`` only document the context.
    """
    return difference(normalize(a), phi_finite(a)).is_empty
