"""Measurable subsets of the real line.

Two representations:

* :class:`IntervalSet` -- a finite union of intervals with exact rational
  (or infinite) endpoints.  Everything about it is computed exactly.
* :class:`GeneratorSet` -- a countable union ``[acc + L(n), acc + R(n)]``
  over a symbolic index domain, accumulating at ``acc``.  Measures are
  certified partial sums plus a tail bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .errors import GeneratorDefect, InputError, PrecisionError
from .exactnum.enclosure import round_down, round_up
from .exactnum import Enclosure, Ordering, TermExpr, compare, eval_term, format_rational, parse_term, to_text
from .ideals import ALL, IndexSet, index_set_from_json, index_set_to_json, is_finite, iter_members

INF = math.inf
SIDES = ("two-sided", "left", "right")


def _endpoint(value):
    if isinstance(value, float) and math.isinf(value):
        return value
    if isinstance(value, str) and value.strip().lstrip("+-") in ("inf", "oo", "infinity"):
        return -INF if value.strip().startswith("-") else INF
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError:
            raise InputError(f"bad endpoint {value!r}") from None
    return Fraction(value)


def format_endpoint(value) -> str:
    if isinstance(value, float):
        return "inf" if value > 0 else "-inf"
    return format_rational(value)


@dataclass(frozen=True)
class Interval:
    left: Fraction
    right: Fraction
    left_closed: bool = True
    right_closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "left", _endpoint(self.left))
        object.__setattr__(self, "right", _endpoint(self.right))
        if self.left > self.right:
            raise InputError(f"interval with left {self.left} > right {self.right}")
        if self.left == -INF and self.left_closed:
            object.__setattr__(self, "left_closed", False)
        if self.right == INF and self.right_closed:
            object.__setattr__(self, "right_closed", False)
        if self.left == INF or self.right == -INF:
            raise InputError("interval endpoints at the wrong infinity")

    @property
    def is_empty(self) -> bool:
        return self.left == self.right and not (self.left_closed and self.right_closed)

    @property
    def is_degenerate(self) -> bool:
        return self.left == self.right

    @property
    def length(self):
        return self.right - self.left

    def contains(self, x) -> bool:
        if x < self.left or x > self.right:
            return False
        if x == self.left and not self.left_closed:
            return False
        if x == self.right and not self.right_closed:
            return False
        return True

    def overlap_length(self, u, v):
        lo, hi = max(self.left, u), min(self.right, v)
        return hi - lo if hi > lo else Fraction(0)

    def to_json(self) -> dict:
        return {"l": format_endpoint(self.left), "r": format_endpoint(self.right),
                "lc": self.left_closed, "rc": self.right_closed}

    def __str__(self):
        lb = "[" if self.left_closed else "("
        rb = "]" if self.right_closed else ")"
        return f"{lb}{format_endpoint(self.left)}, {format_endpoint(self.right)}{rb}"


def closed(a, b) -> Interval:
    return Interval(a, b, True, True)


def open_(a, b) -> Interval:
    return Interval(a, b, False, False)


def point(a) -> Interval:
    return Interval(a, a, True, True)


@dataclass(frozen=True)
class IntervalSet:
    """A normalized finite union of intervals.  Build through :func:`normalize`."""

    intervals: tuple = ()

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def contains(self, x) -> bool:
        return any(iv.contains(x) for iv in self.intervals)

    def endpoints(self) -> list:
        pts = set()
        for iv in self.intervals:
            for e in (iv.left, iv.right):
                if not isinstance(e, float):
                    pts.add(e)
        return sorted(pts)

    def measure_between(self, u, v) -> Fraction:
        """Exact ``lambda(self & [u, v])`` for rational u <= v."""
        return sum((iv.overlap_length(u, v) for iv in self.intervals), Fraction(0))

    def to_json(self) -> dict:
        return {"kind": "finite", "intervals": [iv.to_json() for iv in self.intervals]}

    def __str__(self):
        return " U ".join(str(iv) for iv in self.intervals) if self.intervals else "{}"


EMPTY_SET = IntervalSet(())
REAL_LINE = IntervalSet((Interval(-INF, INF, False, False),))


def normalize(raw) -> IntervalSet:
    """Sort, drop empties, and merge overlapping or touching-and-covered intervals."""
    if isinstance(raw, IntervalSet):
        raw = raw.intervals
    items = [iv if isinstance(iv, Interval) else Interval(*iv) for iv in raw]
    items = sorted((iv for iv in items if not iv.is_empty), key=lambda iv: (iv.left, not iv.left_closed))
    merged = []
    for iv in items:
        if merged:
            cur = merged[-1]
            touches = iv.left < cur.right or (iv.left == cur.right and (cur.right_closed or iv.left_closed))
            if touches:
                if iv.right > cur.right:
                    right, rc = iv.right, iv.right_closed
                elif iv.right == cur.right:
                    right, rc = cur.right, cur.right_closed or iv.right_closed
                else:
                    right, rc = cur.right, cur.right_closed
                lc = cur.left_closed or (iv.left == cur.left and iv.left_closed)
                merged[-1] = Interval(cur.left, right, lc, rc)
                continue
        merged.append(iv)
    return IntervalSet(tuple(merged))


def measure(s: IntervalSet):
    """Lebesgue measure; ``math.inf`` for unbounded sets."""
    total = Fraction(0)
    for iv in s.intervals:
        if isinstance(iv.left, float) or isinstance(iv.right, float):
            return INF
        total += iv.length
    return total


def complement(s: IntervalSet) -> IntervalSet:
    pieces = []
    left, left_closed = -INF, False
    for iv in s.intervals:
        if iv.left != -INF:
            pieces.append(Interval(left, iv.left, left_closed, not iv.left_closed))
        left, left_closed = iv.right, not iv.right_closed
    if left != INF:
        pieces.append(Interval(left, INF, left_closed, False))
    return normalize(pieces)


def intersection(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    out = []
    for x in a.intervals:
        for y in b.intervals:
            if x.left > y.left:
                left, lc = x.left, x.left_closed
            elif y.left > x.left:
                left, lc = y.left, y.left_closed
            else:
                left, lc = x.left, x.left_closed and y.left_closed
            if x.right < y.right:
                right, rc = x.right, x.right_closed
            elif y.right < x.right:
                right, rc = y.right, y.right_closed
            else:
                right, rc = x.right, x.right_closed and y.right_closed
            if left < right or (left == right and lc and rc):
                out.append(Interval(left, right, lc, rc))
    return normalize(out)


def union(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    return normalize(a.intervals + b.intervals)


def difference(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    return intersection(a, complement(b))


def symm_diff_measure(a: IntervalSet, b: IntervalSet):
    return measure(difference(a, b)) + measure(difference(b, a))


# windows -------------------------------------------------------------------

@dataclass(frozen=True)
class Window:
    """``[c - h, c + h]``, ``[c - h, c]`` or ``[c, c + h]`` with an enclosed half-width h."""

    center: Fraction
    half_width: Enclosure
    side: str = "two-sided"

    def __post_init__(self):
        object.__setattr__(self, "center", Fraction(self.center))
        if not isinstance(self.half_width, Enclosure):
            object.__setattr__(self, "half_width", Enclosure.point(self.half_width))
        if self.half_width.lo <= 0:
            raise ValueError("window half-width must be certified positive")
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}")

    @property
    def length(self) -> Enclosure:
        return self.half_width * 2 if self.side == "two-sided" else self.half_width

    def bounds(self):
        """(left, right) endpoint enclosures."""
        c = Enclosure.point(self.center)
        h = self.half_width
        if self.side == "left":
            return c - h, c
        if self.side == "right":
            return c, c + h
        return c - h, c + h


def window_measure(s, w: Window, precision: int = 64) -> Enclosure:
    """Enclosure of ``lambda(s & w)``."""
    if isinstance(s, GeneratorSet):
        return s.window_measure(w, precision)
    u, v = w.bounds()
    # measure is monotone in the window, so the extreme windows bound it
    lo = s.measure_between(u.hi, v.lo) if u.hi <= v.lo else Fraction(0)
    return Enclosure(lo, s.measure_between(u.lo, v.hi))


def translate(s, x):
    x = Fraction(x)
    if isinstance(s, GeneratorSet):
        return replace(s, accumulation=s.accumulation + x)
    return IntervalSet(tuple(Interval(iv.left + x, iv.right + x, iv.left_closed, iv.right_closed) for iv in s.intervals))


def reflect(s):
    if isinstance(s, GeneratorSet):
        flipped = {"positive": "negative", "negative": "positive", "mirrored": "mirrored"}[s.orientation]
        return replace(s, accumulation=-s.accumulation, orientation=flipped)
    return normalize(Interval(-iv.right, -iv.left, iv.right_closed, iv.left_closed) for iv in s.intervals)


# local structure -------------------------------------------------------------

@dataclass(frozen=True)
class LocalStructure:
    """Coverage of the punctured neighbourhoods ``(p - r, p)`` and ``(p, p + r)``.

    Within ``radius`` of ``p`` the set agrees (up to null sets) with the
    covered sides, so every window of half-width ``<= radius`` sees exactly
    ``left`` and ``right`` as coverage fractions.
    """

    left: int
    right: int
    radius: object  # Fraction or INF

    def density(self, side: str) -> Fraction:
        if side == "left":
            return Fraction(self.left)
        if side == "right":
            return Fraction(self.right)
        return Fraction(self.left + self.right, 2)


def local_structure(s: IntervalSet, p) -> LocalStructure:
    p = Fraction(p)
    left = int(any(iv.left < p <= iv.right for iv in s.intervals))
    right = int(any(iv.left <= p < iv.right for iv in s.intervals))
    dists = [abs(e - p) for e in s.endpoints() if e != p]
    return LocalStructure(left, right, min(dists) if dists else INF)


@dataclass(frozen=True)
class FarStructure:
    """For half-widths ``>= radius``: ``lambda(s & J) = offset + (left + right) * h`` (two-sided)."""

    left: int
    right: int
    radius: Fraction

    def density(self, side: str) -> Fraction:
        return LocalStructure(self.left, self.right, 0).density(side)


def far_structure(s: IntervalSet, p) -> FarStructure:
    p = Fraction(p)
    left = int(bool(s.intervals) and s.intervals[0].left == -INF)
    right = int(bool(s.intervals) and s.intervals[-1].right == INF)
    dists = [abs(e - p) for e in s.endpoints()]
    return FarStructure(left, right, max(dists) if dists else Fraction(0))


# generator sets ----------------------------------------------------------------

MAX_GENERATOR_TERMS = 20000
ORIENTATIONS = ("positive", "negative", "mirrored")


@dataclass(frozen=True)
class GeneratorSet:
    """``U_{n in domain} [acc + L(n), acc + R(n)]`` (positive orientation).

    ``negative`` reflects the family about ``acc``; ``mirrored`` is the union
    of both.  Intervals must shrink toward ``acc``: for consecutive domain
    members ``k < k'``, ``0 < L(k') < R(k') < L(k) < R(k)``.  This is
    checked for every index a computation touches and up to the horizon by
    :meth:`verify`.  Beyond that the tail bound relies on ``R`` decreasing,
    which generators must guarantee analytically.
    """

    left: TermExpr
    right: TermExpr
    domain: IndexSet = ALL
    orientation: str = "positive"
    accumulation: Fraction = field(default=Fraction(0))

    def __post_init__(self):
        if isinstance(self.left, str):
            object.__setattr__(self, "left", parse_term(self.left))
        if isinstance(self.right, str):
            object.__setattr__(self, "right", parse_term(self.right))
        object.__setattr__(self, "accumulation", Fraction(self.accumulation))
        if self.orientation not in ORIENTATIONS:
            raise InputError(f"orientation must be one of {ORIENTATIONS}")
        if is_finite(self.domain) is not False:
            raise InputError(f"generator domain {self.domain} must be provably infinite; list finite families as intervals")

    def ends(self, k: int, precision: int):
        return (eval_term(self.left, k, precision, True), eval_term(self.right, k, precision, True))

    def verify(self, horizon: int, precision: int = 64) -> int:
        """Check positivity, ordering and disjointness for domain members <= horizon."""
        checked = 0
        prev = None
        for k in iter_members(self.domain, 1, horizon):
            L, R = self.ends(k, precision)
            self._check_pair(k, L, R, prev)
            prev = (k, L)
            checked += 1
        return checked

    def _check_pair(self, k, L, R, prev):
        if compare(Enclosure.point(0), L) is not Ordering.LESS:
            raise GeneratorDefect(f"left term not certified positive at n={k}: {L}")
        if compare(L, R) is not Ordering.LESS:
            raise GeneratorDefect(f"left term not certified below right term at n={k}")
        if prev is not None:
            pk, pL = prev
            if compare(R, pL) is not Ordering.LESS:
                raise GeneratorDefect(f"interval {k} not certified below interval {pk}")

    def cumulative(self, t, precision: int = 64, horizon: int | None = None) -> Enclosure:
        """Enclosure of ``lambda(G+ & [0, t])`` for the positive, offset-free family.

        Sums intervals up to an adaptive index (or ``horizon``) and adds the
        tail bound ``min(t, R(next))``: every later interval lies in
        ``[0, R(next)]``.
        """
        if t <= 0:
            return Enclosure.point(0)
        work = precision + 16
        infinite = isinstance(t, float)
        members = iter_members(self.domain)
        k = next(members)
        L, R = self.ends(k, work)
        self._check_pair(k, L, R, None)
        scale = R.hi if infinite else t
        tol = scale / (1 << (precision + 4))
        # partial sums live on a dyadic grid well below tol; rounding is outward
        grid = precision + 24 - (scale.numerator.bit_length() - scale.denominator.bit_length())
        lo = hi = Fraction(0)
        for _ in range(MAX_GENERATOR_TERMS):
            if infinite:
                lo += max(Fraction(0), R.lo - L.hi)
                hi += R.hi - L.lo
            elif L.lo < t:
                lo += max(Fraction(0), min(t - L.hi, R.lo - L.hi))
                hi += min(t - L.lo, R.hi - L.lo)
            lo, hi = round_down(lo, grid), round_up(hi, grid)
            k_next = next(members)
            Ln, Rn = self.ends(k_next, work)
            self._check_pair(k_next, Ln, Rn, (k, L))
            if horizon is not None:
                done = k >= horizon
            else:
                done = (infinite or R.hi <= t) and Rn.hi <= tol
            if done:
                hi += Rn.hi if infinite else min(t, Rn.hi)
                return Enclosure(lo, round_up(hi, grid))
            k, L, R = k_next, Ln, Rn
        raise PrecisionError("generator tail bound did not converge within the term limit")

    def _positive_part(self, u: Enclosure, v: Enclosure, precision, horizon=None) -> Enclosure:
        """``lambda(G+ & [u, v])`` in offset-free coordinates."""
        if v.hi <= 0:
            return Enclosure.point(0)
        upper_v = self.cumulative(v.hi, precision, horizon)
        lower_v = self.cumulative(v.lo, precision, horizon) if v.lo > 0 else Enclosure.point(0)
        if u.hi <= 0:
            return Enclosure(lower_v.lo, upper_v.hi)
        upper_u = self.cumulative(u.hi, precision, horizon)
        lower_u = self.cumulative(u.lo, precision, horizon) if u.lo > 0 else Enclosure.point(0)
        return Enclosure(lower_v.lo - upper_u.hi, upper_v.hi - lower_u.lo)

    def window_measure(self, w: Window, precision: int = 64, horizon: int | None = None) -> Enclosure:
        u, v = w.bounds()
        acc = self.accumulation
        total = Enclosure.point(0)
        if self.orientation in ("positive", "mirrored"):
            total = total + self._positive_part(u - acc, v - acc, precision, horizon)
        if self.orientation in ("negative", "mirrored"):
            total = total + self._positive_part(Enclosure.point(acc) - v, Enclosure.point(acc) - u, precision, horizon)
        bound = w.length.hi * 16 / (1 << precision)
        if total.width > bound:
            raise PrecisionError("window endpoints not separated from generator endpoints", hint=2 * precision)
        return total

    def total_measure(self, precision: int = 64) -> Enclosure:
        part = self.cumulative(INF, precision)
        return part * 2 if self.orientation == "mirrored" else part

    def local_structure(self, p, precision: int = 64) -> LocalStructure | None:
        """Local coverage at ``p``; None at the accumulation point or if undecidable."""
        p = Fraction(p)
        d = p - self.accumulation
        if d == 0:
            return None
        if self.orientation == "mirrored":
            near = self._positive_local(abs(d), precision)
            if near is None:
                return None
            cap = min(near.radius, abs(d))
            if d > 0:
                return LocalStructure(near.left, near.right, cap)
            return LocalStructure(near.right, near.left, cap)
        if (self.orientation == "positive") == (d > 0):
            near = self._positive_local(abs(d), precision)
            if near is None or d > 0:
                return near
            return LocalStructure(near.right, near.left, near.radius)
        return LocalStructure(0, 0, abs(d))

    def _positive_local(self, d: Fraction, precision):
        work = precision + 16
        pd = Enclosure.point(d)
        prev_L = None
        for k in iter_members(self.domain):
            L, R = self.ends(k, work)
            vs_R, vs_L = compare(pd, R), compare(pd, L)
            if Ordering.OVERLAP in (vs_R, vs_L):
                return None
            if vs_R is Ordering.GREATER:
                radius = d - R.hi
                if prev_L is not None:
                    radius = min(radius, prev_L.lo - d)
                return LocalStructure(0, 0, radius)
            if vs_R is Ordering.EQUAL:
                radius = d - L.hi
                if prev_L is not None:
                    radius = min(radius, prev_L.lo - d)
                return LocalStructure(1, 0, radius)
            if vs_L is Ordering.GREATER:
                return LocalStructure(1, 1, min(d - L.hi, R.lo - d))
            if vs_L is Ordering.EQUAL:
                k_next = next(iter_members(self.domain, k + 1))
                _, Rn = self.ends(k_next, work)
                return LocalStructure(0, 1, min(R.lo - d, d - Rn.hi))
            prev_L = L
            if k > MAX_GENERATOR_TERMS:
                return None
        return None

    def to_json(self) -> dict:
        out = {"kind": "generator", "left": to_text(self.left), "right": to_text(self.right),
               "domain": index_set_to_json(self.domain)}
        if self.orientation == "mirrored":
            out["mirror"] = True
        else:
            out["orientation"] = self.orientation
        if self.accumulation != 0:
            out["accumulation"] = format_rational(self.accumulation)
        return out

    def __str__(self):
        base = f"U[{to_text(self.left)}, {to_text(self.right)}]"
        if self.accumulation:
            base += f" + {format_rational(self.accumulation)}"
        return {"positive": base, "negative": f"-({base})", "mirrored": f"-{base} U {base}"}[self.orientation]


# JSON ----------------------------------------------------------------------

def set_from_json(obj):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InputError(f"set must be an object with a 'kind' tag, got {obj!r}")
    kind = obj["kind"]
    try:
        if kind == "finite":
            raw = [Interval(iv["l"], iv["r"], bool(iv.get("lc", True)), bool(iv.get("rc", True)))
                   for iv in obj.get("intervals", [])]
            return normalize(raw)
        if kind == "generator":
            orientation = "mirrored" if obj.get("mirror") else obj.get("orientation", "positive")
            return GeneratorSet(
                parse_term(obj["left"]),
                parse_term(obj["right"]),
                index_set_from_json(obj.get("domain", "all")),
                orientation,
                Fraction(obj.get("accumulation", "0")),
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed set {obj!r}: {exc}") from None
    raise InputError(f"unknown set kind {kind!r}")


def set_to_json(s) -> dict:
    return s.to_json()
