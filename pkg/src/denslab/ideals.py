"""Symbolic subsets of N = {1, 2, ...}, asymptotic density, and ideals on N.

Every index set built from finite sets, squares and arithmetic progressions
with Boolean operations is *eventually periodic modulo squares*: past some
cutoff, ``n in K`` depends only on ``n mod L`` and on whether ``n`` is a
perfect square.  That profile decides finiteness, cofiniteness and the
(always existing) asymptotic density exactly.  Squares and finite sets have
density zero, so the density is the share of residues that hold for
non-squares.
"""

from __future__ import annotations

import enum
import functools
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .errors import InputError

MAX_PERIOD = 1 << 16


class IndexSet:
    """Base class of symbolic index sets.  Instances are immutable and hashable."""

    __slots__ = ()

    def __contains__(self, n):
        return member(self, n)

    def __or__(self, other):
        return Union(self, other)

    def __and__(self, other):
        return Intersection(self, other)

    def __sub__(self, other):
        return Difference(self, other)

    def __invert__(self):
        return complement(self)

    def __str__(self):
        return describe(self)


@dataclass(frozen=True)
class Finite(IndexSet):
    elements: tuple

    def __post_init__(self):
        elems = tuple(sorted(set(int(e) for e in self.elements)))
        if elems and elems[0] < 1:
            raise InputError("finite index sets hold positive integers only")
        object.__setattr__(self, "elements", elems)


@dataclass(frozen=True)
class All(IndexSet):
    pass


@dataclass(frozen=True)
class Squares(IndexSet):
    pass


@dataclass(frozen=True)
class Progression(IndexSet):
    """``{m >= max(start, 1) : m = start (mod step)}``."""

    start: int
    step: int

    def __post_init__(self):
        if self.step < 1:
            raise InputError("progression step must be >= 1")
        if self.start < 0:
            raise InputError("progression start must be >= 0")


@dataclass(frozen=True)
class Complement(IndexSet):
    of: IndexSet


@dataclass(frozen=True)
class Union(IndexSet):
    left: IndexSet
    right: IndexSet


@dataclass(frozen=True)
class Intersection(IndexSet):
    left: IndexSet
    right: IndexSet


@dataclass(frozen=True)
class Difference(IndexSet):
    left: IndexSet
    right: IndexSet


ALL = All()
SQUARES = Squares()
EMPTY = Finite(())


def finite(*elements) -> Finite:
    if len(elements) == 1 and not isinstance(elements[0], int):
        elements = tuple(elements[0])
    return Finite(tuple(elements))


def initial_segment(n0: int) -> Finite:
    """``{1, ..., n0}``."""
    return Finite(tuple(range(1, n0 + 1)))


def complement(k: IndexSet) -> IndexSet:
    if isinstance(k, Complement):
        return k.of
    return Complement(k)


def simplify(k: IndexSet) -> IndexSet:
    """Remove double complements throughout the tree."""
    if isinstance(k, Complement):
        inner = simplify(k.of)
        return inner.of if isinstance(inner, Complement) else Complement(inner)
    if isinstance(k, (Union, Intersection, Difference)):
        return type(k)(simplify(k.left), simplify(k.right))
    return k


def describe(k: IndexSet) -> str:
    if isinstance(k, Finite):
        return "{" + ",".join(map(str, k.elements)) + "}"
    if isinstance(k, All):
        return "N"
    if isinstance(k, Squares):
        return "Squares"
    if isinstance(k, Progression):
        return f"{k.start}+{k.step}N"
    if isinstance(k, Complement):
        return f"N\\({describe(k.of)})"
    sym = {Union: " | ", Intersection: " & ", Difference: " - "}[type(k)]
    return f"({describe(k.left)}{sym}{describe(k.right)})"


# membership and counting -----------------------------------------------------

def _is_square(n):
    r = math.isqrt(n)
    return r * r == n


def member(k: IndexSet, n: int) -> bool:
    if n < 1:
        raise ValueError("index sets live in N = {1, 2, ...}")
    if isinstance(k, Finite):
        return n in k.elements
    if isinstance(k, All):
        return True
    if isinstance(k, Squares):
        return _is_square(n)
    if isinstance(k, Progression):
        return n >= k.start and (n - k.start) % k.step == 0
    if isinstance(k, Complement):
        return not member(k.of, n)
    if isinstance(k, Union):
        return member(k.left, n) or member(k.right, n)
    if isinstance(k, Intersection):
        return member(k.left, n) and member(k.right, n)
    if isinstance(k, Difference):
        return member(k.left, n) and not member(k.right, n)
    raise TypeError(f"not an index set: {k!r}")


@dataclass(frozen=True)
class Profile:
    """Membership rule for n > cutoff: ``nonsquare[n % period]`` or ``square[n % period]``."""

    period: int
    nonsquare: tuple
    square: tuple
    cutoff: int

    def rule(self, n: int) -> bool:
        table = self.square if _is_square(n) else self.nonsquare
        return table[n % self.period]

    @functools.cached_property
    def square_residues(self) -> frozenset:
        return frozenset(m * m % self.period for m in range(self.period))


@functools.lru_cache(maxsize=4096)
def profile(k: IndexSet) -> Profile | None:
    """Eventual profile of ``k``, or None when the period would exceed MAX_PERIOD."""
    if isinstance(k, Finite):
        return Profile(1, (False,), (False,), k.elements[-1] if k.elements else 0)
    if isinstance(k, All):
        return Profile(1, (True,), (True,), 0)
    if isinstance(k, Squares):
        return Profile(1, (False,), (True,), 0)
    if isinstance(k, Progression):
        table = tuple(r == k.start % k.step for r in range(k.step))
        return Profile(k.step, table, table, max(k.start - 1, 0))
    if isinstance(k, Complement):
        p = profile(k.of)
        if p is None:
            return None
        return Profile(p.period, tuple(not v for v in p.nonsquare), tuple(not v for v in p.square), p.cutoff)
    a, b = profile(k.left), profile(k.right)
    if a is None or b is None:
        return None
    period = a.period * b.period // math.gcd(a.period, b.period)
    if period > MAX_PERIOD:
        return None
    if isinstance(k, Union):
        op = lambda x, y: x or y
    elif isinstance(k, Intersection):
        op = lambda x, y: x and y
    else:
        op = lambda x, y: x and not y
    nonsq = tuple(op(a.nonsquare[r % a.period], b.nonsquare[r % b.period]) for r in range(period))
    sq = tuple(op(a.square[r % a.period], b.square[r % b.period]) for r in range(period))
    return Profile(period, nonsq, sq, max(a.cutoff, b.cutoff))


def _count_residue(r, lo, hi, period):
    """Count m in (lo, hi] with m = r (mod period)."""
    return (hi - r) // period - (lo - r) // period


def count_up_to(k: IndexSet, n: int) -> int:
    """Exact ``|{m in k : m <= n}|``."""
    if n < 1:
        return 0
    if isinstance(k, Finite):
        return sum(1 for e in k.elements if e <= n)
    if isinstance(k, All):
        return n
    if isinstance(k, Squares):
        return math.isqrt(n)
    if isinstance(k, Progression):
        first = k.start if k.start >= 1 else k.step
        return 0 if n < first else (n - first) // k.step + 1
    if isinstance(k, Complement):
        return n - count_up_to(k.of, n)
    p = profile(k)
    if p is None:
        return sum(1 for m in range(1, n + 1) if member(k, m))
    c = min(p.cutoff, n)
    total = sum(1 for m in range(1, c + 1) if member(k, m))
    if n > c:
        total += sum(_count_residue(r, c, n, p.period) for r in range(p.period) if p.nonsquare[r])
        for j in range(math.isqrt(c) + 1, math.isqrt(n) + 1):
            r = j * j % p.period
            total += p.square[r] - p.nonsquare[r]
    return total


def iter_members(k: IndexSet, start: int = 1, stop: int | None = None) -> Iterator[int]:
    """Ascending members of ``k`` in ``[start, stop]``; unbounded when stop is None."""
    span = itertools.count(max(start, 1)) if stop is None else range(max(start, 1), stop + 1)
    for n in span:
        if member(k, n):
            yield n


def members_up_to(k: IndexSet, n: int) -> list:
    return [m for m in range(1, n + 1) if member(k, m)]


def is_finite(k: IndexSet) -> bool | None:
    p = profile(k)
    if p is None:
        return None
    if any(p.nonsquare):
        return False
    return not any(p.square[r] for r in p.square_residues)


def is_cofinite(k: IndexSet) -> bool | None:
    return is_finite(complement(k))


def is_empty(k: IndexSet) -> bool | None:
    fin = is_finite(k)
    if fin is not True:
        return fin
    return not any(member(k, m) for m in range(1, profile(k).cutoff + 1))


def max_element(k: IndexSet) -> int:
    """Largest member of a provably finite set, 0 for the empty set."""
    if is_finite(k) is not True:
        raise ValueError(f"{describe(k)} is not provably finite")
    elems = [m for m in range(1, profile(k).cutoff + 1) if member(k, m)]
    return elems[-1] if elems else 0


def eventual_max_gap(k: IndexSet) -> int | None:
    """Upper bound on gaps between consecutive members of ``k``, for large members.

    None when ``k`` is finite, the pattern is unknown, or gaps are unbounded.
    """
    p = profile(k)
    if p is None:
        return None
    residues = [r for r in range(p.period) if p.nonsquare[r]]
    if not residues:
        return None
    gaps = [b - a for a, b in zip(residues, residues[1:])] + [residues[0] + p.period - residues[-1]]
    base = max(gaps)
    # squares are eventually further apart than 2*base, so each can open at most one extra hole
    if any(p.nonsquare[r] and not p.square[r] for r in p.square_residues):
        return 2 * base
    return base


# density -------------------------------------------------------------------

class DensityStatus(enum.Enum):
    EXISTS = "Exists"
    UNDEFINED = "Undefined"
    UNKNOWN = "UnknownAtHorizon"


@dataclass(frozen=True)
class DensityResult:
    status: DensityStatus
    value: Fraction | None = None
    horizon: int | None = None
    empirical: Fraction | None = None

    def to_json(self) -> dict:
        out = {"status": self.status.value}
        if self.value is not None:
            out["value"] = _fmt(self.value)
        if self.empirical is not None:
            out["horizon"] = self.horizon
            out["empirical"] = _fmt(self.empirical)
        return out


def _fmt(q):
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


EMPIRICAL_HORIZON = 100_000


@functools.lru_cache(maxsize=4096)
def asymptotic_density(k: IndexSet) -> DensityResult:
    p = profile(k)
    if p is None:
        h = EMPIRICAL_HORIZON
        return DensityResult(DensityStatus.UNKNOWN, horizon=h, empirical=Fraction(count_up_to(k, h), h))
    return DensityResult(DensityStatus.EXISTS, Fraction(sum(p.nonsquare), p.period))


def density_trace(k: IndexSet, points=(10, 100, 1000, 10_000, 100_000, 1_000_000)) -> list:
    return [(n, Fraction(count_up_to(k, n), n)) for n in points]


# ideals --------------------------------------------------------------------

class Membership(enum.Enum):
    IN = "In"
    NOT_IN = "NotIn"
    UNKNOWN = "Unknown"


class Ideal:
    """An admissible, non-trivial ideal of subsets of N.

    Subclasses decide membership on the symbolic class through ``status``;
    returning UNKNOWN is always allowed.  A density-threshold ideal is one
    such subclass away.
    """

    name = "ideal"

    def status(self, k: IndexSet) -> Membership:
        raise NotImplementedError

    def to_json(self) -> dict:
        return {"ideal": self.name}

    def __eq__(self, other):
        return type(self) is type(other)

    def __hash__(self):
        return hash(type(self))

    def __repr__(self):
        return f"{type(self).__name__}()"


class FinIdeal(Ideal):
    """All finite subsets of N."""

    name = "fin"

    def status(self, k):
        fin = is_finite(k)
        if fin is None:
            return Membership.UNKNOWN
        return Membership.IN if fin else Membership.NOT_IN


class DensityZeroIdeal(Ideal):
    """Subsets of N with asymptotic density zero."""

    name = "density_zero"

    def status(self, k):
        d = asymptotic_density(k)
        if d.status is not DensityStatus.EXISTS:
            return Membership.UNKNOWN
        return Membership.IN if d.value == 0 else Membership.NOT_IN


FIN = FinIdeal()
DENSITY_ZERO = DensityZeroIdeal()
IDEALS = {"fin": FIN, "density_zero": DENSITY_ZERO}


def in_ideal(i: Ideal, k: IndexSet) -> Membership:
    return i.status(k)


def in_filter(i: Ideal, k: IndexSet) -> Membership:
    """Membership of ``k`` in the dual filter ``{M : N \\ M in i}``."""
    return i.status(complement(k))


# JSON ----------------------------------------------------------------------

def index_set_from_json(obj) -> IndexSet:
    if isinstance(obj, str):
        obj = {"set": obj}
    if not isinstance(obj, dict) or "set" not in obj:
        raise InputError(f"index set must be an object with a 'set' tag, got {obj!r}")
    tag = obj["set"]
    try:
        if tag == "all":
            return ALL
        if tag == "squares":
            return SQUARES
        if tag == "empty":
            return EMPTY
        if tag == "finite":
            return Finite(tuple(obj["elements"]))
        if tag == "initial":
            return initial_segment(int(obj["up_to"]))
        if tag == "progression":
            return Progression(int(obj.get("start", 0)), int(obj["step"]))
        if tag == "complement":
            return complement(index_set_from_json(obj["of"]))
        if tag in ("union", "intersection", "difference"):
            parts = [index_set_from_json(p) for p in obj["of"]]
            if len(parts) < 2 or (tag == "difference" and len(parts) != 2):
                raise InputError(f"'{tag}' needs two operands (union/intersection accept more)")
            cls = {"union": Union, "intersection": Intersection, "difference": Difference}[tag]
            return functools.reduce(cls, parts)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed index set {obj!r}: {exc}") from None
    raise InputError(f"unknown index set tag {tag!r}")


def index_set_to_json(k: IndexSet) -> dict:
    if isinstance(k, All):
        return {"set": "all"}
    if isinstance(k, Squares):
        return {"set": "squares"}
    if isinstance(k, Finite):
        return {"set": "finite", "elements": list(k.elements)}
    if isinstance(k, Progression):
        return {"set": "progression", "start": k.start, "step": k.step}
    if isinstance(k, Complement):
        return {"set": "complement", "of": index_set_to_json(k.of)}
    tag = {Union: "union", Intersection: "intersection", Difference: "difference"}[type(k)]
    return {"set": tag, "of": [index_set_to_json(k.left), index_set_to_json(k.right)]}


def ideal_from_json(obj) -> Ideal:
    name = obj.get("ideal") if isinstance(obj, dict) else obj
    try:
        return IDEALS[name]
    except (KeyError, TypeError):
        raise InputError(f"unknown ideal {obj!r}; expected one of {sorted(IDEALS)}") from None
