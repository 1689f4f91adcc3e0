"""Randomized checks of the lower-density-operator axioms on finite unions.

All comparisons are exact: the operator is evaluated in closed form and
point verdicts come from the classifier, so one disagreement is a defect.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .density import classify_point, phi_finite, topology_member
from .errors import AxiomViolation
from .ideals import DENSITY_ZERO, FIN, Ideal
from .intervalsets import (
    EMPTY_SET,
    REAL_LINE,
    Interval,
    IntervalSet,
    difference,
    intersection,
    measure,
    normalize,
    point,
    reflect,
    symm_diff_measure,
    translate,
    union,
)
from .sequences import SequenceFamily

GRID = (1, 2, 3, 4, 6)
PROBES_PER_TRIAL = 2


def random_rational(rng: random.Random, span: int = 4) -> Fraction:
    den = rng.choice(GRID)
    return Fraction(rng.randint(-span * den, span * den), den)


def random_interval_set(rng: random.Random, max_pieces: int = 4) -> IntervalSet:
    raw = []
    for _ in range(rng.randint(0, max_pieces)):
        a, b = sorted((random_rational(rng), random_rational(rng)))
        if a == b or rng.random() < 0.1:
            raw.append(point(a))
        else:
            raw.append(Interval(a, b, rng.random() < 0.5, rng.random() < 0.5))
    return normalize(raw)


def null_perturbation(rng: random.Random, a: IntervalSet) -> IntervalSet:
    """``a`` with a few points added and a few removed; same set up to measure zero."""
    b = a
    for _ in range(rng.randint(1, 3)):
        if rng.random() < 0.5:
            b = union(b, normalize([point(random_rational(rng))]))
        else:
            pts = a.endpoints() or [Fraction(0)]
            x = rng.choice(pts + [random_rational(rng)])
            b = difference(b, normalize([point(x)]))
    return b


def probe_points(rng: random.Random, a: IntervalSet, k: int) -> list:
    pts = a.endpoints()
    out = []
    for _ in range(k):
        if pts and rng.random() < 0.6:
            out.append(rng.choice(pts))
        else:
            out.append(random_rational(rng))
    return out


@dataclass
class AxiomReport:
    trials: int
    seed: int
    checks: dict = field(default_factory=dict)

    def tick(self, name: str):
        self.checks[name] = self.checks.get(name, 0) + 1

    def to_json(self) -> dict:
        return {"trials": self.trials, "seed": self.seed, "passed": True,
                "checks": dict(sorted(self.checks.items()))}


def _fail(name, **instance):
    raise AxiomViolation(f"axiom check '{name}' failed",
                         {k: (v.to_json() if hasattr(v, "to_json") else str(v)) for k, v in instance.items()})


def axiom_suite(trials: int, seed: int = 0, s: SequenceFamily | None = None, i: Ideal | None = None,
                horizon: int = 16, precision: int = 64) -> AxiomReport:
    """Check the operator axioms, the measure-difference bound, ideal monotonicity and equivariance.

    Raises AxiomViolation carrying the serialized failing instance.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    s = s or SequenceFamily.single("n")
    ideals = (FIN, DENSITY_ZERO) if i is None else tuple(dict.fromkeys((FIN, i)))
    rng = random.Random(seed)
    report = AxiomReport(trials, seed)

    if phi_finite(EMPTY_SET) != EMPTY_SET:
        _fail("empty")
    if phi_finite(REAL_LINE) != REAL_LINE:
        _fail("full", result=phi_finite(REAL_LINE))
    report.tick("empty-and-full")

    for _ in range(trials):
        a, b = random_interval_set(rng), random_interval_set(rng)
        pa, pb = phi_finite(a), phi_finite(b)

        lo, hi = sorted((random_rational(rng), random_rational(rng)))
        box = normalize([Interval(lo, hi + 1)])
        if phi_finite(box) != normalize([Interval(lo, hi + 1, False, False)]):
            _fail("bounded-window", window=box)
        report.tick("bounded-window")

        if phi_finite(intersection(a, b)) != intersection(pa, pb):
            _fail("intersection", a=a, b=b)
        report.tick("intersection")

        c = null_perturbation(rng, a)
        if symm_diff_measure(a, c) != 0 or phi_finite(c) != pa:
            _fail("null-invariance", a=a, perturbed=c)
        report.tick("null-invariance")

        if symm_diff_measure(a, pa) != 0:
            _fail("equivalent-to-image", a=a)
        report.tick("equivalent-to-image")

        if abs(measure(a) - measure(b)) > symm_diff_measure(a, b):
            _fail("measure-difference", a=a, b=b)
        report.tick("measure-difference")

        x = random_rational(rng)
        if phi_finite(translate(a, x)) != translate(pa, x):
            _fail("translation", a=a, shift=x)
        if phi_finite(reflect(a)) != reflect(pa):
            _fail("reflection", a=a)
        if topology_member(a) != topology_member(translate(a, x)) or topology_member(a) != topology_member(reflect(a)):
            _fail("open-set-equivariance", a=a, shift=x)
        report.tick("equivariance")

        for p in probe_points(rng, a, PROBES_PER_TRIAL):
            verdicts = {ideal: classify_point(a, p, s, ideal, horizon=horizon, precision=precision) for ideal in ideals}
            if verdicts[FIN].cls == "DensityPoint" and any(v.cls != "DensityPoint" for v in verdicts.values()):
                _fail("ideal-monotone", a=a, point=p)
            report.tick("ideal-monotone")
            if (verdicts[FIN].cls == "DensityPoint") != pa.contains(p):
                _fail("operator-matches-verdicts", a=a, point=p, verdict=verdicts[FIN])
            report.tick("operator-matches-verdicts")
    return report
