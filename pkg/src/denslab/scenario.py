"""Scenario files: named sets, sequences and ideals plus a list of tasks."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from fractions import Fraction

from .axioms import axiom_suite
from .density import classify_detailed, envelope_from_json
from .errors import InputError, UndefinedNameError
from .exactnum import Enclosure, format_rational
from .ideals import IDEALS, asymptotic_density, density_trace, ideal_from_json, in_filter, in_ideal, index_set_from_json
from .intervalsets import GeneratorSet, Window, measure, set_from_json, window_measure
from .sequences import eventually_equal, liminf_ratio_criterion, monotone_witness, sequence_from_json

DEFAULT_PRECISION = 64
DEFAULT_HORIZON = 64
TASK_TYPES = ("classify", "measure", "ideal", "sequence", "criterion", "axioms", "equality")


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def digest(obj) -> str:
    return "sha256:" + hashlib.sha256(canonical_json(obj).encode()).hexdigest()


@dataclass
class Scenario:
    raw: dict
    sets: dict = field(default_factory=dict)
    sequences: dict = field(default_factory=dict)
    ideals: dict = field(default_factory=dict)
    tasks: list = field(default_factory=list)

    def lookup(self, table: str, name):
        pool = getattr(self, table)
        if table == "ideals" and name not in pool and name in IDEALS:
            return IDEALS[name]
        if name not in pool:
            raise UndefinedNameError(f"undefined {table[:-1]} name {name!r}")
        return pool[name]


def load_scenario(obj) -> Scenario:
    if not isinstance(obj, dict):
        raise InputError("scenario must be a JSON object")
    sc = Scenario(obj)
    for name, body in obj.get("sets", {}).items():
        sc.sets[name] = set_from_json(body)
    for name, body in obj.get("sequences", {}).items():
        sc.sequences[name] = sequence_from_json(body)
    for name, body in obj.get("ideals", {}).items():
        sc.ideals[name] = ideal_from_json(body)
    tasks = obj.get("tasks", [])
    if not isinstance(tasks, list):
        raise InputError("'tasks' must be a list")
    for k, task in enumerate(tasks):
        if not isinstance(task, dict) or task.get("type") not in TASK_TYPES:
            raise InputError(f"task {k} needs a 'type' among {TASK_TYPES}")
        task.setdefault("name", f"task{k + 1}")
        for key, table in (("set", "sets"), ("sequence", "sequences"), ("other", "sequences"), ("ideal", "ideals")):
            if key in task:
                sc.lookup(table, task[key])
        sc.tasks.append(task)
    return sc


def read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from None


@dataclass(frozen=True)
class Settings:
    """Command-line overrides; None defers to the task, then the environment, then defaults."""

    precision: int | None = None
    horizon: int | None = None
    seed: int | None = None
    trials: int | None = None
    trace: bool = False

    def precision_for(self, task: dict) -> int:
        value = self.precision if self.precision is not None else task.get("precision")
        if value is None:
            env = os.environ.get("DENSLAB_DEFAULT_PRECISION")
            if env:
                try:
                    value = int(env)
                except ValueError:
                    raise InputError(f"DENSLAB_DEFAULT_PRECISION must be an integer, got {env!r}") from None
        value = DEFAULT_PRECISION if value is None else int(value)
        if value < 32:
            raise InputError(f"precision must be >= 32 bits, got {value}")
        return value

    def horizon_for(self, task: dict) -> int:
        value = self.horizon if self.horizon is not None else task.get("horizon", DEFAULT_HORIZON)
        if int(value) < 8:
            raise InputError(f"horizon must be >= 8, got {value}")
        return int(value)


def _fraction(value, what):
    try:
        return Fraction(str(value))
    except (ValueError, ZeroDivisionError):
        raise InputError(f"{what} must be a rational like \"p/q\", got {value!r}") from None


def run_task(sc: Scenario, task: dict, settings: Settings) -> dict:
    kind = task["type"]
    out = {"task": task["name"], "type": kind}
    if "note" in task:
        out["note"] = task["note"]
    handler = {
        "classify": _classify, "measure": _measure, "ideal": _ideal, "sequence": _sequence,
        "criterion": _criterion, "axioms": _axioms, "equality": _equality,
    }[kind]
    out.update(handler(sc, task, settings))
    return out


def _classify(sc, task, settings):
    a = sc.lookup("sets", task["set"])
    s = sc.lookup("sequences", task["sequence"])
    i = sc.lookup("ideals", task["ideal"])
    p = _fraction(task.get("point", "0"), "point")
    side = task.get("side", "two-sided")
    horizon, precision = settings.horizon_for(task), settings.precision_for(task)
    envelopes = tuple(envelope_from_json(e) for e in task.get("envelopes", []))
    verdict, r = classify_detailed(a, p, s, i, side, horizon, precision, envelopes)
    out = {"set": task["set"], "sequence": task["sequence"], "ideal": i.name, "point": format_rational(p),
           "side": side, "precision": precision, "verdict": verdict.to_json(),
           "witness": monotone_witness(s, i, horizon, precision).to_json(),
           "pieces": [pc.to_json() for pc in r.pieces]}
    if settings.trace or task.get("trace"):
        out["entries"] = [{"n": n, "x": x.to_json()} for n, x in r.entries]
    return out


def _measure(sc, task, settings):
    a = sc.lookup("sets", task["set"])
    precision = settings.precision_for(task)
    out = {"set": task["set"]}
    if "window" in task:
        w = task["window"]
        window = Window(_fraction(w.get("center", "0"), "center"),
                        Enclosure.point(_fraction(w["half_width"], "half_width")), w.get("side", "two-sided"))
        out["window_measure"] = window_measure(a, window, precision).to_json()
    if isinstance(a, GeneratorSet):
        out["measure"] = a.total_measure(precision).to_json()
        out["verified_horizon"] = a.verify(settings.horizon_for(task), precision)
    else:
        m = measure(a)
        out["measure"] = "inf" if isinstance(m, float) else format_rational(m)
    return out


def _ideal(sc, task, settings):
    i = sc.lookup("ideals", task["ideal"])
    k = index_set_from_json(task["index_set"])
    return {"ideal": i.name, "index_set": task["index_set"], "in_ideal": in_ideal(i, k).value,
            "in_filter": in_filter(i, k).value, "density": asymptotic_density(k).to_json(),
            "density_trace": [{"n": n, "ratio": format_rational(q)} for n, q in density_trace(k)]}


def _sequence(sc, task, settings):
    s = sc.lookup("sequences", task["sequence"])
    i = sc.lookup("ideals", task["ideal"])
    w = monotone_witness(s, i, settings.horizon_for(task), settings.precision_for(task))
    return {"sequence": task["sequence"], "ideal": i.name, "witness": w.to_json()}


def _criterion(sc, task, settings):
    s = sc.lookup("sequences", task["sequence"])
    i = sc.lookup("ideals", task["ideal"])
    res = liminf_ratio_criterion(s, i, settings.horizon_for(task), settings.precision_for(task))
    return {"sequence": task["sequence"], "ideal": i.name, "criterion": res.to_json()}


def _equality(sc, task, settings):
    s = sc.lookup("sequences", task["sequence"])
    r = sc.lookup("sequences", task["other"])
    res = eventually_equal(s, r, settings.horizon_for(task), settings.precision_for(task))
    return {"sequence": task["sequence"], "other": task["other"], "equality": res.to_json()}


def _axioms(sc, task, settings):
    trials = settings.trials if settings.trials is not None else int(task.get("trials", 100))
    seed = settings.seed if settings.seed is not None else int(task.get("seed", 0))
    s = sc.lookup("sequences", task["sequence"]) if "sequence" in task else None
    i = sc.lookup("ideals", task["ideal"]) if "ideal" in task else None
    horizon = settings.horizon if settings.horizon is not None else int(task.get("horizon", 16))
    return {"axioms": axiom_suite(trials, seed, s, i, horizon, settings.precision_for(task)).to_json()}
