"""Batch command-line front end."""

from __future__ import annotations

import argparse
import json
import sys
import time
from importlib import resources
from pathlib import Path

from . import __version__
from .errors import DenslabError, GoldenMismatch, InputError
from .scenario import Settings, digest, load_scenario, read_json, run_task

EXIT_CODES = """exit codes:
  0  all tasks completed (Inconclusive verdicts included)
  2  usage error (unknown flag or subcommand)
  3  malformed input (JSON, schema, term syntax, unsafe term)
  4  undefined set, sequence or ideal name
  5  invariant violation (partition, generator or ratio defect, axiom counterexample)
  6  golden report mismatch (examples)
  7  refused: precondition not met (sequence not certified in Sigma_I)
  8  precision insufficient (message carries a retry hint)
"""

GOLDEN = ("open_interval", "factorial_gaps")


def _common(parser: argparse.ArgumentParser):
    parser.add_argument("--scenario", metavar="PATH", help="scenario JSON file")
    parser.add_argument("--task", metavar="NAME", help="run only the named task")
    parser.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    parser.add_argument("--format", choices=("json", "text"), default="json")
    parser.add_argument("--horizon", type=int, metavar="N")
    parser.add_argument("--precision", type=int, metavar="BITS",
                        help="working precision; falls back to the task, then DENSLAB_DEFAULT_PRECISION, then 64")
    parser.add_argument("--seed", type=int, metavar="S")
    parser.add_argument("--trials", type=int, metavar="N")
    parser.add_argument("--no-timing", action="store_true", help="omit timing so reports are byte-identical")
    parser.add_argument("--trace", action="store_true", help="include per-n ratio enclosures in classify results")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="denslab",
        description="Classify generalized density points of subsets of the real line.",
        epilog=EXIT_CODES,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"denslab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    for name, help_text in (("classify", "classify points (classify tasks)"),
                            ("measure", "measures and window measures (measure tasks)")):
        _common(sub.add_parser(name, help=help_text, epilog=EXIT_CODES,
                               formatter_class=argparse.RawDescriptionHelpFormatter))

    ideal = sub.add_parser("ideal", help="ideal and filter membership of index sets")
    ideal_sub = ideal.add_subparsers(dest="action", required=True, metavar="ACTION")
    check = ideal_sub.add_parser("check", help="In/NotIn/Unknown with a density trace")
    _common(check)
    check.add_argument("--ideal", metavar="NAME")
    check.add_argument("--index-set", metavar="JSON", help="index set as JSON text or a file path")

    seq = sub.add_parser("sequence", help="membership of a sequence in Sigma_I")
    seq_sub = seq.add_subparsers(dest="action", required=True, metavar="ACTION")
    check = seq_sub.add_parser("check", help="search for a monotone witness")
    _common(check)
    check.add_argument("--seq", metavar="FILE")
    check.add_argument("--ideal", metavar="NAME")

    crit = sub.add_parser("criterion", help="liminf ratio criterion for equality of topologies")
    _common(crit)
    crit.add_argument("--seq", metavar="FILE")
    crit.add_argument("--ideal", metavar="NAME")

    _common(sub.add_parser("axioms", help="randomized operator axiom suite"))
    _common(sub.add_parser("examples", help="run the built-in golden scenarios and diff against stored reports"))
    return parser


def _json_arg(text: str):
    path = Path(text)
    if path.is_file():
        return read_json(str(path))
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        raise InputError(f"{text!r} is neither a readable file nor valid JSON") from None


def _adhoc_scenario(args) -> dict | None:
    """Scenario synthesized from command-line flags when no --scenario is given."""
    cmd = args.command
    if cmd == "ideal" and args.index_set is not None:
        return {"tasks": [{"name": "check", "type": "ideal", "ideal": args.ideal or "density_zero",
                           "index_set": _json_arg(args.index_set)}]}
    if cmd in ("sequence", "criterion") and args.seq is not None:
        kind = "sequence" if cmd == "sequence" else "criterion"
        return {"sequences": {"seq": _json_arg(args.seq)},
                "tasks": [{"name": kind, "type": kind, "sequence": "seq", "ideal": args.ideal or "fin"}]}
    if cmd == "axioms":
        return {"tasks": [{"name": "axioms", "type": "axioms"}]}
    return None


TASK_FOR_COMMAND = {"classify": "classify", "measure": "measure", "ideal": "ideal", "sequence": "sequence",
                    "criterion": "criterion", "axioms": "axioms"}


def run_scenario(raw: dict, command: str, settings: Settings, only: str | None = None) -> list:
    sc = load_scenario(json.loads(json.dumps(raw)))
    wanted = TASK_FOR_COMMAND.get(command)
    tasks = [t for t in sc.tasks if (wanted is None or t["type"] == wanted or command == "examples")]
    if only is not None:
        tasks = [t for t in tasks if t["name"] == only]
        if not tasks:
            raise InputError(f"no {wanted} task named {only!r}")
    results = []
    for task in tasks:
        try:
            results.append(run_task(sc, task, settings))
        except KeyError as exc:
            raise InputError(f"task {task['name']!r} is missing field {exc}") from None
    return results


def golden_dir():
    return resources.files("denslab") / "data" / "golden"


def golden_report(name: str) -> dict:
    raw = json.loads((golden_dir() / f"{name}.scenario.json").read_text(encoding="utf-8"))
    results = run_scenario(raw, "examples", Settings())
    return {"scenario": name, "input_digest": digest(raw), "results": results}


def regenerate_golden(directory) -> None:
    """Rewrite the stored expected reports from the current implementation (maintainers only)."""
    for name in GOLDEN:
        report = golden_report(name)
        Path(directory, f"{name}.expected.json").write_text(json.dumps(report, indent=1) + "\n", encoding="utf-8")


def _first_difference(a, b, path="$"):
    if type(a) is not type(b):
        return path
    if isinstance(a, dict):
        for key in sorted(set(a) | set(b)):
            if key not in a or key not in b:
                return f"{path}.{key}"
            found = _first_difference(a[key], b[key], f"{path}.{key}")
            if found:
                return found
        return None
    if isinstance(a, list):
        if len(a) != len(b):
            return f"{path}[len]"
        for k, (x, y) in enumerate(zip(a, b)):
            found = _first_difference(x, y, f"{path}[{k}]")
            if found:
                return found
        return None
    return None if a == b else path


def run_examples() -> list:
    out = []
    for name in GOLDEN:
        actual = golden_report(name)
        expected = json.loads((golden_dir() / f"{name}.expected.json").read_text(encoding="utf-8"))
        where = _first_difference(actual, expected)
        if where is not None:
            raise GoldenMismatch(f"golden report {name} differs at {where}")
        out.append({"example": name, "golden": "match",
                    "verdicts": {r["task"]: r["verdict"]["class"] for r in actual["results"] if r["type"] == "classify"},
                    "results": actual["results"]})
    return out


def _summary(result: dict) -> str:
    if "verdict" in result:
        v = result["verdict"]
        extra = f" value={v['value']}" if "value" in v else ""
        return f"{v['class']}{extra} ({v['certificate']['kind']}) at p={result['point']} side={result['side']}"
    if "criterion" in result:
        c = result["criterion"]
        sigma = f" sigma>={c['sigma_lower']}" if "sigma_lower" in c else ""
        return f"{c['status']}{sigma}: {c['statement']}"
    if "witness" in result:
        return f"witness {result['witness']['status']}"
    if "in_ideal" in result:
        return f"in ideal: {result['in_ideal']}, in filter: {result['in_filter']}"
    if "measure" in result:
        m = result["measure"]
        text = m if isinstance(m, str) else f"[{m['lo']}, {m['hi']}]"
        if "window_measure" in result:
            w = result["window_measure"]
            text += f"; window [{w['lo']}, {w['hi']}]"
        return f"measure {text}"
    if "axioms" in result:
        a = result["axioms"]
        return f"axioms passed ({a['trials']} trials, seed {a['seed']})"
    if "golden" in result:
        return f"golden {result['golden']}: " + ", ".join(f"{k}={v}" for k, v in result["verdicts"].items())
    if "equality" in result:
        e = result["equality"]
        return e["status"] + (f"({e['n']})" if "n" in e else "")
    return json.dumps(result)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=False) + "\n"
    lines = [f"denslab {report['version']} {report['command']} {report['input_digest']}"]
    for r in report["results"]:
        label = r.get("task") or r.get("example")
        lines.append(f"{label}: {_summary(r)}")
    if "timing" in report:
        lines.append(f"elapsed {report['timing']['seconds']} s")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    label = command if not getattr(args, "action", None) else f"{command} {args.action}"
    settings = Settings(args.precision, args.horizon, args.seed, args.trials, args.trace)
    start = time.perf_counter()
    try:
        if command == "examples":
            raw = {"golden": list(GOLDEN)}
            results = run_examples()
        else:
            raw = read_json(args.scenario) if args.scenario else _adhoc_scenario(args)
            if raw is None:
                parser.error(f"{label} needs --scenario or its own input flags")
            results = run_scenario(raw, command, settings, args.task)
        report = {"tool": "denslab", "version": __version__, "command": label,
                  "input_digest": digest(raw), "results": results}
        if not args.no_timing:
            report["timing"] = {"seconds": round(time.perf_counter() - start, 3)}
        text = render(report, args.format)
    except DenslabError as exc:
        print(f"denslab: error: {exc}", file=sys.stderr)
        return exc.exit_code
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
