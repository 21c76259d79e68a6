"""Command-line front-end: synthesis, verification, DOT export, benchmarks.

Exit codes are a stable contract:

* 0  -- synthesized a controller (or the command simply succeeded)
* 2  -- exhaustive search proved no bounded controller meets the bounds
* 3  -- node budget exhausted (inconclusive)
* 64 -- flag/parameter validation error
* 65 -- input file parse error
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from fscsynth.andor import GeneralizedProblem, andor_synth
from fscsynth.domains import (
    DomainError,
    ParseError,
    build,
    default_params,
    domain_names,
    parse_controller,
    parse_env,
    serialize_controller,
)
from fscsynth.model import Controller, ModelError, PlanningProblem, STOP, STOP_NAME, SynthesisRequest
from fscsynth.pandor import DEFAULT_BUDGET, pandor_synth
from fscsynth.verifier import Measures, exact_measures

EXIT_OK = 0
EXIT_NO_CONTROLLER = 2
EXIT_BUDGET = 3
EXIT_USAGE = 64
EXIT_DATA = 65

_OUTCOME_EXIT = {
    "controller": EXIT_OK,
    "failure-proved": EXIT_NO_CONTROLLER,
    "budget-exhausted": EXIT_BUDGET,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


@dataclass
class RunReport:
    """Everything a synthesis invocation reports.

    Oracle fields (lgt/lter/nonterm/undefined_mass) are present exactly
    when the outcome is ``controller``.
    """

    outcome: str
    algo: str
    or_steps: int
    peak_depth: int
    wall_time_s: float
    controller_text: Optional[str] = None
    measures: Optional[Measures] = None


def _fmt(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator} ~ {float(x):.12f}"


def _parse_fraction(text: str, flag: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise _UsageError(f"{flag} expects a rational like 9/10 or 0.9, got {text!r}")


def _parse_params(entries) -> dict:
    params = {}
    for entry in entries or []:
        if "=" not in entry:
            raise _UsageError(f"--param expects name=value, got {entry!r}")
        key, value = entry.split("=", 1)
        try:
            params[key] = int(value)
        except ValueError:
            params[key] = _parse_fraction(value, f"--param {key}")
    return params


def _load_problem(args) -> PlanningProblem:
    if getattr(args, "env", None):
        if getattr(args, "domain", None):
            raise _UsageError("give either --env or --domain, not both")
        with open(args.env, encoding="utf-8") as fh:
            return parse_env(fh.read())
    if not getattr(args, "domain", None):
        raise _UsageError("one of --env or --domain is required")
    return build(args.domain, _parse_params(getattr(args, "param", None)))


def _load_controller(args, problem: PlanningProblem) -> Controller:
    with open(args.controller, encoding="utf-8") as fh:
        return parse_controller(fh.read(), problem.environment)


# ---------------------------------------------------------------------------
# synth


def cmd_synth(args) -> int:
    problem = _load_problem(args)
    lgt_star = _parse_fraction(args.lgt_star, "--lgt-star")
    lter_star = _parse_fraction(args.lter_star, "--lter-star") if args.lter_star else None
    try:
        request = SynthesisRequest(problem, args.max_states, lgt_star, lter_star)
    except ModelError as exc:
        raise _UsageError(str(exc))

    start = time.perf_counter()
    if args.algo == "andor":
        # the baseline solves the strong problem; likelihood bounds are ignored
        result = andor_synth(GeneralizedProblem.from_problem(problem), args.max_states, budget=args.budget)
    else:
        result = pandor_synth(request, budget=args.budget, exact=not args.float)
    wall = time.perf_counter() - start

    report = RunReport(result.outcome, args.algo, result.or_steps, result.peak_depth, wall)
    if result.controller is not None:
        report.controller_text = serialize_controller(result.controller, problem.environment)
        report.measures = exact_measures(problem, result.controller)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(report.controller_text)
        if args.dot:
            with open(args.dot, "w", encoding="utf-8") as fh:
                fh.write(controller_to_dot(result.controller, problem.environment))

    if args.json:
        print(json.dumps(_report_json(report), indent=2))
    else:
        _print_report(report)
    return _OUTCOME_EXIT[result.outcome]


def _ratio(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _report_json(report: RunReport) -> dict:
    m = report.measures
    return {
        "outcome": report.outcome,
        "algo": report.algo,
        "or_steps": report.or_steps,
        "peak_depth": report.peak_depth,
        "wall_time_s": report.wall_time_s,
        "controller": report.controller_text,
        "lgt": _ratio(m.lgt) if m else None,
        "lgt_decimal": float(m.lgt) if m else None,
        "lter": _ratio(m.lter) if m else None,
        "lter_decimal": float(m.lter) if m else None,
        "nonterm": _ratio(m.nonterm) if m else None,
        "nonterm_decimal": float(m.nonterm) if m else None,
        "undefined_mass": _ratio(m.undefined_mass) if m else None,
        "undefined_mass_decimal": float(m.undefined_mass) if m else None,
    }


def _print_report(report: RunReport) -> None:
    print(f"outcome: {report.outcome}")
    print(f"algo: {report.algo}")
    print(f"or-steps: {report.or_steps}")
    print(f"peak-depth: {report.peak_depth}")
    print(f"wall-time-s: {report.wall_time_s:.3f}")
    if report.measures is not None:
        m = report.measures
        print(f"lgt: {_fmt(m.lgt)}")
        print(f"lter: {_fmt(m.lter)}")
        print(f"nonterm: {_fmt(m.nonterm)}")
        print(f"undefined-mass: {_fmt(m.undefined_mass)}")
    if report.controller_text is not None:
        print("controller:")
        print(report.controller_text, end="")


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    problem = _load_problem(args)
    controller = _load_controller(args, problem)
    m = exact_measures(problem, controller)
    print(f"lgt: {_fmt(m.lgt)}")
    print(f"lter: {_fmt(m.lter)}")
    print(f"nonterm: {_fmt(m.nonterm)}")
    print(f"undefined-mass: {_fmt(m.undefined_mass)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# DOT export


def controller_to_dot(controller: Controller, env) -> str:
    """Graphviz text with parallel transitions merged into one edge.

    Edges carry ``observation : action`` labels; edges that include a
    stop transition are dashed.  Node and edge order is deterministic.
    """
    grouped: dict[tuple[int, int], list] = {}
    for (q, o), (a, q2) in sorted(controller.transitions.items()):
        grouped.setdefault((q, q2), []).append((o, a))
    lines = ["digraph controller {", "  rankdir=LR;", '  __start [shape=point];']
    for q in range(controller.num_states):
        lines.append(f'  q{q} [shape=circle, label="q{q}"];')
    lines.append("  __start -> q0;")
    for (q, q2), labels in sorted(grouped.items()):
        parts = []
        dashed = False
        for o, a in labels:
            name = STOP_NAME if a == STOP else env.actions[a]
            dashed = dashed or a == STOP
            parts.append(f"{env.observations[o]} : {name}")
        style = ", style=dashed" if dashed else ""
        label = "\\n".join(parts)
        lines.append(f'  q{q} -> q{q2} [label="{label}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_export_dot(args) -> int:
    problem = _load_problem(args)
    controller = _load_controller(args, problem)
    text = controller_to_dot(controller, problem.environment)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench


_BENCH_GRID = [
    # (domain, params, max_states, algo, lgt_star or None)
    ("coin-flip", {}, 2, "pandor", Fraction(2, 5)),
    ("coin-flip", {}, 2, "andor", None),
    ("decay-loop", {}, 1, "pandor", Fraction(99, 100)),
    ("decay-loop", {}, 2, "andor", None),
    ("three-state", {}, 1, "pandor", Fraction(1, 2)),
    ("hall-a-1d", {"n": 4}, 2, "pandor", Fraction(10**9 - 1, 10**9)),
    ("hall-a-1d", {"n": 4}, 2, "andor", None),
    ("hall-a-1d", {"n": 5}, 2, "pandor", Fraction(10**9 - 1, 10**9)),
    ("hall-a-1d", {"n": 5}, 2, "andor", None),
    ("noisy-hall-a-1d", {"n": 3}, 2, "pandor", Fraction(99, 100)),
    ("noisy-hall-a-1d", {"n": 4}, 2, "pandor", Fraction(99, 100)),
    ("bridgewalk", {"n": 3}, 1, "pandor", Fraction(7, 10)),
    ("bridgewalk", {"n": 5}, 1, "pandor", Fraction(1, 2)),
    ("hall-a-2d", {"n": 3}, 2, "pandor", Fraction(10**9 - 1, 10**9)),
    ("hall-a-2d", {"n": 3}, 2, "andor", None),
]


def bench_rows(budget: Optional[int] = DEFAULT_BUDGET):
    """Run the built-in grid; yields CSV-ready row dicts.

    Cases are independent and pure, so they could go to a worker pool;
    they run sequentially here to keep timing readable.
    """
    for domain, params, n, algo, lgt_star in _BENCH_GRID:
        problem = build(domain, params)
        start = time.perf_counter()
        if algo == "andor":
            result = andor_synth(GeneralizedProblem.from_problem(problem), n, budget=budget)
        else:
            result = pandor_synth(SynthesisRequest(problem, n, lgt_star), budget=budget)
        wall = time.perf_counter() - start
        param_text = ";".join(
            f"{k}={v}" for k, v in ({**params, "lgt_star": lgt_star} if lgt_star else params).items()
        )
        yield {
            "domain": domain,
            "params": param_text,
            "max_states": n,
            "algo": algo,
            "outcome": result.outcome,
            "or_steps": result.or_steps,
            "time_s": f"{wall:.4f}",
        }


def cmd_bench(args) -> int:
    out = io.StringIO()
    writer = csv.DictWriter(
        out, fieldnames=["domain", "params", "max_states", "algo", "outcome", "or_steps", "time_s"]
    )
    writer.writeheader()
    for row in bench_rows(budget=args.budget):
        writer.writerow(row)
    text = out.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument wiring


def _add_problem_flags(sub):
    sub.add_argument("--env", help="environment file")
    sub.add_argument("--domain", choices=sorted(domain_names()), help="built-in domain name")
    sub.add_argument("--param", action="append", metavar="K=V", help="domain parameter, repeatable")


def build_parser() -> _Parser:
    parser = _Parser(prog="fscsynth", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    synth = subs.add_parser("synth", help="synthesize a controller")
    _add_problem_flags(synth)
    synth.add_argument("--max-states", type=int, required=True, metavar="N")
    synth.add_argument("--lgt-star", required=True, metavar="Q", help="minimum goal-termination likelihood")
    synth.add_argument("--lter-star", metavar="Q", help="minimum termination likelihood (pandor only)")
    synth.add_argument("--algo", choices=["pandor", "andor"], default="pandor")
    synth.add_argument("--budget", type=int, default=DEFAULT_BUDGET, metavar="STEPS")
    synth.add_argument("--out", metavar="FILE", help="write the controller here")
    synth.add_argument("--dot", metavar="FILE", help="write a DOT rendering here")
    synth.add_argument("--json", action="store_true", help="machine-readable report")
    synth.add_argument("--float", action="store_true", help="float arithmetic (faster, benchmark only)")
    synth.set_defaults(func=cmd_synth)

    verify = subs.add_parser("verify", help="exact measures of a controller")
    _add_problem_flags(verify)
    verify.add_argument("--controller", required=True, metavar="FILE")
    verify.set_defaults(func=cmd_verify)

    dot = subs.add_parser("export-dot", help="render a controller as Graphviz DOT")
    _add_problem_flags(dot)
    dot.add_argument("--controller", required=True, metavar="FILE")
    dot.add_argument("--out", metavar="FILE")
    dot.set_defaults(func=cmd_export_dot)

    bench = subs.add_parser("bench", help="run the built-in benchmark grid, emit CSV")
    bench.add_argument("--out", metavar="FILE")
    bench.add_argument("--budget", type=int, default=DEFAULT_BUDGET, metavar="STEPS")
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ModelError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
