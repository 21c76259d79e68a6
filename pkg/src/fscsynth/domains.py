"""Built-in benchmark domains and the textual environment/controller formats.

Domains come in two groups: three small regression environments (a
one-shot coin flip, a decaying retry loop, and a three-state cycle whose
loops conspire to never terminate) and the corridor family (hall walks in
one and two dimensions, optionally with noisy movement, plus the bridge
walk where every optimal controller has goal likelihood strictly below
one).

Probabilities in the text format are exact: ``1/2`` and ``0.5`` both
parse to the same rational.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Optional, Union

from fscsynth.model import (
    Controller,
    Environment,
    ModelError,
    PlanningProblem,
    STOP,
    STOP_NAME,
    as_prob,
)


class DomainError(ValueError):
    """Unknown domain name or out-of-range parameter."""


class ParseError(ValueError):
    """Parse failure with line/column location (0 means end of input)."""

    def __init__(self, line: int, col: int, message: str):
        self.line = line
        self.col = col
        self.message = message
        super().__init__(f"line {line}, col {col}: {message}")


@dataclass(frozen=True)
class DomainSpec:
    """A named domain instance: builder name plus parameter assignment."""

    name: str
    params: tuple[tuple[str, Union[int, Fraction]], ...] = ()

    def build(self) -> PlanningProblem:
        return build(self.name, dict(self.params))


# ---------------------------------------------------------------------------
# builders


def _coin_flip() -> PlanningProblem:
    env = Environment.from_tables(
        states=("s0", "goal", "nogoal"),
        actions=("flip",),
        observations=("start", "won", "lost"),
        omega={"s0": "start", "goal": "won", "nogoal": "lost"},
        delta={("s0", "flip"): {"goal": Fraction(1, 2), "nogoal": Fraction(1, 2)}},
    )
    return PlanningProblem(env, env.state_index("s0"), frozenset({env.state_index("goal")}))


def _decay_loop() -> PlanningProblem:
    env = Environment.from_tables(
        states=("s0", "goal"),
        actions=("no-op", "flip"),
        observations=("start", "won"),
        omega={"s0": "start", "goal": "won"},
        delta={
            ("s0", "no-op"): {"s0": Fraction(1)},
            ("s0", "flip"): {"s0": Fraction(1, 2), "goal": Fraction(1, 2)},
        },
    )
    return PlanningProblem(env, env.state_index("s0"), frozenset({env.state_index("goal")}))


def _three_state() -> PlanningProblem:
    env = Environment.from_tables(
        states=("s0", "s1", "s2"),
        actions=("a",),
        observations=("x",),
        omega={"s0": "x", "s1": "x", "s2": "x"},
        delta={
            ("s0", "a"): {"s1": Fraction(1)},
            ("s1", "a"): {"s2": Fraction(1)},
            ("s2", "a"): {"s0": Fraction(1, 2), "s1": Fraction(1, 2)},
        },
    )
    return PlanningProblem(env, env.state_index("s0"), frozenset())


def _hall_cell(c: int, seen: int) -> str:
    return f"c{c}v" if seen else f"c{c}"


def _hall_a_1d(n: int, p: Optional[Fraction]) -> PlanningProblem:
    """Corridor of n cells: start at A (cell 0), visit B (last cell), return.

    The environment state carries a visited-B bit invisible to the
    observation function.  Deterministic variant: moving against a wall
    is inapplicable.  Noisy variant (p given): a move succeeds with
    probability p and leaves the state unchanged otherwise; moving
    against a wall always leaves it unchanged.
    """
    states = [_hall_cell(c, seen) for seen in (0, 1) for c in range(n)]
    omega = {}
    for seen in (0, 1):
        for c in range(n):
            name = _hall_cell(c, seen)
            omega[name] = "A" if c == 0 else ("B" if c == n - 1 else "-")
    delta = {}
    for seen in (0, 1):
        for c in range(n):
            src = _hall_cell(c, seen)
            for action, c2 in (("right", c + 1), ("left", c - 1)):
                if 0 <= c2 < n:
                    tgt = _hall_cell(c2, seen or int(c2 == n - 1))
                    if p is None:
                        delta[(src, action)] = {tgt: Fraction(1)}
                    else:
                        delta[(src, action)] = {src: 1 - p, tgt: p}
                elif p is not None:
                    delta[(src, action)] = {src: Fraction(1)}
    env = Environment.from_tables(states, ("right", "left"), ("A", "B", "-"), omega, delta)
    return PlanningProblem(
        env, env.state_index(_hall_cell(0, 0)), frozenset({env.state_index(_hall_cell(0, 1))})
    )


def _bridgewalk(n: int, p_fall: Fraction) -> PlanningProblem:
    """Walk n slippery segments; each step falls off with probability
    p_fall into a dead end.  Optimal controllers have LGT (1-p_fall)^n."""
    states = [f"b{i}" for i in range(n + 1)] + ["fallen"]
    omega = {"b0": "start", f"b{n}": "end", "fallen": "fallen"}
    for i in range(1, n):
        omega[f"b{i}"] = "mid"
    delta = {}
    for i in range(n):
        delta[(f"b{i}", "walk")] = {f"b{i + 1}": 1 - p_fall, "fallen": p_fall}
    env = Environment.from_tables(
        states, ("walk",), ("start", "mid", "end", "fallen"), omega, delta
    )
    return PlanningProblem(env, env.state_index("b0"), frozenset({env.state_index(f"b{n}")}))


def _hall_a_2d(n: int, p: Optional[Fraction]) -> PlanningProblem:
    """Perimeter corridor of an n x n hall: tour all four corners and
    return to the start corner.  The state tracks the set of corners
    visited; corner cells other than the start share one observation.
    This 2-D layout is a documented approximation of the cited corridor
    family (only its 1-D variant has a published figure)."""
    per = 4 * (n - 1)
    corners = {k * (n - 1): k for k in range(4)}

    def name(pos: int, mask: int) -> str:
        return f"p{pos}m{mask}"

    states = [name(pos, mask) for pos in range(per) for mask in range(16)]
    omega = {}
    for pos in range(per):
        obs = "A" if pos == 0 else ("C" if pos in corners else "-")
        for mask in range(16):
            omega[name(pos, mask)] = obs
    delta = {}
    for pos in range(per):
        for mask in range(16):
            src = name(pos, mask)
            for action, step in (("cw", 1), ("ccw", -1)):
                pos2 = (pos + step) % per
                mask2 = mask | (1 << corners[pos2]) if pos2 in corners else mask
                tgt = name(pos2, mask2)
                if p is None:
                    delta[(src, action)] = {tgt: Fraction(1)}
                else:
                    delta[(src, action)] = {src: 1 - p, tgt: p}
    env = Environment.from_tables(states, ("cw", "ccw"), ("A", "C", "-"), omega, delta)
    return PlanningProblem(env, env.state_index(name(0, 1)), frozenset({env.state_index(name(0, 15))}))


def _check_int(name: str, value, low: int) -> int:
    try:
        n = int(value)
    except (TypeError, ValueError):
        raise DomainError(f"parameter {name} must be an integer, got {value!r}")
    if n < low or (isinstance(value, float) and value != n):
        raise DomainError(f"parameter {name} must be an integer >= {low}, got {value!r}")
    return n


def _check_prob(name: str, value) -> Fraction:
    try:
        p = as_prob(value)
    except (TypeError, ValueError, ZeroDivisionError):
        raise DomainError(f"parameter {name} must be a probability, got {value!r}")
    if not 0 < p < 1:
        raise DomainError(f"parameter {name} must lie strictly inside (0, 1), got {value!r}")
    return p


_BUILDERS: dict[str, tuple[Callable[..., PlanningProblem], dict]] = {
    "coin-flip": (lambda: _coin_flip(), {}),
    "decay-loop": (lambda: _decay_loop(), {}),
    "three-state": (lambda: _three_state(), {}),
    "hall-a-1d": (lambda n=5: _hall_a_1d(_check_int("n", n, 2), None), {"n": 5}),
    "noisy-hall-a-1d": (
        lambda n=4, p=Fraction(1, 2): _hall_a_1d(_check_int("n", n, 2), _check_prob("p", p)),
        {"n": 4, "p": Fraction(1, 2)},
    ),
    "hall-a-2d": (lambda n=3: _hall_a_2d(_check_int("n", n, 2), None), {"n": 3}),
    "noisy-hall-a-2d": (
        lambda n=3, p=Fraction(1, 2): _hall_a_2d(_check_int("n", n, 2), _check_prob("p", p)),
        {"n": 3, "p": Fraction(1, 2)},
    ),
    "bridgewalk": (
        lambda n=5, p_fall=Fraction(1, 10): _bridgewalk(
            _check_int("n", n, 1), _check_prob("p_fall", p_fall)
        ),
        {"n": 5, "p_fall": Fraction(1, 10)},
    ),
}


def domain_names() -> tuple[str, ...]:
    return tuple(_BUILDERS)


def default_params(name: str) -> dict:
    if name not in _BUILDERS:
        raise DomainError(f"unknown domain {name!r}")
    return dict(_BUILDERS[name][1])


def build(name: str, params: Optional[Mapping[str, object]] = None) -> PlanningProblem:
    """Instantiate a built-in domain; unknown names/parameters raise."""
    if name not in _BUILDERS:
        raise DomainError(f"unknown domain {name!r} (available: {', '.join(sorted(_BUILDERS))})")
    builder, defaults = _BUILDERS[name]
    params = dict(params or {})
    for key in params:
        if key not in defaults:
            raise DomainError(f"domain {name!r} takes no parameter {key!r}")
    return builder(**params)


# ---------------------------------------------------------------------------
# environment text format


def _tokens(line: str):
    code = line.split("#", 1)[0]
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", code)]


def parse_env(text: str) -> PlanningProblem:
    """Parse the line-oriented environment format.

    Grammar (one declaration per line, ``#`` starts a comment)::

        states <id>+
        actions <id>+
        observations <id>+
        observe <state> <obs>        # one per state
        init <state>
        goal <state>*
        trans <state> <action> (<prob> <state>)+   # probs sum to 1
    """
    states: dict[str, int] = {}
    actions: dict[str, int] = {}
    observations: dict[str, int] = {}
    omega: dict[int, int] = {}
    omega_lines: dict[int, int] = {}
    delta: dict[tuple[int, int], tuple] = {}
    init: Optional[int] = None
    goals: set[int] = set()

    def declare(table, tok, col, lineno, kind):
        if tok in table:
            raise ParseError(lineno, col, f"duplicate {kind} {tok!r}")
        table[tok] = len(table)

    def lookup(table, tok, col, lineno, kind):
        if tok not in table:
            raise ParseError(lineno, col, f"dangling identifier: unknown {kind} {tok!r}")
        return table[tok]

    for lineno, line in enumerate(text.splitlines(), start=1):
        toks = _tokens(line)
        if not toks:
            continue
        head, hcol = toks[0]
        args = toks[1:]
        if head == "states":
            for tok, col in args:
                declare(states, tok, col, lineno, "state")
        elif head == "actions":
            for tok, col in args:
                declare(actions, tok, col, lineno, "action")
        elif head == "observations":
            for tok, col in args:
                declare(observations, tok, col, lineno, "observation")
        elif head == "observe":
            if len(args) != 2:
                raise ParseError(lineno, hcol, "observe takes exactly <state> <obs>")
            s = lookup(states, args[0][0], args[0][1], lineno, "state")
            o = lookup(observations, args[1][0], args[1][1], lineno, "observation")
            if s in omega:
                raise ParseError(lineno, args[0][1], f"state {args[0][0]!r} observed twice")
            omega[s] = o
            omega_lines[s] = lineno
        elif head == "init":
            if len(args) != 1:
                raise ParseError(lineno, hcol, "init takes exactly one state")
            if init is not None:
                raise ParseError(lineno, hcol, "init declared twice")
            init = lookup(states, args[0][0], args[0][1], lineno, "state")
        elif head == "goal":
            for tok, col in args:
                goals.add(lookup(states, tok, col, lineno, "state"))
        elif head == "trans":
            if len(args) < 4 or len(args) % 2 != 0:
                raise ParseError(lineno, hcol, "trans takes <state> <action> (<prob> <state>)+")
            s = lookup(states, args[0][0], args[0][1], lineno, "state")
            a = lookup(actions, args[1][0], args[1][1], lineno, "action")
            if (s, a) in delta:
                raise ParseError(lineno, args[0][1], f"transition ({args[0][0]}, {args[1][0]}) declared twice")
            entries = []
            total = Fraction(0)
            seen_targets = set()
            for i in range(2, len(args), 2):
                ptok, pcol = args[i]
                stok, scol = args[i + 1]
                try:
                    p = Fraction(ptok)
                except (ValueError, ZeroDivisionError):
                    raise ParseError(lineno, pcol, f"invalid probability {ptok!r}")
                if p <= 0:
                    raise ParseError(lineno, pcol, f"probability must be positive, got {ptok}")
                s2 = lookup(states, stok, scol, lineno, "state")
                if s2 in seen_targets:
                    raise ParseError(lineno, scol, f"successor {stok!r} listed twice")
                seen_targets.add(s2)
                entries.append((s2, p))
                total += p
            if total != 1:
                raise ParseError(lineno, hcol, f"probabilities sum to {total}, not 1")
            delta[(s, a)] = tuple(entries)
        else:
            raise ParseError(lineno, hcol, f"unknown declaration {head!r}")

    for s, i in states.items():
        if i not in omega:
            raise ParseError(0, 0, f"state {s!r} has no observation")
    if init is None:
        raise ParseError(0, 0, "missing init declaration")
    env = Environment(
        tuple(states),
        tuple(actions),
        tuple(observations),
        delta,
        tuple(omega[i] for i in range(len(states))),
    )
    return PlanningProblem(env, init, frozenset(goals))


def serialize_env(problem: PlanningProblem) -> str:
    """Canonical text for a problem; reparsing yields an equal problem."""
    env = problem.environment
    lines = [
        "states " + " ".join(env.states),
        "actions " + " ".join(env.actions),
        "observations " + " ".join(env.observations),
    ]
    for i, name in enumerate(env.states):
        lines.append(f"observe {name} {env.observations[env.omega[i]]}")
    lines.append(f"init {env.states[problem.initial_state]}")
    if problem.goal_states:
        lines.append("goal " + " ".join(env.states[g] for g in sorted(problem.goal_states)))
    for (s, a) in sorted(env.delta):
        parts = [f"trans {env.states[s]} {env.actions[a]}"]
        for s2, p in env.delta[(s, a)]:
            parts.append(f"{p} {env.states[s2]}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# controller text format


def parse_controller(text: str, env: Environment) -> Controller:
    """Parse ``states N / start 0 / edge <q> <obs> <action|stop> <q'>``."""
    num_states: Optional[int] = None
    transitions: dict[tuple[int, int], tuple[int, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        toks = _tokens(line)
        if not toks:
            continue
        head, hcol = toks[0]
        args = toks[1:]
        if head == "states":
            if len(args) != 1 or not args[0][0].isdigit():
                raise ParseError(lineno, hcol, "states takes one integer")
            num_states = int(args[0][0])
        elif head == "start":
            if len(args) != 1 or args[0][0] != "0":
                raise ParseError(lineno, hcol, "start state must be 0")
        elif head == "edge":
            if len(args) != 4:
                raise ParseError(lineno, hcol, "edge takes <q> <obs> <action|stop> <q'>")
            (qtok, qcol), (otok, ocol), (atok, acol), (q2tok, q2col) = args
            if not qtok.isdigit() or not q2tok.isdigit():
                raise ParseError(lineno, qcol, "controller states are integers")
            q, q2 = int(qtok), int(q2tok)
            if otok not in env.observations:
                raise ParseError(lineno, ocol, f"dangling identifier: unknown observation {otok!r}")
            o = env.observation_index(otok)
            if atok == STOP_NAME:
                a = STOP
            elif atok in env.actions:
                a = env.action_index(atok)
            else:
                raise ParseError(lineno, acol, f"dangling identifier: unknown action {atok!r}")
            if (q, o) in transitions:
                raise ParseError(lineno, qcol, f"edge ({q}, {otok}) declared twice")
            transitions[(q, o)] = (a, q2)
        else:
            raise ParseError(lineno, hcol, f"unknown declaration {head!r}")
    if num_states is None:
        raise ParseError(0, 0, "missing states declaration")
    try:
        return Controller(num_states, transitions)
    except ModelError as exc:
        raise ParseError(0, 0, str(exc))


def serialize_controller(controller: Controller, env: Environment) -> str:
    lines = [f"states {controller.num_states}", "start 0"]
    for (q, o), (a, q2) in sorted(controller.transitions.items()):
        action = STOP_NAME if a == STOP else env.actions[a]
        lines.append(f"edge {q} {env.observations[o]} {action} {q2}")
    return "\n".join(lines) + "\n"
