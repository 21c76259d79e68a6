"""Shared test utilities: name-based controller building, random systems,
and exhaustive enumeration of canonical bounded controllers (the
independent route used to certify completeness claims)."""

from __future__ import annotations

import random
from fractions import Fraction

from fscsynth.ledger import SearchLedger
from fscsynth.model import Controller, Environment, PlanningProblem, STOP


def controller_from_names(env: Environment, num_states: int, edges: dict) -> Controller:
    """edges: {(q, obs_name): (action_name_or_'stop', q2)}"""
    transitions = {}
    for (q, obs), (action, q2) in edges.items():
        a = STOP if action == "stop" else env.action_index(action)
        transitions[(q, env.observation_index(obs))] = (a, q2)
    return Controller(num_states, transitions)


def flip_stop_controller(problem: PlanningProblem) -> Controller:
    env = problem.environment
    return controller_from_names(env, 1, {
        (0, "start"): ("flip", 0),
        (0, "won"): ("stop", 0),
        (0, "lost"): ("stop", 0),
    })


def always_flip_controller(problem: PlanningProblem) -> Controller:
    env = problem.environment
    return controller_from_names(env, 1, {
        (0, "start"): ("flip", 0),
        (0, "won"): ("stop", 0),
    })


def always_a_controller(problem: PlanningProblem) -> Controller:
    env = problem.environment
    return controller_from_names(env, 1, {(0, "x"): ("a", 0)})


def corridor_controller(env: Environment) -> Controller:
    """The two-state controller for the deterministic corridor: sweep right
    until B, then sweep left and stop on A."""
    return controller_from_names(env, 2, {
        (0, "A"): ("right", 0),
        (0, "-"): ("right", 0),
        (0, "B"): ("left", 1),
        (1, "-"): ("left", 1),
        (1, "A"): ("stop", 0),
    })


def clone_ledger(ledger: SearchLedger) -> SearchLedger:
    out = SearchLedger(exact=ledger.exact)
    out.restore(ledger.snapshot())
    return out


def random_env(rng: random.Random, n_states: int = 4, partial: bool = False) -> PlanningProblem:
    states = [f"s{i}" for i in range(n_states)]
    actions = [f"a{i}" for i in range(rng.randint(1, 3))]
    observations = [f"o{i}" for i in range(rng.randint(1, 3))]
    omega = {s: observations[rng.randrange(len(observations))] for s in states}
    delta = {}
    for s in states:
        for a in actions:
            if partial and rng.random() < 0.3:
                continue
            k = rng.randint(1, min(3, n_states))
            targets = rng.sample(states, k)
            weights = [rng.randint(1, 4) for _ in range(k)]
            total = sum(weights)
            delta[(s, a)] = {t: Fraction(w, total) for t, w in zip(targets, weights)}
    env = Environment.from_tables(states, actions, observations, omega, delta)
    goals = frozenset(i for i in range(n_states) if rng.random() < 0.4)
    return PlanningProblem(env, rng.randrange(n_states), goals)


def random_total_controller(rng: random.Random, env: Environment, num_states: int = 2) -> Controller:
    transitions = {}
    for q in range(num_states):
        for o in range(len(env.observations)):
            if rng.random() < 0.25:
                transitions[(q, o)] = (STOP, 0)
            else:
                transitions[(q, o)] = (rng.randrange(len(env.actions)), rng.randrange(num_states))
    return Controller(num_states, transitions)


def enumerate_controllers(problem: PlanningProblem, max_states: int):
    """Every canonical controller that is total on its reachable (q, o)
    pairs, for the given state bound.  Canonical numbering: a transition
    may target at most one controller state beyond the highest used one."""
    env = problem.environment
    n_actions = len(env.actions)

    def first_undefined(tr):
        seen = set()
        stack = [(0, problem.initial_state)]
        best_key = None
        max_used = 0
        for (_, _), (a, q2) in tr.items():
            if a != STOP:
                max_used = max(max_used, q2)
        while stack:
            q, s = stack.pop()
            if (q, s) in seen:
                continue
            seen.add((q, s))
            key = (q, env.obs(s))
            t = tr.get(key)
            if t is None:
                if best_key is None or key < best_key:
                    best_key = key
                continue
            a, q2 = t
            if a == STOP:
                continue
            dist = env.dist(s, a)
            if dist is None:
                continue
            for s2, _ in dist:
                stack.append((q2, s2))
        return best_key, max_used

    def rec(tr):
        key, max_used = first_undefined(tr)
        if key is None:
            yield dict(tr)
            return
        hi = min(max_used + 1, max_states - 1)
        candidates = [(STOP, 0)] + [(a, q2) for a in range(n_actions) for q2 in range(hi + 1)]
        for cand in candidates:
            tr[key] = cand
            yield from rec(tr)
            del tr[key]

    for tr in rec({}):
        mx = 0
        for (q, _), (a, q2) in tr.items():
            mx = max(mx, q, q2 if a != STOP else 0)
        yield Controller(mx + 1, tr)
