"""Core formal objects: environments, problems, controllers, histories.

Identifiers (states, actions, observations) are interned to dense integer
indices at construction time; the search layers only ever touch indices.
Probabilities are exact ``fractions.Fraction`` values so that every
correctness statement in the test suite can be checked with ``==``.

All types here are immutable after construction (the dicts they carry are
never mutated) and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

#: Distinguished terminal action. A controller transition whose action is
#: STOP halts execution; the successor controller state of such an edge is
#: ignored (it is normalized to 0 when controllers are built).
STOP = -1

#: Name used for STOP in every textual surface (files, DOT, reports).
STOP_NAME = "stop"

_SUM_TOL = Fraction(1, 10**9)

ProbLike = Union[Fraction, int, float, str]


class ModelError(ValueError):
    """A model object violates one of its construction invariants."""


def as_prob(value: ProbLike) -> Fraction:
    """Coerce ints, floats, strings like ``1/2`` or ``0.5`` to a Fraction."""
    if isinstance(value, Fraction):
        return value
    return Fraction(value)


@dataclass(frozen=True)
class Environment:
    """Finite stochastic environment.

    ``delta`` is a *partial* map: a missing ``(state, action)`` key means
    the action is inapplicable in that state.  ``omega`` is total: every
    state has exactly one observation, and distinct states may share one
    (that is the reason finite-state controllers are needed at all).
    """

    states: tuple[str, ...]
    actions: tuple[str, ...]
    observations: tuple[str, ...]
    #: (state index, action index) -> ((successor index, probability), ...)
    delta: Mapping[tuple[int, int], tuple[tuple[int, Fraction], ...]]
    #: state index -> observation index
    omega: tuple[int, ...]

    def __post_init__(self):
        n_s, n_a, n_o = len(self.states), len(self.actions), len(self.observations)
        if n_s == 0 or n_o == 0:
            raise ModelError("environment needs at least one state and one observation")
        if len(set(self.states)) != n_s or len(set(self.actions)) != n_a or len(set(self.observations)) != n_o:
            raise ModelError("duplicate identifier in state/action/observation sets")
        if len(self.omega) != n_s:
            raise ModelError("omega must be defined for every state")
        for o in self.omega:
            if not 0 <= o < n_o:
                raise ModelError(f"omega references unknown observation index {o}")
        for (s, a), dist in self.delta.items():
            if not 0 <= s < n_s or not 0 <= a < n_a:
                raise ModelError(f"delta references unknown state/action ({s}, {a})")
            total = Fraction(0)
            seen = set()
            for s2, p in dist:
                if not 0 <= s2 < n_s:
                    raise ModelError(f"delta({s},{a}) references unknown successor {s2}")
                if s2 in seen:
                    raise ModelError(f"delta({s},{a}) lists successor {s2} twice")
                seen.add(s2)
                if p <= 0:
                    raise ModelError(f"delta({s},{a}) has non-positive probability {p}")
                total += p
            if abs(total - 1) > _SUM_TOL:
                raise ModelError(f"delta({s},{a}) sums to {total}, not 1")

    # -- index helpers -------------------------------------------------

    def state_index(self, name: str) -> int:
        return self.states.index(name)

    def action_index(self, name: str) -> int:
        return self.actions.index(name)

    def observation_index(self, name: str) -> int:
        return self.observations.index(name)

    def obs(self, s: int) -> int:
        """Observation index of state ``s``."""
        return self.omega[s]

    def dist(self, s: int, a: int):
        """Successor distribution of applicable ``(s, a)``, else None."""
        return self.delta.get((s, a))

    def applicable(self, s: int) -> tuple[int, ...]:
        """Actions with a transition distribution defined in ``s``."""
        return tuple(a for a in range(len(self.actions)) if (s, a) in self.delta)

    def support(self, s: int, a: int) -> tuple[int, ...]:
        """Relational view of delta: possible successors of (s, a)."""
        dist = self.delta.get((s, a))
        if dist is None:
            return ()
        return tuple(s2 for s2, _ in dist)

    @classmethod
    def from_tables(
        cls,
        states: Sequence[str],
        actions: Sequence[str],
        observations: Sequence[str],
        omega: Mapping[str, str],
        delta: Mapping[tuple[str, str], Mapping[str, ProbLike]],
    ) -> "Environment":
        """Build from name-keyed tables; mainly used by domains and tests."""
        states = tuple(states)
        actions = tuple(actions)
        observations = tuple(observations)
        s_idx = {name: i for i, name in enumerate(states)}
        a_idx = {name: i for i, name in enumerate(actions)}
        o_idx = {name: i for i, name in enumerate(observations)}
        try:
            omega_t = tuple(o_idx[omega[name]] for name in states)
        except KeyError as exc:
            raise ModelError(f"omega references unknown identifier {exc}") from exc
        delta_t = {}
        for (s, a), dist in delta.items():
            if s not in s_idx or a not in a_idx:
                raise ModelError(f"delta references unknown identifier ({s!r}, {a!r})")
            entries = []
            for s2, p in dist.items():
                if s2 not in s_idx:
                    raise ModelError(f"delta({s},{a}) references unknown state {s2!r}")
                entries.append((s_idx[s2], as_prob(p)))
            delta_t[(s_idx[s], a_idx[a])] = tuple(entries)
        return cls(states, actions, observations, delta_t, omega_t)


@dataclass(frozen=True)
class PlanningProblem:
    environment: Environment
    initial_state: int
    goal_states: frozenset[int]

    def __post_init__(self):
        n = len(self.environment.states)
        if not 0 <= self.initial_state < n:
            raise ModelError("initial state outside the state set")
        if any(not 0 <= g < n for g in self.goal_states):
            raise ModelError("goal set references unknown state")

    def is_goal(self, s: int) -> bool:
        return s in self.goal_states


@dataclass(frozen=True)
class Controller:
    """Mealy-style finite-state controller with a partial joint map.

    ``transitions[(q, o)] = (a, q2)`` reads: in controller state ``q``,
    upon observation ``o``, do ``a`` and switch to ``q2``.  ``a == STOP``
    terminates execution and ``q2`` is ignored.  Labeling and transition
    function share one domain by construction.
    """

    num_states: int
    transitions: Mapping[tuple[int, int], tuple[int, int]]
    initial_cstate: int = 0

    def __post_init__(self):
        if self.num_states < 1:
            raise ModelError("controller needs at least one state")
        if self.initial_cstate != 0:
            raise ModelError("controller initial state must be index 0")
        for (q, o), (a, q2) in self.transitions.items():
            if not 0 <= q < self.num_states or not 0 <= q2 < self.num_states:
                raise ModelError(f"controller transition ({q},{o}) uses out-of-range state")
            if a != STOP and a < 0:
                raise ModelError(f"controller transition ({q},{o}) has invalid action {a}")

    def fingerprint(self) -> tuple:
        """Hashable canonical identity of the transition map."""
        return (self.num_states, tuple(sorted(self.transitions.items())))

    def used_states(self) -> set[int]:
        used = {0}
        for (q, _), (a, q2) in self.transitions.items():
            used.add(q)
            if a != STOP:
                used.add(q2)
        return used


@dataclass(frozen=True)
class History:
    """Sequence of combined states with per-step transition probabilities.

    ``steps[t] = (q, s, p)`` where ``p`` is the probability of the step
    that *entered* this combined state; the first entry carries ``p = 1``.
    """

    steps: tuple[tuple[int, int, Fraction], ...]

    def __post_init__(self):
        if not self.steps:
            raise ModelError("history must contain at least one combined state")
        if self.steps[0][2] != 1:
            raise ModelError("first history entry must have probability 1")
        for _, _, p in self.steps:
            if not 0 < p <= 1:
                raise ModelError("history step probability outside (0, 1]")

    def end(self) -> tuple[int, int]:
        q, s, _ = self.steps[-1]
        return (q, s)

    def validate(self, problem: PlanningProblem, controller: Controller) -> None:
        """Check the consecutive-pair condition against delta/gamma; raises."""
        env = problem.environment
        for t in range(len(self.steps) - 1):
            q, s, _ = self.steps[t]
            q2, s2, p2 = self.steps[t + 1]
            tr = controller.transitions.get((q, env.obs(s)))
            if tr is None or tr[0] == STOP:
                raise ModelError(f"history step {t} has no executable action")
            a, q_next = tr
            if q_next != q2:
                raise ModelError(f"history step {t + 1} controller state mismatch")
            dist = env.dist(s, a)
            actual = dict(dist or ())
            if actual.get(s2) != p2:
                raise ModelError(f"history step {t + 1} probability mismatch")


def likelihood(h: History) -> Fraction:
    """Product of the per-step probabilities; 1 for a single-element history."""
    out = Fraction(1)
    for _, _, p in h.steps:
        out *= p
    return out


def is_goal_history(problem: PlanningProblem, controller: Controller, h: History) -> bool:
    """True iff the final action is ``stop`` taken in a goal state."""
    q, s = h.end()
    tr = controller.transitions.get((q, problem.environment.obs(s)))
    return tr is not None and tr[0] == STOP and problem.is_goal(s)


# -- single-step execution semantics ----------------------------------


@dataclass(frozen=True)
class Stop:
    """The controller executes ``stop`` in this combined state."""


@dataclass(frozen=True)
class Undefined:
    """The controller has no transition for this (state, observation)."""


@dataclass(frozen=True)
class Branch:
    """One execution step: action, next controller state, successor law.

    ``successors`` is empty iff the chosen action is inapplicable in the
    current environment state (execution is stuck and never terminates);
    otherwise the listed probabilities are positive and sum to 1.
    """

    action: int
    next_cstate: int
    successors: tuple[tuple[int, Fraction], ...]


StepResult = Union[Stop, Undefined, Branch]

_STOP_RESULT = Stop()
_UNDEFINED_RESULT = Undefined()


def system_step(problem: PlanningProblem, controller: Controller, q: int, s: int) -> StepResult:
    """One observe-act-transition cycle of the combined system.

    Pure function of (controller, environment, q, s); total by the
    three-way return.
    """
    env = problem.environment
    if not 0 <= q < controller.num_states:
        raise ModelError(f"controller state {q} out of range")
    if not 0 <= s < len(env.states):
        raise ModelError(f"state {s} out of range")
    tr = controller.transitions.get((q, env.obs(s)))
    if tr is None:
        return _UNDEFINED_RESULT
    a, q2 = tr
    if a == STOP:
        return _STOP_RESULT
    dist = env.dist(s, a)
    return Branch(a, q2, tuple(dist) if dist is not None else ())


@dataclass(frozen=True)
class SynthesisRequest:
    """What to synthesize: problem, state bound, and likelihood bounds.

    ``lter_star`` is optional; when present the engine solves the
    two-bound problem (LGT and LTER simultaneously).  The two bounds are
    independent: neither must dominate the other.
    """

    problem: PlanningProblem
    max_states: int
    lgt_star: Fraction
    lter_star: Optional[Fraction] = None

    def __post_init__(self):
        object.__setattr__(self, "lgt_star", as_prob(self.lgt_star))
        if self.lter_star is not None:
            object.__setattr__(self, "lter_star", as_prob(self.lter_star))
        if self.max_states < 1:
            raise ModelError("max_states must be at least 1")
        if not 0 < self.lgt_star < 1:
            raise ModelError("lgt_star must lie strictly inside (0, 1)")
        if self.lter_star is not None and not 0 < self.lter_star < 1:
            raise ModelError("lter_star must lie strictly inside (0, 1)")


@dataclass(frozen=True)
class SynthResult:
    """Outcome of a synthesis run.

    ``outcome`` is one of ``controller`` (success), ``failure-proved``
    (exhaustive search rejected every bounded controller), or
    ``budget-exhausted`` (inconclusive: the node budget ran out).
    """

    outcome: str
    controller: Optional[Controller]
    or_steps: int
    peak_depth: int

    @property
    def found(self) -> bool:
        return self.outcome == "controller"
