"""Probabilistic AND-OR synthesis of bounded finite-state controllers.

The search simulates the combined system depth-first.  OR steps visit one
combined state: a revisit of the current branch seals a cycle in the
ledger, a stop records terminal mass, an undefined (controller state,
observation) pair opens a choice point over every extension of the
controller.  AND steps walk the outcome distribution of the chosen
action.  After each explored outcome the ledger is turned into lower
bounds: the controller is returned as soon as the guaranteed goal mass
reaches the requested bound, and the branch is abandoned as soon as the
remaining optimistic mass drops below it (both bounds also cover the
optional termination-likelihood requirement).

Backtracking is chronological: every choice point snapshots the alpha
structures (copy-on-branch) and the controller is unwound through a
trail.  The machine is an explicit agenda loop, not recursion, so branch
length is bounded by memory rather than the interpreter stack.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from fscsynth.ledger import LambdaVector, LedgerError, SearchLedger, calc_lambda, cumulate_alpha
from fscsynth.model import (
    Controller,
    PlanningProblem,
    STOP,
    SynthResult,
    SynthesisRequest,
)

#: Default OR-step budget; exceeding it yields an inconclusive abort,
#: never a proof of absence.
DEFAULT_BUDGET = 10_000_000

Hook = Callable[[tuple, LambdaVector], None]


@dataclass
class _Choice:
    # agenda contents are copied, not length-marked: pending items below a
    # plain watermark get popped and replaced while the branch runs
    agenda_copy: list
    trail_len: int
    max_used: int
    snap: tuple
    q: int
    s: int
    p: object
    candidates: list
    idx: int = 0


class _Search:
    """One synthesis or instrumentation run; not reusable."""

    def __init__(
        self,
        problem: PlanningProblem,
        max_states: int,
        lgt_star,
        lter_star,
        budget: Optional[int],
        hook: Optional[Hook],
        fixed: Optional[Controller],
        exact: bool,
    ):
        self.env = problem.environment
        self.problem = problem
        self.max_states = max_states
        self.lgt_star = lgt_star
        self.lter_star = lter_star
        self.budget = budget
        self.hook = hook
        self.exact = exact
        self.fixed = fixed is not None
        if fixed is not None:
            self.controller = dict(fixed.transitions)
            self.max_used = max(fixed.used_states())
        else:
            self.controller = {}
            self.max_used = 0
        self.trail: list[tuple[int, int]] = []
        self.choices: list[_Choice] = []
        self.agenda: list = []
        self.ledger = SearchLedger(exact=exact)
        self.or_steps = 0
        self.peak_depth = 0
        self.last_eval = -1
        self.last_lambda: Optional[LambdaVector] = None

    # -- probability coercion for the optional float mode ---------------

    def _p(self, p):
        return p if self.exact else float(p)

    def _one(self):
        return Fraction(1) if self.exact else 1.0

    # -- main loop -------------------------------------------------------

    def run(self) -> tuple[str, Optional[Controller]]:
        q0 = 0
        s0 = self.problem.initial_state
        self.agenda.append(("and", q0, ((s0, self._one()),), 0))
        agenda = self.agenda
        while True:
            if not agenda:
                verdict = self._evaluate(force=True)
                if verdict == "found":
                    return ("controller", self._freeze())
                if verdict == "fail":
                    if not self._backtrack():
                        return ("failure-proved", None)
                    continue
                if self.fixed:
                    return ("explored", None)
                raise LedgerError("exploration exhausted without a termination verdict")
            item = agenda.pop()
            tag = item[0]
            if tag == "or":
                _, q, s, p = item
                self.or_steps += 1
                if self.budget is not None and self.or_steps > self.budget:
                    return ("budget-exhausted", None)
                self._or_step(q, s, p)
            elif tag == "and":
                _, q2, dist, j = item
                if j < len(dist):
                    agenda.append(("and", q2, dist, j + 1))
                    agenda.append(("check",))
                    s2, p2 = dist[j]
                    agenda.append(("or", q2, s2, self._p(p2)))
            elif tag == "check":
                verdict = self._evaluate()
                if verdict == "found":
                    return ("controller", self._freeze())
                if verdict == "fail":
                    if not self._backtrack():
                        return ("failure-proved", None)
            else:  # fold
                self._fold()

    # -- OR step ----------------------------------------------------------

    def _or_step(self, q: int, s: int, p) -> None:
        """Process one combined-state visit."""
        ledger = self.ledger
        k = ledger.index_of(q, s)
        if k is not None:
            # revisit of the current branch: seal the cycle
            p_loop = ledger.loop_mass_to(k) * p
            if ledger._above_one(p_loop):
                raise LedgerError("cycle traversal mass above 1")
            if ledger._is_one(p_loop):
                ledger.record_noter(p)  # non-decaying cycle never terminates
            else:
                ledger.record_loop(k, p_loop)
            return
        key = (q, self.env.obs(s))
        tr = self.controller.get(key)
        if tr is not None:
            self._execute(q, s, p, tr)
            return
        if self.fixed:
            # instrumentation on a fixed partial controller: undefined mass
            # stays unexplored (it is neither goal, fail, nor non-termination)
            return
        candidates = self._candidates(s)
        choice = _Choice(
            list(self.agenda), len(self.trail), self.max_used,
            ledger.snapshot(), q, s, p, candidates,
        )
        self.choices.append(choice)
        self._commit(key, candidates[0])
        self._execute(q, s, p, candidates[0])

    def _candidates(self, s: int) -> list[tuple[int, int]]:
        """Extension choices: every action crossed with canonically numbered
        successor states, plus stop.  Stop is tried first in goal states and
        last elsewhere."""
        hi = min(self.max_used + 1, self.max_states - 1)
        acts = [
            (a, q2)
            for a in range(len(self.env.actions))
            for q2 in range(hi + 1)
        ]
        if self.problem.is_goal(s):
            return [(STOP, 0)] + acts
        return acts + [(STOP, 0)]

    def _commit(self, key, cand) -> None:
        self.controller[key] = cand
        self.trail.append(key)
        if cand[0] != STOP and cand[1] > self.max_used:
            self.max_used = cand[1]

    def _execute(self, q: int, s: int, p, tr) -> None:
        """Act on a defined transition from combined state (q, s)."""
        a, q2 = tr
        ledger = self.ledger
        if a == STOP:
            if self.problem.is_goal(s):
                ledger.record_goal(p)
            else:
                ledger.record_fail(p)
            return
        dist = self.env.dist(s, a)
        if dist is None:
            # inapplicable action: execution is stuck and never terminates
            ledger.record_noter(p)
            return
        ledger.extend(q, s, p)
        if len(ledger) > self.peak_depth:
            self.peak_depth = len(ledger)
        self.agenda.append(("fold",))
        self.agenda.append(("and", q2, dist, 0))

    def _fold(self) -> None:
        cumulate_alpha(self.ledger)

    # -- bound evaluation --------------------------------------------------

    def _evaluate(self, force: bool = False) -> Optional[str]:
        ledger = self.ledger
        if not force and ledger.events == self.last_eval and self.last_lambda is not None:
            return None
        lam = calc_lambda(ledger)
        self.last_eval = ledger.events
        self.last_lambda = lam
        if self.hook is not None:
            self.hook(tuple(sorted(self.controller.items())), lam)
        if self.fixed:
            return None
        if lam.goal0 >= self.lgt_star and (
            self.lter_star is None or lam.goal0 + lam.fail0 >= self.lter_star
        ):
            return "found"
        if 1 - lam.fail0 - lam.noter0 < self.lgt_star or (
            self.lter_star is not None and 1 - lam.noter0 < self.lter_star
        ):
            return "fail"
        return None

    # -- chronological backtracking ----------------------------------------

    def _backtrack(self) -> bool:
        while self.choices:
            cp = self.choices[-1]
            self.agenda[:] = cp.agenda_copy
            for key in reversed(self.trail[cp.trail_len:]):
                del self.controller[key]
            del self.trail[cp.trail_len:]
            self.max_used = cp.max_used
            self.ledger.restore(cp.snap)
            self.last_lambda = None
            cp.idx += 1
            if cp.idx < len(cp.candidates):
                cand = cp.candidates[cp.idx]
                self._commit((cp.q, self.env.obs(cp.s)), cand)
                self._execute(cp.q, cp.s, cp.p, cand)
                return True
            self.choices.pop()
        return False

    def _freeze(self) -> Controller:
        return Controller(self.max_used + 1, dict(self.controller))


def pandor_synth(
    request: SynthesisRequest,
    budget: Optional[int] = DEFAULT_BUDGET,
    hook: Optional[Hook] = None,
    exact: bool = True,
) -> SynthResult:
    """Search for an N-bounded controller meeting the requested bounds.

    Sound: any returned controller has exact LGT >= lgt_star (and LTER >=
    lter_star when given).  Complete: ``failure-proved`` is only reported
    after the bounded space of canonical controllers is exhausted.  A
    ``budget-exhausted`` outcome is inconclusive.
    """
    lgt = request.lgt_star if exact else float(request.lgt_star)
    lter = request.lter_star
    if lter is not None and not exact:
        lter = float(lter)
    search = _Search(
        request.problem, request.max_states, lgt, lter,
        budget, hook, fixed=None, exact=exact,
    )
    outcome, controller = search.run()
    return SynthResult(outcome, controller, search.or_steps, search.peak_depth)


def measure(
    problem: PlanningProblem,
    controller: Controller,
    hook: Optional[Hook] = None,
    exact: bool = True,
) -> LambdaVector:
    """Run the instrumented engine on a fixed controller to exhaustion.

    Explores every at-most-once-looping history of the system and returns
    the final lower-bound vector.  For a controller defined on every
    reachable (q, o) pair, goal0/fail0/noter0 sum to one and goal0 equals
    the exact goal-termination likelihood; mass reaching undefined pairs
    is left out of all three bounds.
    """
    search = _Search(
        problem, controller.num_states, None, None,
        budget=None, hook=hook, fixed=controller, exact=exact,
    )
    outcome, _ = search.run()
    assert outcome == "explored"
    lam = search.last_lambda
    assert lam is not None
    return lam
