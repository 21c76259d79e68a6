from fractions import Fraction as F

import pytest

from fscsynth.andor import GeneralizedProblem, andor_synth
from fscsynth.domains import build
from fscsynth.model import ModelError, PlanningProblem, STOP, SynthesisRequest
from fscsynth.pandor import pandor_synth
from fscsynth.verifier import exact_measures

from helpers import corridor_controller


def _gp(problem):
    return GeneralizedProblem.from_problem(problem)


def test_corridor_returns_the_two_state_sweep_controller():
    prob = build("hall-a-1d", {"n": 5})
    result = andor_synth(_gp(prob), 2)
    assert result.outcome == "controller"
    expected = corridor_controller(prob.environment)
    assert result.controller.transitions == expected.transitions
    assert result.controller.num_states == 2


@pytest.mark.parametrize("n", [1, 2, 3])
def test_fails_when_some_run_is_unavoidably_nongoal(n):
    # one coin flip can always land outside the goal
    result = andor_synth(_gp(build("coin-flip")), n)
    assert result.outcome == "failure-proved"


@pytest.mark.parametrize("n", [1, 2, 3])
def test_fails_when_every_controller_has_a_looping_history(n):
    result = andor_synth(_gp(build("decay-loop")), n)
    assert result.outcome == "failure-proved"


@pytest.mark.parametrize(
    "name,params,n",
    [
        ("hall-a-1d", {"n": 3}, 2),
        ("hall-a-1d", {"n": 4}, 2),
        ("hall-a-1d", {"n": 5}, 2),
        ("hall-a-2d", {"n": 3}, 2),
    ],
)
def test_returned_controllers_are_strong(name, params, n):
    prob = build(name, params)
    result = andor_synth(_gp(prob), n)
    assert result.outcome == "controller"
    m = exact_measures(prob, result.controller)
    assert m.lgt == 1 and m.nonterm == 0


def test_multiple_initial_states():
    prob = build("hall-a-1d", {"n": 4})
    env = prob.environment
    inits = frozenset({env.state_index("c0"), env.state_index("c1")})
    gp = GeneralizedProblem(env, inits, prob.goal_states)
    result = andor_synth(gp, 2)
    assert result.outcome == "controller"
    for s0 in inits:
        single = PlanningProblem(env, s0, prob.goal_states)
        m = exact_measures(single, result.controller)
        assert m.lgt == 1 and m.nonterm == 0


def test_empty_initial_set_rejected():
    prob = build("coin-flip")
    with pytest.raises(ModelError):
        GeneralizedProblem(prob.environment, frozenset(), prob.goal_states)


def test_deterministic_runs_are_identical():
    prob = build("hall-a-1d", {"n": 4})
    r1 = andor_synth(_gp(prob), 2)
    r2 = andor_synth(_gp(prob), 2)
    assert r1.controller.transitions == r2.controller.transitions
    assert r1.or_steps == r2.or_steps


def test_budget_abort_is_distinct():
    result = andor_synth(_gp(build("hall-a-1d", {"n": 5})), 2, budget=3)
    assert result.outcome == "budget-exhausted"
    assert result.controller is None


@pytest.mark.parametrize("n", [3, 4, 5])
def test_agreement_with_probabilistic_engine_on_deterministic_domains(n):
    prob = build("hall-a-1d", {"n": n})
    near_one = F(10**9 - 1, 10**9)
    for bound in (1, 2):
        ra = andor_synth(_gp(prob), bound)
        rp = pandor_synth(SynthesisRequest(prob, bound, near_one))
        assert (ra.outcome == "controller") == (rp.outcome == "controller")
        if ra.outcome == "controller":
            assert exact_measures(prob, ra.controller).lgt == 1
            assert exact_measures(prob, rp.controller).lgt == 1
