from fractions import Fraction as F

import pytest

from fscsynth.domains import (
    DomainError,
    DomainSpec,
    ParseError,
    build,
    default_params,
    domain_names,
    parse_controller,
    parse_env,
    serialize_controller,
    serialize_env,
)
from fscsynth.model import STOP
from fscsynth.verifier import exact_measures

from helpers import controller_from_names, corridor_controller, enumerate_controllers


def test_coin_flip_shape():
    prob = build("coin-flip")
    env = prob.environment
    assert len(env.states) == 3
    assert env.actions == ("flip",)
    best = max(exact_measures(prob, c).lgt for c in enumerate_controllers(prob, 1))
    assert best == F(1, 2)


def test_decay_loop_has_both_loop_kinds():
    env = build("decay-loop").environment
    s0 = env.state_index("s0")
    assert dict(env.dist(s0, env.action_index("no-op"))) == {s0: F(1)}
    flip = dict(env.dist(s0, env.action_index("flip")))
    assert flip == {s0: F(1, 2), env.state_index("goal"): F(1, 2)}


def test_three_state_is_unobservable_with_empty_goal_set():
    prob = build("three-state")
    assert prob.goal_states == frozenset()
    assert len(set(prob.environment.omega)) == 1


def test_corridor_layout():
    prob = build("hall-a-1d", {"n": 5})
    env = prob.environment
    fresh_obs = [env.observations[env.obs(env.state_index(f"c{i}"))] for i in range(5)]
    assert fresh_obs == ["A", "-", "-", "-", "B"]
    # three middle cells between the lettered ends
    assert fresh_obs.count("-") == 3
    # boundary moves are inapplicable in the deterministic corridor
    assert env.dist(env.state_index("c0"), env.action_index("left")) is None
    assert env.dist(env.state_index("c4v"), env.action_index("right")) is None


def test_noisy_corridor_moves_succeed_half_the_time():
    prob = build("noisy-hall-a-1d", {"n": 4})
    env = prob.environment
    c1 = env.state_index("c1")
    dist = dict(env.dist(c1, env.action_index("right")))
    assert dist == {c1: F(1, 2), env.state_index("c2"): F(1, 2)}
    # moving against the wall never changes the state
    c0 = env.state_index("c0")
    assert dict(env.dist(c0, env.action_index("left"))) == {c0: F(1)}


def test_bridgewalk_structure_and_optimum():
    prob = build("bridgewalk", {"n": 3, "p_fall": F(1, 10)})
    env = prob.environment
    dist = dict(env.dist(env.state_index("b0"), env.action_index("walk")))
    assert dist == {env.state_index("b1"): F(9, 10), env.state_index("fallen"): F(1, 10)}
    walker = controller_from_names(env, 1, {
        (0, "start"): ("walk", 0), (0, "mid"): ("walk", 0), (0, "end"): ("stop", 0),
    })
    assert exact_measures(prob, walker).lgt == F(9, 10) ** 3
    assert env.dist(env.state_index("fallen"), env.action_index("walk")) is None


def test_perimeter_hall_shape():
    prob = build("hall-a-2d", {"n": 3})
    env = prob.environment
    assert env.actions == ("cw", "ccw")
    assert env.states[prob.initial_state] == "p0m1"
    assert {env.states[g] for g in prob.goal_states} == {"p0m15"}
    # the ring makes every move applicable everywhere
    for s in range(len(env.states)):
        assert env.applicable(s) == (0, 1)


@pytest.mark.parametrize("name", sorted(domain_names()))
def test_all_domains_build_with_defaults(name):
    prob = build(name, default_params(name))
    assert prob.environment.states


@pytest.mark.parametrize(
    "name,grid",
    [
        ("hall-a-1d", [{"n": n} for n in range(2, 7)]),
        ("noisy-hall-a-1d", [{"n": n, "p": p} for n in (2, 3, 4) for p in (F(1, 4), F(1, 2), F(9, 10))]),
        ("bridgewalk", [{"n": n, "p_fall": F(1, 10)} for n in range(1, 7)]),
        ("hall-a-2d", [{"n": n} for n in (2, 3, 4)]),
    ],
)
def test_parameter_grids_validate(name, grid):
    for params in grid:
        build(name, params)  # Environment invariants checked on construction


def test_parameter_validation_errors():
    with pytest.raises(DomainError):
        build("nope")
    with pytest.raises(DomainError):
        build("hall-a-1d", {"n": 1})
    with pytest.raises(DomainError):
        build("noisy-hall-a-1d", {"p": F(0)})
    with pytest.raises(DomainError):
        build("noisy-hall-a-1d", {"p": F(1)})
    with pytest.raises(DomainError):
        build("bridgewalk", {"p_fall": "7/5"})
    with pytest.raises(DomainError):
        build("coin-flip", {"n": 3})


def test_domain_spec_builds():
    spec = DomainSpec("bridgewalk", (("n", 2), ("p_fall", F(1, 4))))
    prob = spec.build()
    assert len(prob.environment.states) == 4


COIN_FLIP_TEXT = """\
# one coin flip, then the game is over
states s0 goal nogoal
actions flip
observations start won lost
observe s0 start
observe goal won
observe nogoal lost
init s0
goal goal
trans s0 flip 1/2 goal 1/2 nogoal
"""


def test_parse_env_matches_builder():
    assert parse_env(COIN_FLIP_TEXT) == build("coin-flip")


def test_decimal_probabilities_are_exact():
    text = COIN_FLIP_TEXT.replace("1/2 goal 1/2 nogoal", "0.5 goal 0.5 nogoal")
    assert parse_env(text) == build("coin-flip")


@pytest.mark.parametrize("name", sorted(domain_names()))
def test_serialize_round_trip(name):
    prob = build(name, default_params(name))
    text = serialize_env(prob)
    again = parse_env(text)
    assert again == prob
    assert serialize_env(again) == text


def test_probability_sum_error():
    bad = COIN_FLIP_TEXT.replace("1/2 goal 1/2 nogoal", "1/2 goal 2/5 nogoal")
    with pytest.raises(ParseError) as err:
        parse_env(bad)
    assert "sum" in str(err.value)
    assert err.value.line == 10


def test_dangling_identifier_error():
    bad = COIN_FLIP_TEXT.replace("observe s0 start", "observe s9 start")
    with pytest.raises(ParseError) as err:
        parse_env(bad)
    assert "dangling identifier" in str(err.value)
    assert err.value.line == 5 and err.value.col == 9


def test_unknown_directive_and_bad_probability():
    with pytest.raises(ParseError):
        parse_env(COIN_FLIP_TEXT + "frobnicate s0\n")
    with pytest.raises(ParseError):
        parse_env(COIN_FLIP_TEXT.replace("1/2 goal", "q goal"))
    with pytest.raises(ParseError):
        parse_env(COIN_FLIP_TEXT.replace("init s0\n", ""))
    with pytest.raises(ParseError):
        parse_env(COIN_FLIP_TEXT + "observe s0 won\n")


def test_controller_round_trip():
    prob = build("hall-a-1d", {"n": 5})
    ctrl = corridor_controller(prob.environment)
    text = serialize_controller(ctrl, prob.environment)
    again = parse_controller(text, prob.environment)
    assert again == ctrl
    assert serialize_controller(again, prob.environment) == text


def test_controller_parse_errors():
    env = build("hall-a-1d", {"n": 3}).environment
    with pytest.raises(ParseError):
        parse_controller("start 0\nedge 0 A right 0\n", env)  # missing states
    with pytest.raises(ParseError):
        parse_controller("states 1\nstart 0\nedge 0 Z right 0\n", env)
    with pytest.raises(ParseError):
        parse_controller("states 1\nstart 0\nedge 0 A teleport 0\n", env)
    with pytest.raises(ParseError):
        parse_controller("states 1\nstart 1\n", env)
    with pytest.raises(ParseError):
        parse_controller("states 1\nstart 0\nedge 0 A right 3\n", env)
