import json
from fractions import Fraction as F

import pytest

from fscsynth.cli import main
from fscsynth.domains import build, serialize_controller, serialize_env
from fscsynth.verifier import exact_measures
from fscsynth.domains import parse_controller

from helpers import always_a_controller, always_flip_controller, corridor_controller, flip_stop_controller


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_synth_reachable_bound_exits_zero(capsys):
    code, out, _ = run(capsys, "synth", "--domain", "coin-flip", "--max-states", "2", "--lgt-star", "0.4")
    assert code == 0
    assert "outcome: controller" in out
    assert "lgt: 1/2 ~ 0.500000000000" in out


def test_synth_unreachable_bound_exits_two(capsys):
    code, out, _ = run(capsys, "synth", "--domain", "coin-flip", "--max-states", "2", "--lgt-star", "0.6")
    assert code == 2
    assert "outcome: failure-proved" in out
    assert "lgt:" not in out  # oracle fields only when a controller exists


def test_synth_budget_exits_three(capsys):
    code, out, _ = run(
        capsys, "synth", "--domain", "noisy-hall-a-1d", "--param", "n=4",
        "--max-states", "2", "--lgt-star", "0.99", "--budget", "5",
    )
    assert code == 3
    assert "outcome: budget-exhausted" in out


def test_synth_corridor_with_baseline_algo(capsys):
    code, out, _ = run(
        capsys, "synth", "--domain", "hall-a-1d", "--param", "n=5",
        "--max-states", "2", "--lgt-star", "0.99", "--algo", "andor",
    )
    assert code == 0
    assert "lgt: 1/1" in out


def test_synth_json_schema(capsys):
    code, out, _ = run(
        capsys, "synth", "--domain", "coin-flip", "--max-states", "2",
        "--lgt-star", "0.4", "--json",
    )
    assert code == 0
    payload = json.loads(out)
    assert set(payload) == {
        "outcome", "algo", "or_steps", "peak_depth", "wall_time_s", "controller",
        "lgt", "lgt_decimal", "lter", "lter_decimal", "nonterm", "nonterm_decimal",
        "undefined_mass", "undefined_mass_decimal",
    }
    assert payload["outcome"] == "controller"
    assert payload["lgt"] == "1/2" and payload["lgt_decimal"] == 0.5
    assert payload["controller"].startswith("states ")


def test_synth_json_failure_has_null_oracle_fields(capsys):
    code, out, _ = run(
        capsys, "synth", "--domain", "coin-flip", "--max-states", "2",
        "--lgt-star", "0.6", "--json",
    )
    assert code == 2
    payload = json.loads(out)
    assert payload["controller"] is None and payload["lgt"] is None


def test_synth_writes_out_and_dot_files(tmp_path, capsys):
    out_file = tmp_path / "controller.fsc"
    dot_file = tmp_path / "controller.dot"
    code, _, _ = run(
        capsys, "synth", "--domain", "hall-a-1d", "--param", "n=5",
        "--max-states", "2", "--lgt-star", "0.999999999",
        "--out", str(out_file), "--dot", str(dot_file),
    )
    assert code == 0
    prob = build("hall-a-1d", {"n": 5})
    ctrl = parse_controller(out_file.read_text(), prob.environment)
    assert exact_measures(prob, ctrl).lgt == 1
    assert "digraph controller" in dot_file.read_text()


def test_end_to_end_soundness_of_exit_zero(tmp_path, capsys):
    # verify(synth(...)) never dips below the requested bound on exit 0
    out_file = tmp_path / "c.fsc"
    for domain, star in [("coin-flip", "0.4"), ("decay-loop", "0.9"), ("bridgewalk", "0.5")]:
        code, _, _ = run(
            capsys, "synth", "--domain", domain, "--max-states", "2",
            "--lgt-star", star, "--out", str(out_file),
        )
        assert code == 0
        prob = build(domain)
        ctrl = parse_controller(out_file.read_text(), prob.environment)
        assert exact_measures(prob, ctrl).lgt >= F(star)


def test_verify_decay_loop(tmp_path, capsys):
    prob = build("decay-loop")
    env_file = tmp_path / "decay.env"
    ctrl_file = tmp_path / "flip.fsc"
    env_file.write_text(serialize_env(prob))
    ctrl_file.write_text(serialize_controller(always_flip_controller(prob), prob.environment))
    code, out, _ = run(capsys, "verify", "--env", str(env_file), "--controller", str(ctrl_file))
    assert code == 0
    assert "lgt: 1/1 ~ 1.000000000000" in out


def test_verify_three_state_nonterm(tmp_path, capsys):
    prob = build("three-state")
    ctrl_file = tmp_path / "a.fsc"
    ctrl_file.write_text(serialize_controller(always_a_controller(prob), prob.environment))
    code, out, _ = run(capsys, "verify", "--domain", "three-state", "--controller", str(ctrl_file))
    assert code == 0
    assert "nonterm: 1/1 ~ 1.000000000000" in out


def test_verify_coin_flip_half(tmp_path, capsys):
    prob = build("coin-flip")
    ctrl_file = tmp_path / "c.fsc"
    ctrl_file.write_text(serialize_controller(flip_stop_controller(prob), prob.environment))
    code, out, _ = run(capsys, "verify", "--domain", "coin-flip", "--controller", str(ctrl_file))
    assert code == 0
    assert "lgt: 1/2 ~ 0.500000000000" in out


def test_export_dot_corridor(tmp_path, capsys):
    prob = build("hall-a-1d", {"n": 5})
    ctrl_file = tmp_path / "c.fsc"
    ctrl_file.write_text(serialize_controller(corridor_controller(prob.environment), prob.environment))
    code, out, _ = run(
        capsys, "export-dot", "--domain", "hall-a-1d", "--param", "n=5",
        "--controller", str(ctrl_file),
    )
    assert code == 0
    assert out.count("shape=circle") == 2
    edges = [line for line in out.splitlines() if "label=" in line and "->" in line]
    assert len(edges) == 4  # parallel transitions share one drawn edge
    assert any("stop" in e and "style=dashed" in e for e in edges)


def test_export_dot_empty_controller(tmp_path, capsys):
    ctrl_file = tmp_path / "empty.fsc"
    ctrl_file.write_text("states 1\nstart 0\n")
    code, out, _ = run(capsys, "export-dot", "--domain", "coin-flip", "--controller", str(ctrl_file))
    assert code == 0
    assert out.count("shape=circle") == 1
    assert "__start -> q0;" in out


def test_export_dot_noisy_retry_edge(tmp_path, capsys):
    from fscsynth.model import SynthesisRequest
    from fscsynth.pandor import pandor_synth

    prob = build("noisy-hall-a-1d", {"n": 4})
    result = pandor_synth(SynthesisRequest(prob, 2, F(99, 100)))
    ctrl_file = tmp_path / "noisy.fsc"
    ctrl_file.write_text(serialize_controller(result.controller, prob.environment))
    code, out, _ = run(
        capsys, "export-dot", "--domain", "noisy-hall-a-1d", "--param", "n=4",
        "--controller", str(ctrl_file),
    )
    assert code == 0
    q1_self = [line for line in out.splitlines() if "q1 -> q1" in line]
    assert q1_self and "B : left" in q1_self[0]


def test_bench_csv(capsys):
    code, out, _ = run(capsys, "bench", "--budget", "100000")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "domain,params,max_states,algo,outcome,or_steps,time_s"
    body = "\n".join(lines[1:])
    assert "coin-flip" in body
    noisy = [l for l in lines if l.startswith("noisy-hall-a-1d,n=4")]
    assert noisy and ",2,pandor,controller," in noisy[0]
    hall = [l for l in lines if l.startswith("hall-a-1d,n=5")]
    assert len(hall) == 2  # both engines succeed on the deterministic hall
    assert all(",controller," in l for l in hall)


def test_usage_errors_exit_64(capsys):
    code, _, err = run(capsys, "synth", "--domain", "coin-flip", "--max-states", "2", "--lgt-star", "bogus")
    assert code == 64 and "rational" in err
    code, _, _ = run(capsys, "synth", "--domain", "nope", "--max-states", "2", "--lgt-star", "0.4")
    assert code == 64
    code, _, _ = run(capsys, "synth", "--domain", "coin-flip", "--max-states", "2", "--lgt-star", "0.4", "--param", "n=9")
    assert code == 64
    code, _, _ = run(capsys, "synth", "--max-states", "2", "--lgt-star", "0.4")
    assert code == 64
    code, _, _ = run(capsys, "synth", "--domain", "coin-flip", "--max-states", "0", "--lgt-star", "0.4")
    assert code == 64


def test_parse_errors_exit_65(tmp_path, capsys):
    env_file = tmp_path / "bad.env"
    env_file.write_text("states s0\nactions a\nobservations o\nobserve s0 o\ninit s0\ntrans s0 a 1/2 s0\n")
    code, _, err = run(capsys, "synth", "--env", str(env_file), "--max-states", "1", "--lgt-star", "0.4")
    assert code == 65 and "sum" in err
    ctrl_file = tmp_path / "bad.fsc"
    ctrl_file.write_text("states 1\nstart 0\nedge 0 nope flip 0\n")
    code, _, _ = run(capsys, "verify", "--domain", "coin-flip", "--controller", str(ctrl_file))
    assert code == 65
