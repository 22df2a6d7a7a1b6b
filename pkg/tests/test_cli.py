import io
import json
import subprocess
from fractions import Fraction as F

import pytest

from motline.cli import emit_report, measure_to_json, parse_chi, parse_measure_file, parse_points, parse_reward, run_command
from motline.errors import NegativeMass, ParseError

MU_A = '{"atoms": [{"x": -1, "w": "1/2"}, {"x": 1, "w": "1/2"}]}'
NU_A = '{"atoms": [{"x": -2, "w": "1/4"}, {"x": 0, "w": "1/2"}, {"x": 2, "w": "1/4"}]}'
DELTA0 = '{"atoms": [{"x": 0, "w": 1}]}'
IND = '{"kind": "indicator_offdiag"}'


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_command(list(argv), out, err)
    return code, json.loads(out.getvalue()), out.getvalue()


def test_parse_measure():
    m = parse_measure_file(MU_A)
    assert m.atoms == [(-1, F(1, 2)), (1, F(1, 2))] and m.mode == "exact"
    assert parse_measure_file(MU_A, "float").mode == "float"
    with pytest.raises(NegativeMass):
        parse_measure_file('{"atoms": [{"x": 0, "w": -1}]}')
    for bad in ('{"atoms": 1}', '{"atoms": [{"x": 0}]}', '{"atoms": [{"x": "a", "w": 1}]}', "{not json", '{"atoms": [], "mode": "q"}'):
        with pytest.raises(ParseError):
            parse_measure_file(bad)


def test_measure_round_trip():
    m = parse_measure_file(NU_A)
    assert parse_measure_file(json.dumps(measure_to_json(m))) == m


def test_parse_reward_points_chi():
    assert parse_reward('{"kind": "square_diff"}')(0, 2) == 4
    t = parse_reward('{"kind": "table", "entries": [{"x": 0, "y": 1, "f": "inf"}], "default": "1/3"}')
    assert t(0, 1) == float("inf") and t(2, 2) == F(1, 3)
    assert parse_reward('{"kind": "penalized_band", "delta": "1/4"}')(0, 1) == float("-inf")
    with pytest.raises(ParseError):
        parse_reward('{"kind": "nope"}')
    assert parse_points('[[0, 1], {"x": "1/2", "y": 2}]') == [(0, 1), (F(1, 2), 2)]
    chi = parse_chi('{"breakpoints": [{"x": 0, "v": 0}], "left_slope": 1, "right_slope": -1}')
    assert chi(2) == -2 and chi(-3) == -3


def test_emit_canonical():
    text = emit_report({"v": F(1, 2), "gamma": [], "n": 3})
    data = json.loads(text)
    assert data["v"] == "1/2" and data["gamma"] == [] and data["n"] == 3 and data["schema_version"] == 1


def test_order_exit_codes():
    code, rep, _ = run("order", "--mu", DELTA0, "--nu", MU_A)
    assert code == 0 and rep["ordered"] is True
    code, rep, _ = run("order", "--mu", MU_A, "--nu", DELTA0)
    assert code == 3 and rep["ordered"] is False


def test_solve_two_component():
    code, rep, _ = run("solve", "--mu", MU_A, "--nu", NU_A, "--reward", IND, "--emit-gamma")
    assert code == 0 and rep["value"] == "1" and rep["dual_value"] == "1" and rep["verified"]
    assert len(rep["gamma"]) >= 4
    code, rep, _ = run("solve", "--mu", MU_A, "--nu", NU_A, "--reward", IND, "--formulation", "componentwise")
    assert code == 0 and rep["component_values"] == ["1/2", "1/2"]


def test_solve_float_mode():
    code, rep, _ = run("solve", "--mu", MU_A, "--nu", NU_A, "--reward", IND, "--mode", "float")
    assert code == 0 and float(rep["value"]) == pytest.approx(1.0)


def test_solve_error_codes():
    unbounded = '{"kind": "table", "entries": [{"x": 1, "y": 0, "f": "inf"}], "default": 0}'
    code, rep, _ = run("solve", "--mu", MU_A, "--nu", NU_A, "--reward", unbounded)
    assert code == 4 and rep["value"] == "inf"
    code, _, _ = run("solve", "--mu", MU_A, "--nu", DELTA0, "--reward", IND)
    assert code == 3
    code, _, _ = run("solve", "--mu", "{bad", "--nu", DELTA0, "--reward", IND)
    assert code == 2
    code, _, _ = run("solve", "--mu", MU_A)
    assert code == 2


def test_decompose_polar_integral():
    code, rep, _ = run("decompose", "--mu", MU_A, "--nu", NU_A)
    assert code == 0 and len(rep["components"]) == 2
    code, rep, _ = run("polar", "--mu", MU_A, "--nu", NU_A, "--points", "[[-1, 2], [-1, -2]]")
    assert [p["reason"] for p in rep["points"]] == ["crosses_barrier", "charged"]
    chi = '{"breakpoints": [{"x": 0, "v": 0}], "left_slope": 1, "right_slope": -1}'
    code, rep, _ = run("integral", "--mu", DELTA0, "--nu", MU_A, "--chi", chi)
    assert code == 0 and rep["i2"] == rep["i3"] == "1" and rep["agree"]


def test_harness_commands():
    code, rep, _ = run("harness", "integrability-failure", "--n", "10")
    assert code == 0 and rep["values"]["value"] == "2/3"
    code, rep, _ = run("harness", "pointwise-gap", "--levels", "4,8")
    assert code == 0 and all(rep["verdicts"].values())
    code, _, _ = run("harness", "pointwise-gap", "--levels", "4,x")
    assert code == 2


def test_files_and_determinism(tmp_path):
    (tmp_path / "mu.json").write_text(MU_A)
    (tmp_path / "nu.json").write_text(NU_A)
    argv = ["solve", "--mu", str(tmp_path / "mu.json"), "--nu", str(tmp_path / "nu.json"), "--reward", IND, "--emit-gamma"]
    outs = [run(*argv)[2] for _ in range(2)]
    assert outs[0] == outs[1]
    proc = subprocess.run(["motline", *argv], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == outs[0]
