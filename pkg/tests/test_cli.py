import json
import math
import os
import pathlib

import pytest

from cinfty.cli import main


@pytest.fixture
def cli(tmp_path, capsys):
    session = str(tmp_path / "session.json")

    def run(*args):
        code = main([*args, "--session", session])
        out, err = capsys.readouterr()
        return code, (json.loads(out) if out else None), err

    return run


def _setup_tangential(cli):
    for cmd in (("ring", "C", "2"), ("ring", "D", "1"), ("ring", "E", "1")):
        assert cli(*cmd)[0] == 0
    assert cli("morphism", "al", "C", "D", "x1", "x1^2")[0] == 0
    assert cli("morphism", "be", "C", "E", "x1", "0")[0] == 0


def test_points_example(cli):
    assert cli("ring", "Q", "1", "x1^2-1")[0] == 0
    code, body, _ = cli("points", "Q", "--box", "-2:2", "--grid", "9")
    assert code == 0 and body["schema"] == "cinfty/1"
    assert [p["coords"] for p in body["points"]] == [[-1], [1]]


def test_jet_example(cli):
    code, body, _ = cli("jet", "--algebra", "dual", "--f", "exp(x1)", "--arg", "1+1e")
    assert code == 0
    assert body["result"]["coords"] == pytest.approx([math.e, math.e], abs=1e-15)


def test_jet_exact_result(cli):
    code, body, _ = cli("jet", "--algebra", "jet3", "--f", "x1^3", "--arg", "1/2+e")
    assert code == 0 and body["result"]["exact"] == ["1/8", "3/4", "3/2", "1"]


def test_user_weil_algebra(cli):
    assert cli("weil", "W", "2", "3", "x1*x2")[0] == 0
    code, body, _ = cli("jet", "--algebra", "W", "--f", "x1*x2", "--arg", "e1", "--arg", "e2")
    assert code == 0 and all(c == 0 for c in body["result"]["coords"])


def test_pushout_and_cotangent(cli):
    _setup_tangential(cli)
    code, body, _ = cli("pushout", "F", "al", "be")
    assert code == 0 and body["ring"]["relations"] == ["x1-x2", "x1^2"]
    code, body, _ = cli("cotangent", "F")
    assert code == 0 and body["rows"] == [["1", "-1"], ["2*x1", "0"]]
    # the structure maps are registered too
    assert cli("pushout", "F.gamma", "al", "be")[0] == 2


def test_seqcheck_exit_codes(cli):
    _setup_tangential(cli)
    code, body, _ = cli("seqcheck", "al", "be")
    assert code == 0 and body["verdict"] == "Exact"
    code, body, _ = cli("seqcheck", "al", "be", "--corrupt-sign")
    assert code == 1 and body["verdict"] == "Violated"
    assert body["points"][0]["composition_residual"] > 0.5


def test_not_a_morphism_reports_witness(cli):
    cli("ring", "Q", "1", "x1^2-1")
    cli("ring", "P", "0")
    code, body, _ = cli("morphism", "bad", "Q", "P", "0")
    assert code == 1
    assert body["verdict"] == "Falsified" and body["relation_index"] == 0


@pytest.mark.parametrize(
    "cmds",
    [
        [("ring", "A", "1"), ("ring", "A", "2")],
        [("ring", "A", "1", "x2")],
        [("ring", "A", "1"), ("ring", "B", "1"), ("morphism", "f", "A", "B", "x1", "x1")],
        [("points", "nowhere")],
        [("ring", "A", "1", "log(x1)")],
        [("ring", "A", "1"), ("ring", "B", "2"), ("morphism", "f", "A", "B", "x1"), ("morphism", "g", "B", "A", "x1", "x1"),
         ("pushout", "P", "f", "g")],
        [("jet", "--algebra", "nope", "--f", "x1", "--arg", "1")],
    ],
    ids=["name-clash", "arity", "image-count", "unknown-ring", "non-smooth", "source-mismatch", "unknown-algebra"],
)
def test_usage_errors_exit_2(cli, cmds):
    *setup, last = cmds
    for cmd in setup:
        assert cli(*cmd)[0] == 0
    code, body, err = cli(*last)
    assert code == 2 and body is None and err.startswith("cinfty: error:")


def test_hadamard_report(cli):
    code, body, _ = cli("hadamard", "--f", "sin(x1)*x2", "--n", "2", "--seed", "3")
    assert code == 0 and body["seed"] == 3
    assert body["max_residual"] <= 1e-8


def test_out_and_in_files(tmp_path, capsys):
    ring_file = tmp_path / "ring.json"
    assert main(["ring", "Q", "1", "x1^2-1", "--out", str(ring_file)]) == 0
    assert capsys.readouterr().out == ""
    assert main(["points", "Q", "--in", str(ring_file), "--box", "-2:2"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert len(body["points"]) == 2


def test_output_is_deterministic(cli, tmp_path, capsys):
    cli("ring", "Q", "2", "x1^2+x2^2-1", "x1-x2")
    outs = []
    for _ in range(2):
        main(["points", "Q", "--box", "-2:2", "--session", str(tmp_path / "session.json")])
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1] and outs[0].endswith("}\n")


def test_weil_report_loads_as_input(tmp_path, capsys):
    alg_file = tmp_path / "w.json"
    assert main(["weil", "W", "1", "3", "--out", str(alg_file)]) == 0
    code = main(["jet", "--algebra", "W", "--in", str(alg_file), "--f", "x1^2", "--arg", "e"])
    body = json.loads(capsys.readouterr().out)
    assert code == 0 and body["result"]["coords"] == [0, 0, 1]


GOLDEN_DIR = pathlib.Path(__file__).parent / "golden"


def test_golden_files(tmp_path):
    """Reports must match the stored goldens byte for byte.

    Regenerate with CINFTY_REGEN_GOLDEN=1 after an intentional format change.
    """
    from test_acceptance import GOLDEN, _run_golden

    outs = _run_golden(tmp_path)
    for i, (cmd, (_, out)) in enumerate(zip(GOLDEN, outs)):
        path = GOLDEN_DIR / f"{i:02d}_{cmd[0]}.json"
        if os.environ.get("CINFTY_REGEN_GOLDEN"):
            path.write_bytes(out)
        assert out == path.read_bytes(), f"{path.name} differs for {' '.join(cmd)}"
