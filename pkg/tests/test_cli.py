import json

import pytest

from mtasep.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_two_point_table(capsys):
    code, out, _ = run(capsys, "verify", "two-point", "--n", "5")
    assert code == 0
    assert "pass" in out
    assert out.splitlines()[-5].split() == ["0", "4", "2", "2", "2"]
    assert out.splitlines()[-4].split() == ["1", "0", "5", "2", "2"]


def test_verify_json(capsys):
    code, out, _ = run(capsys, "verify", "aggregate-two", "--n", "2-4", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert [d["verdict"] for d in data] == ["pass"]
    assert data[0]["n"] == [2, 3, 4]


def test_verify_budget_exit(capsys, monkeypatch):
    # laws computed earlier in the session are reused without a budget check
    monkeypatch.setattr("mtasep.correlations._REGISTRY", {})
    code, out, _ = run(capsys, "verify", "two-point", "--n", "5", "--budget", "10")
    assert code == 2
    assert "incomplete" in out


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "nonsense"])
    assert exc.value.code == 3
    code, _, err = run(capsys, "psi", "--n", "1")
    assert code == 3 and "invalid" in err
    code, _, _ = run(capsys, "conjecture", "two-block", "--n", "8")
    assert code == 3
    code, _, _ = run(capsys, "ncore", "--n", "4", "--steps", "10")
    assert code == 3


def test_conjecture(capsys):
    code, out, _ = run(capsys, "conjecture", "increasing-triple", "--n", "5", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["tested"] == 10 and data["verdict"] == "pass"


def test_exact(capsys):
    code, out, _ = run(capsys, "exact", "--sector", "1,1,1")
    assert code == 0
    assert "3 2 1  1/9" in out
    code2, out2, _ = run(capsys, "exact", "--sector", "1,1,1", "--method", "solve")
    assert code2 == 0 and out2 == out


def test_simulate_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["simulate", "--n", "3", "--horizon", "2000", "--burn-in", "10", "--seed", "7", "--format", "json"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    data = json.loads(a.read_text())
    assert data["seed"] == 7


def test_simulate_patterns(capsys):
    code, out, _ = run(
        capsys, "simulate", "--n", "3", "--horizon", "500", "--seed", "1", "--pattern", "3,1", "--pattern", "1:2,3:1",
        "--format", "csv",
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "seed,pattern,estimate,se,events"
    assert len(lines) == 4


def test_ncore_replay(capsys):
    code, out, _ = run(capsys, "ncore", "--n", "4", "--replay", "0,2,3,1,2,3,0,1", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["partition"] == [6, 3, 1, 1] and data["is_core"]


def test_ncore_curve(capsys):
    code, out, _ = run(capsys, "ncore", "--n", "4", "--curve", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "x,y" and len(lines) == 5


def test_ncore_steps(capsys):
    code, out, _ = run(capsys, "ncore", "--n", "3", "--steps", "200", "--seed", "0", "--seeds", "3", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert len(data["runs"]) == 3 and data["median_distance"] > 0


@pytest.mark.parametrize("n", [3, 10])
def test_psi(capsys, n):
    code, out, _ = run(capsys, "psi", "--n", str(n), "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["collinear"]
    if n == 3:
        assert data["closed"] == ["2/1", "0/1", "-2/1"]
