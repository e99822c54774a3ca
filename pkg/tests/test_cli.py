import json

import pytest

from erl.cli import main

SIG = {"agents": ["a"], "resources": ["e", "r", "s"], "unit": "e",
       "composition": []}


@pytest.fixture
def sig_file(tmp_path):
    path = tmp_path / "sig.json"
    path.write_text(json.dumps(SIG))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out


def test_prove_exit_codes(sig_file, tmp_path, capsys):
    out_file = str(tmp_path / "cm.json")
    code, _ = run(capsys, "prove", "--sig", sig_file, "p -> p",
                  "--countermodel-out", out_file)
    assert code == 0
    code, _ = run(capsys, "prove", "--sig", sig_file,
                  "[C a; s] p -> [C a; s] [C a; r] p",
                  "--countermodel-out", out_file)
    assert code == 1
    code, _ = run(capsys, "prove", "--sig", sig_file, "p * q -> q * p",
                  "--max-constants", "0", "--countermodel-out", out_file)
    assert code == 2


def test_countermodel_roundtrips_through_check(sig_file, tmp_path, capsys):
    out_file = str(tmp_path / "cm.json")
    code, _ = run(capsys, "prove", "--sig", sig_file,
                  "[C a; s] p -> [C a; s] [C a; r] p",
                  "--countermodel-out", out_file)
    assert code == 1
    data = json.loads(open(out_file).read())
    assert data["world"] == "c1"
    code, _ = run(capsys, "check", "--model", out_file,
                  "[C a; s] p -> [C a; s] [C a; r] p", "--at", data["world"])
    assert code == 1  # falsified, as the countermodel promises
    code, _ = run(capsys, "check", "--model", out_file, "top", "--at", "c1")
    assert code == 0


def test_check_usage_errors(sig_file, tmp_path, capsys):
    code, _ = run(capsys, "check", "--model", str(tmp_path / "absent.json"),
                  "top", "--at", "e")
    assert code == 64
    out_file = str(tmp_path / "cm.json")
    run(capsys, "prove", "--sig", sig_file,
        "[C a; s] p -> [C a; s] [C a; r] p", "--countermodel-out", out_file)
    code, _ = run(capsys, "check", "--model", out_file, "top", "--at", "zz")
    assert code == 65


def test_search_verdicts(sig_file, tmp_path, capsys):
    out_file = str(tmp_path / "cm.json")
    code, _ = run(capsys, "search", "--sig", sig_file, "p -> p",
                  "--carrier-bound", "3", "--countermodel-out", out_file)
    assert code == 0
    code, _ = run(capsys, "search", "--sig", sig_file,
                  "[D a; r] [D a; s] p -> [D a; s] p", "--logic", "erl-star",
                  "--countermodel-out", out_file)
    assert code == 1
    found = json.loads(open(out_file).read())
    code, _ = run(capsys, "check", "--model", out_file,
                  "[D a; r] [D a; s] p -> [D a; s] p", "--at", found["world"],
                  "--logic", "erl-star")
    assert code == 1


def test_scenarios_exit_zero(capsys):
    for name in ["schneier-base", "schneier-agents", "schneier-shortcut",
                 "schneier-fence", "joint-access", "semaphore"]:
        code, out = run(capsys, "scenario", name)
        assert code == 0, (name, out)
    code, _ = run(capsys, "scenario", "no-such-scenario")
    assert code == 65
    code, _ = run(capsys, "scenario", "--file", "/nonexistent/scenario.json")
    assert code == 64
    code, _ = run(capsys, "scenario", "--list")
    assert code == 0


def test_scenario_file_roundtrip(tmp_path, capsys):
    code, out = run(capsys, "scenario", "joint-access", "--dump")
    assert code == 0
    path = tmp_path / "s.json"
    path.write_text(out)
    code, _ = run(capsys, "scenario", "--file", str(path))
    assert code == 0


def test_json_determinism(sig_file, tmp_path, capsys):
    args = ["prove", "--sig", sig_file, "--output", "json",
            "[C a; s] p -> [C a; s] [C a; r] p",
            "--countermodel-out", str(tmp_path / "cm.json")]
    _, out1 = run(capsys, *args)
    _, out2 = run(capsys, *args)
    assert out1 == out2


def test_env_overrides(sig_file, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("ERL_MAX_CONSTANTS", "0")
    code, _ = run(capsys, "prove", "--sig", sig_file, "p * q -> q * p",
                  "--countermodel-out", str(tmp_path / "cm.json"))
    assert code == 2
    # explicit flag wins over the environment
    code, _ = run(capsys, "prove", "--sig", sig_file, "p * q -> q * p",
                  "--max-constants", "4",
                  "--countermodel-out", str(tmp_path / "cm.json"))
    assert code == 0


def test_usage_error_exit(capsys):
    assert main(["prove"]) == 64
