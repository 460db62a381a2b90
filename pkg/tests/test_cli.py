import json
import subprocess
import sys

import pytest

from permqc.cli import SCHEMA_VERSION, run


def _report(tmp_path, *argv):
    out = tmp_path / "report.json"
    code = run([*argv, "--output", str(out)])
    return code, json.loads(out.read_text())


def test_verify_toffoli_n8(tmp_path):
    code, rep = _report(tmp_path, "verify-toffoli", "--n", "8")
    assert code == 0 and rep["passed"]
    detail = rep["details"][0]
    assert (detail["timesteps"], detail["baseline"], detail["delta"]) == (82, 85, 3)
    assert detail["baseline_cnot11"] == 73


def test_verify_theorem1_seeded(tmp_path):
    code, rep = _report(tmp_path, "verify-theorem1", "--n", "4", "--trials", "100", "--seed", "7")
    assert code == 0
    assert all(c["max_deviation"] < 1e-12 for c in rep["checks"])


def test_feasibility_search_m3(tmp_path):
    code, rep = _report(tmp_path, "feasibility-search", "--M", "3", "--strategy", "exhaustive")
    assert code == 0
    assert rep["summary"]["feasible_pairs"] == 0 and rep["summary"]["candidates"] == 18


@pytest.mark.parametrize("argv", [
    ["verify-encoding"],
    ["verify-lemma"],
    ["verify-hadamard"],
    ["verify-cnot"],
    ["verify-perm-hadamard"],
    ["clifford-tables"],
    ["schedule-compare", "--n", "8"],
    ["feasibility-check", "--preset", "perm-hadamard"],
])
def test_commands_pass(tmp_path, argv):
    code, rep = _report(tmp_path, *argv)
    assert code == 0 and rep["passed"]
    assert rep["schemaVersion"] == SCHEMA_VERSION
    assert rep["command"] == argv[0]


def test_feasibility_check_explicit_pair(tmp_path):
    code, rep = _report(tmp_path, "feasibility-check", "--M", "4", "--k", "1",
                        "--P", "(1,2,3,4)", "--H", "(1,2)")
    assert code == 0 and rep["feasible"] is False


def test_failed_check_exit_1(tmp_path):
    code, rep = _report(tmp_path, "verify-theorem1", "--n", "4", "--tol", "0")
    assert code == 1 and not rep["passed"]


@pytest.mark.parametrize("argv", [
    ["no-such-command"],
    ["verify-hadamard", "--n", "6"],
    ["feasibility-search"],
    ["feasibility-search", "--M", "7", "--strategy", "exhaustive"],
    ["feasibility-check", "--M", "3", "--P", "(1,9)", "--H", "()"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert run(argv) == 2


def test_byte_identical_reports(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert run(["feasibility-search", "--M", "4", "--strategy", "random",
                    "--budget", "30", "--seed", "3", "--output", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("PERMQC_OUTPUT_DIR", str(tmp_path))
    assert run(["clifford-tables"]) == 0
    rep = json.loads((tmp_path / "clifford-tables.json").read_text())
    assert rep["schemaVersion"] == SCHEMA_VERSION


def test_search_jsonl_stream(tmp_path):
    jsonl = tmp_path / "s.jsonl"
    assert run(["feasibility-search", "--M", "3", "--jsonl", str(jsonl),
                "--output", str(tmp_path / "r.json")]) == 0
    rows = [json.loads(line) for line in jsonl.read_text().splitlines()]
    assert len(rows) == 18


def test_text_format(capsys):
    assert run(["schedule-compare", "--n", "8", "--format", "text"]) == 0
    out = capsys.readouterr().out
    assert "82" in out and "85" in out


def test_console_entry_point(tmp_path):
    out = tmp_path / "r.json"
    proc = subprocess.run([sys.executable, "-m", "permqc.cli", "verify-encoding",
                           "--output", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(out.read_text())["passed"]
