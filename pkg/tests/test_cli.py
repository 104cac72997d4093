"""Command-line front end: flags, exit codes, report formats."""

import json

import pytest

from sonoc.cli import main

from conftest import PROBLEM_DIR


def run(capsys, *args):
    code = main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def problem(name):
    return str(PROBLEM_DIR / f"{name}.json")


def test_classify_text(capsys):
    code, out, _ = run(capsys, "check", problem("mpcc1"), "--checks", "classify")
    assert code == 0
    assert "classification: NotLocalMin" in out


def test_classify_strict_min(capsys):
    code, out, _ = run(capsys, "check", problem("mpcc2"), "--checks", "classify")
    assert code == 0
    assert "classification: StrictLocalMin" in out


def test_dual_m_mid_flag(capsys):
    code, out, _ = run(
        capsys, "check", problem("circles"), "--checks", "dual-m", "--A", "mid"
    )
    assert code == 0
    assert "DualM(Amid): Fails" in out


def test_missing_file_exit_2(capsys):
    code, _, err = run(capsys, "check", "missing.json")
    assert code == 2
    assert "error" in err


def test_malformed_file_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"objective": {}}')
    code, _, err = run(capsys, "check", str(bad))
    assert code == 2


def test_cell_budget_exit_3(capsys):
    code, _, err = run(
        capsys, "check", problem("mpcc1"), "--checks", "cones", "--max-cells", "1"
    )
    assert code == 3
    assert "cell budget" in err


def test_direction_override(capsys):
    code, out, _ = run(
        capsys, "check", problem("twobranch"),
        "--checks", "primal", "--direction", "0,1",
    )
    assert code == 0
    assert "direction (0, 1)" in out
    assert "direction (1, 0)" not in out


def test_bad_direction_exit_2(capsys):
    code, _, _ = run(
        capsys, "check", problem("twobranch"),
        "--checks", "primal", "--direction", "1,2,3",
    )
    assert code == 2


def test_json_and_text_verdicts_identical(capsys):
    code, out_json, _ = run(
        capsys, "check", problem("mpcc1"), "--checks", "all", "--json"
    )
    assert code == 0
    report = json.loads(out_json)
    code, out_text, _ = run(capsys, "check", problem("mpcc1"), "--checks", "all")
    assert code == 0
    for dr in report["directions"]:
        for chk in dr["checks"]:
            assert f"{chk['id']}: {chk['verdict']}" in out_text
    assert f"classification: {report['classification']}" in out_text


def test_json_schema_fields(capsys):
    code, out, _ = run(
        capsys, "check", problem("circles"), "--checks", "cones,primal", "--json"
    )
    assert code == 0
    report = json.loads(out)
    assert set(report) >= {"point", "directions"}
    dr = report["directions"][0]
    assert set(dr) >= {"d", "cones", "cq", "checks"}
    for chk in dr["checks"]:
        assert set(chk) >= {"id", "verdict", "certificate"}
    # rationals appear as exact p/q strings
    assert report["point"] == ["0"]


def test_oracle_validate_flag(capsys):
    code, out, _ = run(
        capsys, "check", problem("circles"),
        "--checks", "classify", "--oracle-validate",
    )
    assert code == 0
    assert "oracle: agrees" in out
