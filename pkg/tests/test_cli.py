"""CLI contract: dispatch, exit codes, determinism and cache transparency."""

import json

import pytest
from click.testing import CliRunner

from gwp1.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


def invoke(runner, tmp_path, *args):
    return runner.invoke(main, ["--cache-dir", str(tmp_path), *args],
                         catch_exceptions=False)


def test_invariant_value_one(runner, tmp_path):
    result = invoke(runner, tmp_path, "invariant", "--k", "1", "--i", "0", "--g", "0")
    assert result.exit_code == 0
    data = json.loads(result.output)
    assert data["value"] == "1" and data["d"] == 1


def test_invariant_validation_exit_code(runner, tmp_path):
    result = runner.invoke(main, ["--cache-dir", str(tmp_path), "invariant",
                                  "--k", "0", "--i", "1", "--g", "0"])
    assert result.exit_code == 2


def test_resolvent_both_routes(runner, tmp_path):
    result = invoke(runner, tmp_path, "resolvent", "--route", "both", "--order", "6")
    assert result.exit_code == 0
    assert json.loads(result.output)["ok"] is True


def test_resolvent_series_emission(runner, tmp_path):
    result = invoke(runner, tmp_path, "resolvent", "--route", "closed-form",
                    "--order", "4")
    data = json.loads(result.output)
    assert data["route"] == "closed-form"
    assert data["alpha"]["vars"] == ["z"]


def test_correlator_csv(runner, tmp_path):
    result = runner.invoke(main, ["--cache-dir", str(tmp_path), "--format", "csv",
                                  "correlator", "--k", "2", "--orders", "2,2"])
    assert result.exit_code == 0
    assert result.output.splitlines()[0] == "index,coeff"


def test_one_point_both_routes(runner, tmp_path):
    result = invoke(runner, tmp_path, "one-point", "--order", "6", "--route", "both")
    assert json.loads(result.output)["routes_agree"] is True


def test_eval_emits_value_and_diagnostics(runner, tmp_path):
    result = invoke(runner, tmp_path, "eval", "--op", "B", "--args", "0.3;1.1")
    data = json.loads(result.output)
    assert data["precision_bits"] == 128
    assert "re" in data["value"] and "det" in data["diagnostics"]


def test_regime_q0_table_match(runner, tmp_path):
    result = invoke(runner, tmp_path, "regime", "--name", "q0", "--k", "2",
                    "--dmax", "2")
    data = json.loads(result.output)
    assert data["pass"] is True and data["table_match"] == {"1": True, "2": True}


def test_determinism_and_cache_transparency(runner, tmp_path):
    args = ["invariant", "--k", "2", "--i", "1,1", "--g", "0"]
    first = invoke(runner, tmp_path, *args).output
    cached = invoke(runner, tmp_path, *args).output
    fresh = runner.invoke(main, ["--cache-dir", str(tmp_path), "--no-cache", *args]).output
    assert first == cached == fresh
    verify = runner.invoke(main, ["--cache-dir", str(tmp_path), "--verify-cache", *args])
    assert verify.exit_code == 0


def test_cache_files_created(runner, tmp_path):
    invoke(runner, tmp_path, "invariant", "--k", "1", "--i", "2", "--g", "1")
    entries = list(tmp_path.glob("*.json"))
    assert len(entries) == 1
    stored = json.loads(entries[0].read_text())
    assert "payload" in stored and "created_at" in stored


def test_precision_floor(runner, tmp_path):
    result = runner.invoke(main, ["--precision-bits", "40", "eval", "--op", "G",
                                  "--args", "0.3;1"])
    assert result.exit_code == 2
