import csv
import io
import json
import math
import os
import subprocess
import sys

import pytest

from cesaro import arith
from cesaro.cli import emit_report, main
from cesaro.quad import QuadResult
from cesaro.verify import ConvergenceReport, ConvergenceRow

ARCTAN_LIMIT = 3 * math.log(2) / (4 * math.pi)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_wsum_json(capsys):
    code, out, _ = run(
        capsys, "wsum", "--weight", "phi", "--alpha", "2", "--f", "arctan(x)/(x*(1+x))",
        "--n", "1048576", "--format", "json",
    )
    doc = json.loads(out)
    assert code == 0
    assert list(doc) == ["n", "value", "target", "abs_error"]
    assert doc["n"] == 1048576
    assert abs(doc["target"] - ARCTAN_LIMIT) < 1e-12
    assert doc["abs_error"] == abs(doc["value"] - doc["target"]) < 2e-3


def test_verify_eq3(capsys):
    code, out, _ = run(capsys, "verify", "--entry", "eq3", "--ladder", "2^12..2^20", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "pass"
    assert [r["n"] for r in doc["rows"]] == [2**e for e in range(12, 21)]
    assert abs(doc["target"] - 3 / math.pi**2) < 1e-16


def test_verify_failure_exits_1(capsys):
    code, out, _ = run(capsys, "verify", "--entry", "eq1", "--ladder", "10", "--tol", "1e-9")
    assert code == 1 and "verdict: fail" in out


def test_verify_several_entries_json(capsys):
    code, out, _ = run(
        capsys, "verify", "--entry", "eq3", "--entry", "sigma_mean", "--ladder", "2^10..2^14", "--format", "json"
    )
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    assert [r["entry_id"] for r in doc["reports"]] == ["eq3", "sigma_mean"]


def test_integrate(capsys):
    code, out, _ = run(capsys, "integrate", "--f", "arctan(x)/(1+x)", "--tol", "1e-12", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert abs(doc["value"] - 0.2721982613) < 1e-10
    assert set(doc) == {"value", "error_estimate", "evaluations"}


def test_integrate_limit_functional(capsys):
    code, out, _ = run(
        capsys, "integrate", "--f", "arctan(x)/(x*(1+x))", "--alpha", "2", "--L", "3/pi^2", "--format", "json"
    )
    assert code == 0 and abs(json.loads(out)["value"] - ARCTAN_LIMIT) < 1e-12


def test_riemann_and_moment(capsys):
    code, out, _ = run(capsys, "riemann", "--f", "x", "--n", "4", "--format", "json")
    assert code == 0 and json.loads(out)["value"] == 0.625
    code, out, _ = run(capsys, "moment", "--weight", "phi", "--p", "1", "--n", "100000", "--format", "json")
    rows = json.loads(out)["rows"]
    assert code == 0 and len(rows) == 1 and rows[0]["p"] == 1
    assert abs(rows[0]["target"] - 2 / math.pi**2) < 1e-16


def test_moment_ladder_csv(capsys):
    code, out, _ = run(capsys, "moment", "--p-max", "3", "--n", "1000", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["p", "value", "target", "abs_error"]
    assert [r[0] for r in rows[1:]] == ["0", "1", "2", "3"]


def test_synthetic_weight(capsys):
    code, out, _ = run(
        capsys, "wsum", "--weight", "synthetic", "--weight-expr", "k^(s-1)", "--param", "s=1.5",
        "--alpha", "s", "--L", "1/s", "--f", "1/(1+x)", "--n", "100000", "--format", "json",
    )
    doc = json.loads(out)
    assert code == 0 and abs(doc["target"] - (2 - math.pi / 2)) < 1e-12 and doc["abs_error"] < 1e-4


def test_asymptotic(capsys):
    code, out, _ = run(capsys, "asymptotic", "--alpha", "1", "--ladder", "10^3..10^5", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["n", "lhs", "rhs", "residual"] and len(rows) == 4


def test_sieve_summary_and_values(capsys):
    code, out, _ = run(capsys, "sieve", "--func", "sigma", "--n", "10", "--format", "json")
    assert code == 0 and json.loads(out)["summatory"] == 87
    code, out, _ = run(capsys, "sieve", "--func", "phi", "--n", "10", "--values", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["k", "value"] and rows[10] == ["10", "4"]


def test_sieve_cache_dir_from_environment(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("CESARO_CACHE_DIR", str(tmp_path))
    code, _, _ = run(capsys, "sieve", "--func", "phi", "--n", "1000")
    assert code == 0 and (tmp_path / "phi_1000.crsieve").exists()
    assert arith.load_table(tmp_path / "phi_1000.crsieve") == arith.sieve("phi", 1000)


@pytest.mark.parametrize(
    "argv, module",
    [(["wsum", "--f", "(x", "--n", "10"], "expr"),
     (["verify", "--entry", "nope"], "verify"),
     (["verify", "--entry", "eq3", "--ladder", ""], "verify"),
     (["verify", "--entry", "eq3", "--ladder", "100,10"], "verify"),
     (["wsum", "--weight", "mu", "--f", "x", "--n", "10"], "sums"),
     (["integrate", "--f", "x", "--lo", "1", "--hi", "0"], "quad")],
)
def test_input_errors_exit_2(capsys, argv, module):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == ""
    assert err.startswith(f"cesaro {module}: ") and err.count("\n") == 1


def test_evaluation_error_exit_3(capsys):
    code, out, err = run(capsys, "riemann", "--f", "1/(x-0.5)", "--n", "4")
    assert code == 3 and out == "" and err.startswith("cesaro expr: division by zero")


def test_accuracy_error_exit_3(capsys):
    code, _, err = run(capsys, "integrate", "--f", "1/x")
    assert code == 3 and err.startswith("cesaro quad: ")


@pytest.mark.parametrize("argv", [["verify", "--bogus"], ["frobnicate"], ["wsum", "--n", "0", "--f", "x"], []])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    _, err = capsys.readouterr()
    assert info.value.code == 2 and "usage:" in err


def _report(rows):
    return ConvergenceReport("demo", [ConvergenceRow(*r) for r in rows], 0.25, 0.3, 1e-3, False)


def test_emit_single_row_csv():
    lines = emit_report(_report([(10, 0.32, 0.016)]), "csv").splitlines()
    assert lines == ["n,value,abs_error", "10,0.32,0.016"]


def test_emit_json_round_trip():
    report = _report([(10, 0.32, 0.016), (100, 0.3043, 0.0003)])
    doc = json.loads(emit_report(report, "json"))
    assert doc["entry_id"] == "demo" and doc["verdict"] == "fail"
    assert doc["extrapolated_limit"] == 0.25 and doc["target"] == 0.3 and doc["tolerance"] == 1e-3
    assert [(r["n"], r["value"], r["abs_error"]) for r in doc["rows"]] == [(10, 0.32, 0.016), (100, 0.3043, 0.0003)]
    q = QuadResult(0.1 + 0.2, 1e-17, 45)
    assert json.loads(emit_report(q, "json")) == {"value": 0.1 + 0.2, "error_estimate": 1e-17, "evaluations": 45}


def test_emit_text_is_aligned():
    text = emit_report(_report([(10, 0.32, 0.016), (100000, 0.3043, 0.0003)]), "text")
    table = [line for line in text.splitlines() if not ":" in line]
    assert len({len(line) for line in table}) == 1


def test_emit_empty_report_is_rejected():
    from cesaro.errors import InvalidArgument

    with pytest.raises(InvalidArgument):
        emit_report([], "json")


def _cli(*argv):
    return subprocess.run(
        [sys.executable, "-m", "cesaro", *argv], capture_output=True, text=True, env=dict(os.environ)
    )


def test_stdout_is_deterministic():
    argv = ["verify", "--entry", "eq1", "--entry", "sigma_family_a1", "--ladder", "2^10..2^16", "--format", "json"]
    first, second = _cli(*argv), _cli(*argv)
    assert first.returncode == second.returncode == 0
    assert first.stdout == second.stdout and first.stdout
