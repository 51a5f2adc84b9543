import csv
import io
import json
import subprocess
import sys
from fractions import Fraction as F

import pytest

from qbfs.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, SUITES, main
from qbfs.dilation import dilation_norm_bound
from qbfs.stepfunction import StepFunction

from conftest import interval


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_axioms_example(capsys):
    code, out, _ = run(capsys, "verify", "axioms", "--norm", "lp:p=0.5", "--samples", "200", "--seed", "7")
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["passed"] and rep["data"]["empirical_C"] == pytest.approx(2.0, abs=1e-9)


def test_output_is_deterministic(capsys):
    argv = ("verify", "axioms", "--samples", "20", "--seed", "3")
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b
    _, c, _ = run(capsys, "verify", "axioms", "--samples", "20", "--seed", "4")
    assert c != a


@pytest.mark.parametrize(
    "argv",
    [
        ("verify", "axioms", "--norm", "bogus"),
        ("verify", "nonexistent"),
        ("dilation-sweep", "--a-grid", "1:2:0"),
        ("approximate", "--input", "/nonexistent.json"),
        ("run", "/nonexistent.cfg"),
    ],
)
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_USAGE


def test_help_exits_zero(capsys):
    assert run(capsys, "run", "--help")[0] == EXIT_OK


def test_malformed_function_file(capsys, tmp_path):
    p = tmp_path / "f.json"
    p.write_text("{not json")
    assert run(capsys, "approximate", "--input", str(p))[0] == EXIT_USAGE


def test_dilation_csv(capsys):
    code, out, _ = run(capsys, "dilation-sweep", "--norm", "lorentz:p=2,q=0.5", "--n", "1", "--a-grid", "0.1:1.0:0.1", "--samples", "20")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 10
    assert list(rows[0]) == ["a", "empirical_ratio", "tbd_bound"]
    for row in rows:
        assert float(row["empirical_ratio"]) <= float(row["tbd_bound"])
        assert float(row["tbd_bound"]) == pytest.approx(dilation_norm_bound(1, 2, F(row["a"])), rel=1e-12)


def test_run_config(capsys, tmp_path):
    cfg = tmp_path / "axioms.cfg"
    cfg.write_text("# lp quasinorm\nsuite = axioms\nnorm = lp:p=0.25\nseed = 11\nsamples = 15\n")
    out = tmp_path / "report.json"
    assert run(capsys, "run", str(cfg), "--out", str(out))[0] == EXIT_OK
    rep = json.loads(out.read_text())
    assert rep["meta"] == {"norm": "lp:p=0.25", "seed": 11, "samples": 15}
    bad = tmp_path / "bad.cfg"
    bad.write_text("suite axioms\n")
    assert run(capsys, "run", str(bad))[0] == EXIT_USAGE


def test_config_flag(capsys, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("samples=12\nseed=5\n")
    code, out, _ = run(capsys, "verify", "axioms", "--config", str(cfg))
    assert code == EXIT_OK and json.loads(out)["meta"]["samples"] == 12


def test_approximate_files(capsys, tmp_path):
    f = StepFunction.from_intervals([(0, F(1, 3), F(3, 2)), (F(1, 3), 1, -1)])
    src = tmp_path / "f.json"
    src.write_text(f.to_json())
    dst, trace = tmp_path / "s.json", tmp_path / "trace.json"
    code, out, _ = run(capsys, "approximate", "--norm", "lp:p=0.5", "--eps", "1/256", "--input", str(src), "--out-function", str(dst), "--trace", str(trace))
    assert code == EXIT_OK
    s = StepFunction.from_json(dst.read_text())
    (t,) = json.loads(trace.read_text())
    assert set(t["terms"]) == {"K", "level_tail", "space_tail", "E_minus_K", "s_off_K"}
    from qbfs.quasinorm import lp

    assert lp(0.5)(f - s) == pytest.approx(t["measured"], rel=1e-12)
    assert t["measured"] <= 64 / 256


def test_csv_report(capsys):
    code, out, _ = run(capsys, "verify", "resonance", "--format", "csv")
    assert code == EXIT_OK and out.startswith("name,status,margin\n")


def test_failing_suite_exit_code(capsys):
    # ratio 1/2 with C = 2 leaves a divergent weighted tail
    code, out, _ = run(capsys, "riesz-fischer", "--generator", "geometric:ratio=1/2", "--prefix", "4")
    assert code == EXIT_FAIL and not json.loads(out)["passed"]


@pytest.mark.parametrize("suite", ["rearrangement", "lacunary", "associate", "cover", "absolute-continuity", "riesz-fischer", "resonance"])
def test_each_suite_passes(capsys, suite):
    argv = ["verify", suite]
    if suite not in ("absolute-continuity", "resonance"):
        argv += ["--samples", "8"]
    assert run(capsys, *argv)[0] == EXIT_OK


def test_every_suite_is_covered():
    assert set(SUITES) == {
        "axioms", "rearrangement", "lacunary", "associate", "dilation-sweep", "cover",
        "approximate", "absolute-continuity", "riesz-fischer", "resonance",
    }


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "qbfs.cli", "verify", "resonance", "--prefix", "4"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["passed"]
