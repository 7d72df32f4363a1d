import json
import subprocess
import sys

import numpy as np
import pytest

from lssmargin.classifier import example1_family
from lssmargin.cli import EXIT_BUDGET, EXIT_HYPOTHESES, EXIT_INVALID, EXIT_OK, run
from lssmargin.errors import InvalidInput
from lssmargin.familyio import dump_family, load_family, parse_family, save_family
from lssmargin.growth import MatrixFamily, exact_mk


@pytest.fixture
def ex1_file(tmp_path):
    path = tmp_path / "ex1.json"
    save_family(path, example1_family(2.0, 0.1), d1=1)
    return path


def run_json(capsys, argv):
    code = run(argv + ["--format", "json"])
    assert code == EXIT_OK
    return json.loads(capsys.readouterr().out)


def test_roundtrip_exact(tmp_path, rng):
    fam = MatrixFamily([rng.standard_normal((3, 3)) for _ in range(3)], ["x", "y", "z"])
    save_family(tmp_path / "f.json", fam)
    back = load_family(tmp_path / "f.json").family
    assert back.labels == fam.labels
    for a, b in zip(fam, back):
        assert np.array_equal(a, b)


def test_blocks_and_alpha_files():
    ff = parse_family({"alpha": "pi*sqrt2", "blocks": {"d1": 1}})
    assert ff.family.dim == 3 and ff.blocks.d2 == 2
    with pytest.raises(InvalidInput):
        parse_family({"dim": 2, "matrices": [[[1, 0], [1, 1]]], "blocks": {"d1": 1, "d2": 1}})
    with pytest.raises(InvalidInput):
        parse_family({"dim": 2, "matrices": [[[1, 0], [0, 1]]]}).blocks


@pytest.mark.parametrize("data", [
    {"dim": 2, "matrices": [[[1, 0], [0]]]},
    {"dim": 2, "matrices": [[[1, 0]]]},
    {"dim": 2, "matrices": [[[1, "a"], [0, 1]]]},
    {"dim": 0, "matrices": []},
    {"matrices": [[[1]]]},
    {"dim": 1},
    [1, 2],
])
def test_bad_family_files(data):
    with pytest.raises(InvalidInput):
        parse_family(data)


def test_nonfinite_not_serialised():
    with pytest.raises(InvalidInput):
        dump_family(MatrixFamily([[[float("nan")]]]))


def test_mk_csv(ex1_file, capsys):
    assert run(["mk", "--family", str(ex1_file), "--kmax", "10", "--format", "csv"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0] == "k,mk,witness" and len(lines) == 11
    fam = load_family(ex1_file).family
    k, mk, _ = lines[4].split(",")
    assert float(mk) == pytest.approx(exact_mk(fam, int(k))[0], rel=1e-15)


def test_mk_threads_and_out(ex1_file, tmp_path, capsys):
    out = tmp_path / "mk.csv"
    assert run(["mk", "--family", str(ex1_file), "--kmax", "6", "--threads", "2",
                "--format", "csv", "--out", str(out)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    assert out.read_text().startswith("k,mk,witness\n")


def test_mk_budget_exit(ex1_file):
    assert run(["mk", "--family", str(ex1_file), "--kmax", "40", "--budget", "1000"]) == EXIT_BUDGET


def test_jsr(ex1_file, capsys):
    obj = run_json(capsys, ["jsr", "--family", str(ex1_file), "--kmax", "10"])
    assert obj["lower"] == pytest.approx(1.0) and obj["upper"] >= 1.0
    assert obj["witness_lower"] == "1"


def test_dominance(ex1_file, capsys):
    obj = run_json(capsys, ["dominance", "--family", str(ex1_file), "--horizon", "8"])
    assert obj["pi"] == "1" and obj["violations"] == []
    assert run(["dominance", "--family", str(ex1_file), "--pi", "1", "--horizon", "8"]) == EXIT_OK
    assert "1" in capsys.readouterr().out


def test_classify(ex1_file, capsys):
    obj = run_json(capsys, ["classify", "--family", str(ex1_file)])
    assert obj["verdict"] == "MarginallyStable"


def test_classify_needs_blocks(tmp_path):
    path = tmp_path / "noblocks.json"
    save_family(path, example1_family())
    assert run(["classify", "--family", str(path)]) == EXIT_INVALID
    assert run(["classify", "--family", str(path), "--d1", "1"]) == EXIT_OK


def test_classify_hypotheses_exit(tmp_path):
    path = tmp_path / "bad.json"
    save_family(path, MatrixFamily([[[1.0, 0.0], [0.0, 0.5]], [[-1.0, 0.0], [0.0, 0.1]]]), d1=1)
    assert run(["classify", "--family", str(path)]) == EXIT_HYPOTHESES


def test_partition(capsys):
    obj = run_json(capsys, ["partition", "--word", "0101011101010100", "--pi", "01", "--M", "0"])
    assert "".join(s["word"] for s in obj["segments"]) == "0101011101010100"
    assert run(["partition", "--random-length", "500", "--seed", "3", "--format", "csv"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("index,color,length,word\n")
    assert run(["partition"]) == EXIT_INVALID


def test_cubic(capsys):
    obj = run_json(capsys, ["cubic", "--alpha", "pi*sqrt2", "--count", "4"])
    assert obj["good_n"] == [3, 17, 99, 577]
    assert 0.28 <= obj["slope"] <= 0.40
    obj = run_json(capsys, ["cubic", "--count", "2", "--prefixes", "2"])
    assert len(obj["prefixes"]) == 2
    assert run(["cubic", "--alpha", "pi*e"]) == EXIT_INVALID


def test_ct(capsys):
    code = run(["ct", "--law", "1:0,0.5:1", "--x0", "0,0,1,0", "--dt", "0.25", "--format", "csv"])
    assert code == EXIT_OK
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0] == "t,x1,x2,x3,x4,f"
    assert float(lines[-1].split(",")[0]) == pytest.approx(1.5)
    assert run(["ct", "--law", "1:x", "--x0", "0,0,1,0"]) == EXIT_INVALID
    assert run(["ct", "--law", "1:0", "--x0", "0,1"]) == EXIT_INVALID


def test_example1(capsys):
    obj = run_json(capsys, ["example1", "--a", "2", "--s", "0.1"])
    assert obj["barabanov"]["ok"]
    assert obj["classification"]["verdict"] == "MarginallyStable"
    assert obj["mk_max_over_min"] <= 3


def test_example2(capsys):
    obj = run_json(capsys, ["example2", "--trials", "5", "--t-max", "40"])
    assert obj["total_f_violations"] == 0
    assert obj["max_sup_norm_ratio"] <= 10


def test_csv_unsupported(ex1_file):
    assert run(["classify", "--family", str(ex1_file), "--format", "csv"]) == EXIT_INVALID


def test_usage_errors(capsys):
    assert run(["nosuch"]) == EXIT_INVALID
    assert run([]) == EXIT_INVALID
    assert run(["mk", "--family", "/nonexistent.json", "--kmax", "3"]) == EXIT_INVALID


def test_console_entry(ex1_file):
    proc = subprocess.run([sys.executable, "-m", "lssmargin.cli", "jsr", "--family", str(ex1_file),
                           "--kmax", "4"], capture_output=True, text=True)
    assert proc.returncode == 0 and "JSR in" in proc.stdout
