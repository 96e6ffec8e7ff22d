import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from gdquant.cli import main, parse_range, parse_schedule
from gdquant.core import system_to_config
from gdquant.fixtures import example1_system, example2_system, homogeneous_system

LOG2_LOG3 = math.log(2) / math.log(3)


@pytest.fixture(scope="module")
def configs(tmp_path_factory):
    root = tmp_path_factory.mktemp("configs")
    out = {}
    for name, s in [("homog", homogeneous_system()), ("ex1", example1_system(0)),
                    ("ex2", example2_system())]:
        path = root / f"{name}.json"
        path.write_text(json.dumps(system_to_config(s)))
        out[name] = str(path)
    bad = root / "bad.json"
    bad.write_text("{not json")
    out["bad"] = str(bad)
    invalid = root / "invalid.json"
    invalid.write_text(json.dumps({"order_r": 1, "transition": [[1, 0], [0.5, 0.5]],
                                   "ratios": [[0.3, 0], [0.3, 0.3]], "initial": [0.5, 0.5]}))
    out["invalid"] = str(invalid)
    return out


def run(*args):
    return main([str(a) for a in args])


def load(path):
    with open(path) as fh:
        return json.load(fh)


def test_parsers():
    assert list(parse_range("2:4")) == [2, 3, 4]
    assert parse_schedule("geometric:2:4") == [4, 8, 16]
    for bad in ("4:2", "x"):
        with pytest.raises(Exception):
            parse_range(bad)
    with pytest.raises(Exception):
        parse_schedule("linear:1:2")


def test_analyze_example2(configs, tmp_path):
    assert run("analyze", "--config", configs["ex2"], "--out", tmp_path) == 0
    doc = load(tmp_path / "analyze.json")
    assert doc["schema_version"] == 1
    assert doc["report"]["s_r"] == pytest.approx(1 / 3, abs=1e-9)
    assert doc["report"]["classification"] == "LowerCoefficientInfinite"
    assert doc["comparability"]["pairs"][0]["relation"] != "incomparable"


def test_analyze_example1_with_growth(configs, tmp_path):
    assert run("analyze", "--config", configs["ex1"], "--out", tmp_path, "--k-range", "2:6") == 0
    doc = load(tmp_path / "analyze.json")
    assert doc["report"]["classification"] == "FiniteUpperAndPositiveLower"
    assert doc["growth"]["k"] == [2, 3, 4, 5, 6]


@pytest.mark.parametrize("key, code", [("bad", 4), ("invalid", 2)])
def test_analyze_error_codes(configs, tmp_path, key, code, capsys):
    assert run("analyze", "--config", configs[key], "--out", tmp_path) == code
    assert "error" in capsys.readouterr().err


def test_missing_config_is_io_error(tmp_path):
    assert run("analyze", "--config", tmp_path / "nope.json", "--out", tmp_path) == 4


def test_antichain_homogeneous(configs, tmp_path):
    assert run("antichain", "--config", configs["homog"], "--out", tmp_path, "--j", 1) == 0
    with open(tmp_path / "lambda_1.csv") as fh:
        rows = list(csv.reader(fh, delimiter=";"))
    assert len(rows) == 9
    assert load(tmp_path / "antichain_1.json")["normalized_sum"] == pytest.approx(2.0)


def test_antichain_example2_window(configs, tmp_path):
    assert run("antichain", "--config", configs["ex2"], "--out", tmp_path, "--j", 3) == 0
    with open(tmp_path / "lambda_3.csv") as fh:
        rows = list(csv.DictReader(fh, delimiter=";"))
    eta = 1 / 32
    for row in rows:
        w = float(row["p_sigma"]) * float(row["c_sigma"])
        assert eta ** 4 < w <= eta ** 3


def test_antichain_usage_and_cap(configs, tmp_path):
    with pytest.raises(SystemExit) as info:
        run("antichain", "--config", configs["homog"], "--out", tmp_path, "--j", 0)
    assert info.value.code == 2
    assert run("antichain", "--config", configs["homog"], "--out", tmp_path, "--j", 6,
               "--cap", 100) == 5


def test_geometry_and_sample(configs, tmp_path):
    assert run("geometry", "--config", configs["ex2"], "--out", tmp_path, "--j", 2) == 0
    assert load(tmp_path / "geometry.json")["t_max"] == pytest.approx(0.75)
    assert run("geometry", "--config", configs["ex2"], "--out", tmp_path, "--t", 0.9) == 2
    assert run("sample", "--config", configs["ex2"], "--out", tmp_path, "--count", 200) == 0
    assert (tmp_path / "samples.csv").read_text().count("\n") == 201


def test_quantize_homogeneous_pipeline(configs, tmp_path):
    assert run("quantize", "--config", configs["homog"], "--out", tmp_path,
               "--n-schedule", "geometric:2:9") == 0
    fit = load(tmp_path / "quantize.json")["fit"]
    assert fit["agree_within"] <= 0.15
    assert fit["s_r_theory"] == pytest.approx(LOG2_LOG3)


def test_quantize_is_byte_identical(configs, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run("quantize", "--config", configs["ex2"], "--out", out,
                   "--n-schedule", "geometric:2:6", "--seed", 7) == 0
    assert (a / "quantize.csv").read_bytes() == (b / "quantize.csv").read_bytes()
    assert (a / "quantize.json").read_bytes() == (b / "quantize.json").read_bytes()


def test_quantize_error_codes(configs, tmp_path):
    assert run("quantize", "--config", configs["homog"], "--out", tmp_path,
               "--n-schedule", "geometric:4:5", "--max-level", 1) == 7
    assert run("quantize", "--config", configs["homog"], "--out", tmp_path,
               "--n-schedule", "geometric:2:3", "--atoms-per-code", 1) == 6


def test_report_merges_artifacts(configs, tmp_path):
    run("analyze", "--config", configs["ex2"], "--out", tmp_path)
    run("antichain", "--config", configs["ex2"], "--out", tmp_path, "--j", 1)
    assert run("report", "--out", tmp_path) == 0
    doc = load(tmp_path / "report.json")
    assert doc["schema_version"] == 1
    assert set(doc["artifacts"]) == {"analyze.json", "antichain_1.json"}
    # a second run does not swallow its own output
    assert run("report", "--out", tmp_path) == 0
    assert "report.json" not in load(tmp_path / "report.json")["artifacts"]


def test_module_entry_point(configs, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "gdquant", "analyze", "--config", configs["ex2"],
                           "--out", str(tmp_path)], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "LowerCoefficientInfinite" in proc.stdout
    assert Path(tmp_path / "analyze.json").exists()
