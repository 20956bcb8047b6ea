import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from transmission.cli import CSV_COLUMNS, main, read_config_file, render_svg
from transmission.experiments import ConfigError, ExperimentConfig, random_bumps


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_bad_arguments_exit_two(tmp_path):
    assert main(["--experiment", "nope"]) == 2
    assert main([]) == 2
    assert main(["--experiment", "solve", "--gallery", "unknown-map", "--out", str(tmp_path)]) == 2
    assert main(["--experiment", "solve", "--count", "15", "--out", str(tmp_path)]) == 2
    assert main(["--experiment", "solve", "--mu", "0", "--out", str(tmp_path)]) == 2
    assert main(["--config", str(tmp_path / "missing.cfg")]) == 2


def test_config_file_parsing(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nexperiment = thresholds\ngallery=staircase\n\nsvg = yes\n")
    assert read_config_file(cfg) == {"experiment": "thresholds", "gallery": "staircase", "svg": True}
    (tmp_path / "bad.cfg").write_text("colour = red\n")
    with pytest.raises(ConfigError):
        read_config_file(tmp_path / "bad.cfg")
    (tmp_path / "bad2.cfg").write_text("just words\n")
    with pytest.raises(ConfigError):
        read_config_file(tmp_path / "bad2.cfg")


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"experiment=thresholds\ngallery=staircase\nout={tmp_path / 'a'}\n")
    assert main(["--config", str(cfg), "--gallery", "hyperbola-inverse", "--out", str(tmp_path / "b")]) == 0
    s = json.loads((tmp_path / "b" / "summary.json").read_text())
    assert s["config"]["gallery"] == "hyperbola-inverse"
    assert not (tmp_path / "a").exists()


def test_thresholds_hyperbola_inverse(tmp_path):
    assert main(["--experiment", "thresholds", "--gallery", "hyperbola-inverse", "--out", str(tmp_path)]) == 0
    s = json.loads((tmp_path / "summary.json").read_text())
    assert abs(s["mu0"] - 0.165953) <= 1e-5
    assert abs(s["inv_mu0"] - 6.02579) <= 1e-4
    assert s["passed"] is True
    for key in ("version", "config", "thresholds", "constants", "results"):
        assert key in s


def test_thresholds_staircase(tmp_path):
    assert main(["--experiment", "thresholds", "--gallery", "staircase", "--out", str(tmp_path)]) == 0
    s = json.loads((tmp_path / "summary.json").read_text())
    assert abs(s["mu0"] - (np.sqrt(2) - 1)) <= 1e-6
    rows = _rows(tmp_path / "results.csv")
    assert tuple(rows[0].keys()) == CSV_COLUMNS
    assert all(r["pass"] in ("", "true") for r in rows)


def test_solve_identity_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["--experiment", "solve", "--gallery", "identity", "--count", "1024",
                     "--svg", "--out", str(out)]) == 0
    assert (a / "results.csv").read_bytes() == (b / "results.csv").read_bytes()
    rows = [r for r in _rows(a / "results.csv") if r["metric"] == "jump_residual"]
    assert float(rows[-1]["value"]) <= 1e-3
    svg = (a / "plot.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg


def test_json_only(tmp_path):
    assert main(["--experiment", "cvar", "--json-only", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "summary.json").exists()
    assert not (tmp_path / "results.csv").exists()


def test_failing_threshold_exits_one(tmp_path):
    # a coarse grid cannot meet the 1e-4 pair threshold
    assert main(["--experiment", "hilbert-pairs", "--count", "256", "--out", str(tmp_path)]) == 1
    s = json.loads((tmp_path / "summary.json").read_text())
    assert s["passed"] is False


def test_console_script(tmp_path):
    r = subprocess.run([sys.executable, "-m", "transmission.cli", "--experiment", "thresholds",
                        "--gallery", "cone", "--alpha", "0.5", "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    s = json.loads((tmp_path / "summary.json").read_text())
    assert s["config"]["alpha"] == 0.5


def test_render_svg_empty_and_config_validation():
    assert render_svg({}, "t").strip().endswith("</svg>")
    with pytest.raises(ConfigError):
        ExperimentConfig("solve", half_width=-1.0).validate()


def test_random_bumps_inside_cell():
    x = np.linspace(-10, 10, 20001)
    for f in random_bumps(-1.0, 2.0, 20, seed=3):
        v = f(x)
        assert np.all(v[(x < -1.0) | (x > 2.0)] == 0) and v.max() > 0
