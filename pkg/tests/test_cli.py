import csv
import json
import subprocess
import sys

import pytest

from quickster.cli import main


def _run(tmp_path, *args):
    return main(["run", "--out", str(tmp_path), *args])


def test_run_writes_outputs(tmp_path):
    assert _run(tmp_path, "--steps", "4", "--speed", "0.5") == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["status"] == "ok" and manifest["steps_completed"] == 4
    assert len(manifest["config_hash"]) == 64
    with open(tmp_path / "strides.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["step"] for r in rows] == ["0", "1", "2", "3"]
    with open(tmp_path / "trajectory.csv") as fh:
        header = next(csv.reader(fh))
    assert header[:3] == ["step", "stance_side", "t"]
    # The saved config reproduces the run.
    assert _run(tmp_path / "again", "--config", str(tmp_path / "config.yaml")) == 0
    assert (tmp_path / "again" / "trajectory.csv").read_bytes() == \
        (tmp_path / "trajectory.csv").read_bytes()


def test_config_error_exit_code(tmp_path, capsys):
    assert _run(tmp_path, "--lambda", "1.5") == 2
    assert "lambda" in capsys.readouterr().err
    bad = tmp_path / "bad.yaml"
    bad.write_text("gait.T: abc\n")
    assert _run(tmp_path, "--config", str(bad)) == 2


def test_io_error_exit_code(tmp_path):
    assert _run(tmp_path, "--config", str(tmp_path / "missing.yaml")) == 4
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["run", "--steps", "2", "--out", str(blocker / "sub")]) == 4


def test_fall_exit_code(tmp_path, capsys):
    cfg = tmp_path / "push.yaml"
    cfg.write_text("sim.n_steps: 5\nscenario.pushes: [[1.0, 0.0, 500.0]]\n")
    assert _run(tmp_path, "--config", str(cfg)) == 3
    assert "fall at step 2" in capsys.readouterr().err
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["status"] == "fall" and manifest["fall"]["step_index"] == 2


def test_sweep_marks_failures(tmp_path):
    cfg = tmp_path / "drop.yaml"
    cfg.write_text("sim.n_steps: 6\nscenario.terrain_drops: [[2, 0.5]]\nanalysis.warmup_steps: 2\n")
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path), "--speeds", "0.5"]) == 0
    with open(tmp_path / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert rows[0]["status"] == "fall"
    assert main(["sweep", "--out", str(tmp_path), "--speeds"]) == 2


def test_rolling_flag(tmp_path):
    assert _run(tmp_path, "--steps", "2", "--rolling", "on") == 0
    assert "rolling.enabled: true" in (tmp_path / "config.yaml").read_text()
    with pytest.raises(SystemExit):
        _run(tmp_path, "--rolling", "maybe")


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "quickster", "--version"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip()
