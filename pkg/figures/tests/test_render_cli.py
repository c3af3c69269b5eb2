"""CLI wiring and end-to-end rendering from real simulation output."""

import hashlib
import shutil
import subprocess
import sys

import pytest

from quenchfigs.cli import main


def sha256(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def test_mel_overlay_command(wavy_csv, tmp_path):
    out = tmp_path / "panel.png"
    code = main(
        [
            "mel-overlay",
            str(wavy_csv),
            "--axis", "z",
            "--offset", "1.5",
            "--labels", "run",
            "--out", str(out),
        ]
    )
    assert code == 0
    assert out.exists()


def test_finite_size_command(finite_size_csv, tmp_path):
    out = tmp_path / "fs.png"
    assert main(["finite-size", str(finite_size_csv), "--out", str(out)]) == 0
    assert out.exists()


def test_missing_column_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("t\n0.0\n")
    code = main(["mel-overlay", str(bad), "--out", str(tmp_path / "x.png")])
    assert code == 2
    assert "S_vN_A" in capsys.readouterr().err


def test_missing_file_exits_2(tmp_path):
    code = main(["mel-overlay", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "x.png")])
    assert code == 2


@pytest.mark.skipif(shutil.which("spinancilla") is None, reason="simulation CLI not installed")
def test_end_to_end_from_simulation_output(tmp_path):
    """Drive the simulation CLI, then render panels from its files only."""
    out_dir = tmp_path / "sim"
    run = subprocess.run(
        [
            "spinancilla", "quench",
            "--L", "4", "--q", "6", "--J", "-1",
            "--h", "1.0", "--lambda2-over-omega", "0.63",
            "--t-end", "5", "--dt", "0.5",
            "--avg-from", "0", "--avg-to", "5",
            "--out", str(out_dir),
        ],
        capture_output=True,
        text=True,
    )
    assert run.returncode == 0, run.stderr
    csvs = sorted(out_dir.glob("point_*.csv"))
    assert len(csvs) == 1
    first = tmp_path / "a.png"
    second = tmp_path / "b.png"
    for out in (first, second):
        code = main(["mel-overlay", str(csvs[0]), "--axis", "z", "--out", str(out)])
        assert code == 0
    assert sha256(first) == sha256(second)
    grid = tmp_path / "grid.png"
    assert main(["realtime-metrics", str(csvs[0]), "--out", str(grid)]) == 0
