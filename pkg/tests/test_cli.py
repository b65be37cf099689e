import csv
import json
import os
import subprocess
import sys

import pytest

from hermrand.cli import MANIFEST_NAME, SPECTRAL_COLUMNS, main
from hermrand.lab.report import CSV_COLUMNS


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data) if not isinstance(data, str) else data, encoding="utf-8")
    return str(path)


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.reader(fh))


def test_spectral_level_profile(tmp_path):
    out = tmp_path / "o"
    assert main(["spectral", "--dim", "2", "--level", "8", "--grid-res", "200", "--out", str(out)]) == 0
    rows = read_csv(out / "spectral.csv")
    assert tuple(rows[0]) == SPECTRAL_COLUMNS
    ex = [r for r in rows[1:] if r[0] == "e_x"]
    assert len(ex) == 200
    summary = json.loads((out / "spectral.json").read_text())
    assert summary["rotation_residual"] < 1e-8
    inc = [r for r in rows[1:] if r[0] == "increment_norm" and float(r[1]) == 1.0]
    assert float(inc[0][2]) == pytest.approx(9.0, rel=1e-8)


def test_spectral_window_flags(tmp_path):
    out = tmp_path / "o"
    args = ["spectral", "--dim", "2", "--h", str(1 / 3), "--a", str(2 + 2 / 3), "--b", str(2 + 4 / 3), "--out", str(out)]
    assert main(args) == 0
    assert json.loads((out / "spectral.json").read_text())["window"]["N"] == 4


def test_spectral_mehler(tmp_path, capsys):
    assert main(["spectral", "--dim", "1", "--mehler", "--t", "0.5", "--out", str(tmp_path)]) == 0
    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert summary["mehler_max_residual"] < 1e-8


def test_spectral_usage_errors(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["spectral", "--level", "3", "--out", str(tmp_path)])
    assert info.value.code == 2
    assert main(["spectral", "--dim", "2", "--out", str(tmp_path / "x")]) == 2
    with pytest.raises(SystemExit) as info:
        main(["spectral", "--dim", "2", "--level", "3", "--seed", "-1"])
    assert info.value.code == 2


def test_tail_experiment_outputs(tmp_path):
    out = tmp_path / "o"
    cfg = write_config(tmp_path, {"experiment": "tail", "d": 2, "levels": [10], "M": 20000, "seed": 3})
    assert main(["experiment", "tail", "--config", cfg, "--out", str(out)]) == 0
    report = json.loads((out / "tail.json").read_text())
    assert report["extra"]["N"] == 11 and report["extra"]["ks_distance"] < 1.36 / 20000**0.5
    rows = read_csv(out / "tail.csv")
    assert tuple(rows[0]) == CSV_COLUMNS
    manifest = json.loads((out / MANIFEST_NAME).read_text())
    entry = manifest["entries"][0]
    assert entry["seed"] == 3 and entry["config_hash"] == report["config_hash"]
    assert all(r[6:] == ["3", report["config_hash"], report["version"]] for r in rows[1:])


def test_linfty_experiment_csv(tmp_path):
    out = tmp_path / "o"
    cfg = write_config(tmp_path, {"experiment": "linfty", "d": 2, "levels": [4, 8, 12, 16], "theta": 2.0, "M": 40})
    code = main(["experiment", "linfty", "--config", cfg, "--out", str(out), "--seed", "7"])
    assert code in (0, 1)
    rows = read_csv(out / "linfty.csv")
    medians = [r for r in rows[1:] if r[0] == "median"]
    assert [float(r[1]) for r in medians] == [4.0, 8.0, 12.0, 16.0]
    report = json.loads((out / "linfty.json").read_text())
    assert "C" in report["constants"] and report["seed"] == 7
    assert code == (0 if all(report["checks"].values()) else 1)


def test_malformed_config_exit_2_without_outputs(tmp_path):
    out = tmp_path / "o"
    cfg = write_config(tmp_path, "{not json")
    assert main(["experiment", "tail", "--config", cfg, "--out", str(out)]) == 2
    assert not out.exists()
    bad = write_config(tmp_path, {"experiment": "tail", "M": 10}, "bad.json")
    assert main(["experiment", "tail", "--config", bad, "--out", str(out)]) == 2
    wrong = write_config(tmp_path, {"experiment": "median"}, "wrong.json")
    assert main(["experiment", "tail", "--config", wrong, "--out", str(out)]) == 2
    assert not out.exists()


def test_insufficient_samples_exit_3_keeps_partial(tmp_path):
    out = tmp_path / "o"
    cfg = write_config(tmp_path, {"experiment": "tail", "M": 1000, "t_grid": [0.0, 0.9, 0.95, 0.99]})
    assert main(["experiment", "tail", "--config", cfg, "--out", str(out)]) == 3
    assert (out / "tail.csv").exists() and (out / MANIFEST_NAME).exists()


def test_concentration_family_writes_both_reports(tmp_path):
    out = tmp_path / "o"
    cfg = write_config(tmp_path, {"experiment": "concentration", "M": 5000, "params": {"gap_N_grid": [1, 4, 16, 64]}})
    assert main(["experiment", "concentration", "--config", cfg, "--out", str(out)]) == 0
    assert (out / "concentration.json").exists() and (out / "gap.json").exists()


def test_rerun_reproduces_numeric_fields(tmp_path):
    out = tmp_path / "o"
    cfg = write_config(tmp_path, {"experiment": "median", "levels": [4, 6], "M": 300, "seed": 9,
                                  "functional": {"kind": "norm", "r": 4}})
    assert main(["experiment", "median", "--config", cfg, "--out", str(out)]) == 0
    first_csv = (out / "median.csv").read_bytes()
    first = json.loads((out / "median.json").read_text())
    again = tmp_path / "again"
    assert main(["rerun", str(out / MANIFEST_NAME), "--out", str(again), "--jobs", "2"]) == 0
    assert (again / "median.csv").read_bytes() == first_csv
    second = json.loads((again / "median.json").read_text())
    first.pop("runtime")
    second.pop("runtime")
    assert first == second


def test_selftest_and_fault_injection(capsys):
    assert main(["selftest"]) == 0
    log1 = capsys.readouterr().out
    assert main(["selftest"]) == 0
    assert capsys.readouterr().out == log1
    assert main(["selftest", "--inject-fault", "quadrature"]) == 1
    out = capsys.readouterr().out
    assert "FAIL gram" in out and "failing checks: gram" in out


def test_module_entry_point(tmp_path):
    env = dict(os.environ, HERMRAND_CACHE=str(tmp_path / "cache"))
    proc = subprocess.run([sys.executable, "-m", "hermrand", "selftest"], capture_output=True, text=True, env=env)
    assert proc.returncode == 0, proc.stderr
    assert list((tmp_path / "cache").glob("gh_*.npz"))
    proc = subprocess.run([sys.executable, "-m", "hermrand", "spectral"], capture_output=True, text=True)
    assert proc.returncode == 2
