import copy
import subprocess
import sys

import yaml

from learnsim.cli import main
from learnsim.scenarios import preset_tree


def write(tmp_path, tree, name="c.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(tree))
    return str(path)


def test_simulate_writes_csv(tmp_path, capsys):
    cfg = write(tmp_path, preset_tree("task4"))
    out = tmp_path / "runs"
    assert main(["simulate", cfg, "--dt", "0.01", "--out", str(out)]) == 0
    assert (out / "trajectory.csv").read_text().splitlines()[0] == "t,k,u,z1,z2,z,p_cum"
    assert (out / "plot.svg").exists()
    assert "work=28080.0" in capsys.readouterr().out


def test_simulate_csv_only(tmp_path):
    cfg = write(tmp_path, preset_tree("task4"))
    out = tmp_path / "runs"
    assert main(["simulate", cfg, "--format", "csv", "--out", str(out)]) == 0
    assert not (out / "plot.svg").exists()


def test_schema_error_exit_2(tmp_path, capsys):
    tree = copy.deepcopy(preset_tree("task4"))
    tree["model"]["gamma1"] = -0.5
    assert main(["simulate", write(tmp_path, tree), "--out", str(tmp_path)]) == 2
    assert "gamma1" in capsys.readouterr().err


def test_unknown_key_exit_2(tmp_path, capsys):
    tree = copy.deepcopy(preset_tree("task5"))
    tree["sim"]["steps"] = 3
    assert main(["simulate", write(tmp_path, tree), "--out", str(tmp_path)]) == 2
    assert "sim.steps" in capsys.readouterr().err


def test_missing_file_exit_2(tmp_path):
    assert main(["simulate", str(tmp_path / "nope.yaml"), "--out", str(tmp_path)]) == 2


def test_unstable_step_exit_3(tmp_path, capsys):
    cfg = write(tmp_path, preset_tree("task4"))
    assert main(["simulate", cfg, "--dt", "100", "--out", str(tmp_path)]) == 3
    assert "dt" in capsys.readouterr().err


def test_optimize_reports_identical(tmp_path):
    cfg = write(tmp_path, preset_tree("task5"))
    for d in ("a", "b"):
        assert main(["optimize", cfg, "--seed", "7", "--budget", "3000", "--out",
                     str(tmp_path / d)]) == 0
    a = (tmp_path / "a" / "report.txt").read_bytes()
    assert a == (tmp_path / "b" / "report.txt").read_bytes()
    assert b"rng_seed=7" in a


def test_optimize_budget_zero_returns_init(tmp_path, capsys):
    tree = copy.deepcopy(preset_tree("task5"))
    tree["optimize"]["search"]["init"] = [36, 74, 139, 163, 211]
    cfg = write(tmp_path, tree)
    assert main(["optimize", cfg, "--budget", "0", "--out", str(tmp_path / "o")]) == 0
    assert "best: (36.0000, 74.0000, 139.0000, 163.0000, 211.0000)" in capsys.readouterr().out


def test_optimize_task4_report(tmp_path, capsys):
    cfg = write(tmp_path, preset_tree("task4"))
    assert main(["optimize", cfg, "--out", str(tmp_path / "o")]) == 0
    out = capsys.readouterr().out
    assert "decision: shared duration" in out
    assert "active-constraint margin" in out
    assert (tmp_path / "o" / "trajectory.csv").exists()


def test_optimize_infeasible_exit_4(tmp_path):
    tree = copy.deepcopy(preset_tree("task4"))
    tree["optimize"]["constraints"]["z_min"] = 500
    cfg = write(tmp_path, tree)
    assert main(["optimize", cfg, "--budget", "100", "--out", str(tmp_path / "o")]) == 4
    assert "binding constraint: z_min" in (tmp_path / "o" / "report.txt").read_text()


def test_optimize_needs_section(tmp_path):
    tree = copy.deepcopy(preset_tree("task1"))
    assert main(["optimize", write(tmp_path, tree), "--out", str(tmp_path)]) == 2


def test_reproduce_task3_passes(tmp_path, capsys):
    assert main(["reproduce", "task3", "--out", str(tmp_path), "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert "== task3: PASS" in out
    assert (tmp_path / "task3" / "checks.txt").exists()


def test_reproduce_task4_passes(tmp_path):
    assert main(["reproduce", "task4", "--out", str(tmp_path)]) == 0
    checks = (tmp_path / "task4" / "checks.txt").read_text()
    assert "PASS shared duration in range" in checks


def test_preset_command(tmp_path):
    target = tmp_path / "t4.yaml"
    assert main(["preset", "task4", "-o", str(target)]) == 0
    assert yaml.safe_load(target.read_text()) == preset_tree("task4")


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "learnsim.cli", "--help"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    for cmd in ("simulate", "optimize", "reproduce"):
        assert cmd in out.stdout
