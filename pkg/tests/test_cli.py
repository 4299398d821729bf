import json
import subprocess
import sys

import pytest

from chaoslab.cli import EXIT_CONFIG, EXIT_NUMERIC, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith("{") else None)


def test_simulate(tmp_path, capsys):
    code, s = run(capsys, "simulate", "--a8", "1.2", "--ic", "-1,-1,0", "--t-end", "200",
                  "--out", str(tmp_path))
    assert code == 0 and s["terminal"] == "completed"
    assert s["state_max"][0] < 0                    # stays on the x < 0 attractor
    header = (tmp_path / "trajectory.csv").read_text().splitlines()[0]
    assert header == "t,x,y,z"
    assert json.loads((tmp_path / "summary.json").read_text()) == s


def test_simulate_two_ics_and_gnuplot(tmp_path, capsys):
    code, s = run(capsys, "simulate", "--t-end", "20", "--transient", "0", "--ic2", "0.1,0.1,0", "--gnuplot", "true",
                  "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "trajectory_2.csv").exists()
    assert list(tmp_path.glob("*.gp"))


def test_reproducible(tmp_path, capsys):
    args = ["simulate", "--t-end", "30", "--transient", "0", "--mode", "fixed", "--step", "0.01"]
    run(capsys, *args, "--out", str(tmp_path / "a"))
    run(capsys, *args, "--out", str(tmp_path / "b"))
    assert (tmp_path / "a/trajectory.csv").read_bytes() == (tmp_path / "b/trajectory.csv").read_bytes()


def test_equilibria(tmp_path, capsys):
    code, s = run(capsys, "equilibria", "--n-points", "11", "--out", str(tmp_path))
    assert code == 0
    lines = (tmp_path / "stability_sweep.csv").read_text().splitlines()
    assert lines[0] == "a8,eq_id,re1,im1,re2,im2,re3,im3,class" and len(lines) == 12
    assert (tmp_path / "equilibria.csv").exists()


def test_lyapunov(tmp_path, capsys):
    code, s = run(capsys, "lyapunov", "--iterations", "50000", "--out", str(tmp_path))
    assert code == 0
    assert {"L1", "L2", "L3", "sum", "DKY", "divergence_mean"} <= set(s)
    assert s["L1"] > 0.2 and s["L3"] < -4


def test_lyapunov_escape_is_numeric_failure(tmp_path, capsys):
    code, _ = run(capsys, "lyapunov", "--a8", "-0.48", "--iterations", "100000", "--out", str(tmp_path))
    assert code == EXIT_NUMERIC


def test_bifurcate(tmp_path, capsys):
    code, s = run(capsys, "bifurcate", "--n-points", "5", "--t-end", "60", "--transient", "30",
                  "--mode", "fixed", "--mask", "true", "--mask-points", "3",
                  "--mask-iterations", "20000", "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "bifurcation.csv").read_text().startswith("a8,xmax")
    assert (tmp_path / "chaos_mask.csv").read_text().startswith("a8,L1")


def test_basin(tmp_path, capsys):
    code, s = run(capsys, "basin", "--nx", "10", "--ny", "10", "--out", str(tmp_path))
    assert code == 0
    assert sum(s["fractions"].values()) == pytest.approx(1.0)
    assert s["mirror_violations"] == 0
    assert (tmp_path / "basin.ppm").exists()


def test_basin_class(tmp_path, capsys):
    code, s = run(capsys, "basin-class", "--n-radii", "4", "--radii-min", "10", "--radii-max", "1e4",
                  "--samples", "100", "--tail-from", "10", "--t-max", "300", "--out", str(tmp_path))
    assert code == 0 and s["class"] in (1, 2, 3, 4)
    assert (tmp_path / "basin_scaling.csv").read_text().startswith("r,P")


def test_circuit(tmp_path, capsys):
    code, s = run(capsys, "circuit", "--tau-end", "10", "--out", str(tmp_path))
    assert code == 0
    assert s["resistors"]["R8"] == 400e3 and s["resistors"]["R3"] == 130e3
    assert s["range"]["passed"] is False
    assert "R10" in (tmp_path / "bom.txt").read_text()


def test_robot(tmp_path, capsys):
    code, s = run(capsys, "robot", "--t-end", "50", "--ic2", "0.1001,-0.1,0,0,0,0",
                  "--out", str(tmp_path))
    assert code == 0 and 0 < s["coverage"] <= 1
    assert (tmp_path / "coverage_mask.txt").exists()


@pytest.mark.parametrize("argv", [
    ["simulate", "--ic", "1,2"],
    ["simulate", "--mode", "leapfrog"],
    ["simulate", "--no-such-flag", "1"],
    ["robot", "--workspace", "0,0,0,1"],
])
def test_config_errors(tmp_path, argv, capsys):
    with pytest.raises(SystemExit) as e:
        code = main(argv + ["--out", str(tmp_path)])
        raise SystemExit(code)
    assert e.value.code == EXIT_CONFIG


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\na8 = 1.2\nic = -1, -1, 0\nt_end = 100\n")
    code, s = run(capsys, "simulate", "--config", str(cfg), "--out", str(tmp_path))
    assert code == 0 and s["state_max"][0] < 0
    # flags override the file
    code, s = run(capsys, "simulate", "--config", str(cfg), "--ic", "1,-1,0", "--out", str(tmp_path))
    assert s["state_min"][0] > 0


def test_config_file_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("a9 = 1\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "chaoslab", "equilibria", "--n-points", "3",
                        "--out", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["backend"] in ("compiled", "python")
