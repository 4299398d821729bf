import numpy as np
import pytest

from chaoslab import kernels
from chaoslab.dynamics import Params
from chaoslab.robot import (RobotConfig, WheelSpeeds, calibrate_xmax, coverage, drive_from_wheels,
                            drive_inputs, heading_residual, mask_text, simulate_navigation,
                            wheel_speeds, write_csv)

CFG = RobotConfig()


def test_drive_inputs():
    v, mu = drive_inputs(1.0, 2.0, CFG)
    assert v == pytest.approx(1.5) and mu == pytest.approx(-12.5)
    v, _ = drive_inputs(40.0, 0.0, CFG.with_(xmax=30.0))
    assert v == pytest.approx(5.0)
    v, _ = drive_inputs(-3.0, -1.0, CFG)
    assert v == pytest.approx(2.0)


def test_wheel_speed_examples():
    w = wheel_speeds(1.0, 0.0, CFG)
    assert w.w_l == w.w_r == 1.0
    w = wheel_speeds(0.0, 25.0, CFG)
    assert w.w_l == pytest.approx(-1.0) and w.w_r == pytest.approx(1.0)
    w = wheel_speeds(2.0, 0.0, CFG.with_(wheel_radius=0.5))
    assert w.w_l == pytest.approx(4.0)


def test_wheel_round_trip(rng):
    for v, mu in rng.normal(size=(50, 2)) * 10:
        v2, mu2 = drive_from_wheels(wheel_speeds(v, mu, CFG), CFG)
        assert v2 == pytest.approx(v, abs=1e-12) and mu2 == pytest.approx(mu, abs=1e-9)
    assert drive_from_wheels(WheelSpeeds(1.0, 3.0), CFG) == pytest.approx((2.0, 25.0))


def test_config_validation():
    with pytest.raises(ValueError):
        RobotConfig(d=0)
    with pytest.raises(ValueError):
        RobotConfig(workspace=(0, 0, 0, 1))
    with pytest.raises(ValueError):
        RobotConfig(boundary="bounce")
    with pytest.raises(ValueError):
        RobotConfig(grid=(0, 10))


def test_coverage_stationary_and_sweep():
    t = np.arange(100.0)
    rep = coverage(t, np.full(100, 5.5), np.full(100, 5.5), CFG)
    assert rep.final == pytest.approx(0.01)
    # boustrophedon through all cell centres
    xs, ys = [], []
    for j in range(10):
        row = np.arange(10) + 0.5
        xs.extend(row if j % 2 == 0 else row[::-1])
        ys.extend([j + 0.5] * 10)
    rep = coverage(np.arange(100.0), np.array(xs), np.array(ys), CFG)
    assert rep.final == 1.0 and rep.mask.all()
    assert np.all(np.diff(rep.fraction) >= 0)
    assert rep.fraction_at(9.0) == pytest.approx(0.1)
    assert rep.fraction_at(-1.0) == 0.0


def test_coverage_ignores_outside_and_edges():
    rep = coverage([0, 1, 2, 3], [-1, 10, 11, 0], [5, 10, 5, 0], CFG)
    assert rep.mask.sum() == 2                      # (10, 10) and (0, 0) are inside
    assert rep.mask[9, 9] and rep.mask[0, 0]


def test_calibrated_xmax(base):
    assert calibrate_xmax(base) == pytest.approx(31.596, abs=1e-3)


@pytest.fixture(scope="module")
def nav():
    p = Params()
    return p, *simulate_navigation(p, CFG, t_end=100.0)


def test_chaotic_substate_bit_identical(nav):
    p, traj, _ = nav
    n = len(traj.times) - 1
    _, S, _ = kernels.rk4_path(p.as_array(), np.array([0.1, -0.1, 0.0]), 0.005, n, 1, 1e6)
    assert np.array_equal(traj.states[:, :3], S)


def test_boundary_respected(nav):
    _, traj, rep = nav
    assert CFG.inside(traj.states[:, 3], traj.states[:, 4]).all()
    assert np.all(np.diff(rep.fraction) >= 0)
    assert 0 < rep.final <= 1


def test_unbounded_rule_can_leave(base):
    traj, rep = simulate_navigation(base, CFG.with_(boundary="none"), t_end=100.0)
    assert not CFG.inside(traj.states[:, 3], traj.states[:, 4]).all()
    with pytest.raises(ValueError):
        simulate_navigation(base, CFG, s0=(0.1, -0.1, 0, -1, 0, 0))


def test_initial_condition_sensitivity(base):
    a, _ = simulate_navigation(base, CFG, t_end=100.0)
    b, _ = simulate_navigation(base, CFG, s0=(0.1001, -0.1, 0, 0, 0, 0), t_end=100.0)
    assert np.max(np.hypot(*(a.states[:, 3:5] - b.states[:, 3:5]).T)) > 1.0


def test_heading_constraint(nav):
    p, traj, _ = nav
    assert heading_residual(p, CFG, traj.states[::500]).max() < 1e-12


def test_outputs(tmp_path, nav):
    p, traj, rep = nav
    path = tmp_path / "r.csv"
    write_csv(path, p, traj, rep, CFG, stride=1000)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,x,y,z,X,Y,theta,v,mu,covered_fraction"
    assert len(lines) == 1 + len(range(0, len(traj.times), 1000))
    text = mask_text(rep)
    assert len(text.splitlines()) == 10 and text.count("1") == rep.mask.sum()
