import numpy as np
import pytest

from chaoslab.bifurcation import (NEG_SEED, POS_SEED, BifurcationData, SweepConfig,
                                  bifurcation_scan, chaos_mask, hysteresis_witness, write_csv,
                                  write_mask_csv)
from chaoslab.integrate import IntegratorConfig, integrate, local_maxima
from chaoslab.dynamics import SystemField

SHORT = SweepConfig(a8_start=-0.3, a8_end=0.3, n_points=7, t_end=100.0, transient=50.0,
                    mode="fixed", step=0.005)


def test_config_validation():
    with pytest.raises(ValueError):
        SweepConfig(n_points=1)
    with pytest.raises(ValueError):
        SweepConfig(t_end=10, transient=10)
    with pytest.raises(ValueError):
        SweepConfig(direction="sideways")
    with pytest.raises(ValueError):
        SweepConfig(ic_policy="random")
    with pytest.raises(ValueError):
        SweepConfig(step=0)
    g = SweepConfig(n_points=5, direction="backward").grid()
    assert g[0] == 1.5 and g[-1] == -0.5


def test_fixed_mode_deterministic(base):
    a = bifurcation_scan(base, SHORT)
    b = bifurcation_scan(base, SHORT)
    assert np.array_equal(a.xmax, b.xmax) and np.array_equal(a.a8, b.a8)
    assert set(np.unique(a.a8)) <= set(SHORT.grid())


def test_fixed_policy_matches_direct_run(base):
    cfg = SHORT.with_(ic_policy="fixed", n_points=2, a8_start=-0.25, a8_end=0.25)
    data = bifurcation_scan(base, cfg)
    tr = integrate(SystemField(base.with_(a8=0.25)), NEG_SEED,
                   IntegratorConfig(mode="fixed", step=0.005, t_end=100.0, transient=0))
    ref = [v for _, v in local_maxima(tr.after(50.0), 0)]
    assert np.allclose(data.maxima_at(0.25), ref, rtol=1e-12)
    assert np.array_equal(data.seeds[1], NEG_SEED)


def test_continuation_carries_state(base):
    data = bifurcation_scan(base, SHORT)
    assert np.array_equal(data.seeds[0], NEG_SEED)
    assert not np.array_equal(data.seeds[1], NEG_SEED)


def test_both_signs_in_symmetric_regime(base):
    cfg = SHORT.with_(a8_start=-0.25, a8_end=-0.25 + 1e-9, n_points=2, t_end=300.0, transient=150.0)
    xs = bifurcation_scan(base, cfg).maxima_at(-0.25)
    assert (xs > 0).any() and (xs < 0).any()


def test_sign_reset_mirrors_once(base):
    cfg = SHORT.with_(s0=POS_SEED, sign_reset=True, sign_reset_a8=0.0)
    data = bifurcation_scan(base, cfg)
    first = int(np.argmax(data.grid > 0.0))
    assert np.sign(data.seeds[first][0]) == 1.0
    plain = bifurcation_scan(base, cfg.with_(sign_reset=False))
    carried = plain.seeds[first]
    expect = carried if carried[0] > 0 else carried * np.array([-1, -1, 1])
    assert np.array_equal(data.seeds[first], expect)


def test_escape_reseeds(base):
    cfg = SHORT.with_(a8_start=-0.5, a8_end=-0.47, n_points=4, t_end=500.0, transient=250.0)
    data = bifurcation_scan(base, cfg)
    assert data.escaped.all()
    assert all(np.array_equal(s, NEG_SEED) for s in data.seeds)


def _fake(grid, sign):
    return BifurcationData(np.repeat(grid, 2), sign * np.tile([1.0, 2.0], len(grid)), grid,
                           np.zeros(len(grid), bool))


def test_hysteresis_witness_and_violations():
    grid = np.linspace(-0.5, 1.5, 9)
    a, b = _fake(grid, 1.0), _fake(grid, -1.0)
    w = hysteresis_witness(a, b)
    assert w == [float(v) for v in grid if 0 < v < 1.3]
    assert hysteresis_witness(a, a) == []
    assert a.sign_violations(1) == 0 and b.sign_violations(1) == 2 * int(np.sum(grid > 0))


def test_chaos_mask(base, tmp_path):
    m = chaos_mask(base, [-0.48, -0.25, 1.2], iterations=50_000)
    assert list(m.escaped) == [True, False, False]
    assert list(m.chaotic) == [False, True, True]
    write_mask_csv(tmp_path / "m.csv", m)
    assert (tmp_path / "m.csv").read_text().splitlines()[0] == "a8,L1"


def test_csv(tmp_path, base):
    data = bifurcation_scan(base, SHORT)
    write_csv(tmp_path / "b.csv", data)
    lines = (tmp_path / "b.csv").read_text().splitlines()
    assert lines[0] == "a8,xmax" and len(lines) == 1 + len(data.xmax)
