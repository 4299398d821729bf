import numpy as np
import pytest

from chaoslab.basin import (MIRROR, AttractorLabel, ClassifierConfig, GridSpec, ScalingFitError,
                            basin_class, basin_grid, basin_scaling, classify_batch, classify_ic,
                            fit_power_law, sample_directions, write_scaling_csv)
from chaoslab.equilibria import equilibria

L = AttractorLabel


def test_label_text_round_trip():
    for lab in L:
        assert L.from_text(lab.text) is lab
    assert [L(i).text for i in MIRROR] == ["undecided", "chaotic-2", "chaotic-1",
                                          "fixed-point-2", "fixed-point-1", "escaped"]
    assert L.CHAOTIC_1.in_basin and L.FIXED_2.in_basin
    assert not L.ESCAPED.in_basin and not L.UNDECIDED.in_basin
    with pytest.raises(ValueError):
        L.from_text("periodic")


def test_classify_examples(multistable):
    es = equilibria(multistable)
    assert classify_ic(multistable, (1, -1, 0)) is L.CHAOTIC_2
    assert classify_ic(multistable, (-1, 1, 0)) is L.CHAOTIC_1
    assert classify_ic(multistable, es["E6"] + 0.01) is L.FIXED_2
    assert classify_ic(multistable, es["E5"] + 0.01) is L.FIXED_1
    assert classify_ic(multistable, (1e4, 1e4, 1e4)) is L.ESCAPED
    # the origin is an equilibrium: no crossings, no approach
    assert classify_ic(multistable, (0, 0, 0)) is L.UNDECIDED


def test_batch_mirror_symmetry(multistable, rng):
    ics = rng.uniform(-8, 8, size=(64, 3))
    a = classify_batch(multistable, ics)
    b = classify_batch(multistable, ics * np.array([-1, -1, 1]))
    decided = (a != 0) & (b != 0)
    assert np.array_equal(MIRROR[a[decided]], b[decided])


def test_batch_thread_invariance(multistable, rng):
    ics = rng.uniform(-8, 8, size=(40, 3))
    assert np.array_equal(classify_batch(multistable, ics, threads=1),
                          classify_batch(multistable, ics, threads=4))


def test_small_grid(tmp_path, multistable):
    g = basin_grid(multistable, GridSpec(nx=20, ny=20))
    assert g.mirror_violations() == (0, 400)
    fr = g.fractions()
    assert sum(fr.values()) == pytest.approx(1.0)
    assert fr["chaotic-1"] == fr["chaotic-2"] and fr["fixed-point-1"] == fr["fixed-point-2"]
    assert g.composite_fraction() > 0.9
    g.write_csv(tmp_path / "b.csv")
    lines = (tmp_path / "b.csv").read_text().splitlines()
    assert lines[0] == "x0,y0,label" and len(lines) == 401
    g.write_ppm(tmp_path / "b.ppm")
    raw = (tmp_path / "b.ppm").read_bytes()
    assert raw.startswith(b"P6\n20 20\n255\n") and len(raw) == len(b"P6\n20 20\n255\n") + 1200


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(nx=0)
    with pytest.raises(ValueError):
        GridSpec(x_range=(1, 1))
    xs, ys = GridSpec(nx=4, ny=2).centres()
    assert np.allclose(xs, [-7.5, -2.5, 2.5, 7.5]) and np.allclose(ys, [-5, 5])


def test_classifier_config_validation():
    with pytest.raises(ValueError):
        ClassifierConfig(n_crossings=0)
    with pytest.raises(ValueError):
        ClassifierConfig(fp_radius=-1)


def test_class_rules():
    assert basin_class(0.0, 1.0) == 1
    assert basin_class(0.005, 0.99) == 1
    assert basin_class(0.0, 0.6) == 2
    assert basin_class(0.051, 0.38) == 3
    assert basin_class(2.0, 5.0) == 3
    assert basin_class(3.0, 10.0) == 4
    assert basin_class(2.995, 10.0) == 4
    with pytest.raises(ValueError):
        basin_class(float("nan"), 1.0)


def test_exact_power_law_fit():
    r = np.geomspace(1, 1000, 13)
    gamma, P0, res, mask = fit_power_law(r, 0.38 * r ** -0.051)
    assert gamma == pytest.approx(0.051, abs=1e-12) and P0 == pytest.approx(0.38, rel=1e-12)
    assert res < 1e-12 and mask.sum() == 9          # tail: r >= 10


def test_fit_errors():
    r = np.geomspace(1, 1000, 7)
    with pytest.raises(ScalingFitError):
        fit_power_law(r, np.zeros(7))
    with pytest.raises(ValueError):
        fit_power_law(r[::-1], np.ones(7))


def test_sample_directions(rng):
    d = sample_directions(rng, 20000)
    assert np.allclose(np.linalg.norm(d, axis=1), 1.0)
    assert np.all(np.abs(d.mean(axis=0)) < 0.03)


def test_synthetic_power_law_recovered(multistable, tmp_path):
    def fake(ics, r, rng):
        return rng.random(len(ics)) < 0.38 * r ** -0.051

    fit = basin_scaling(multistable, np.geomspace(1, 1e4, 9), samples_per_radius=50_000,
                        in_basin=fake, tail_from=1.0)
    assert fit.gamma == pytest.approx(0.051, abs=0.005)
    assert fit.P0 == pytest.approx(0.38, abs=0.01)
    assert fit.basin_class == 3
    write_scaling_csv(tmp_path / "s.csv", fit)
    assert (tmp_path / "s.csv").read_text().splitlines()[0] == "r,P"


def test_everything_in_basin_is_class_one(multistable):
    fit = basin_scaling(multistable, np.geomspace(1, 1e3, 7), samples_per_radius=100,
                        in_basin=lambda ics, r, rng: np.ones(len(ics), bool))
    assert fit.gamma == pytest.approx(0.0, abs=1e-12) and fit.basin_class == 1


def test_bounded_basin_is_class_four(multistable):
    # exact 1/r^3 probabilities as fractions of the sample
    def fake(ics, r, rng):
        k = int(round(len(ics) * min(1.0, r ** -3.0)))
        return np.arange(len(ics)) < k

    fit = basin_scaling(multistable, np.array([1.0, 2.0, 4.0, 8.0]), samples_per_radius=100_000,
                        in_basin=fake, tail_from=1.0)
    assert fit.basin_class == 4


def test_scaling_seed_reproducible(multistable):
    def fake(ics, r, rng):
        return rng.random(len(ics)) < 0.5

    a = basin_scaling(multistable, np.geomspace(1, 100, 5), 200, seed=3, in_basin=fake)
    b = basin_scaling(multistable, np.geomspace(1, 100, 5), 200, seed=3, in_basin=fake)
    assert np.array_equal(a.probability, b.probability)
    with pytest.raises(ValueError):
        basin_scaling(multistable, [1, 2, 3], 50, in_basin=fake)
