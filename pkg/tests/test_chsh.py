import itertools
import math

import numpy as np
import pytest

from lhvbell.chsh import (
    TSIRELSON,
    ChshSettings,
    CycleParams,
    chsh_statistic,
    classical_chsh_mc,
    compose_settings,
    geometric_phase_profile,
    holonomy_cycle,
    model_chsh,
    model_chsh_grid,
    per_config_classical,
    per_config_histogram,
    per_config_model,
    per_config_quadrature,
    rotate_setting,
)
from lhvbell.distribution import density
from lhvbell.rng import RngStream
from lhvbell.transform import ExperimentSetting, circle_distance, frame_map, l_transform, linear_transform, wrap_angle

PI = math.pi
R2 = math.sqrt(2) / 2
TSIRELSON_SETTINGS = ChshSettings(PI / 4, -PI / 4, PI / 2)


@pytest.mark.parametrize(
    "es, expected",
    [((1, 1, 1, -1), 4.0), ((0, 0, 0, 0), 0.0), ((-R2, -R2, -R2, R2), -2 * math.sqrt(2))],
)
def test_chsh_statistic_examples(es, expected):
    assert chsh_statistic(*es) == pytest.approx(expected, abs=1e-15)


def test_chsh_statistic_range():
    with pytest.raises(ValueError):
        chsh_statistic(1.1, 0, 0, 0)


@pytest.mark.parametrize(
    "s, expected",
    [(TSIRELSON_SETTINGS, -TSIRELSON), (ChshSettings(0, 0, 0), -2.0), (ChshSettings(PI / 2, PI / 2, 0), 0.0)],
)
def test_model_chsh_examples(s, expected):
    assert model_chsh(s) == pytest.approx(expected, abs=1e-12)


def test_model_chsh_grid_matches_scalar(rng):
    pts = rng.uniform(-PI, PI, (50, 4))
    grid = model_chsh_grid(pts[:, 0], pts[:, 1], pts[:, 2], pts[:, 3])
    for row, g in zip(pts, grid):
        assert model_chsh(ChshSettings(*row)) == pytest.approx(g, abs=1e-12)


def test_model_chsh_scan_bounded_by_tsirelson():
    axis = -PI + 2 * PI * np.arange(32) / 32
    d1, d2, dd = np.meshgrid(axis, axis, axis, indexing="ij")
    peak = np.max(np.abs(model_chsh_grid(d1, d2, dd)))
    assert peak <= TSIRELSON + 1e-9
    assert peak > 2.8


@pytest.mark.parametrize(
    "tup, expected", [((1, 1, 1, 1), 2), ((1, -1, 1, -1), -2), ((-1, 1, 1, 1), -2)]
)
def test_per_config_classical_examples(tup, expected):
    assert per_config_classical(*tup) == expected


def test_per_config_classical_exhaustive():
    for tup in itertools.product((1, -1), repeat=4):
        assert per_config_classical(*tup) in (-2, 2)


def test_per_config_classical_rejects_non_binary():
    with pytest.raises(ValueError):
        per_config_classical(1, 0, 1, 1)


def test_per_config_witness_minus_four():
    lam = -PI + 2 * PI * np.arange(4096) / 4096
    vals = per_config_model(lam, TSIRELSON_SETTINGS)
    assert set(np.unique(vals)) <= {-4, -2, 0, 2, 4}
    assert np.any(vals == -4)


def test_per_config_all_zero_settings(rng):
    vals = per_config_model(rng.uniform(-PI, PI, 1000), ChshSettings(0, 0, 0))
    assert np.all(vals == -2)


def test_per_config_histogram_tsirelson():
    hist = per_config_histogram(TSIRELSON_SETTINGS)
    assert hist[-4] == pytest.approx(R2 * 1, abs=1e-12)
    assert sum(hist.values()) == pytest.approx(1.0, abs=1e-12)
    assert sum(k * w for k, w in hist.items()) == pytest.approx(-TSIRELSON, abs=1e-12)


def test_quadrature_at_tsirelson():
    assert per_config_quadrature(TSIRELSON_SETTINGS) == pytest.approx(-TSIRELSON, abs=1e-6)


@pytest.mark.slow
def test_quadrature_matches_model_at_random_settings(rng):
    for row in rng.uniform(-PI, PI, (20, 4)):
        s = ChshSettings(*row)
        assert per_config_quadrature(s) == pytest.approx(model_chsh(s), abs=1e-6)


def test_histogram_against_midpoint_oracle(rng):
    # plain density-weighted midpoint rule on a fine grid, no breakpoint handling
    s = ChshSettings(*rng.uniform(-PI, PI, 4))
    n = 400_000
    lam = -PI + 2 * PI * (np.arange(n) + 0.5) / n
    w = density(lam) * (2 * PI / n)
    vals = per_config_model(lam, s)
    hist = per_config_histogram(s)
    for k in (-4, -2, 0, 2, 4):
        assert float(np.sum(w[vals == k])) == pytest.approx(hist[k], abs=1e-4)


def test_classical_chsh_mc_obeys_bound(rng):
    for i, row in enumerate(rng.uniform(-PI, PI, (10, 3))):
        est = classical_chsh_mc(ChshSettings(*row), 100_000, RngStream(0, i))
        assert abs(est.mean) <= 2 + 4 * est.stderr


def test_classical_chsh_mc_at_tsirelson_is_exactly_minus_two():
    est = classical_chsh_mc(TSIRELSON_SETTINGS, 50_000, RngStream(1))
    assert est.mean == pytest.approx(-2.0, abs=1e-12)


def test_cycle_identity_for_zero_params(rng):
    lam = rng.uniform(-PI, PI, 1000)
    out = holonomy_cycle(lam, CycleParams(0, 0, 0))
    assert np.max(np.asarray(circle_distance(out, lam))) < 1e-12


def test_cycle_identity_for_linear_law(rng):
    lam = rng.uniform(-PI, PI, 1000)
    for row in rng.uniform(-PI, PI, (20, 3)):
        out = holonomy_cycle(lam, CycleParams(*row), law=linear_transform)
        assert np.max(np.asarray(circle_distance(out, lam))) < 1e-9


def test_cycle_by_hand_composition():
    p = CycleParams(0.4, -1.1, 0.9)
    lam = 0.3
    x = wrap_angle(-l_transform(lam, p.d1))
    x = wrap_angle(-l_transform(x, wrap_angle(p.d1 - p.dd)))
    x = wrap_angle(-l_transform(x, wrap_angle(p.d2 - p.dd)))
    x = wrap_angle(-l_transform(x, p.d2))
    assert holonomy_cycle(lam, p) == pytest.approx(x, abs=1e-15)


def test_phase_profile_at_tsirelson():
    prof = geometric_phase_profile(CycleParams(PI / 4, -PI / 4, PI / 2), 4096)
    assert prof.lambdas.shape == prof.defects.shape == (4096,)
    assert prof.max_defect > 0.1
    assert geometric_phase_profile(CycleParams(0, 0, 0), 64).max_defect < 1e-12
    assert geometric_phase_profile(CycleParams(1, 2, 3), 64, law=linear_transform).max_defect < 1e-9


def test_phase_profile_rejects_small_grid():
    with pytest.raises(ValueError):
        geometric_phase_profile(CycleParams(0, 0, 0), 1)


@pytest.mark.parametrize("a, b, expected", [(PI / 3, PI / 3, 2 * PI / 3), (PI, PI, 0.0)])
def test_compose_settings(a, b, expected):
    assert compose_settings(a, b) == pytest.approx(expected, abs=1e-12)


def test_rotated_setting_parameter(rng):
    for delta, phi, extra in rng.uniform(-PI, PI, (50, 3)):
        rotated = rotate_setting(ExperimentSetting(delta, phi), extra)
        target = wrap_angle(extra + delta - phi)
        assert circle_distance(rotated.deltabar, target) < 1e-12
        lam = rng.uniform(-PI, PI, 100)
        b = frame_map(lam, rotated)
        assert np.max(np.asarray(circle_distance(b, -np.asarray(l_transform(lam, target))))) < 1e-9
