import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import naive_l
from lhvbell.transform import (
    ExperimentSetting,
    TransformConsistencyError,
    _arccos,
    branch_of,
    circle_distance,
    frame_map,
    l_inverse,
    l_transform,
    q_sign,
    wrap_angle,
)

PI = math.pi
finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)
angles = st.floats(min_value=-PI, max_value=PI, exclude_max=True)


@pytest.mark.parametrize(
    "x, expected",
    [(3 * PI / 2, -PI / 2), (-PI, -PI), (0.0, 0.0), (PI, -PI), (5 * PI, -PI)],
)
def test_wrap_examples(x, expected):
    assert wrap_angle(x) == pytest.approx(expected, abs=1e-12)


@given(finite)
def test_wrap_range_and_idempotent(x):
    w = wrap_angle(x)
    assert -PI <= w < PI
    assert wrap_angle(w) == w
    assert math.isclose(math.remainder(w - x, 2 * PI), 0.0, abs_tol=1e-9)


@pytest.mark.parametrize("bad", [math.inf, -math.inf, math.nan])
def test_wrap_rejects_non_finite(bad):
    with pytest.raises(ValueError):
        wrap_angle(bad)
    with pytest.raises(ValueError):
        q_sign(bad)


def test_wrap_arrays():
    x = np.array([3 * PI / 2, -PI, 0.0, 7.0])
    out = wrap_angle(x)
    assert out.shape == (4,)
    assert np.all((out >= -PI) & (out < PI))


@pytest.mark.parametrize("x, expected", [(-5 * PI / 6, -1), (PI / 6, 1), (2 * PI, 1), (0.0, 1)])
def test_q_sign(x, expected):
    assert q_sign(x) == expected


@pytest.mark.parametrize(
    "lam, d, expected",
    [(PI / 6, PI / 3, 3), (-PI / 2, PI / 3, 2), (0.0, -PI / 3, 3), (-PI, PI / 3, 1), (PI / 3, PI / 3, 4), (-PI, -PI / 3, 1)],
)
def test_branch_examples(lam, d, expected):
    assert branch_of(lam, d) == expected


@given(angles, angles)
def test_branch_tiling(lam, d):
    # exactly one of the four half-open conditions holds
    if d >= 0:
        conds = [-PI <= lam < d - PI, d - PI <= lam < 0, 0 <= lam < d, d <= lam < PI]
    else:
        conds = [-PI <= lam < d, d <= lam < 0, 0 <= lam < d + PI, d + PI <= lam < PI]
    assert sum(conds) == 1
    assert branch_of(lam, d) == conds.index(True) + 1


@pytest.mark.parametrize(
    "lam, d, expected",
    [
        (0.0, 0.0, 0.0),
        (0.0, PI / 3, -PI / 3),
        (PI / 2, PI / 3, PI / 3),
        (-PI / 2, PI / 3, -2 * PI / 3),
    ],
)
def test_l_transform_examples(lam, d, expected):
    assert l_transform(lam, d) == pytest.approx(expected, abs=1e-12)


def test_identity_at_zero(rng):
    lam = rng.uniform(-PI, PI, 10_000)
    assert np.max(np.abs(l_transform(lam, 0.0) - lam)) < 1e-12


def test_matches_literal_formula_away_from_cusps(rng):
    lam = rng.uniform(-PI, PI, 20_000)
    d = rng.uniform(-PI, PI, 20_000)
    # raw arccos is ill-conditioned where the image is near 0 or pi
    ours = np.asarray(l_transform(lam, d))
    ok = (np.abs(ours) > 1e-3) & (np.abs(ours) < PI - 1e-3)
    ref = np.array([naive_l(a, b) for a, b in zip(lam[ok], d[ok])])
    assert np.max(np.asarray(circle_distance(ours[ok], ref))) < 1e-9


def test_sign_matches_q_on_branch_interiors(rng):
    lam = rng.uniform(-PI, PI, 10_000)
    d = rng.uniform(-PI, PI, 10_000)
    out = np.asarray(l_transform(lam, d))
    nz = np.abs(out) > 1e-9
    assert np.all(np.sign(out[nz]) == q_sign(lam[nz] - d[nz]))


@pytest.mark.parametrize(
    "lam, d",
    [(0.3, 1.0), (-2.9, 1.0), (-1.0, -2.0), (2.5, -0.4), (-PI, 0.5), (1.0, -PI)],
)
def test_inverse_examples(lam, d):
    assert circle_distance(l_inverse(l_transform(lam, d), d), lam) < 1e-12


def test_inverse_anchor():
    assert l_inverse(-PI / 3, PI / 3) == pytest.approx(0.0, abs=1e-12)
    assert l_inverse(1.234, 0.0) == pytest.approx(1.234, abs=1e-15)


@settings(max_examples=300)
@given(angles, angles)
def test_inverse_undoes_transform(lam, d):
    # the forward map is flat at lam = 0 and -pi, so the inverse is steep there
    if min(abs(lam), PI - abs(lam)) > 1e-4:
        assert circle_distance(l_inverse(l_transform(lam, d), d), lam) < 1e-9


@settings(max_examples=300)
@given(angles, angles)
def test_transform_undoes_inverse_off_cusp_images(mu, d):
    # near mu = 0 or pi the forward map has infinite slope, so one ulp in the
    # preimage already costs ~sqrt(ulp) in the image
    if min(abs(mu), PI - abs(mu)) > 1e-4:
        assert circle_distance(l_transform(l_inverse(mu, d), d), mu) < 1e-9


def test_inverse_round_trip_bulk(rng):
    lam = rng.uniform(-PI, PI, 10_000)
    d = rng.uniform(-PI, PI, 10_000)
    back = l_inverse(l_transform(lam, d), d)
    assert np.max(np.asarray(circle_distance(back, lam))) < 1e-9


def test_l_at_minus_pi_is_rotation(rng):
    lam = rng.uniform(-PI, PI, 1000)
    assert np.max(np.asarray(circle_distance(l_transform(lam, -PI), lam + PI))) < 1e-12


@pytest.mark.parametrize(
    "lam, d, expected",
    [
        (PI / 6, PI / 3, math.acos((3 - math.sqrt(3)) / 2)),
        (0.0, PI / 3, PI / 3),
        (0.7, 0.0, -0.7),
    ],
)
def test_frame_map_examples(lam, d, expected):
    assert frame_map(lam, ExperimentSetting(d, 0.0)) == pytest.approx(expected, abs=1e-12)


def test_frame_map_depends_on_difference_only():
    a = frame_map(0.4, ExperimentSetting(1.0, 0.25))
    b = frame_map(0.4, ExperimentSetting(0.75, 0.0))
    assert a == pytest.approx(b, abs=1e-14)


def test_cusp_is_square_root(rng):
    # L(d + h) ~ sqrt(2 sin(d) h) just past the anchor
    for d in (0.3, 1.0, 2.5):
        h = 1e-8
        assert l_transform(d + h, d) == pytest.approx(math.sqrt(2 * math.sin(d) * h), rel=1e-4)


def test_boundary_gaps_shrink_like_sqrt_h():
    d = PI / 3
    for b in (-PI, d - PI, 0.0, d):
        gaps = [circle_distance(l_transform(b - h, d), l_transform(b + h, d)) for h in (1e-6, 1e-8, 1e-10)]
        assert gaps[0] >= gaps[1] >= gaps[2]
        assert gaps[2] < 3 * math.sqrt(1e-10)


def test_arccos_guard_band():
    assert _arccos(np.array([-1e-13]), np.array([2.0]))[0] == 0.0
    with pytest.raises(TransformConsistencyError):
        _arccos(np.array([-1e-6]), np.array([2.0]))


def test_setting_wraps():
    s = ExperimentSetting(3 * PI, -3 * PI)
    assert -PI <= s.delta < PI and -PI <= s.phi < PI
    assert s.deltabar == pytest.approx(0.0, abs=1e-12)
