"""Circle arithmetic and the frame-to-frame transformation law.

Angles live on the circle in the half-open chart [-pi, pi). Every public
function here accepts a scalar or an array and returns the same shape.

The transformation law L(lambda; deltabar) is piecewise, with four branches
whose arccos arguments have the generic forms

    -cos a - cos b - 1,   cos a + cos b - 1,   cos a - cos b + 1.

Instead of evaluating arccos on the raw sum (which loses all precision near
+-1, exactly where the map has its square-root cusps), each form is turned
into closed expressions for ``1 - x`` and ``1 + x`` via sum-to-product
identities, and arccos(x) = 2*atan2(sqrt(1 - x), sqrt(1 + x)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# guard band for arccos arguments that leave [-1, 1] by rounding only
CLAMP_EPS = 1e-12


class TransformConsistencyError(ArithmeticError):
    """An arccos argument left [-1, 1] by more than the guard band."""


def _out(arr: np.ndarray):
    return float(arr) if arr.ndim == 0 else arr


def wrap_angle(x):
    """Map ``x`` to its representative in [-pi, pi).

    Values already inside the chart are returned untouched, which makes the
    map exactly idempotent.

    Raises:
        ValueError: if any input is NaN or infinite.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("angle must be finite")
    inside = (x >= -math.pi) & (x < math.pi)
    if np.all(inside):
        return _out(x.copy())
    r = np.mod(x + math.pi, TWO_PI) - math.pi
    # fmod rounding can land exactly on +pi
    r = np.where(r >= math.pi, r - TWO_PI, r)
    r = np.where(r < -math.pi, -math.pi, r)
    return _out(np.where(inside, x, r))


def circle_distance(a, b):
    """Shortest arc length between two angles, in [0, pi]."""
    d = np.abs(np.asarray(wrap_angle(np.asarray(a, dtype=float) - b)))
    return _out(np.minimum(d, TWO_PI - d))


def q_sign(x):
    """Sign of the wrapped angle, with ``q_sign(0) == +1``."""
    w = np.asarray(wrap_angle(x))
    r = np.where(w >= 0.0, 1, -1)
    return int(r) if r.ndim == 0 else r


@dataclass(frozen=True)
class ExperimentSetting:
    """Relative detector orientation ``delta`` and source phase ``phi``."""

    delta: float
    phi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "delta", wrap_angle(self.delta))
        object.__setattr__(self, "phi", wrap_angle(self.phi))

    @property
    def deltabar(self) -> float:
        return wrap_angle(self.delta - self.phi)


def branch_of(lam, deltabar):
    """Index (1..4) of the sub-interval of [-pi, pi) that contains ``lam``.

    For deltabar >= 0 the intervals are [-pi, d-pi), [d-pi, 0), [0, d),
    [d, pi); for deltabar < 0 they are [-pi, d), [d, 0), [0, d+pi),
    [d+pi, pi).
    """
    lam = np.asarray(wrap_angle(lam))
    d = np.asarray(wrap_angle(deltabar))
    lam, d = np.broadcast_arrays(lam, d)
    pos = d >= 0.0
    cut = np.where(pos, d - math.pi, d)
    last = np.where(pos, d, d + math.pi)
    b = np.where(lam < cut, 1, np.where(lam < 0.0, 2, np.where(lam < last, 3, 4)))
    return int(b) if b.ndim == 0 else b


# --- half-angle forms of the three arccos argument shapes -----------------
# each returns (1 - x, 1 + x) computed without cancellation


def _neg_sum(a, b):
    # x = -cos a - cos b - 1
    ca, cb = np.cos(0.5 * a), np.cos(0.5 * b)
    return 2.0 * (ca * ca + cb * cb), -2.0 * np.cos(0.5 * (a + b)) * np.cos(0.5 * (a - b))


def _pos_sum(a, b):
    # x = cos a + cos b - 1
    sa, sb = np.sin(0.5 * a), np.sin(0.5 * b)
    return 2.0 * (sa * sa + sb * sb), 2.0 * np.cos(0.5 * (a + b)) * np.cos(0.5 * (a - b))


def _diff(a, b):
    # x = cos a - cos b + 1
    ca, sb = np.cos(0.5 * a), np.sin(0.5 * b)
    return 2.0 * np.sin(0.5 * (a + b)) * np.sin(0.5 * (a - b)), 2.0 * (ca * ca + sb * sb)


def _arccos(one_minus, one_plus):
    low = min(np.min(one_minus, initial=0.0), np.min(one_plus, initial=0.0))
    if low < -CLAMP_EPS:
        raise TransformConsistencyError(f"arccos argument outside [-1, 1] by {-low:.3g}")
    return 2.0 * np.arctan2(np.sqrt(np.maximum(one_minus, 0.0)), np.sqrt(np.maximum(one_plus, 0.0)))


def _magnitudes(lam, d):
    """|L| for every (lam, d) pair, selected by branch."""
    pos = d >= 0.0
    b = np.asarray(branch_of(lam, d))
    om = np.empty(lam.shape)
    op = np.empty(lam.shape)
    # (branch, sign-of-deltabar) -> argument shape
    table = (
        (1, True, _neg_sum, (d, lam)),
        (2, True, _pos_sum, (d, lam)),
        (3, True, _diff, (d, lam)),
        (4, True, _diff, (lam, d)),
        (1, False, _diff, (lam, d)),
        (2, False, _diff, (d, lam)),
        (3, False, _pos_sum, (d, lam)),
        (4, False, _neg_sum, (d, lam)),
    )
    for idx, positive, form, (a, c) in table:
        m = (b == idx) & (pos if positive else ~pos)
        if np.any(m):
            om[m], op[m] = form(a[m], c[m])
    return _arccos(om, op), b


def l_transform(lam, deltabar):
    """Coordinate of a hidden direction in the other detector's chart.

    The map is a continuous, strictly increasing, degree-one circle map with
    ``L(deltabar; deltabar) == 0`` and ``L(0; deltabar) == -deltabar``; it
    reduces to the identity at ``deltabar == 0``. Within each branch
    ``cos L`` differs from ``+-cos lam`` by a constant, so ``|sin l| dl`` is
    preserved.
    """
    lam, d = np.broadcast_arrays(np.asarray(wrap_angle(lam)), np.asarray(wrap_angle(deltabar)))
    mag, b = _magnitudes(lam, d)
    # sign of wrap(lam - d) on each branch interior
    up = np.where(d >= 0.0, (b == 1) | (b == 4), (b == 2) | (b == 3))
    sign = np.where(up, 1.0, -1.0)
    return wrap_angle(sign * mag)


def l_inverse(mu, deltabar):
    """Inverse of :func:`l_transform` in its first argument.

    Each branch maps onto a contiguous arc of images, so the branch is read
    off from ``mu`` and the arccos relation is solved for ``cos lam``.
    """
    mu, d = np.broadcast_arrays(np.asarray(wrap_angle(mu)), np.asarray(wrap_angle(deltabar)))
    pos = d >= 0.0
    # image arcs, in increasing order of lam: branch 1 starts at the image of -pi
    start1 = np.where(pos, math.pi - d, -math.pi - d)
    om = np.empty(mu.shape)
    op = np.empty(mu.shape)
    negative = np.empty(mu.shape, dtype=bool)
    # d >= 0: images  b1:[pi-d, pi)  b2:[-pi, -d)  b3:[-d, 0)  b4:[0, pi-d)
    # d <  0: images  b1:[-pi-d, 0)  b2:[0, -d)  b3:[-d, pi)  b4:[-pi, -pi-d)
    cases = (
        (pos & (mu >= start1), _neg_sum, True),
        (pos & (mu < -d), _diff, True),  # cos lam = cos mu - cos d + 1
        (pos & (mu >= -d) & (mu < 0.0), _diff, False),  # cos lam = cos d - cos mu + 1
        (pos & (mu >= 0.0) & (mu < start1), _pos_sum, False),
        (~pos & (mu >= start1) & (mu < 0.0), _pos_sum, True),
        (~pos & (mu >= 0.0) & (mu < -d), _diff, True),  # cos lam = cos d - cos mu + 1
        (~pos & (mu >= -d), _diff, False),  # cos lam = cos mu - cos d + 1
        (~pos & (mu < start1), _neg_sum, False),
    )
    args = (
        (d, mu),
        (mu, d),
        (d, mu),
        (d, mu),
        (d, mu),
        (d, mu),
        (mu, d),
        (d, mu),
    )
    for (m, form, neg), (a, c) in zip(cases, args):
        if np.any(m):
            om[m], op[m] = form(a[m], c[m])
            negative[m] = neg
    mag = _arccos(om, op)
    return wrap_angle(np.where(negative, -mag, mag))


def frame_map(lam_a, setting: ExperimentSetting):
    """Detector-B coordinate of a hidden direction seen at ``lam_a`` by A."""
    return wrap_angle(-np.asarray(l_transform(lam_a, setting.deltabar)))


def linear_transform(lam, deltabar):
    """The rigid-rotation law ``lam - deltabar`` (classical pointer)."""
    return wrap_angle(np.asarray(lam, dtype=float) - deltabar)
