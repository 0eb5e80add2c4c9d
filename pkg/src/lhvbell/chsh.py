"""CHSH combination, per-configuration values, the frame cycle and setting composition.

All angles are measured from detector A, which serves as the common
reference for the four CHSH experiments: B sits at ``delta1`` or ``delta2``
from A, and the alternative A orientation is rotated by ``delta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import distribution
from .experiment import CorrelationEstimate, ExperimentSetting, exact_correlation, response
from .rng import RngStream, map_chunks
from .transform import circle_distance, l_transform, wrap_angle

TSIRELSON = 2.0 * math.sqrt(2.0)

TransformLaw = Callable[[object, object], object]


@dataclass(frozen=True)
class ChshSettings:
    delta1: float
    delta2: float
    delta: float
    phi: float = 0.0

    def __post_init__(self):
        for name in ("delta1", "delta2", "delta", "phi"):
            object.__setattr__(self, name, wrap_angle(getattr(self, name)))

    def relative_angles(self) -> tuple[float, float, float, float]:
        """Effective parameters of the four terms, in CHSH order, each shifted by ``-phi``."""
        d1, d2, dd, phi = self.delta1, self.delta2, self.delta, self.phi
        return (
            wrap_angle(d1 - phi),
            wrap_angle(d2 - phi),
            wrap_angle(d1 - dd - phi),
            wrap_angle(d2 - dd - phi),
        )


@dataclass(frozen=True)
class CycleParams:
    d1: float
    d2: float
    dd: float

    def __post_init__(self):
        for name in ("d1", "d2", "dd"):
            object.__setattr__(self, name, wrap_angle(getattr(self, name)))


def chsh_statistic(e1: float, e2: float, e3: float, e4: float) -> float:
    """Signed combination ``e1 + e2 + e3 - e4``."""
    for e in (e1, e2, e3, e4):
        if not -1.0 <= e <= 1.0:
            raise ValueError(f"correlation {e} outside [-1, 1]")
    return e1 + e2 + e3 - e4


def model_chsh(settings: ChshSettings) -> float:
    return chsh_statistic(*(exact_correlation(ExperimentSetting(d)) for d in settings.relative_angles()))


def model_chsh_grid(delta1, delta2, delta, phi=0.0) -> np.ndarray:
    """Vectorised :func:`model_chsh` over broadcastable angle arrays."""
    d1, d2, dd, phi = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (delta1, delta2, delta, phi)))
    return -np.cos(d1 - phi) - np.cos(d2 - phi) - np.cos(d1 - dd - phi) + np.cos(d2 - dd - phi)


def _check_binary(*values) -> None:
    for v in values:
        if np.any((np.asarray(v) != 1) & (np.asarray(v) != -1)):
            raise ValueError("outcomes must be +1 or -1")


def per_config_classical(s_a, s_a2, s_b, s_b2):
    """``s_a (s_b + s_b2) + s_a2 (s_b - s_b2)``; always +-2."""
    _check_binary(s_a, s_a2, s_b, s_b2)
    out = np.asarray(s_a) * (np.asarray(s_b) + s_b2) + np.asarray(s_a2) * (np.asarray(s_b) - s_b2)
    return int(out) if out.ndim == 0 else out


def per_config_model(lam_a, settings: ChshSettings):
    """Value of ``s(lam_A) * (s(l_B) + s(l'_B) + s(l''_B) - s(l'''_B))`` in the model.

    Each B coordinate is ``-L(lam_A; angle)`` for the four relative angles.
    The value lies in {-4, -2, 0, 2, 4}.
    """
    lam = np.asarray(wrap_angle(lam_a))
    b = [response(-np.asarray(l_transform(lam, d))) for d in settings.relative_angles()]
    out = response(lam) * (b[0] + b[1] + b[2] - b[3])
    return int(out) if np.ndim(out) == 0 else out


def per_config_breakpoints(settings: ChshSettings) -> np.ndarray:
    """Sorted angles in [-pi, pi] where :func:`per_config_model` can jump.

    Detector A flips at 0 and -pi; each B term flips where its image is 0 or
    pi, i.e. at ``d`` and ``d + pi``.
    """
    pts = [-math.pi, 0.0, math.pi]
    for d in settings.relative_angles():
        pts.extend([d, wrap_angle(d + math.pi)])
    return np.unique(np.asarray(pts, dtype=float))


def per_config_histogram(settings: ChshSettings) -> dict[int, float]:
    """Probability of each per-configuration value under the hidden density.

    The value is constant between consecutive breakpoints, so every piece is
    weighted by its exact probability mass.
    """
    pts = per_config_breakpoints(settings)
    lo, hi = pts[:-1], pts[1:]
    keep = hi > lo
    lo, hi = lo[keep], hi[keep]
    vals = per_config_model(0.5 * (lo + hi), settings)
    weights = distribution.mass(lo, hi)
    hist = {v: 0.0 for v in (-4, -2, 0, 2, 4)}
    for v, w in zip(np.atleast_1d(vals), np.atleast_1d(weights)):
        hist[int(v)] += float(w)
    return hist


def per_config_quadrature(settings: ChshSettings, n: int = 1_000_000) -> float:
    """Density-weighted mean of :func:`per_config_model` on an ``n``-cell grid.

    Grid cells are split at the breakpoints and weighted by their exact mass,
    which makes the rule exact for this piecewise-constant integrand.
    """
    grid = np.linspace(-math.pi, math.pi, n + 1)
    pts = np.union1d(grid, per_config_breakpoints(settings))
    lo, hi = pts[:-1], pts[1:]
    keep = hi > lo
    lo, hi = lo[keep], hi[keep]
    vals = per_config_model(0.5 * (lo + hi), settings)
    w = distribution.mass(lo, hi)
    return float(np.sum(vals * w) / np.sum(w))


def classical_chsh_mc(settings: ChshSettings, n: int, stream: RngStream, workers: int = 1) -> CorrelationEstimate:
    """CHSH combination of the rigid-pointer model, estimated from ``n`` draws.

    A single lab-frame pointer ``lam`` (uniform) feeds all four responses:
    A reads ``lam``, A' reads ``lam - delta``, B and B' read ``-(lam - delta_i)``.
    The returned ``stderr`` is the sample standard error of the +-2 values.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    d1, d2 = settings.relative_angles()[:2]
    dd = settings.delta

    def chunk(lo, hi):
        lam = distribution.uniform_angles(stream, hi - lo, offset=lo)
        s_a = response(lam)
        s_a2 = response(lam - dd)
        s_b = response(-(lam - d1))
        s_b2 = response(-(lam - d2))
        v = per_config_classical(s_a, s_a2, s_b, s_b2)
        return int(np.sum(v)), int(np.sum(v * v))

    parts = map_chunks(n, chunk, workers)
    total = sum(p[0] for p in parts)
    sq = sum(p[1] for p in parts)
    mean = total / n
    var = max(0.0, sq / n - mean * mean)
    return CorrelationEstimate(mean, math.sqrt(var / n), n)


def _minus(law: TransformLaw, lam, d):
    return wrap_angle(-np.asarray(law(lam, wrap_angle(d))))


def holonomy_cycle(lam, params: CycleParams, law: TransformLaw = l_transform):
    """Push ``lam`` through the four sign-flipped frame maps of the CHSH loop.

    Applied right to left: parameters ``d1``, ``d1 - dd``, ``d2 - dd``, ``d2``.
    With the rigid law ``lam - d`` the loop closes exactly.
    """
    x = _minus(law, lam, params.d1)
    x = _minus(law, x, params.d1 - params.dd)
    x = _minus(law, x, params.d2 - params.dd)
    return _minus(law, x, params.d2)


@dataclass(frozen=True)
class PhaseProfile:
    lambdas: np.ndarray
    defects: np.ndarray

    @property
    def max_defect(self) -> float:
        return float(np.max(self.defects))


def geometric_phase_profile(params: CycleParams, grid_n: int, law: TransformLaw = l_transform) -> PhaseProfile:
    """Circle distance between ``lam`` and its image after one cycle, on a uniform grid."""
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    lam = -math.pi + 2.0 * math.pi * np.arange(grid_n) / grid_n
    defects = np.asarray(circle_distance(holonomy_cycle(lam, params, law), lam))
    return PhaseProfile(lam, defects)


def compose_settings(delta_a: float, delta_b: float) -> float:
    return wrap_angle(delta_a + delta_b)


def rotate_setting(setting: ExperimentSetting, extra: float) -> ExperimentSetting:
    """Rotate the detectors by ``extra`` further, taking ``setting`` as the new reference.

    Relative to ``setting`` the source looks like phase ``phi - delta``, so
    the result carries relative angle ``extra`` and that phase; its effective
    parameter is ``extra + delta - phi``.
    """
    return ExperimentSetting(extra, wrap_angle(setting.phi - setting.delta))
