"""Detector responses, pair simulation and correlation estimators.

Two source models live here:

* the entangled model, where detector B reads the hidden direction through
  the nonlinear frame map and the density is |sin l| / 4;
* a rigid classical pointer, uniform on the circle, whose B coordinate is
  ``-(lam - deltabar)``. It is gauge symmetric and therefore obeys CHSH.

Monte Carlo estimators draw from an :class:`~lhvbell.rng.RngStream` in
fixed chunks so results do not depend on the number of worker threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import distribution
from .rng import RngStream, map_chunks
from .transform import ExperimentSetting, frame_map, l_transform, wrap_angle


@dataclass(frozen=True)
class JointDistribution:
    p_pp: float
    p_pm: float
    p_mp: float
    p_mm: float

    def __post_init__(self):
        probs = self.as_array()
        if np.any(probs < 0.0) or np.any(probs > 1.0) or abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError(f"not a probability distribution: {probs}")

    def as_array(self) -> np.ndarray:
        return np.array([self.p_pp, self.p_pm, self.p_mp, self.p_mm])

    @property
    def correlation(self) -> float:
        return self.p_pp + self.p_mm - self.p_pm - self.p_mp


@dataclass(frozen=True)
class CorrelationEstimate:
    mean: float
    stderr: float
    n: int

    @classmethod
    def from_sum(cls, total: int, n: int) -> "CorrelationEstimate":
        # binary products: variance is exactly 1 - mean^2
        mean = total / n
        return cls(mean, math.sqrt(max(0.0, 1.0 - mean * mean) / n), n)


def response(l):
    """+1 on [0, pi), -1 on [-pi, 0)."""
    out = np.where(np.asarray(wrap_angle(l)) >= 0.0, 1, -1)
    return int(out) if out.ndim == 0 else out


def simulate_pair(lam_a, setting: ExperimentSetting):
    """Local outcomes ``(s(lam_A), s(lam_B))`` for one or many hidden directions."""
    return response(lam_a), response(frame_map(lam_a, setting))


def partition_outcome(lam_a, deltabar: float):
    """Outcome pair predicted by the four-block partition of the circle.

    Written for ``deltabar`` in [0, pi): [0, d) -> (+,+), [d, pi) -> (+,-),
    [d-pi, 0) -> (-,+), [-pi, d-pi) -> (-,-).
    """
    lam = np.asarray(wrap_angle(lam_a))
    if not 0.0 <= deltabar < math.pi:
        raise ValueError("partition is stated for deltabar in [0, pi)")
    s_a = np.where(lam >= 0.0, 1, -1)
    s_b = np.where(lam >= 0.0, np.where(lam < deltabar, 1, -1), np.where(lam >= deltabar - math.pi, 1, -1))
    return s_a, s_b


def joint_probabilities(setting: ExperimentSetting) -> JointDistribution:
    c = math.cos(setting.deltabar)
    same = 0.25 * (1.0 - c)
    diff = 0.25 * (1.0 + c)
    return JointDistribution(same, diff, diff, same)


def exact_correlation(setting: ExperimentSetting) -> float:
    """``p(++) + p(--) - p(+-) - p(-+)``, which equals ``-cos(delta - phi)``."""
    return joint_probabilities(setting).correlation


def _check_n(n: int) -> None:
    if n < 1:
        raise ValueError("n must be at least 1")


def mc_counts(setting: ExperimentSetting, n: int, stream: RngStream, workers: int = 1) -> np.ndarray:
    """Counts of (++, +-, -+, --) over ``n`` simulated realizations."""
    _check_n(n)

    def chunk(lo, hi):
        s_a, s_b = simulate_pair(distribution.sample(stream, hi - lo, offset=lo), setting)
        idx = (1 - s_a) + (1 - s_b) // 2
        return np.bincount(idx, minlength=4)

    return np.sum(map_chunks(n, chunk, workers), axis=0)


def mc_correlation(
    setting: ExperimentSetting, n: int, stream: RngStream, workers: int = 1
) -> CorrelationEstimate:
    pp, pm, mp, mm = (int(c) for c in mc_counts(setting, n, stream, workers))
    return CorrelationEstimate.from_sum(pp + mm - pm - mp, n)


def classical_simulate_pair(lam, deltabar):
    """Outcomes of the rigid-pointer model: B sees ``-(lam - deltabar)``."""
    lam_b = wrap_angle(-(np.asarray(lam, dtype=float) - deltabar))
    return response(lam), response(lam_b)


def classical_correlation(deltabar) -> float:
    """``2|deltabar|/pi - 1`` for the uniform rigid pointer."""
    d = np.abs(np.asarray(wrap_angle(deltabar)))
    out = 2.0 * d / math.pi - 1.0
    return float(out) if out.ndim == 0 else out


def classical_mc_correlation(deltabar: float, n: int, stream: RngStream, workers: int = 1) -> CorrelationEstimate:
    _check_n(n)

    def chunk(lo, hi):
        s_a, s_b = classical_simulate_pair(distribution.uniform_angles(stream, hi - lo, offset=lo), deltabar)
        return int(np.sum(s_a * s_b))

    return CorrelationEstimate.from_sum(sum(map_chunks(n, chunk, workers)), n)


def incoherent_correlation(delta: float, n: int, stream: RngStream, workers: int = 1) -> CorrelationEstimate:
    """Correlation when every realization carries its own uniform source phase.

    Draw ``i`` uses stream positions ``2i`` (hidden direction) and ``2i + 1``
    (phase).
    """
    _check_n(n)
    delta = wrap_angle(delta)

    def chunk(lo, hi):
        u = stream.uniforms(2 * (hi - lo), offset=2 * lo)
        lam = np.asarray(distribution.inverse_cdf(u[0::2])).reshape(-1)
        phi = -math.pi + 2.0 * math.pi * u[1::2]
        deltabar = np.asarray(wrap_angle(delta - phi))
        s_b = response(-np.asarray(l_transform(lam, deltabar)))
        return int(np.sum(response(lam) * s_b))

    return CorrelationEstimate.from_sum(sum(map_chunks(n, chunk, workers)), n)

