"""Density of hidden configurations, its CDF, and an inverse-CDF sampler.

The density is |sin l| / 4 on [-pi, pi). It is the one density that keeps
``rho(l) dl`` invariant under the frame transformation law.
"""

from __future__ import annotations

import math

import numpy as np

from .rng import RngStream
from .transform import wrap_angle


def density(l):
    l = np.asarray(wrap_angle(l))
    out = 0.25 * np.abs(np.sin(l))
    return float(out) if out.ndim == 0 else out


def cdf(l):
    """Probability mass of [-pi, l).

    Returns ``(1 + cos l)/4`` on the lower half and ``1/2 + (1 - cos l)/4`` on
    the upper half; ``cdf(-pi) == 0``.
    """
    l = np.asarray(wrap_angle(l))
    out = np.where(l < 0.0, 0.25 * (1.0 + np.cos(l)), 0.5 + 0.25 * (1.0 - np.cos(l)))
    return float(out) if out.ndim == 0 else out


def mass(a, b):
    """Probability of [a, b) with ``-pi <= a <= b <= pi``; ``b`` may equal pi.

    Uses the half-angle forms so that tiny intervals do not cancel.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    # split at 0, where |sin| changes sign
    lo = np.minimum(b, 0.0)
    neg = np.where(lo > a, _cos_drop(a, lo), 0.0)
    hi = np.maximum(a, 0.0)
    pos = np.where(b > hi, _cos_drop(hi, b), 0.0)
    out = np.abs(neg) + np.abs(pos)
    return float(out) if out.ndim == 0 else out


def _cos_drop(x, y):
    # (cos x - cos y) / 4 without cancellation
    return 0.5 * np.sin(0.5 * (x + y)) * np.sin(0.5 * (y - x))


def inverse_cdf(u):
    """Quantile function: ``-arccos(4u - 1)`` below the median, ``arccos(3 - 4u)`` above."""
    u = np.asarray(u, dtype=float)
    if np.any((u < 0.0) | (u > 1.0)):
        raise ValueError("u must lie in [0, 1]")
    # arccos(1 - 2t) = 2 asin(sqrt(t)) keeps resolution near u = 0, 1/2, 1
    low = -2.0 * np.arcsin(np.sqrt(np.clip(1.0 - 2.0 * u, 0.0, 1.0)))
    high = 2.0 * np.arcsin(np.sqrt(np.clip(2.0 * u - 1.0, 0.0, 1.0)))
    out = np.where(u < 0.5, low, high)
    out = np.asarray(wrap_angle(out))
    return float(out) if out.ndim == 0 else out


def sample(stream: RngStream, n: int, offset: int = 0) -> np.ndarray:
    """``n`` hidden configurations, one uniform per draw."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return np.asarray(inverse_cdf(stream.uniforms(n, offset)), dtype=float).reshape(n)


def uniform_angles(stream: RngStream, n: int, offset: int = 0) -> np.ndarray:
    """``n`` angles uniform on [-pi, pi)."""
    u = stream.uniforms(n, offset)
    return np.asarray(wrap_angle(-math.pi + 2.0 * math.pi * u)).reshape(n)
