"""Littlewood-Paley filter bank and the smooth cutoffs used by the multiplier construction.

Everything is built from one flat smoothstep ``S``: infinitely smooth,
``S = 0`` on (-inf, 0], ``S = 1`` on [1, inf), every derivative vanishing at
both endpoints, and ``S(x) + S(1 - x) = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FilterBank",
    "band_weight",
    "cutoff_omega",
    "kappa1",
    "smoothstep",
    "tail_weight",
]


def smoothstep(x) -> np.ndarray:
    """``1 / (1 + exp(1/x - 1/(1-x)))`` on (0, 1), clipped outside."""
    x = np.asarray(x, dtype=float)
    out = np.where(x >= 1.0, 1.0, 0.0)
    inside = (x > 0.0) & (x < 1.0)
    if np.any(inside):
        t = x[inside]
        with np.errstate(over="ignore"):
            out[inside] = 1.0 / (1.0 + np.exp(1.0 / t - 1.0 / (1.0 - t)))
    return out


def _w(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    rise = smoothstep(2.0 * s - 1.0)
    fall = 1.0 - smoothstep(s - 1.0)
    return np.where((s >= 0.5) & (s <= 1.0), rise, np.where((s > 1.0) & (s <= 2.0), fall, 0.0))


@dataclass(frozen=True)
class FilterBank:
    """Dyadic partition of unity on (0, inf).

    ``w`` rises on [1/2, 1] through the profile ``h(s) = S(2s - 1)`` and falls
    on [1, 2] as ``1 - w(s/2)``, so ``sum_l w(t / 2^l) = 1`` for every t > 0
    with at most two nonzero terms.
    """

    def h(self, s) -> np.ndarray:
        return smoothstep(2.0 * np.asarray(s, dtype=float) - 1.0)

    def w(self, s) -> np.ndarray:
        return _w(s)

    def W_hat(self, x, l: int) -> np.ndarray:
        """Fourier side of the l-th filter: ``w(|x| / 2^l)`` for points x of shape (..., n)."""
        x = np.asarray(x, dtype=float)
        r = np.abs(x) if x.ndim <= 1 else np.linalg.norm(x, axis=-1)
        return _w(r / 2.0 ** l)

    def partition_sum(self, t, lmin: int = -60, lmax: int = 60) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        ls = np.arange(lmin, lmax + 1)
        return np.sum(_w(t[..., None] / 2.0 ** ls), axis=-1)

    def levels_touching(self, t: float) -> list[int]:
        """Levels l with ``w(t / 2^l) != 0``."""
        if t <= 0:
            return []
        base = math.floor(math.log2(t))
        return [l for l in (base - 1, base, base + 1, base + 2) if _w(t / 2.0 ** l) != 0]


def band_weight(t, l: int) -> np.ndarray:
    """``w(t / 2^l)``."""
    return _w(np.asarray(t, dtype=float) / 2.0 ** l)


def tail_weight(t, m: int) -> np.ndarray:
    """``sum_{l >= m} w(t / 2^l)``: 1 above 2^m, ``w(t/2^m)`` on [2^{m-1}, 2^m], 0 below."""
    t = np.asarray(t, dtype=float)
    return np.where(t >= 2.0 ** m, 1.0, _w(t / 2.0 ** m) * (t >= 2.0 ** (m - 1)))


def cutoff_omega(t) -> np.ndarray:
    """Radial cutoff: 0 on [-1/2, 1/2], 1 outside [-1, 1], smooth and even."""
    return smoothstep(2.0 * np.abs(np.asarray(t, dtype=float)) - 1.0)


def kappa1(t) -> np.ndarray:
    """Even bump equal to 1 on [-2pi/3, 2pi/3] and 0 outside (-pi, pi)."""
    a = np.abs(np.asarray(t, dtype=float))
    return 1.0 - smoothstep((a - 2 * math.pi / 3) / (math.pi / 3))
