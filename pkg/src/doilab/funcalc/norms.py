"""Sampled sup norms, Littlewood-Paley pieces, Besov and Lambda_omega seminorms.

A *box* is ``(lo, hi)``: the cube ``[lo, hi]^n``.  Sup norms over R^n are
approximated by a dense tensor grid on the box followed by local polishing
of the best grid points; for fields whose frequencies lie on the lattice
``(2 pi / (hi - lo)) Z^n`` the box is a full period and the result is the
global sup up to polishing accuracy.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from ..config import DEFAULTS, Tolerances, points_per_axis
from ..errors import EmptyRange, GridTooCoarse, SamplerUnsupported, ValidationError
from .fields import Sampler, TrigSum
from .filters import band_weight, tail_weight
from .moduli import Modulus

__all__ = [
    "bernstein_check",
    "besov_seminorm",
    "grid_axes",
    "lambda_norm",
    "lp_band",
    "lp_component",
    "lp_tail",
    "lp_tail_check",
    "sample_pairs",
    "sup_norm",
]

Box = tuple[float, float]


def grid_axes(n: int, box: Box, points: int, periodic: bool = True) -> list[np.ndarray]:
    lo, hi = box
    ax = np.linspace(lo, hi, points, endpoint=not periodic)
    return [ax] * n


def _polish(f: TrigSum, starts: np.ndarray, sign: np.ndarray, box: Box) -> float:
    best = 0.0
    for x0, s in zip(starts, sign):
        res = minimize(
            lambda x: -s * f(x[None, :])[0],
            x0,
            jac=lambda x: -s * f.gradient(x[None, :])[0],
            method="L-BFGS-B",
            bounds=[box] * f.n,
        )
        best = max(best, abs(float(f(res.x[None, :])[0])))
    return best


def sup_norm(f, box: Box = (0.0, 2 * math.pi), points: int | None = None, polish: int = 4,
             tol: Tolerances = DEFAULTS) -> float:
    """Approximate ``max |f|`` over the box (dense grid, then local refinement)."""
    n = f.n
    points = points or points_per_axis(n, tol)
    vals = f.on_grid(grid_axes(n, box, points))
    flat = np.abs(vals).ravel()
    best = float(flat.max(initial=0.0))
    if polish and isinstance(f, TrigSum) and f.num_terms and best > 0:
        idx = np.argpartition(flat, -min(polish, flat.size))[-polish:]
        axes = grid_axes(n, box, points)
        starts = np.stack([axes[k][np.unravel_index(idx, vals.shape)[k]] for k in range(n)], axis=1)
        sign = np.sign(vals.ravel()[idx])
        best = max(best, _polish(f, starts, sign, box))
    return best


def bernstein_check(f, alpha: Sequence[int], box: Box = (0.0, 2 * math.pi), points: int | None = None,
                    tol: Tolerances = DEFAULTS) -> float:
    """``sup |D^alpha f| / (sigma^|alpha| sup |f|)``; at most 1 for band-limited f."""
    if not isinstance(f, TrigSum):
        raise SamplerUnsupported("Bernstein ratio needs exact derivatives")
    alpha = tuple(alpha)
    top = sup_norm(f.derivative(alpha), box, points, tol=tol)
    bottom = f.sigma ** sum(alpha) * sup_norm(f, box, points, tol=tol)
    if bottom == 0:
        return 0.0 if top == 0 else math.inf
    return top / bottom


def lp_band(f: TrigSum, l: int) -> TrigSum:
    """Exact ``f * W_l``: each term scaled by ``w(|xi| / 2^l)``."""
    return f.weighted(band_weight(np.linalg.norm(f.freqs, axis=1), l))


def lp_tail(f: TrigSum, m: int) -> TrigSum:
    """Exact ``sum_{l >= m} f * W_l``."""
    return f.weighted(tail_weight(np.linalg.norm(f.freqs, axis=1), m))


def lp_component(f, l: int, box: Box = (0.0, 2 * math.pi), grid_size: int = 256,
                 method: str = "auto") -> np.ndarray:
    """Samples of ``f * W_l`` on the periodic grid of the box.

    ``method="exact"`` scales trigonometric terms; ``"fft"`` filters the
    sampled field in the discrete Fourier domain (the box is taken as one
    period).  ``"auto"`` uses the exact path when available.
    """
    n = f.n
    axes = grid_axes(n, box, grid_size)
    if method == "auto":
        method = "exact" if isinstance(f, TrigSum) else "fft"
    if method == "exact":
        if not isinstance(f, TrigSum):
            raise SamplerUnsupported("exact filtering needs a trigonometric sum")
        return lp_band(f, l).on_grid(axes)
    if method != "fft":
        raise ValidationError(f"unknown method {method!r}")
    L = box[1] - box[0]
    nyquist = math.pi * grid_size / L
    if nyquist < 2.0 ** (l + 1):
        raise GridTooCoarse(f"Nyquist frequency {nyquist:.3g} below band edge 2^{l + 1}")
    vals = f.on_grid(axes)
    k1 = 2 * math.pi * np.fft.fftfreq(grid_size, d=L / grid_size)
    K = np.stack(np.meshgrid(*([k1] * n), indexing="ij"), axis=-1)
    mult = band_weight(np.linalg.norm(K, axis=-1), l)
    return np.real(np.fft.ifftn(np.fft.fftn(vals) * mult))


def besov_seminorm(f: TrigSum, s: float, q: float, l_range: Sequence[int],
                   box: Box = (0.0, 2 * math.pi), points: int | None = None) -> float:
    """``|| {2^{l s} sup |f * W_l|}_{l in l_range} ||_{l^q}`` (q may be inf)."""
    ls = list(l_range)
    if not ls:
        raise EmptyRange("l_range is empty")
    vals = np.array([2.0 ** (l * s) * sup_norm(lp_band(f, l), box, points) for l in ls])
    if math.isinf(q):
        return float(vals.max())
    return float(np.sum(vals ** q) ** (1.0 / q))


def sample_pairs(n: int, count: int, box: Box = (0.0, 2 * math.pi), scales: Box = (1e-3, 4.0),
                 seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Random pairs (x, y) with log-uniform separations in ``scales``."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(box[0], box[1], (count, n))
    d = rng.standard_normal((count, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = np.exp(rng.uniform(math.log(scales[0]), math.log(scales[1]), count))
    return x, x + d * r[:, None]


def lambda_norm(f, omega: Modulus, pairs: tuple[np.ndarray, np.ndarray], polish: int = 0) -> float:
    """``max |f(x) - f(y)| / omega(|x - y|)`` over the given pairs (coincident pairs skipped).

    With ``polish > 0`` the best ``polish`` pairs seed a local maximization
    of the quotient over (x, y); the result can only grow.
    """
    x, y = (np.asarray(p, dtype=float) for p in pairs)
    if x.size == 0:
        raise EmptyRange("no sample pairs")
    x, y = x.reshape(len(x), -1), y.reshape(len(y), -1)
    dist = np.linalg.norm(x - y, axis=1)
    keep = dist > 0
    if not np.any(keep):
        raise EmptyRange("all sample pairs coincide")
    x, y, dist = x[keep], y[keep], dist[keep]
    q = np.abs(f(x) - f(y)) / omega(dist)
    best = float(np.max(q))
    if polish:
        n = x.shape[1]

        def neg(z):
            r = float(np.linalg.norm(z[:n] - z[n:]))
            if r < 1e-12:
                return 0.0
            return -abs(float(f(z[None, :n])[0] - f(z[None, n:])[0])) / float(omega(r))

        for i in np.argsort(q)[-polish:]:
            res = minimize(neg, np.concatenate([x[i], y[i]]), method="L-BFGS-B")
            best = max(best, -float(res.fun))
    return best


def lp_tail_check(f: TrigSum, omega: Modulus, m: int, box: Box = (0.0, 2 * math.pi),
                  pairs=None, lam: float | None = None, points: int | None = None) -> float:
    """``sup |sum_{l > m} f * W_l| / (omega(2^-m) ||f||_{Lambda_omega})``.

    The numerator is the part of f left after removing the filters up to
    level m (the constant term carries no filter weight and is ignored, the
    seminorm being blind to constants).
    """
    if lam is None:
        lam = lambda_norm(f, omega, pairs if pairs is not None else sample_pairs(f.n, 4000))
    high = lp_tail(f, m + 1)
    top = sup_norm(high, box, points) if high.num_terms else 0.0
    if top == 0:
        return 0.0
    return top / (float(omega(np.array([2.0 ** -m]))[0]) * lam)
