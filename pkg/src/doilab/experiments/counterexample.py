"""Numerical diagnostics for the three-variable field ``f(x) = g(x1 - x3) sin x2``, ``g = Si``.

The second chain divided difference of f is not a Schur multiplier while the
first and third are.  Unboundedness cannot be observed directly, so the
diagnostics track quantities that must grow without bound for the second
and stay bounded for the other two:

(a) the Fourier transform of g behaves like ``c / t`` near zero;
(b) finite sections of the convolution kernel ``g(u - v)`` on ``[-L, L]``
    have operator norms that keep growing as L doubles;
(c) for product test kernels
    ``k_n = kappa(y1 - x3) chi_n(x3, y1) xi(x1, y3) eta(x2, y2)`` the ratio
    ``||D_j f * k_n|| / ||k_n||`` of discretized operator norms grows with
    n for j = 2 and saturates for j = 1, 3.

Surrogates: ``kappa(u) = sin(u) / (pi u)`` (a band-limited smooth window
whose Fourier transform is the indicator of [-1, 1]), ``chi_n`` the
indicator of ``[-n, n]^2``, ``xi`` and ``eta`` narrow Gaussians centred at
the origin.  The surrogate choice is recorded in every report.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy.special import sici

from ..errors import GridTooCoarse, ValidationError
from .report import ExperimentReport

__all__ = [
    "counterexample_d2f",
    "fourier_exponent",
    "g_sanity",
    "positive_multiplier_check_3d",
    "section_norms",
]

SURROGATES = {
    "kappa": "sin(u)/(pi u)",
    "chi_n": "indicator of [-n, n]^2 in (x3, y1)",
    "xi": "exp(-(x1^2 + y3^2)/2)",
    "eta": "exp(-(x2^2 + y2^2)/(2 * 0.05^2))",
    "section_kappa": "1 on the window",
}
_MAX_STEP = 0.5


def g(x) -> np.ndarray:
    """``int_0^x sin(t)/t dt``."""
    return sici(np.asarray(x, dtype=float))[0]


def _g_quotient(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``(g(a) - g(b)) / (a - b)``, with ``g'`` at coincidence."""
    d = a - b
    close = np.abs(d) < 1e-8
    safe = np.where(close, 1.0, d)
    mid = 0.5 * (a + b)
    return np.where(close, np.sinc(mid / math.pi), (g(a) - g(b)) / safe)


def _kappa(u: np.ndarray) -> np.ndarray:
    return np.sinc(u / math.pi) / math.pi


def _check_sizes(sizes: Sequence[float], h: float) -> list[float]:
    sizes = [float(s) for s in sizes]
    if len(sizes) < 2 or any(b <= a for a, b in zip(sizes, sizes[1:])) or sizes[0] <= 0:
        raise ValidationError(f"sizes must be positive and strictly increasing, got {sizes}")
    if not 0 < h <= _MAX_STEP:
        raise GridTooCoarse(f"grid step {h} exceeds {_MAX_STEP}; sin oscillations are under-resolved")
    return sizes


def _slope(xs, ys) -> float:
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def g_sanity(samples: int = 4001, reach: float = 200.0) -> dict:
    """Oddness defect and ``max |g| / g(pi)`` on a symmetric grid (the latter should be 1)."""
    x = np.linspace(-reach, reach, samples)
    vals = g(x)
    return {"odd_defect": float(np.max(np.abs(vals + vals[::-1]))),
            "sup_over_g_pi": float(np.max(np.abs(vals)) / g(math.pi))}


def fourier_exponent(t_range: tuple[float, float] = (0.05, 0.3), points: int = 12, width: float = 400.0,
                     step: float = 0.05) -> dict:
    """Fit ``log |F g(t)|`` against ``log t`` using a Gaussian-windowed transform.

    ``F g(t) = -2i int_0^inf g(x) sin(t x) exp(-(x/width)^2) dx`` by the
    trapezoid rule; for ``1/width << t < 1`` this is close to ``-i pi / t``.
    """
    if step > _MAX_STEP:
        raise GridTooCoarse(f"step {step} exceeds {_MAX_STEP}")
    x = np.arange(0.0, 6 * width, step)
    wg = g(x) * np.exp(-(x / width) ** 2)
    ts = np.geomspace(t_range[0], t_range[1], points)
    vals = np.array([2 * np.trapezoid(wg * np.sin(t * x), x) for t in ts])
    return {"t": ts, "abs_ft": np.abs(vals), "exponent": _slope(ts, np.abs(vals)),
            "pi_t_rel_err": float(np.max(np.abs(np.abs(vals) * ts / math.pi - 1)))}


def _section(kern, half: float, h: float) -> float:
    u = np.arange(-half, half + h / 2, h)
    return float(np.linalg.norm(kern(u[None, :] - u[:, None]) * h, 2))


def section_norms(sizes: Sequence[float] = (4, 8, 16, 32), h: float = 0.25) -> list[float]:
    """Operator norms of the discretized convolution by g on ``[-L, L]``."""
    sizes = _check_sizes(sizes, h)
    return [_section(g, L, h) for L in sizes]


def _eta_factor(width: float = 0.05, h: float = 0.01, reach: float = 0.25) -> float:
    """``||q * eta|| / ||eta||`` with ``q`` the sine quotient in (x2, y2); close to 1 for a narrow eta."""
    u = np.arange(-reach, reach + h / 2, h)
    X, Y = np.meshgrid(u, u, indexing="ij")
    eta = np.exp(-(X ** 2 + Y ** 2) / (2 * width ** 2))
    d = X - Y
    close = np.abs(d) < 1e-12
    q = np.where(close, np.cos(X), (np.sin(X) - np.sin(Y)) / np.where(close, 1.0, d))
    return float(np.linalg.norm(q * eta, 2) / np.linalg.norm(eta, 2))


def _d2_ratio(n: float, h: float) -> float:
    """Variables (x3; y1) only: the xi and eta factors of k_n cancel or are recorded separately."""
    return _section(lambda u: g(u) * _kappa(u), n, h) / _section(_kappa, n, h)


def _d13_ratio(which: int, n: float, h: float, reach: float = 4.0) -> float:
    """Rows (x1, x3), columns (y1, y3); the x2/y2 factor is a bounded rank-one multiplier."""
    x1 = np.arange(-reach, reach + h / 2, h)
    x3 = np.arange(-n, n + h / 2, h)
    X1, X3, Y1, Y3 = np.meshgrid(x1, x3, x3, x1, indexing="ij")
    kn = _kappa(Y1 - X3) * np.exp(-(X1 ** 2 + Y3 ** 2) / 2)
    if which == 1:
        m = _g_quotient(X1 - X3, Y1 - X3)
    else:
        m = -_g_quotient(Y1 - X3, Y1 - Y3)
    N = len(x1) * len(x3)
    return float(np.linalg.norm((m * kn).reshape(N, N), 2) / np.linalg.norm(kn.reshape(N, N), 2))


def counterexample_d2f(sizes: Sequence[float] = (4, 8, 16, 32), h: float = 0.25,
                       section_sizes: Sequence[float] | None = None) -> ExperimentReport:
    """Diagnostics (a), (b), (c) for the second chain divided difference."""
    sizes = _check_sizes(sizes, h)
    section_sizes = _check_sizes(section_sizes or sizes, h)
    ft = fourier_exponent()
    rows = [{"diagnostic": "fourier", "variant": "g", "size": float(t), "value": float(v), "ratio": math.nan}
            for t, v in zip(ft["t"], ft["abs_ft"])]
    sec = section_norms(section_sizes, h)
    rows += [{"diagnostic": "section", "variant": "g", "size": L, "value": v, "ratio": v / sec[0]}
             for L, v in zip(section_sizes, sec)]
    eta = _eta_factor()
    d2 = [_d2_ratio(n, h) * eta for n in sizes]
    rows += [{"diagnostic": "schur", "variant": "D2", "size": n, "value": v, "ratio": v / d2[0]}
             for n, v in zip(sizes, d2)]
    rep = ExperimentReport("counterexample_d2f", {"sizes": sizes, "h": h, "section_sizes": section_sizes,
                                                  "surrogates": SURROGATES},
                           ["diagnostic", "variant", "size", "value", "ratio"], rows)
    rep.summary = {"fourier_exponent": ft["exponent"], "fourier_pi_t_rel_err": ft["pi_t_rel_err"],
                   "section_doubling": [b / a for a, b in zip(sec, sec[1:])],
                   "d2_growth": d2[-1] / d2[0], "d2_slope": _slope(sizes, d2), "eta_factor": eta,
                   "g_sanity": g_sanity(), "surrogates": SURROGATES}
    return rep


def positive_multiplier_check_3d(sizes: Sequence[float] = (4, 8, 16, 32), h: float = 0.5,
                                 d2_h: float = 0.25) -> ExperimentReport:
    """Diagnostic (c) for the first and third chain divided differences, with the contrast against D2."""
    sizes = _check_sizes(sizes, h)
    rows, summary = [], {}
    for which in (1, 3):
        vals = [_d13_ratio(which, n, h) for n in sizes]
        rows += [{"diagnostic": "schur", "variant": f"D{which}", "size": n, "value": v, "ratio": v / vals[0]}
                 for n, v in zip(sizes, vals)]
        summary[f"d{which}_spread"] = max(vals) / min(vals)
        summary[f"d{which}_slope"] = _slope(sizes, vals)
    eta = _eta_factor()
    d2 = [_d2_ratio(n, d2_h) * eta for n in _check_sizes(sizes, d2_h)]
    summary["d2_growth"] = d2[-1] / d2[0]
    summary["d2_slope"] = _slope(sizes, d2)
    summary["contrast"] = summary["d2_slope"] - summary["d1_slope"]
    summary["surrogates"] = SURROGATES
    rep = ExperimentReport("positive_multiplier_check_3d", {"sizes": sizes, "h": h, "d2_h": d2_h,
                                                            "surrogates": SURROGATES},
                           ["diagnostic", "variant", "size", "value", "ratio"], rows)
    rep.summary = summary
    return rep
