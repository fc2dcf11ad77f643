"""Moduli of continuity and the integral transforms ``omega*`` and ``omega**``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import ValidationError

__all__ = [
    "Divergent",
    "Modulus",
    "check_modulus",
    "modulus_doublestar",
    "modulus_star",
]


class Divergent(float):
    """Positive infinity carrying the reason the integral diverged."""

    def __new__(cls, reason: str = "tail does not decay"):
        obj = super().__new__(cls, math.inf)
        obj.reason = reason
        return obj

    def __repr__(self) -> str:
        return f"Divergent({self.reason!r})"


@dataclass(frozen=True)
class Modulus:
    """A modulus of continuity ``omega`` on [0, inf), vectorized."""

    func: Callable[[np.ndarray], np.ndarray]
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, t) -> np.ndarray:
        return np.asarray(self.func(np.asarray(t, dtype=float)), dtype=float)

    @classmethod
    def power(cls, alpha: float) -> "Modulus":
        if not 0 < alpha <= 1:
            raise ValidationError(f"power modulus needs 0 < alpha <= 1, got {alpha}")
        return cls(lambda t: np.power(t, alpha), "power", {"alpha": alpha})

    @classmethod
    def truncated_linear(cls, d: float) -> "Modulus":
        if not d > 0:
            raise ValidationError(f"cap must be positive, got {d}")
        return cls(lambda t: np.minimum(t, d), "truncated_linear", {"d": d})

    @classmethod
    def linear(cls) -> "Modulus":
        return cls(lambda t: np.asarray(t, dtype=float), "power", {"alpha": 1.0})

    def label(self) -> str:
        if self.kind == "power":
            return f"t^{self.params['alpha']:g}"
        if self.kind == "truncated_linear":
            return f"min(t,{self.params['d']:g})"
        return self.kind


def check_modulus(omega: Modulus, tmax: float = 10.0, samples: int = 400, seed: int = 0) -> dict:
    """Sampled checks: omega(0) = 0, monotone, subadditive.  Returns the worst defects."""
    rng = np.random.default_rng(seed)
    t = np.sort(rng.uniform(0, tmax, samples))
    vals = omega(t)
    x, y = rng.uniform(0, tmax / 2, (2, samples))
    sub = omega(x + y) - omega(x) - omega(y)
    return {
        "at_zero": float(abs(omega(np.array([0.0]))[0])),
        "monotone_defect": float(max(0.0, -np.min(np.diff(vals)))),
        "subadditive_defect": float(max(0.0, np.max(sub))),
    }


_GL32 = np.polynomial.legendre.leggauss(32)
_GL16 = np.polynomial.legendre.leggauss(16)


def _shell(omega, a: np.ndarray, lo: float, hi: float, depth: int = 0) -> np.ndarray:
    """``int_{a e^lo}^{a e^hi} omega(t)/t^2 dt`` via t = a e^u, adaptive Gauss-Legendre."""

    def rule(nodes):
        x, w = nodes
        u = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        t = a[:, None] * np.exp(u)[None, :]
        return 0.5 * (hi - lo) * (omega(t) / t) @ w

    fine, coarse = rule(_GL32), rule(_GL16)
    err = np.abs(fine - coarse)
    bad = err > 1e-11 * np.maximum(np.abs(fine), 1e-300)
    if depth >= 30 or not np.any(bad):
        return fine
    mid = 0.5 * (lo + hi)
    out = fine.copy()
    sub = a[bad]
    out[bad] = _shell(omega, sub, lo, mid, depth + 1) + _shell(omega, sub, mid, hi, depth + 1)
    return out


def _star(omega, delta, max_shells: int = 64, stop_rtol: float = 1e-14, geom_margin: float = 1e-3):
    """Vectorized ``delta * int_delta^inf omega(t) / t^2 dt`` over dyadic shells."""
    d = np.atleast_1d(np.asarray(delta, dtype=float))
    if np.any(~(d > 0)):
        raise ValidationError("delta must be positive")
    total = np.zeros_like(d)
    prev = np.zeros_like(d)
    last = np.zeros_like(d)
    active = np.ones(d.shape, dtype=bool)
    ln2 = math.log(2.0)
    for k in range(max_shells):
        if not np.any(active):
            break
        s = _shell(omega, d[active] * 2.0 ** k, 0.0, ln2)
        prev[active], last[active] = last[active], s
        total[active] += s
        done = np.zeros_like(active)
        done[active] = s <= stop_rtol * total[active]
        active &= ~done
    result = [float(x) for x in d * total]
    for i in np.nonzero(active)[0]:
        r = last[i] / prev[i] if prev[i] > 0 else 1.0
        if r < 1.0 - geom_margin:
            result[i] = float(d[i] * (total[i] + last[i] * r / (1.0 - r)))
        else:
            result[i] = Divergent(f"dyadic shells stop shrinking (ratio {r:.6f})")
    return result


def modulus_star(omega: Modulus, delta):
    """``omega*(delta) = delta * int_delta^inf omega(t) / t^2 dt``.

    The integral is summed over dyadic shells ``[delta 2^k, delta 2^{k+1}]``.
    Summation stops when a shell adds less than 1e-14 of the total; after 64
    shells a geometric tail is extrapolated from the last shell ratio if it
    is clearly below 1, otherwise a :class:`Divergent` infinity is returned.
    Scalars in, scalar out; arrays in, list out.
    """
    out = _star(omega, delta)
    return out[0] if np.ndim(delta) == 0 else out


def _as_modulus_of_star(omega: Modulus) -> Modulus:
    def f(t):
        t = np.asarray(t, dtype=float)
        vals = np.array(_star(omega, t.ravel()), dtype=float)
        return vals.reshape(t.shape)

    return Modulus(f, f"star({omega.kind})", dict(omega.params))


def modulus_doublestar(omega: Modulus, delta):
    """``(omega*)*``; divergent whenever ``omega*`` is."""
    probe = _star(omega, np.array([1.0]))[0]
    if isinstance(probe, Divergent):
        out = Divergent("inner transform diverges")
        return out if np.ndim(delta) == 0 else [out] * np.size(delta)
    out = _star(_as_modulus_of_star(omega), delta)
    return out[0] if np.ndim(delta) == 0 else out
