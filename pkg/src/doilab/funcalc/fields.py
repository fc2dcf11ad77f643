"""Real scalar fields on R^n: finite trigonometric sums and opaque samplers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from ..errors import InvalidSigma, SamplerUnsupported, ValidationError

__all__ = [
    "Sampler",
    "TrigSum",
    "make_bandlimited",
    "sine_integral_field",
    "sine_integral_1d",
    "as_points",
]


def as_points(x, n: int) -> np.ndarray:
    """Coerce ``x`` to an array of shape (..., n); scalars are allowed when n == 1."""
    x = np.asarray(x, dtype=float)
    if n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != n:
        raise ValidationError(f"points must have trailing dimension {n}, got shape {x.shape}")
    return x


def _pair_check(coeffs: np.ndarray, freqs: np.ndarray, rtol: float = 1e-12) -> None:
    """Every term (c, xi) needs a partner (conj c, -xi) so the sum is real."""
    if len(coeffs) == 0:
        return
    scale = max(np.max(np.abs(coeffs)), 1e-300)
    fscale = max(np.max(np.abs(freqs)), 1.0)
    key = np.round(freqs / (fscale * 1e-12)).astype(np.int64)
    lookup: dict[tuple, complex] = {}
    for k, c in zip(map(tuple, key), coeffs):
        lookup[k] = lookup.get(k, 0) + c
    for k, c in lookup.items():
        partner = lookup.get(tuple(-v for v in k))
        if partner is None or abs(partner - np.conj(c)) > rtol * scale * 10:
            raise ValidationError("trigonometric sum is not real: missing conjugate term for frequency "
                                  f"{np.array(k) * fscale * 1e-12}")


@dataclass(frozen=True, eq=False)
class TrigSum:
    """``f(x) = sum_m c_m exp(i <xi_m, x>)`` with conjugate-paired terms.

    Parameters
    ----------
    coeffs : (M,) complex
    freqs : (M, n) float
    """

    coeffs: np.ndarray
    freqs: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex)).copy()
        xi = np.asarray(self.freqs, dtype=float).copy()
        if xi.ndim == 1:
            xi = xi[:, None] if len(c) == len(xi) and len(c) > 0 else xi[None, :]
        if xi.ndim != 2 or xi.shape[0] != c.shape[0]:
            raise ValidationError(f"freqs shape {xi.shape} does not match {c.shape[0]} coefficients")
        if self.check:
            _pair_check(c, xi)
        c.flags.writeable = False
        xi.flags.writeable = False
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "freqs", xi)

    @classmethod
    def from_real(cls, amplitudes, phases, freqs) -> "TrigSum":
        """Build ``sum_k a_k cos(<xi_k, x> + phi_k)``."""
        a = np.atleast_1d(np.asarray(amplitudes, dtype=float))
        ph = np.broadcast_to(np.asarray(phases, dtype=float), a.shape)
        xi = np.asarray(freqs, dtype=float).reshape(len(a), -1)
        half = 0.5 * a * np.exp(1j * ph)
        return cls(np.concatenate([half, half.conj()]), np.concatenate([xi, -xi]))

    @classmethod
    def constant(cls, value: float, n: int) -> "TrigSum":
        return cls(np.array([complex(value)]), np.zeros((1, n)))

    @classmethod
    def zero(cls, n: int) -> "TrigSum":
        return cls(np.zeros(0, dtype=complex), np.zeros((0, n)))

    @property
    def n(self) -> int:
        return self.freqs.shape[1]

    @property
    def sigma(self) -> float:
        if len(self.coeffs) == 0:
            return 0.0
        return float(np.max(np.linalg.norm(self.freqs, axis=1)))

    @property
    def num_terms(self) -> int:
        return len(self.coeffs)

    def __call__(self, x) -> np.ndarray:
        x = as_points(x, self.n)
        flat = x.reshape(-1, self.n)
        out = np.empty(len(flat))
        step = max(1, (1 << 22) // max(self.num_terms, 1))
        for s in range(0, len(flat), step):
            ph = flat[s:s + step] @ self.freqs.T
            out[s:s + step] = np.real(np.exp(1j * ph) @ self.coeffs)
        return out.reshape(x.shape[:-1])

    def on_grid(self, axes: Sequence[np.ndarray]) -> np.ndarray:
        """Evaluate on the tensor grid ``axes[0] x ... x axes[n-1]`` (separable, fast)."""
        if len(axes) != self.n:
            raise ValidationError(f"need {self.n} axes, got {len(axes)}")
        shape = tuple(len(a) for a in axes)
        if self.num_terms == 0:
            return np.zeros(shape)
        factors = [np.exp(1j * np.outer(self.freqs[:, k], np.asarray(a, dtype=float)))
                   for k, a in enumerate(axes)]
        letters = "abcdefghijkl"[: self.n]
        spec = "m," + ",".join("m" + ch for ch in letters) + "->" + letters
        return np.real(np.einsum(spec, self.coeffs, *factors, optimize=True))

    def derivative(self, alpha: Sequence[int]) -> "TrigSum":
        """Exact ``D^alpha f``, term by term."""
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.n or min(alpha, default=0) < 0:
            raise ValidationError(f"multi-index {alpha} invalid for n={self.n}")
        factor = np.prod((1j * self.freqs) ** np.array(alpha), axis=1)
        return TrigSum(self.coeffs * factor, self.freqs, check=False)

    def gradient(self, x) -> np.ndarray:
        x = as_points(x, self.n)
        ph = x.reshape(-1, self.n) @ self.freqs.T
        g = np.real((np.exp(1j * ph) * self.coeffs) @ (1j * self.freqs))
        return g.reshape(x.shape)

    def dilate(self, s: float) -> "TrigSum":
        """``x -> f(s x)``."""
        return TrigSum(self.coeffs, self.freqs * s, check=False)

    def scale(self, a: float) -> "TrigSum":
        return TrigSum(self.coeffs * a, self.freqs, check=False)

    def weighted(self, weights) -> "TrigSum":
        """Multiply each term by a real weight that depends on |xi| only (keeps pairs real)."""
        w = np.asarray(weights, dtype=float)
        keep = w != 0
        return TrigSum(self.coeffs[keep] * w[keep], self.freqs[keep], check=False)

    def __add__(self, other: "TrigSum") -> "TrigSum":
        if other.n != self.n:
            raise ValidationError("dimension mismatch in sum of fields")
        return TrigSum(np.concatenate([self.coeffs, other.coeffs]),
                       np.concatenate([self.freqs, other.freqs]), check=False)

    def __sub__(self, other: "TrigSum") -> "TrigSum":
        return self + other.scale(-1.0)

    def abs_coeff_sum(self) -> float:
        return float(np.sum(np.abs(self.coeffs)))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "terms": [{"re": float(c.real), "im": float(c.imag), "xi": [float(v) for v in xi]}
                      for c, xi in zip(self.coeffs, self.freqs)],
        }

    @classmethod
    def from_json(cls, data: dict) -> "TrigSum":
        n = int(data["n"])
        terms = data.get("terms", [])
        c = np.array([complex(t["re"], t.get("im", 0.0)) for t in terms], dtype=complex)
        xi = np.array([t["xi"] for t in terms], dtype=float).reshape(len(terms), n)
        return cls(c, xi)


@dataclass(frozen=True)
class Sampler:
    """Opaque function on R^n; operations needing the spectrum raise SamplerUnsupported."""

    n: int
    func: Callable[[np.ndarray], np.ndarray]
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def sigma(self) -> float:
        if "sigma" in self.metadata:
            return float(self.metadata["sigma"])
        raise SamplerUnsupported("sampler has no declared frequency bound")

    def __call__(self, x) -> np.ndarray:
        x = as_points(x, self.n)
        return np.asarray(self.func(x), dtype=float).reshape(x.shape[:-1])

    def on_grid(self, axes: Sequence[np.ndarray]) -> np.ndarray:
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        return self(mesh)

    def derivative(self, alpha):
        raise SamplerUnsupported("exact derivatives need a trigonometric sum")


def make_bandlimited(
    n: int,
    sigma: float,
    num_terms: int,
    seed: int = 0,
    period: float | None = None,
) -> TrigSum:
    """Random real trigonometric sum with every frequency in the closed sigma-ball.

    Frequencies are uniform in the ball; the first lies on its boundary so
    that the returned ``sigma`` matches the request.  With ``period`` the
    frequencies are snapped toward zero onto the lattice ``(2 pi / period) Z^n``;
    the field is then periodic and a sup over one period is the global sup
    (the snapped field's ``sigma`` may fall below the request).
    """
    if not sigma > 0 or not math.isfinite(sigma):
        raise InvalidSigma(f"sigma must be positive and finite, got {sigma}")
    if num_terms < 1:
        raise ValidationError("num_terms must be >= 1")
    rng = np.random.default_rng(seed)
    d = rng.standard_normal((num_terms, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = sigma * rng.random(num_terms) ** (1.0 / n)
    r[0] = sigma
    xi = d * r[:, None]
    if period is not None:
        q = 2 * math.pi / period
        xi = np.trunc(xi / q) * q
    amps = rng.standard_normal(num_terms) / math.sqrt(num_terms)
    phases = rng.uniform(0, 2 * math.pi, num_terms)
    return TrigSum.from_real(amps, phases, xi)


def _gl_nodes(m: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (x + 1), 0.5 * w


def sine_integral_1d(nodes: int = 32) -> TrigSum:
    """Band-limited approximation of ``Si(x) = int_0^1 sin(x u) / u du`` (frequencies in [-1, 1])."""
    u, w = _gl_nodes(nodes)
    return TrigSum.from_real(w / u, -math.pi / 2 * np.ones(nodes), u[:, None])


def sine_integral_field(nodes: int = 32) -> TrigSum:
    """``Si(x1 - x3) sin(x2)`` on R^3 built from the quadrature of ``sine_integral_1d``.

    Uses ``sin a sin b = (cos(a - b) - cos(a + b)) / 2``; all frequencies
    have norm at most sqrt(3).
    """
    u, w = _gl_nodes(nodes)
    a = w / u / 2
    minus = np.stack([u, -np.ones(nodes), -u], axis=1)
    plus = np.stack([u, np.ones(nodes), -u], axis=1)
    return TrigSum.from_real(np.concatenate([a, -a]), np.zeros(2 * nodes), np.concatenate([minus, plus]))
