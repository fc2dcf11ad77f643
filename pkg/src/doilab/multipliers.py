"""Dyadic-cube construction of kernels ``Psi_j`` with ``f(x) - f(y) = sum_j (x_j - y_j) Psi_j(x, y)``.

The field is first rescaled to frequency bound 1 (``g(u) = f(u / sigma)``);
all cube geometry lives in the rescaled coordinates and
``Psi_j(x, y) = sigma * Psi_j^g(sigma x, sigma y)``.  A point ``(x, y)`` of
R^{2n} is routed to its maximal admissible cube ``C`` of side ``k = 2^m``:

* ``k = 1``: ``Phi_j(x, y) = int_0^1 (D_j g)((1 - t) x + t y) dt``;
* ``k > 1``: ``(g(x) - g(y)) Xi_j(x, y)`` with
  ``Xi_j = omega(z_j / k) / (z_j sum_i omega(z_i / k))``, ``z = x - y``.

Schur-norm bookkeeping follows the same split.  Unit cubes use the
projective-tensor bound of the closed form.  Larger cubes use
``2 ||g||_inf`` times a Fourier bound for the difference kernel ``Xi_j``
(which depends on ``x - y`` only, is homogeneous of degree -1 in the scale,
and only sees the offset pattern ``|a - b|`` of the cube's factors).
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import beta as beta_fn
from scipy.special import gamma

from .config import DEFAULTS, Tolerances
from .cubes import DyadicCube, Window, maximal_level, route, scan_maximal
from .doi import KernelFunction
from .errors import (
    DecayViolated,
    DenominatorVanished,
    DimensionMismatch,
    GridTooCoarse,
    InvalidSigma,
    QuadratureBudgetExceeded,
    SamplerUnsupported,
    TailFitUnstable,
    UncoveredPoint,
    ValidationError,
)
from .funcalc.fields import Sampler, TrigSum, as_points
from .funcalc.filters import cutoff_omega, kappa1, smoothstep
from .funcalc.norms import sup_norm

__all__ = [
    "MultiplierFamily",
    "SchurNormBound",
    "assemble",
    "build_cutoff",
    "build_phi_unit",
    "build_xi",
    "difference_kernel_bound",
    "fourier_schur_bound",
    "ledger_totals",
    "cube_counts",
    "offset_patterns",
    "phi_tensor_bound",
]


# -- cutoff ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class Cutoff:
    """Even smooth ``omega``: 0 on [-1/2, 1/2], 1 off [-1, 1], monotone on [1/2, 1]."""

    def __call__(self, t) -> np.ndarray:
        return cutoff_omega(t)

    def derivative_table(self, max_order: int, points: int = 1 << 14) -> dict[int, float]:
        """``max |omega^(r)|`` for r = 0..max_order, by spectral differentiation of the rise."""
        # omega is constant off [1/2, 1]; treat one period of the even, periodic extension on [-2, 2]
        x = np.linspace(-2, 2, points, endpoint=False)
        vals = cutoff_omega(x)
        freq = 2 * math.pi * np.fft.fftfreq(points, d=4.0 / points)
        spec = np.fft.fft(vals)
        return {r: float(np.max(np.abs(np.fft.ifft(spec * (1j * freq) ** r)))) for r in range(max_order + 1)}


def build_cutoff() -> Cutoff:
    return Cutoff()


# -- unit cubes ----------------------------------------------------------------------------

def _expc(theta):
    return np.exp(0.5j * theta) * np.sinc(theta / (2 * math.pi))


def _phi_trig(g: TrigSum, j: int):
    xi, c = g.freqs, g.coeffs

    def kern(x, y):
        ph_x = x @ xi.T
        ph_d = (y - x) @ xi.T
        return np.real((np.exp(1j * ph_x) * _expc(ph_d)) @ (c * 1j * xi[:, j]))

    return kern


def _phi_sampler(g: Sampler, j: int, nodes: int, max_nodes: int, rtol: float, h: float = 1e-5):
    n = g.n
    e = np.zeros(n)
    e[j] = h

    def rule(x, y, m):
        t, w = np.polynomial.legendre.leggauss(m)
        t, w = 0.5 * (t + 1), 0.5 * w
        acc = 0.0
        for ti, wi in zip(t, w):
            p = (1 - ti) * x + ti * y
            acc = acc + wi * (g(p + e) - g(p - e)) / (2 * h)
        return acc

    def kern(x, y):
        x, y = np.broadcast_arrays(x, y)
        m = nodes
        coarse = rule(x, y, m // 2)
        fine = rule(x, y, m)
        while np.max(np.abs(fine - coarse), initial=0.0) > rtol * max(np.max(np.abs(fine), initial=0.0), 1.0):
            if 2 * m > max_nodes:
                raise QuadratureBudgetExceeded(f"Gauss-Legendre with {m} nodes did not settle")
            m *= 2
            coarse, fine = fine, rule(x, y, m)
        return fine

    return kern


def build_phi_unit(f, C: DyadicCube | None = None, tol: Tolerances = DEFAULTS,
                   max_nodes: int = 512) -> list[KernelFunction]:
    """Kernels ``Phi_j(x, y) = int_0^1 (D_j f)((1 - t) x + t y) dt``, j = 1..n.

    Trigonometric sums use the closed form
    ``sum c i xi_j e^{i<xi, x>} (e^{i<xi, y - x>} - 1) / (i <xi, y - x>)``,
    which is exact and analytic on the diagonal.  Samplers use Gauss-Legendre
    quadrature of a central-difference derivative, doubling the node count
    until two rules agree.  ``C`` (a unit cube of R^{2n}) is carried as
    metadata; the formulas themselves are global.
    """
    n = f.n
    if C is not None and C.dim != 2 * n:
        raise DimensionMismatch(f"cube lives in R^{C.dim}, field in R^{n}")
    meta = {"cube": C}
    if isinstance(f, TrigSum):
        return [KernelFunction(_phi_trig(f, j), n, f"phi_{j + 1}", cost=max(1, f.num_terms), meta=meta)
                for j in range(n)]
    return [KernelFunction(_phi_sampler(f, j, tol.gauss_legendre_nodes, max_nodes, 1e-10), n,
                           f"phi_{j + 1}", cost=2 * tol.gauss_legendre_nodes, meta=meta)
            for j in range(n)]


def phi_tensor_bound(g: TrigSum) -> np.ndarray:
    """``sum_m |c_m| |xi_mj|`` per j: each ``Phi_j`` is an average over t of rank-one exponentials."""
    return np.abs(g.coeffs) @ np.abs(g.freqs)


# -- larger cubes ----------------------------------------------------------------------------

def _xi_values(z: np.ndarray, k: float, strict: bool = True) -> np.ndarray:
    """``Xi_j(z)`` for all j at once; z has shape (..., n); returns (..., n)."""
    w = cutoff_omega(z / k)
    denom = w.sum(axis=-1, keepdims=True)
    if strict and np.any(denom <= 0):
        raise DenominatorVanished("cutoff sum vanishes: the point is too close to the diagonal for this scale")
    safe_z = np.where(z == 0, 1.0, z)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(z == 0, 0.0, w / (safe_z * np.where(denom > 0, denom, 1.0)))
    return out


def build_xi(C: DyadicCube) -> list[KernelFunction]:
    """Kernels ``Xi_j`` for a cube of side ``k = 2^m > 1``.

    ``sum_j (x_j - y_j) Xi_j = 1`` wherever some gap ``|x_j - y_j|`` exceeds
    ``k / 2``, which holds on ``(3/2)[C]`` for admissible C.  Evaluating at a
    point where every gap is at most ``k / 2`` raises DenominatorVanished.
    """
    if C.level < 1:
        raise ValidationError("Xi kernels are defined for cubes of side > 1")
    if C.dim % 2:
        raise DimensionMismatch("cube must live in R^{2n}")
    n = C.dim // 2
    k = float(2 ** C.level)

    def make(j):
        def kern(x, y):
            x, y = np.broadcast_arrays(x, y)
            return _xi_values(x - y, k)[..., j]

        return KernelFunction(kern, n, f"xi_{j + 1}[k={int(k)}]", meta={"cube": C})

    return [make(j) for j in range(n)]


# -- Fourier bounds --------------------------------------------------------------------------

@dataclass(frozen=True)
class SchurNormBound:
    value: float
    method: str
    cube: DyadicCube | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.value >= 0:
            raise ValidationError(f"a Schur norm bound must be nonnegative, got {self.value}")


def _window_box(width: float, points: int) -> np.ndarray:
    return (np.arange(points) - points // 2) * (width / points)


def _beta1(t: np.ndarray) -> np.ndarray:
    """1 on [-1, 1], 0 off [-1.25, 1.25], smooth."""
    return 1.0 - smoothstep((np.abs(t) - 1.0) / 0.25)


@functools.lru_cache(maxsize=4096)
def _xi_pattern_bounds(pattern: tuple[int, ...], points: int) -> tuple[float, ...]:
    """Fourier l1 bounds of ``Xi_j`` (k = 1) on the difference box ``pattern + (-1, 1)^n``.

    ``beta * Xi_j`` is sampled on one period (side 2.5) of a grid centred on
    the pattern and its discrete Fourier coefficients summed in absolute value.
    """
    n = len(pattern)
    ax = _window_box(2.5, points)
    grids = np.meshgrid(*[ax + p for p in pattern], indexing="ij")
    z = np.stack(grids, axis=-1)
    bump = np.ones(z.shape[:-1])
    for i, p in enumerate(pattern):
        bump = bump * _beta1(z[..., i] - p)
    vals = _xi_values(z, 1.0, strict=False)
    total = points ** n
    return tuple(float(np.sum(np.abs(np.fft.fftn(bump * vals[..., j])))) / total for j in range(n))


def difference_kernel_bound(pattern: Sequence[int], k: float = 1.0, points: int = 64) -> np.ndarray:
    """Schur-norm bounds of ``Xi_j`` (side k) on any cube whose factors sit ``pattern`` cells apart.

    Uses ``Xi_j^(k)(z) = Xi_j^(1)(z / k) / k`` and invariance of the bound
    under coordinate sign flips, so only ``|pattern|`` at k = 1 is computed.
    """
    pat = tuple(int(abs(p)) for p in pattern)
    if max(pat) < 2:
        raise DenominatorVanished(f"offset pattern {tuple(pattern)} is not admissible")
    return np.array(_xi_pattern_bounds(pat, points)) / k


def _kappa(u: np.ndarray) -> np.ndarray:
    out = np.ones(u.shape[:-1])
    for i in range(u.shape[-1]):
        out = out * kappa1(u[..., i])
    return out


def _lattice_ball_volume(n: int) -> float:
    """Volume of ``{(r, s) in R^n x R^n : |r| + |s| <= 1}``."""
    unit = math.pi ** (n / 2) / gamma(n / 2 + 1)
    return unit ** 2 * n * n * beta_fn(n, n + 1)


def fourier_schur_bound(kernel: KernelFunction, cube: DyadicCube, radius: int | None = None,
                        points: int | None = None, max_points: int = 1 << 21,
                        tol: Tolerances = DEFAULTS) -> SchurNormBound:
    """Fourier-series bound on the Schur norm of a kernel restricted to a cube of R^{2n}.

    The cube ``C = P x Q`` (side L, centre c) is mapped affinely by
    ``u = (x - c) 4 pi / (3 L)`` so that C becomes ``[-2pi/3, 2pi/3]^{2n}`` and
    ``(3/2)[C]`` becomes ``[-pi, pi]^{2n}``.  ``kappa * Psi`` is then a smooth
    periodic function equal to Psi on C; its coefficients ``b_{r,s}`` give
    ``Psi(x, y) = sum b_{r,s} e^{i<r,u>} e^{i<s,v>}`` on C and hence the bound
    ``sum |b_{r,s}|``.  Coefficients with ``|r| + |s| <= radius`` are summed
    exactly; beyond the radius a tail ``C_fit rho^{-2n-2}`` is integrated,
    with ``C_fit`` the largest ``|b| rho^{2n+2}`` seen on ``[radius/2, radius]``.
    The result also carries the table of ``(4pi/3)^r max_C |d^r Psi / du_i^r|``
    for axis-aligned derivatives of order r <= 2n + 2.
    """
    n = kernel.n
    if cube.dim != 2 * n:
        raise DimensionMismatch(f"cube lives in R^{cube.dim}, kernel in R^{2 * n}")
    radius = tol.fourier_radius if radius is None else radius
    if points is None:
        points = 2 * radius + 16
        points += points % 2
    if points <= 2 * radius:
        raise GridTooCoarse(f"{points} points per axis cannot resolve radius {radius}")
    if points ** (2 * n) > max_points:
        raise GridTooCoarse(f"grid of {points}^{2 * n} points exceeds the budget {max_points}")
    L = float(cube.side)
    c = np.array([float(v) + L / 2 for v in cube.lo])
    u1 = -math.pi + 2 * math.pi * np.arange(points) / points
    U = np.stack(np.meshgrid(*([u1] * (2 * n)), indexing="ij"), axis=-1)
    X = c + U * (3 * L / (4 * math.pi))
    kap = _kappa(U)
    inside = kap > 0
    vals = np.zeros(U.shape[:-1], dtype=complex)
    pts = X[inside]
    vals[inside] = kernel(pts[:, :n], pts[:, n:])
    if not np.all(np.isfinite(vals)):
        raise DenominatorVanished("kernel is not finite on (3/2)[C]")
    spec = np.fft.fftn(kap * vals) / points ** (2 * n)
    freqs = np.fft.fftfreq(points, d=1.0 / points)
    R = np.stack(np.meshgrid(*([freqs] * (2 * n)), indexing="ij"), axis=-1)
    rho = np.linalg.norm(R[..., :n], axis=-1) + np.linalg.norm(R[..., n:], axis=-1)
    mag = np.abs(spec)
    head = float(mag[rho <= radius].sum())
    band = (rho >= radius / 2) & (rho <= radius) & (rho > 0)
    decay = 2 * n + 2
    c_fit = float(np.max(mag[band] * rho[band] ** decay)) if np.any(band) else 0.0
    tail = c_fit * n * _lattice_ball_volume(n) / radius ** 2
    if not (math.isfinite(tail) and math.isfinite(head)):
        raise TailFitUnstable("non-finite coefficient sums")
    slope = _shell_slope(mag, rho, radius)
    if head > 0 and tail > head:
        raise TailFitUnstable(f"tail estimate {tail:.3g} exceeds the resolved sum {head:.3g}; "
                              "raise the radius")
    table = {}
    for r in range(2 * n + 3):
        best = 0.0
        for axis in range(2 * n):
            mult = (1j * R[..., axis]) ** r
            d = np.fft.ifftn(spec * mult) * points ** (2 * n)
            core = np.all(np.abs(U) <= 2 * math.pi / 3, axis=-1)
            best = max(best, float(np.max(np.abs(d[core]))))
        table[r] = best * (4 * math.pi / 3) ** r * (3 / (4 * math.pi)) ** r
    return SchurNormBound(head + tail, "fourier_tensor", cube,
                          {"radius": radius, "points": points, "head": head, "tail": tail,
                           "c_fit": c_fit, "decay_slope": slope, "C_alpha": table})


def _shell_slope(mag: np.ndarray, rho: np.ndarray, radius: float, floor: float = 1e-13) -> float:
    """Log-log slope of the per-shell maximum coefficient over shells above the noise floor."""
    top = mag.max(initial=0.0)
    shells = np.arange(1, int(radius) + 1)
    idx = np.floor(rho).astype(int)
    m = np.zeros(len(shells) + 1)
    np.maximum.at(m, np.minimum(idx, len(shells)).ravel(), mag.ravel())
    m = m[1:]
    keep = m > floor * max(top, 1e-300)
    if np.count_nonzero(keep) < 3:
        return -math.inf
    return float(np.polyfit(np.log(shells[keep]), np.log(m[keep]), 1)[0])


# -- assembly -------------------------------------------------------------------------------

@functools.lru_cache(maxsize=32)
def _level_geometry(window: Window, max_level: int) -> tuple[dict, dict]:
    n = window.n
    patterns: dict[int, set[tuple[int, ...]]] = {}
    counts: dict[int, int] = {}
    for level, corners in scan_maximal(window, max_level):
        counts[level] = counts.get(level, 0) + len(corners)
        if level == 0:
            continue
        d = np.unique(np.abs(corners[:, :n] - corners[:, n:]), axis=0)
        patterns.setdefault(level, set()).update(map(tuple, d.tolist()))
    return {m: frozenset(v) for m, v in patterns.items()}, counts


def offset_patterns(window: Window, max_level: int) -> dict[int, frozenset[tuple[int, ...]]]:
    """Distinct ``|a - b|`` offset patterns of the maximal cubes of each level >= 1.

    Depends only on the geometry, so results are cached per (window, max_level).
    """
    return _level_geometry(window, max_level)[0]


def cube_counts(window: Window, max_level: int) -> dict[int, int]:
    """Number of maximal cubes per level meeting the window (shares the cached scan)."""
    return dict(_level_geometry(window, max_level)[1])


@dataclass
class MultiplierFamily:
    """Assembled kernels ``Psi_j`` for a field, valid on a window of R^{2n}.

    ``window`` is an integer box in the rescaled coordinates ``(sigma x, sigma y)``.
    """

    field: TrigSum | Sampler
    sigma: float
    rescaled: TrigSum | Sampler
    window: Window
    max_level: int
    phi: list[KernelFunction]
    patterns: dict[int, frozenset[tuple[int, ...]]]
    ledger: dict = field(default_factory=dict)
    points: int = 64

    @property
    def n(self) -> int:
        return self.field.n

    def _route(self, x: np.ndarray, y: np.ndarray):
        p = np.concatenate([x, y], axis=-1) * self.sigma
        flat = p.reshape(-1, 2 * self.n)
        if not np.all(self.window.contains(flat)):
            raise UncoveredPoint("evaluation point lies outside the built window")
        return flat, maximal_level(flat, self.max_level)

    def _pieces(self, flat: np.ndarray, levels: np.ndarray, only_level: int | None = None) -> np.ndarray:
        n = self.n
        out = np.zeros((len(flat), n))
        g = self.rescaled
        for m in np.unique(levels):
            if only_level is not None and m != only_level:
                continue
            sel = levels == m
            u, v = flat[sel, :n], flat[sel, n:]
            if m == 0:
                out[sel] = np.stack([K(u, v) for K in self.phi], axis=-1)
            else:
                out[sel] = (g(u) - g(v))[:, None] * _xi_values(u - v, float(2 ** m))
        return out

    def evaluate(self, x, y) -> np.ndarray:
        """``Psi_j(x, y)`` for all j, shape (..., n), in the original coordinates."""
        x = as_points(x, self.n)
        y = as_points(y, self.n)
        x, y = np.broadcast_arrays(x, y)
        flat, levels = self._route(x, y)
        return (self.sigma * self._pieces(flat, levels)).reshape(x.shape)

    def piece(self, k: int, x, y) -> np.ndarray:
        """``Psi_j^[k](x, y)``: the part of ``Psi_j`` carried by maximal cubes of side k."""
        m = int(round(math.log2(k)))
        if 2 ** m != k:
            raise ValidationError(f"scale must be a power of two, got {k}")
        x, y = np.broadcast_arrays(as_points(x, self.n), as_points(y, self.n))
        flat, levels = self._route(x, y)
        return (self.sigma * self._pieces(flat, levels, only_level=m)).reshape(x.shape)

    def kernels(self) -> list[KernelFunction]:
        def make(j):
            return KernelFunction(lambda x, y: self.evaluate(x, y)[..., j], self.n, f"psi_{j + 1}",
                                  cost=max(1, getattr(self.rescaled, "num_terms", 8)))

        return [make(j) for j in range(self.n)]

    def representation_residual(self, x, y) -> float:
        x, y = np.broadcast_arrays(as_points(x, self.n), as_points(y, self.n))
        psi = self.evaluate(x, y)
        lhs = self.field(x) - self.field(y)
        return float(np.max(np.abs(lhs - np.sum((x - y) * psi, axis=-1)), initial=0.0))

    def sample_pairs(self, count: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """Uniform random pairs inside the window, in original coordinates."""
        rng = np.random.default_rng(seed)
        lo, hi = np.array(self.window.lo, float), np.array(self.window.hi, float)
        p = rng.uniform(lo, hi, (count, 2 * self.n)) / self.sigma
        return p[:, : self.n], p[:, self.n:]


def _window_sup(g, window: Window) -> float:
    lo = min(window.lo)
    hi = max(window.hi)
    if isinstance(g, TrigSum) and g.num_terms:
        return sup_norm(g, (float(lo), float(hi)))
    return sup_norm(g, (float(lo), float(hi)), polish=0)


def assemble(f, window: Window | None = None, max_level: int = 5, sigma: float | None = None,
             points: int | None = None, tol: Tolerances = DEFAULTS) -> MultiplierFamily:
    """Build the family for f on a window (rescaled coordinates) and fill its ledger.

    The default window is ``[0, 2^{max_level + 1})^{2n}``, which contains
    maximal cubes of every level up to ``max_level - 1``.  ``points`` is the
    per-axis grid of the difference-kernel Fourier bound (default 128 for
    n <= 2 and 64 for n = 3, where 64 is within about 0.3% of converged).
    """
    n = f.n
    if points is None:
        points = 128 if n <= 2 else 64
    if sigma is None:
        sigma = f.sigma
    if not sigma > 0:
        raise InvalidSigma(f"field needs a positive frequency bound, got {sigma}")
    if isinstance(f, TrigSum):
        g = f.dilate(1.0 / sigma)
    else:
        g = Sampler(n, lambda u, f=f, s=sigma: f(u / s), {**f.metadata, "sigma": 1.0})
    if window is None:
        window = Window.cube(n, 2 ** (max_level + 1))
    if window.n != n:
        raise DimensionMismatch(f"window lives in R^{window.dim}, field in R^{n}")
    patterns = offset_patterns(window, max_level)
    fam = MultiplierFamily(f, float(sigma), g, window, max_level, build_phi_unit(g, tol=tol), patterns,
                           points=points)
    fam.ledger = _build_ledger(fam)
    return fam


def _build_ledger(fam: MultiplierFamily) -> dict:
    n = fam.n
    g = fam.rescaled
    combine = 6 ** (2 * n)
    counts = cube_counts(fam.window, fam.max_level)
    gsup = _window_sup(g, fam.window)
    rows = []
    if isinstance(g, TrigSum):
        unit = phi_tensor_bound(g)
        rows.append({"scale": 1, "level": 0, "cubes": counts.get(0, 0), "patterns": None, "sup_bound": unit.tolist(),
                     "combined": (combine * unit).tolist(), "method": "phi_tensor"})
    else:
        rows.append({"scale": 1, "level": 0, "cubes": counts.get(0, 0), "patterns": None, "sup_bound": None, "combined": None,
                     "method": "unavailable"})
    for level in sorted(fam.patterns):
        k = 2 ** level
        per = np.max([difference_kernel_bound(p, k, fam.points) for p in fam.patterns[level]], axis=0)
        sup = 2 * gsup * per
        rows.append({"scale": k, "level": level, "cubes": counts.get(level, 0),
                     "patterns": len(fam.patterns[level]),
                     "sup_bound": sup.tolist(), "combined": (combine * sup).tolist(),
                     "method": "difference_fourier"})
    return {"rows": rows, "g_sup": gsup, "combine_factor": combine, "sigma": fam.sigma}


def ledger_totals(fam: MultiplierFamily, scales: Sequence[int] = (2, 4, 8, 16), slope_cap: float = -0.8,
                  check_decay: bool = True) -> dict:
    """Per-j totals over scales, the decay slope over ``scales``, and the empirical constant.

    The totals bound the Schur norms of the rescaled kernels; multiplying
    by sigma gives bounds for ``Psi_j`` itself, and dividing that by
    ``sigma * ||f||_inf`` leaves the reported ``C_n``.
    """
    rows = fam.ledger["rows"]
    if any(r["combined"] is None for r in rows):
        raise SamplerUnsupported("unit-cube bound needs a trigonometric sum")
    totals = np.sum([r["combined"] for r in rows], axis=0)
    by_scale = {r["scale"]: np.max(r["combined"]) for r in rows}
    ks = [k for k in scales if k in by_scale]
    slope = math.nan
    if len(ks) >= 2:
        slope = float(np.polyfit(np.log(ks), np.log([by_scale[k] for k in ks]), 1)[0])
        if check_decay and slope > slope_cap:
            raise DecayViolated(slope, {k: by_scale[k] for k in ks})
    fsup = fam.ledger["g_sup"]
    return {
        "per_j": totals.tolist(),
        "total": float(np.max(totals)),
        "psi_bound": float(fam.sigma * np.max(totals)),
        "slope": slope,
        "C_n": float(np.max(totals) / fsup) if fsup > 0 else math.inf,
        "table": [{"scale": r["scale"], "sup_bound": (max(r["sup_bound"]) if r["sup_bound"] else None),
                   "combined": max(r["combined"]), "cubes": r["cubes"]} for r in rows],
    }
