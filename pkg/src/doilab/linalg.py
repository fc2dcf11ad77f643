"""Dense Hermitian linear algebra for commuting tuples and operator ideals.

Spectra are plain 1-D float arrays, nonincreasing and nonnegative; a finite
spectrum stands for the sequence padded with zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import zeta

from .config import DEFAULTS, Tolerances
from .errors import (
    DimensionMismatch,
    InvalidExponent,
    NotCommuting,
    NotHermitian,
    NumericalFailure,
    ValidationError,
)

__all__ = [
    "CommutingTuple",
    "IdealSpec",
    "as_spectrum",
    "averaging_check",
    "boyd_index",
    "boyd_ratio",
    "check_hermitian",
    "hermitian_eig",
    "ideal_norm",
    "joint_diagonalize",
    "matrix_from_json",
    "matrix_to_json",
    "op_norm",
    "random_unitary",
    "replicate_spectrum",
    "sigma_seq",
    "singular_values",
]


def op_norm(T: np.ndarray) -> float:
    """Spectral norm; 0 for empty matrices."""
    T = np.asarray(T)
    if T.size == 0:
        return 0.0
    return float(np.linalg.norm(T, 2))


def check_hermitian(M, rtol: float = DEFAULTS.hermitian_rtol) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    scale = np.max(np.abs(M)) if M.size else 0.0
    defect = np.max(np.abs(M - M.conj().T)) if M.size else 0.0
    if defect > rtol * scale:
        raise NotHermitian(f"max |M - M*| = {defect:.3e} exceeds {rtol:.1e} * max|M| = {rtol * scale:.3e}")
    return M


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    Z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def hermitian_eig(M, rtol: float = DEFAULTS.hermitian_rtol) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition ``M = U diag(w) U*`` with ``w`` in descending order.

    Returns
    -------
    U : (N, N) complex ndarray
        Unitary whose columns are eigenvectors.
    w : (N,) float ndarray
        Eigenvalues, descending; ties keep the solver's (stable) order.
    """
    M = check_hermitian(M, rtol)
    w, U = np.linalg.eigh((M + M.conj().T) / 2)
    order = np.argsort(-w, kind="stable")
    return U[:, order], w[order]


def _clusters(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Split sorted (descending) values into runs whose consecutive gaps are <= tol."""
    if len(values) == 0:
        return []
    breaks = np.nonzero(np.abs(np.diff(values)) > tol)[0] + 1
    return np.split(np.arange(len(values)), breaks)


def _refine(V: np.ndarray, mats: Sequence[np.ndarray], j: int, gap: float, scales) -> np.ndarray:
    """Diagonalize the restrictions of mats[j:] to span(V), splitting degenerate blocks."""
    if V.shape[1] == 1 or j == len(mats):
        return V
    sub = V.conj().T @ mats[j] @ V
    w, W = np.linalg.eigh((sub + sub.conj().T) / 2)
    order = np.argsort(-w, kind="stable")
    w, V = w[order], V @ W[:, order]
    blocks = [_refine(V[:, idx], mats, j + 1, gap, scales) for idx in _clusters(w, gap * scales[j])]
    return np.hstack(blocks)


@dataclass(frozen=True)
class CommutingTuple:
    """n commuting Hermitian matrices with a joint eigenbasis.

    ``basis[:, i]`` is a joint eigenvector and ``grid[i]`` the point of R^n
    carrying its joint eigenvalues, so the joint spectral measure puts the
    rank-one projection onto ``basis[:, i]`` at ``grid[i]``.
    """

    matrices: tuple[np.ndarray, ...]
    basis: np.ndarray
    grid: np.ndarray

    @property
    def n(self) -> int:
        return len(self.matrices)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def reconstruct(self, j: int) -> np.ndarray:
        U = self.basis
        return (U * self.grid[:, j]) @ U.conj().T

    def check(self, tol: Tolerances = DEFAULTS) -> None:
        U = self.basis
        defect = np.max(np.abs(U.conj().T @ U - np.eye(self.dim))) if self.dim else 0.0
        if defect > tol.unitary_atol:
            raise NumericalFailure(f"joint eigenbasis is not unitary: ||U*U - I|| = {defect:.3e}")
        for j, A in enumerate(self.matrices):
            err = op_norm(A - self.reconstruct(j))
            if err > tol.reconstruct_rtol * max(op_norm(A), 1e-300):
                raise NumericalFailure(f"reconstruction of A_{j} off by {err:.3e}")


def joint_diagonalize(
    matrices: Iterable,
    tol_commute: float | None = None,
    seed: int = 0,
    tol: Tolerances = DEFAULTS,
) -> CommutingTuple:
    """Simultaneously diagonalize pairwise commuting Hermitian matrices.

    A seeded generic combination ``sum_j t_j A_j`` is diagonalized first;
    eigenvalue clusters (relative gap ``tol.cluster_gap``) are then split by
    diagonalizing the restrictions of each ``A_j`` in turn, which handles
    repeated joint eigenvalues that a single combination can merge.
    Diagonal input keeps the identity basis.
    """
    mats = tuple(check_hermitian(M, tol.hermitian_rtol) for M in matrices)
    if not mats:
        raise ValidationError("need at least one matrix")
    N = mats[0].shape[0]
    for j, M in enumerate(mats):
        if M.shape != (N, N):
            raise DimensionMismatch(f"matrix {j} has shape {M.shape}, expected {(N, N)}")
    scales = [op_norm(M) for M in mats]
    scale = max(scales)
    if tol_commute is None:
        tol_commute = tol.commute_rtol * max(scale, 1e-300) ** 2
    for j in range(len(mats)):
        for k in range(j + 1, len(mats)):
            c = op_norm(mats[j] @ mats[k] - mats[k] @ mats[j])
            if c > tol_commute:
                raise NotCommuting((j, k), c, tol_commute)

    if all(np.count_nonzero(M - np.diag(np.diag(M))) == 0 for M in mats):
        U = np.eye(N, dtype=complex)
    else:
        rng = np.random.default_rng(seed)
        t = rng.standard_normal(len(mats))
        H = sum(tj * M for tj, M in zip(t, mats))
        U, w = hermitian_eig(H, rtol=np.inf)
        gap = tol.cluster_gap * max(np.max(np.abs(w)), 1e-300)
        rel_scales = [max(s, 1e-300) for s in scales]
        blocks = []
        for idx in _clusters(w, gap):
            if len(idx) == 1:
                blocks.append(U[:, idx])
            else:
                blocks.append(_refine(U[:, idx], mats, 0, tol.cluster_gap, rel_scales))
        U = np.hstack(blocks)
    grid = np.stack(
        [np.real(np.einsum("ij,ik,kj->j", U.conj(), M, U)) for M in mats], axis=1
    )
    out = CommutingTuple(matrices=mats, basis=U, grid=grid)
    out.check(tol)
    return out


def matrix_to_json(M) -> dict:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    return {"dim": int(M.shape[0]), "re": M.real.tolist(), "im": M.imag.tolist()}


def matrix_from_json(data: dict) -> np.ndarray:
    M = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data.get("im", 0.0), dtype=float)
    if M.shape != (data["dim"], data["dim"]):
        raise DimensionMismatch(f"declared dim {data['dim']} but entries have shape {M.shape}")
    return M


def as_spectrum(s) -> np.ndarray:
    s = np.asarray(s, dtype=float).ravel()
    if np.any(s < 0) or np.any(np.diff(s) > 1e-12 * max(s.max(initial=0.0), 1.0)):
        raise ValidationError("a spectrum must be nonnegative and nonincreasing")
    return s


def singular_values(T) -> np.ndarray:
    """Singular values s_0 >= s_1 >= ... of a (possibly rectangular) matrix."""
    T = np.asarray(T, dtype=complex)
    if T.size == 0:
        return np.zeros(0)
    return np.clip(np.linalg.svd(T, compute_uv=False), 0.0, None)


def sigma_seq(s) -> np.ndarray:
    """Running means ``sigma_n = (s_0 + ... + s_n) / (n + 1)``."""
    s = as_spectrum(s)
    return np.cumsum(s) / np.arange(1, len(s) + 1)


def replicate_spectrum(s, d: int) -> np.ndarray:
    """Spectrum of the d-fold direct sum: entry n equals ``s[n // d]``."""
    if d < 1:
        raise ValidationError(f"replication factor must be >= 1, got {d}")
    return np.repeat(as_spectrum(s), d)


@dataclass(frozen=True)
class IdealSpec:
    """One of the concrete ideals: operator norm, S_p, or weak S_{p,inf}."""

    kind: str
    p: float | None = None

    def __post_init__(self):
        if self.kind not in ("operator", "schatten", "weak"):
            raise ValidationError(f"unknown ideal kind {self.kind!r}")
        if self.kind != "operator" and (self.p is None or not self.p > 0 or not math.isfinite(self.p)):
            raise InvalidExponent(f"{self.kind} ideal needs a finite exponent p > 0, got {self.p}")

    @classmethod
    def operator(cls) -> "IdealSpec":
        return cls("operator")

    @classmethod
    def schatten(cls, p: float) -> "IdealSpec":
        return cls("schatten", p)

    @classmethod
    def weak(cls, p: float) -> "IdealSpec":
        return cls("weak", p)

    def __call__(self, s) -> float:
        return ideal_norm(self, s)

    def __str__(self) -> str:
        if self.kind == "operator":
            return "op"
        return f"S_{self.p:g}" if self.kind == "schatten" else f"S_{self.p:g},inf"


def ideal_norm(spec: IdealSpec, s) -> float:
    s = as_spectrum(s)
    if s.size == 0 or s[0] == 0:
        return 0.0
    if spec.kind == "operator":
        return float(s[0])
    p = spec.p
    if spec.kind == "schatten":
        s0 = s[0]
        return float(s0 * np.sum((s / s0) ** p) ** (1.0 / p))
    return float(np.max((1.0 + np.arange(len(s))) ** (1.0 / p) * s))


def _default_probes(seed: int = 0) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    probes = [np.array([1.0]), np.ones(2), np.ones(5), np.ones(16)]
    for q in (0.5, 1.0, 2.0):
        probes.append(1.0 / (1.0 + np.arange(32)) ** q)
    for _ in range(8):
        probes.append(np.sort(rng.random(int(rng.integers(1, 40))))[::-1])
    return probes


def boyd_ratio(spec: IdealSpec, d: int, probes: Sequence | None = None) -> float:
    """Lower estimate of the replication constant: sup of ||[T]_d|| / ||T|| over probes."""
    if spec.kind == "operator":
        return 1.0
    probes = _default_probes() if probes is None else probes
    best = 0.0
    for s in probes:
        base = ideal_norm(spec, s)
        if base > 0:
            best = max(best, ideal_norm(spec, replicate_spectrum(s, d)) / base)
    return best


def boyd_index(spec: IdealSpec, ds: Sequence[int] = (2, 4, 8, 16, 32, 64), probes=None) -> float:
    """``inf_d log(beta_d) / log(d)`` over the given replication factors."""
    return min(math.log(boyd_ratio(spec, d, probes)) / math.log(d) for d in ds)


def averaging_check(spec: IdealSpec, s, include_tail: bool = True) -> float:
    """Ratio ``Psi(sigma(s)) / Psi(s)`` for the running-mean sequence.

    With ``include_tail`` the zero padding is honoured: past the end of ``s``
    the running means decay like ``S / (n + 1)`` (``S`` the total), and their
    contribution is added in closed form (Hurwitz zeta for S_p).  The result
    is ``inf`` when that tail is not in the ideal.
    """
    s = as_spectrum(s)
    base = ideal_norm(spec, s)
    if base == 0:
        return 0.0
    sig = sigma_seq(s)
    if spec.kind == "operator" or not include_tail:
        return ideal_norm(spec, sig) / base
    p, L, S = spec.p, len(s), float(np.sum(s))
    if spec.kind == "schatten":
        if p <= 1:
            return math.inf
        head = np.sum(sig ** p)
        tail = S ** p * float(zeta(p, L + 1))
        return float((head + tail) ** (1.0 / p)) / base
    head = np.max((1.0 + np.arange(L)) ** (1.0 / p) * sig)
    if p < 1:
        return math.inf
    tail = S * (1.0 + L) ** (1.0 / p - 1.0)
    return float(max(head, tail)) / base
