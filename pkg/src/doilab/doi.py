"""Double operator integrals for commuting tuples with atomic joint spectral measures.

In finite dimensions ``iint Phi(x, y) dE_A(x) T dE_B(y)`` is the Schur
product ``U [Phi(lambda_i, mu_k) * (U* T V)] V*`` in the joint eigenbases,
and that is the only evaluation path used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .config import DEFAULTS, Tolerances
from .errors import DimensionMismatch, IdentityViolation, NonFiniteKernel, VariantDimensionMismatch
from .funcalc.fields import Sampler, TrigSum
from .linalg import CommutingTuple, op_norm

__all__ = [
    "KernelFunction",
    "apply_function",
    "chain_kernels",
    "divided_differences",
    "doi",
    "field_scale",
    "identity_defect",
    "quasicommutator_check",
    "verify_sum_formula",
]

_OUTER_BUDGET = 1 << 22  # complex entries per evaluation chunk


@dataclass(frozen=True)
class KernelFunction:
    """``Phi(x, y)`` for x, y in R^n, evaluated on broadcast arrays of shape (..., n).

    ``tag`` records what the kernel is (``chain_2``, ``xi_1[k=4]``, ...); it
    never affects evaluation.
    """

    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    n: int
    tag: str = "custom"
    cost: int = 1  # rough per-pair work, used to chunk outer evaluations
    meta: dict = field(default_factory=dict, compare=False)

    def __call__(self, x, y) -> np.ndarray:
        return self.func(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def outer(self, X, Y) -> np.ndarray:
        """Matrix ``[Phi(X[i], Y[k])]`` for point lists X (P, n), Y (Q, n)."""
        X = np.asarray(X, dtype=float).reshape(-1, self.n)
        Y = np.asarray(Y, dtype=float).reshape(-1, self.n)
        out = np.empty((len(X), len(Y)), dtype=complex)
        rows = max(1, _OUTER_BUDGET // max(1, len(Y) * self.cost))
        for s in range(0, len(X), rows):
            out[s:s + rows] = self(X[s:s + rows, None, :], Y[None, :, :])
        return out

    @classmethod
    def constant(cls, value: complex, n: int) -> "KernelFunction":
        return cls(lambda x, y: np.full(np.broadcast_shapes(x.shape, y.shape)[:-1], value, dtype=complex),
                   n, "constant")

    @classmethod
    def separable(cls, phis: Sequence[Callable], psis: Sequence[Callable], n: int) -> "KernelFunction":
        """``sum_j phi_j(x) psi_j(y)``."""
        def f(x, y):
            return sum(np.asarray(p(x)) * np.asarray(q(y)) for p, q in zip(phis, psis))

        return cls(f, n, "separable", cost=len(phis))

    def __add__(self, other: "KernelFunction") -> "KernelFunction":
        return KernelFunction(lambda x, y: self(x, y) + other(x, y), self.n, f"{self.tag}+{other.tag}",
                              self.cost + other.cost)

    def scale(self, a: complex) -> "KernelFunction":
        return KernelFunction(lambda x, y: a * self(x, y), self.n, self.tag, self.cost)


def _field_values(f, points: np.ndarray) -> np.ndarray:
    """Fields and plain callables alike are evaluated on the (P, n) point array."""
    return np.asarray(f(points), dtype=float).reshape(len(points))


def apply_function(f, A: CommutingTuple) -> np.ndarray:
    """``f(A_1, ..., A_n) = U diag(f(lambda_i)) U*``."""
    if hasattr(f, "n") and f.n != A.n:
        raise DimensionMismatch(f"field on R^{f.n} applied to a {A.n}-tuple")
    vals = _field_values(f, A.grid)
    U = A.basis
    return (U * vals) @ U.conj().T


def _kernel_matrix(Phi: KernelFunction, A: CommutingTuple, B: CommutingTuple) -> np.ndarray:
    K = Phi.outer(A.grid, B.grid)
    bad = ~np.isfinite(K)
    if np.any(bad):
        i, k = np.argwhere(bad)[0]
        raise NonFiniteKernel(f"kernel {Phi.tag} is not finite at eigengrid pair ({i}, {k}): "
                              f"x={A.grid[i]}, y={B.grid[k]}")
    return K


def doi(Phi: KernelFunction, A: CommutingTuple, B: CommutingTuple, T, kernel_matrix=None) -> np.ndarray:
    """Schur-product evaluation of the double operator integral.

    ``kernel_matrix`` may carry a precomputed ``Phi.outer(A.grid, B.grid)``.
    """
    T = np.asarray(T, dtype=complex)
    if T.shape != (A.dim, B.dim):
        raise DimensionMismatch(f"T has shape {T.shape}, expected {(A.dim, B.dim)}")
    if A.n != Phi.n or B.n != Phi.n:
        raise DimensionMismatch(f"kernel on R^{Phi.n} x R^{Phi.n} with tuples of sizes {A.n}, {B.n}")
    K = _kernel_matrix(Phi, A, B) if kernel_matrix is None else kernel_matrix
    U, V = A.basis, B.basis
    return U @ (K * (U.conj().T @ T @ V)) @ V.conj().T


def _expc(theta: np.ndarray) -> np.ndarray:
    """``(e^{i theta} - 1) / (i theta)``, analytic at 0."""
    return np.exp(0.5j * theta) * np.sinc(theta / (2 * math.pi))


def _chain_trig(f: TrigSum, j: int) -> Callable:
    xi = f.freqs
    c = f.coeffs
    n = f.n

    def kern(x, y):
        shape = np.broadcast_shapes(x.shape, y.shape)[:-1]
        x = np.broadcast_to(x, shape + (n,))
        y = np.broadcast_to(y, shape + (n,))
        pts = np.concatenate([y[..., :j], y[..., j:j + 1], x[..., j + 1:]], axis=-1)
        phase = pts @ xi.T  # (..., M)
        dj = (x[..., j:j + 1] - y[..., j:j + 1]) * xi[:, j]
        terms = np.exp(1j * phase) * (1j * xi[:, j]) * _expc(dj)
        return np.real(terms @ c)

    return kern


def _chain_sampler(f, j: int, h: float = 1e-5) -> Callable:
    n = f.n

    def kern(x, y):
        shape = np.broadcast_shapes(x.shape, y.shape)[:-1]
        x = np.broadcast_to(x, shape + (n,))
        y = np.broadcast_to(y, shape + (n,))
        left = np.concatenate([y[..., :j], x[..., j:]], axis=-1)
        right = np.concatenate([y[..., :j + 1], x[..., j + 1:]], axis=-1)
        dx = x[..., j] - y[..., j]
        close = np.abs(dx) < h * (1 + np.abs(x[..., j]))
        safe = np.where(close, 1.0, dx)
        quot = (f(left) - f(right)) / safe
        mid = left.copy()
        mid[..., j] = 0.5 * (x[..., j] + y[..., j])
        e = np.zeros(n)
        e[j] = h
        deriv = (f(mid + e) - f(mid - e)) / (2 * h)
        return np.where(close, deriv, quot)

    return kern


_VARIANTS = {"1d": (1, 0), "x": (2, 0), "y": (2, 1)}


def divided_differences(f, variant: str) -> KernelFunction:
    """Chain divided difference of f.

    ``chain_j`` (1-based) varies coordinate j with earlier coordinates taken
    from y and later ones from x::

        (f(y_<j, x_j, x_>j) - f(y_<j, y_j, x_>j)) / (x_j - y_j)

    so that ``sum_j (x_j - y_j) chain_j = f(x) - f(y)``.  ``"1d"`` is the
    ordinary divided difference (n = 1); ``"x"`` and ``"y"`` are chain_1 and
    chain_2 for n = 2.  Trigonometric sums are handled in closed form with no
    removable singularity; samplers fall back to a symmetric difference when
    ``x_j`` and ``y_j`` nearly coincide.
    """
    n = f.n
    if variant in _VARIANTS:
        need, j = _VARIANTS[variant]
        if n != need:
            raise VariantDimensionMismatch(f"variant {variant!r} needs n={need}, field has n={n}")
    elif variant.startswith("chain_") and variant[6:].isdigit():
        j = int(variant[6:]) - 1
        if not 0 <= j < n:
            raise VariantDimensionMismatch(f"{variant} out of range for n={n}")
    else:
        raise VariantDimensionMismatch(f"unknown divided-difference variant {variant!r}")
    if isinstance(f, TrigSum):
        return KernelFunction(_chain_trig(f, j), n, f"chain_{j + 1}", cost=max(1, f.num_terms))
    return KernelFunction(_chain_sampler(f, j), n, f"chain_{j + 1}", cost=4)


def chain_kernels(f) -> list[KernelFunction]:
    return [divided_differences(f, f"chain_{j + 1}") for j in range(f.n)]


def field_scale(f, *grids: np.ndarray) -> float:
    """Stand-in for ``||f||_inf``: coefficient l1 norm for trig sums, else max over the grids."""
    if isinstance(f, TrigSum):
        return f.abs_coeff_sum()
    vals = [np.abs(_field_values(f, g)) for g in grids if len(g)]
    return float(max((v.max() for v in vals), default=0.0))


def identity_defect(f, A: CommutingTuple, B: CommutingTuple, kernel_mats: Sequence[np.ndarray]):
    """Worst ``|sum_j (x_j - y_j) Psi_j(x, y) - (f(x) - f(y))|`` over eigengrid pairs."""
    fa = _field_values(f, A.grid)
    fb = _field_values(f, B.grid)
    lhs = sum((A.grid[:, j][:, None] - B.grid[:, j][None, :]) * K for j, K in enumerate(kernel_mats))
    err = np.abs(lhs - (fa[:, None] - fb[None, :]))
    i, k = np.unravel_index(np.argmax(err), err.shape)
    return float(err[i, k]), (int(i), int(k))


def _prepare(f, A, B, kernels, tol: Tolerances):
    if len(kernels) != A.n:
        raise DimensionMismatch(f"need {A.n} kernels, got {len(kernels)}")
    mats = [_kernel_matrix(K, A, B) for K in kernels]
    defect, pair = identity_defect(f, A, B, mats)
    tau = tol.identity_rtol * max(field_scale(f, A.grid, B.grid), 1e-300)
    if defect > tau:
        raise IdentityViolation(pair, defect, tau)
    return mats


def verify_sum_formula(f, A: CommutingTuple, B: CommutingTuple, kernels: Sequence[KernelFunction],
                       tol: Tolerances = DEFAULTS) -> float:
    """``|| f(A) - f(B) - sum_j doi(Psi_j, A, B, A_j - B_j) ||`` (operator norm)."""
    mats = _prepare(f, A, B, kernels, tol)
    lhs = apply_function(f, A) - apply_function(f, B)
    rhs = sum(doi(K, A, B, A.matrices[j] - B.matrices[j], kernel_matrix=mats[j])
              for j, K in enumerate(kernels))
    return op_norm(lhs - rhs)


def quasicommutator_check(f, A: CommutingTuple, B: CommutingTuple, R, kernels: Sequence[KernelFunction],
                          tol: Tolerances = DEFAULTS) -> float:
    """``|| f(A) R - R f(B) - sum_j doi(Psi_j, A, B, A_j R - R B_j) ||``."""
    R = np.asarray(R, dtype=complex)
    mats = _prepare(f, A, B, kernels, tol)
    lhs = apply_function(f, A) @ R - R @ apply_function(f, B)
    rhs = sum(doi(K, A, B, A.matrices[j] @ R - R @ B.matrices[j], kernel_matrix=mats[j])
              for j, K in enumerate(kernels))
    return op_norm(lhs - rhs)
