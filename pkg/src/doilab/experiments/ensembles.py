"""Random commuting tuples and random test functions for the campaigns."""

from __future__ import annotations

import math

import numpy as np

from ..errors import AlphaOutOfRange, ValidationError
from ..funcalc.fields import TrigSum
from ..funcalc.norms import sup_norm
from ..linalg import CommutingTuple, joint_diagonalize, random_unitary

__all__ = [
    "PAIR_MODES",
    "holder_field",
    "periodic_bandlimited",
    "random_tuple",
    "trial_rng",
    "tuple_pair",
]

PAIR_MODES = ("shared", "independent", "perturbed", "rank_one", "equal")


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, trial]))


def _tuple(U: np.ndarray, diags: np.ndarray) -> CommutingTuple:
    mats = [(U * d) @ U.conj().T for d in diags]
    return joint_diagonalize(mats)


def random_tuple(n: int, dim: int, rng: np.random.Generator, spread: float = 2.0) -> CommutingTuple:
    U = random_unitary(dim, rng)
    return _tuple(U, rng.uniform(-spread, spread, (n, dim)))


def _project_commuting(mats: list[np.ndarray], rng: np.random.Generator) -> CommutingTuple:
    """Nearby commuting tuple: keep the diagonals of each matrix in the eigenbasis of a generic combination."""
    t = rng.standard_normal(len(mats))
    H = sum(tj * M for tj, M in zip(t, mats))
    _, V = np.linalg.eigh((H + H.conj().T) / 2)
    diags = np.stack([np.real(np.einsum("ij,ik,kj->j", V.conj(), M, V)) for M in mats])
    return _tuple(V, diags)


def tuple_pair(n: int, dim: int, rng: np.random.Generator, mode: str = "shared", spread: float = 2.0,
               eps: float | None = None) -> tuple[CommutingTuple, CommutingTuple]:
    """Pair of commuting n-tuples.

    Modes
    -----
    shared : common eigenbasis, B's joint eigenvalues are A's plus noise of size eps.
    independent : unrelated eigenbases and spectra.
    perturbed : ``B_j = A_j + eps E_j`` (E_j Hermitian) pushed back to a commuting tuple.
    rank_one : ``B_j - A_j = c_j v v*`` for a common eigenvector v, so every difference has rank one.
    equal : B = A.
    """
    if mode not in PAIR_MODES:
        raise ValidationError(f"unknown pair mode {mode!r}; choose from {PAIR_MODES}")
    if eps is None:
        eps = math.exp(rng.uniform(math.log(0.05), math.log(1.0)))
    U = random_unitary(dim, rng)
    da = rng.uniform(-spread, spread, (n, dim))
    A = _tuple(U, da)
    if mode == "equal":
        return A, A
    if mode == "shared":
        return A, _tuple(U, da + eps * rng.standard_normal((n, dim)))
    if mode == "independent":
        return A, random_tuple(n, dim, rng, spread)
    if mode == "rank_one":
        i = int(rng.integers(dim))
        db = da.copy()
        db[:, i] += eps * spread * rng.standard_normal(n)
        return A, _tuple(U, db)
    E = [(Z + Z.conj().T) / 2 for Z in (rng.standard_normal((n, dim, dim)) + 1j * rng.standard_normal((n, dim, dim)))]
    return A, _project_commuting([M + eps * e for M, e in zip(A.matrices, E)], rng)


def periodic_bandlimited(n: int, sigma: float, num_terms: int, rng: np.random.Generator,
                         period_factor: int = 4) -> TrigSum:
    """Random real trig sum with frequencies on the lattice ``(sigma / period_factor) Z^n`` inside the sigma-ball.

    The field has period ``2 pi period_factor / sigma`` in each coordinate, so
    its sup over one period cell is its global sup.
    """
    q = sigma / period_factor
    xi = np.zeros((0, n))
    while len(xi) < num_terms:
        cand = rng.integers(-period_factor, period_factor + 1, (4 * num_terms, n))
        norm = np.linalg.norm(cand, axis=1)
        cand = cand[(norm > 0) & (norm <= period_factor)]
        xi = np.concatenate([xi, cand])[:num_terms]
    # one term on the boundary sphere (axis direction) so that the field's sigma equals the request
    xi[0] = 0
    xi[0, int(rng.integers(n))] = period_factor * rng.choice([-1, 1])
    amps = rng.standard_normal(num_terms) / math.sqrt(num_terms)
    return TrigSum.from_real(amps, rng.uniform(0, 2 * math.pi, num_terms), xi * q)


def holder_field(n: int, alpha: float, levels: int, rng: np.random.Generator, terms_per_level: int = 2) -> TrigSum:
    """``sum_{l=0}^{levels} 2^{-l alpha} h_l`` with h_l a random sup-one field with integer frequencies in [2^l, 2^{l+1}).

    Integer frequencies make the field 2 pi periodic in every coordinate.
    """
    if not 0 < alpha <= 1:
        raise AlphaOutOfRange(f"alpha must lie in (0, 1], got {alpha}")
    total = None
    for l in range(levels + 1):
        lo, hi = 2 ** l, 2 ** (l + 1)
        xi = []
        while len(xi) < terms_per_level:
            d = rng.standard_normal(n)
            d /= np.linalg.norm(d)
            cand = np.rint(d * rng.uniform(lo, hi))
            r = np.linalg.norm(cand)
            if lo <= r < hi:
                xi.append(cand)
        band = TrigSum.from_real(rng.standard_normal(terms_per_level), rng.uniform(0, 2 * math.pi, terms_per_level),
                                 np.array(xi))
        s = sup_norm(band, (0.0, 2 * math.pi), points=_cheap_points(n), polish=2)
        band = band.scale(2.0 ** (-l * alpha) / s)
        total = band if total is None else total + band
    return total


def _cheap_points(n: int) -> int:
    return {1: 512, 2: 128, 3: 40}.get(n, 16)
