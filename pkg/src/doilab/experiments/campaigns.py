"""Randomized inequality campaigns at matrix scale.

Every campaign draws, per trial, a random test function and a pair of
commuting tuples from a seed derived from ``(seed, trial)``, evaluates the
left-hand norm exactly by diagonalization, and divides by the right-hand
side with unknown constants set to one.  The maxima are empirical lower
estimates of those constants.  Constant prefactors that depend only on the
parameters (``(1 - alpha)^-1`` and friends) are reported in their own
column and never folded into the ratio.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Callable, Sequence

import numpy as np

from ..doi import apply_function, chain_kernels, field_scale, quasicommutator_check
from ..errors import AlphaOutOfRange, InvalidExponent, ValidationError
from ..funcalc.fields import TrigSum
from ..funcalc.moduli import Divergent, Modulus, modulus_star
from ..funcalc.norms import besov_seminorm, lambda_norm, sample_pairs, sup_norm
from ..linalg import CommutingTuple, IdealSpec, op_norm, singular_values
from .ensembles import holder_field, periodic_bandlimited, trial_rng, tuple_pair
from .report import ExperimentReport

__all__ = [
    "holder_experiment",
    "holder_sweep",
    "identity_experiment",
    "ideal_lipschitz_experiment",
    "lipschitz_experiment",
    "quasicommutator_experiment",
    "run_trials",
    "schatten_holder_experiment",
]

DEFAULT_SEED = 20240601
LIPSCHITZ_MODES = ("shared", "independent", "perturbed")
HOLDER_MODES = ("shared", "perturbed")
SCHATTEN_MODES = ("schatten", "partial_sums", "boyd_power", "weak", "besov")
_PAIR_SAMPLES = 20000
_POLISH = 8


def run_trials(fn: Callable[[int], dict], trials: int, jobs: int = 1) -> list[dict]:
    """Evaluate ``fn(trial)`` for every trial; results keep trial order whatever ``jobs`` is."""
    if trials < 1:
        raise ValidationError(f"trials must be positive, got {trials}")
    if jobs <= 1:
        return [fn(t) for t in range(trials)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, range(trials), chunksize=max(1, trials // (4 * jobs))))


def _check_positive(**kw) -> None:
    for k, v in kw.items():
        if not v > 0:
            raise ValidationError(f"{k} must be positive, got {v}")


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha < 1:
        raise AlphaOutOfRange(f"alpha must lie strictly between 0 and 1, got {alpha}")


def _ratio(lhs: float, rhs: float) -> float:
    if rhs == 0:
        return 0.0 if lhs == 0 else math.inf
    return lhs / rhs


def _sup_points(f: TrigSum, period: float) -> int:
    """Grid per axis: about 6 samples per shortest wavelength, capped by a 2^18 total budget."""
    kmax = float(np.max(np.abs(f.freqs))) if f.num_terms else 0.0
    want = max(16, int(math.ceil(6 * kmax * period / (2 * math.pi))))
    return min(want, int(round((1 << 18) ** (1.0 / f.n))))


def _differences(f, A: CommutingTuple, B: CommutingTuple):
    D = apply_function(f, A) - apply_function(f, B)
    dA = [singular_values(a - b) for a, b in zip(A.matrices, B.matrices)]
    return singular_values(D), dA


def _holder_pairs(f: TrigSum, A: CommutingTuple, B: CommutingTuple, levels: int, seed: int):
    """Random pairs at all scales down to the finest band, plus every eigengrid pair."""
    x, y = sample_pairs(f.n, _PAIR_SAMPLES, (0.0, 2 * math.pi), (2.0 ** (-levels - 3), 2 * math.pi), seed)
    gx = np.repeat(A.grid, B.dim, axis=0)
    gy = np.tile(B.grid, (A.dim, 1))
    return np.concatenate([x, gx]), np.concatenate([y, gy])


# ---------------------------------------------------------------- Lipschitz


def _lipschitz_trial(trial: int, *, n: int, dim: int, sigma: float, seed: int, modes: Sequence[str],
                     spec: IdealSpec, terms: int) -> dict:
    rng = trial_rng(seed, trial)
    mode = modes[trial % len(modes)]
    period_factor = 4
    f = periodic_bandlimited(n, sigma, terms, rng, period_factor)
    period = 2 * math.pi * period_factor / sigma
    sup = sup_norm(f, (0.0, period), points=_sup_points(f, period))
    A, B = tuple_pair(n, dim, rng, mode)
    sf, sA = _differences(f, A, B)
    lhs = spec(sf)
    delta = max(spec(s) for s in sA)
    rhs = sigma * sup * delta
    row = {"trial": trial, "mode": mode, "ideal": str(spec), "lhs": lhs, "rhs": rhs,
           "ratio": _ratio(lhs, rhs), "sup_f": sup, "max_delta": delta}
    if spec.kind == "schatten" and spec.p == 2:
        # Hilbert-Schmidt contractivity of a Schur product: ||doi(Psi, T)||_2 <= max|Psi| ||T||_2
        hs = sum(float(np.max(np.abs(K.outer(A.grid, B.grid)))) * spec(s)
                 for K, s in zip(chain_kernels(f), sA))
        row["hs_bound"] = hs
        row["hs_ratio"] = _ratio(lhs, hs)
    return row


def ideal_lipschitz_experiment(spec: IdealSpec, n: int = 3, dim: int = 8, trials: int = 100, sigma: float = 1.0,
                               seed: int = DEFAULT_SEED, modes: Sequence[str] = LIPSCHITZ_MODES,
                               terms: int = 8, jobs: int = 1) -> ExperimentReport:
    """``||f(A) - f(B)||_J / (sigma ||f||_inf max_j ||A_j - B_j||_J)`` for random band-limited f.

    Trials cycle through the tuple-pair ``modes``.  With ``spec`` the
    Hilbert-Schmidt ideal each row also carries ``hs_ratio``, the left side
    over the direct Schur-product bound ``sum_j max|chain_j| ||A_j - B_j||_2``,
    which can never exceed one.
    """
    _check_positive(n=n, dim=dim, trials=trials, sigma=sigma, terms=terms)
    fn = partial(_lipschitz_trial, n=n, dim=dim, sigma=sigma, seed=seed, modes=tuple(modes), spec=spec,
                 terms=terms)
    cols = ["trial", "mode", "ideal", "lhs", "rhs", "ratio", "sup_f", "max_delta"]
    if spec.kind == "schatten" and spec.p == 2:
        cols += ["hs_bound", "hs_ratio"]
    rep = ExperimentReport("lipschitz" if spec.kind == "operator" else f"lipschitz_{spec}",
                           {"n": n, "dim": dim, "trials": trials, "sigma": sigma, "seed": seed,
                            "modes": list(modes), "ideal": str(spec), "terms": terms},
                           cols, run_trials(fn, trials, jobs))
    rep.summarize(extra={"label": "empirical lower estimate of c_n"})
    return rep


def lipschitz_experiment(n: int = 3, dim: int = 8, trials: int = 100, sigma: float = 1.0, seed: int = DEFAULT_SEED,
                         **kw) -> ExperimentReport:
    """Operator-norm Lipschitz campaign; see :func:`ideal_lipschitz_experiment`."""
    return ideal_lipschitz_experiment(IdealSpec.operator(), n, dim, trials, sigma, seed, **kw)


# ------------------------------------------------------------------ Holder


def _holder_setup(trial: int, n: int, dim: int, alpha: float, levels: int, seed: int, modes: Sequence[str]):
    rng = trial_rng(seed, trial)
    mode = modes[trial % len(modes)]
    f = holder_field(n, alpha, levels, rng)
    A, B = tuple_pair(n, dim, rng, mode)
    return rng, mode, f, A, B


def _holder_trial(trial: int, *, n: int, dim: int, alpha: float, levels: int, seed: int, modes: Sequence[str],
                  kind: str, omega: Modulus | None) -> dict:
    rng, mode, f, A, B = _holder_setup(trial, n, dim, alpha, levels, seed, modes)
    pairs = _holder_pairs(f, A, B, levels, int(rng.integers(2 ** 31)))
    sf, sA = _differences(f, A, B)
    lhs = float(sf[0]) if sf.size else 0.0
    delta = max(float(s[0]) if s.size else 0.0 for s in sA)
    row = {"trial": trial, "mode": mode, "lhs": lhs, "max_delta": delta}
    if kind == "power":
        lam = lambda_norm(f, Modulus.power(alpha), pairs, polish=_POLISH)
        rhs = lam * delta ** alpha
        row.update(norm=lam, rhs=rhs, ratio=_ratio(lhs, rhs), prefactor=1.0 / (1.0 - alpha))
    elif kind == "omega":
        lam = lambda_norm(f, omega, pairs, polish=_POLISH)
        star = modulus_star(omega, delta) if delta > 0 else 0.0
        divergent = isinstance(star, Divergent)
        rhs = lam * float(star)
        row.update(norm=lam, rhs=rhs, ratio=_ratio(lhs, rhs), omega_star=float(star), divergent=divergent)
    else:
        pts = np.concatenate([A.grid, B.grid])
        d = float(np.max(np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)))
        lip = lambda_norm(f, Modulus.linear(), pairs, polish=_POLISH)
        # t(1 + log(d/t)) for t <= d, and d beyond: the star transform of min(t, d)
        log_factor = 1.0 + math.log(max(d / delta, 1.0)) if delta > 0 else 1.0
        closed = delta * log_factor if delta <= d else d
        rhs = lip * closed
        star = float(modulus_star(Modulus.truncated_linear(d), delta)) if delta > 0 else 0.0
        row.update(norm=lip, rhs=rhs, ratio=_ratio(lhs, rhs), diameter=d, log_factor=log_factor,
                   omega_star=star, star_gap=abs(star - closed) / closed if closed > 0 else 0.0)
    return row


def holder_experiment(alpha: float = 0.5, n: int = 3, dim: int = 8, trials: int = 100, seed: int = DEFAULT_SEED,
                      kind: str = "power", omega: Modulus | None = None, levels: int = 6,
                      modes: Sequence[str] = HOLDER_MODES, jobs: int = 1) -> ExperimentReport:
    """Holder-class campaign on lacunary random fields.

    ``kind="power"`` divides by ``||f||_alpha max_j ||A_j - B_j||^alpha`` with
    the sampled Holder seminorm.  ``kind="omega"`` uses the sampled
    ``Lambda_omega`` seminorm and ``omega*`` of the largest difference.
    ``kind="log"`` takes a Lipschitz field (alpha ignored, set to one) and the
    factor ``1 + log(d / max_delta)``, d the diameter of the joint spectra;
    each row also records ``omega*`` of ``min(t, d)`` and its relative gap
    to the closed form.
    """
    if kind not in ("power", "omega", "log"):
        raise ValidationError(f"unknown holder kind {kind!r}")
    if kind == "log":
        alpha = 1.0
    else:
        _check_alpha(alpha)
    if kind == "omega" and omega is None:
        raise ValidationError("omega kind needs a modulus")
    _check_positive(n=n, dim=dim, trials=trials, levels=levels)
    fn = partial(_holder_trial, n=n, dim=dim, alpha=alpha, levels=levels, seed=seed, modes=tuple(modes),
                 kind=kind, omega=omega)
    cols = ["trial", "mode", "lhs", "rhs", "ratio", "norm", "max_delta"]
    cols += {"power": ["prefactor"], "omega": ["omega_star", "divergent"],
             "log": ["diameter", "log_factor", "omega_star", "star_gap"]}[kind]
    params = {"n": n, "dim": dim, "trials": trials, "alpha": alpha, "seed": seed, "kind": kind,
              "levels": levels, "modes": list(modes)}
    if omega is not None:
        params["omega"] = omega.label()
    rep = ExperimentReport(f"holder_{kind}", params, cols, run_trials(fn, trials, jobs))
    extra = {"label": "empirical lower estimate of c_n"}
    if kind == "power":
        extra["prefactor"] = 1.0 / (1.0 - alpha)
    if kind == "log":
        extra["max_star_gap"] = float(np.max(rep.column("star_gap")))
    rep.summarize(extra=extra)
    return rep


def holder_sweep(alphas: Sequence[float] = (0.3, 0.5, 0.7, 0.9), **kw) -> ExperimentReport:
    """Max and median Holder ratio per alpha (no ``(1 - alpha)^-1`` factor), plus the fitted trend slope."""
    rows = []
    for a in alphas:
        sub = holder_experiment(alpha=a, **kw)
        rows.append({"alpha": a, "max_ratio": sub.summary["max_ratio"], "median_ratio": sub.summary["median_ratio"],
                     "prefactor": 1.0 / (1.0 - a)})
    rep = ExperimentReport("holder_sweep", {"alphas": list(alphas), **{k: v for k, v in kw.items() if k != "jobs"}},
                           ["alpha", "max_ratio", "median_ratio", "prefactor"], rows)
    mx = rep.column("max_ratio")
    slope = float(np.polyfit(np.asarray(alphas, float), mx, 1)[0]) if len(alphas) > 1 else math.nan
    rep.summarize("max_ratio", extra={"trend_slope": slope,
                                      "nondecreasing": bool(np.all(np.diff(mx) >= 0))})
    return rep


# ---------------------------------------------------------------- Schatten


def _partial(s: np.ndarray, m: int, power: float) -> float:
    return float(np.sum(s[:m + 1] ** power))


def _schatten_trial(trial: int, *, n: int, dim: int, alpha: float, p: float, kind: str, m: int,
                    ideal: IdealSpec | None, levels: int, seed: int, modes: Sequence[str]) -> dict:
    rng, mode, f, A, B = _holder_setup(trial, n, dim, alpha, levels, seed, modes)
    pairs = _holder_pairs(f, A, B, levels, int(rng.integers(2 ** 31)))
    sf, sA = _differences(f, A, B)
    lam = lambda_norm(f, Modulus.power(alpha), pairs, polish=_POLISH)
    row = {"trial": trial, "mode": mode, "kind": kind, "norm": lam}
    if kind == "schatten":
        lhs = IdealSpec.schatten(p / alpha)(sf)
        rhs = lam * max(IdealSpec.schatten(p)(s) for s in sA) ** alpha
        ratio = _ratio(lhs, rhs)
        pref = p ** alpha * (p - 1) ** (-alpha) / (1 - alpha)
    elif kind == "partial_sums":
        lhs = _partial(sf, m, p / alpha)
        rhs = lam ** (p / alpha) * max(_partial(s, m, p) for s in sA)
        ratio = _ratio(lhs, rhs) ** (alpha / p)
        pref = p ** alpha * (p - 1) ** (-alpha) / (1 - alpha)
    elif kind == "boyd_power":
        lhs = ideal(sf ** (1.0 / alpha))
        rhs = lam ** (1.0 / alpha) * max(ideal(s) for s in sA)
        ratio = _ratio(lhs, rhs) ** alpha
        pref = (1 - alpha) ** (-1.0 / alpha)
    elif kind == "weak":
        lhs = IdealSpec.weak(1.0 / alpha)(sf)
        rhs = lam * max(IdealSpec.schatten(1.0)(s) for s in sA) ** alpha
        ratio = _ratio(lhs, rhs)
        pref = 1.0 / (1 - alpha)
    else:
        bes = besov_seminorm(f, alpha, 1, range(0, levels + 2), points=_sup_points(f, 2 * math.pi))
        lhs = IdealSpec.schatten(1.0 / alpha)(sf)
        rhs = bes * max(IdealSpec.schatten(1.0)(s) for s in sA) ** alpha
        ratio = _ratio(lhs, rhs)
        pref = 1.0 / (1 - alpha)
        row["besov"] = bes
    row.update(lhs=lhs, rhs=rhs, ratio=ratio, prefactor=pref)
    return row


def schatten_holder_experiment(p: float = 2.0, alpha: float = 0.5, kind: str = "schatten", n: int = 3,
                               dim: int = 8, trials: int = 100, seed: int = DEFAULT_SEED, m: int = 3,
                               ideal: IdealSpec | None = None, levels: int | None = None,
                               modes: Sequence[str] | None = None, jobs: int = 1) -> ExperimentReport:
    """Schatten-class Holder campaigns.

    kind
        ``schatten``: ``||Delta f||_{S_{p/alpha}}`` against ``||f||_alpha max ||Delta A_j||_{S_p}^alpha`` (p > 1).
        ``partial_sums``: the sums over ``k <= m`` of ``s_k^{p/alpha}`` and ``s_k^p``, ratio taken to the power
        ``alpha/p`` so that it is homogeneous of degree one (p > 1).
        ``boyd_power``: ``|| |Delta f|^{1/alpha} ||_J`` against ``||f||_alpha^{1/alpha} max ||Delta A_j||_J``,
        ratio to the power alpha; ``ideal`` defaults to ``S_2``.
        ``weak``: ``||Delta f||_{S_{1/alpha, inf}}`` against the trace norms (p = 1).
        ``besov``: ``||Delta f||_{S_{1/alpha}}`` against the ``B^alpha_{inf,1}`` seminorm (p = 1).
    The ``weak`` and ``besov`` kinds default to rank-one differences.
    """
    if kind not in SCHATTEN_MODES:
        raise ValidationError(f"unknown schatten kind {kind!r}; choose from {SCHATTEN_MODES}")
    _check_alpha(alpha)
    if kind in ("schatten", "partial_sums") and not p > 1:
        raise InvalidExponent(f"{kind} needs p > 1, got {p}")
    if kind in ("weak", "besov") and p != 1:
        raise InvalidExponent(f"{kind} needs p = 1, got {p}")
    if m < 0:
        raise ValidationError(f"m must be non-negative, got {m}")
    if kind == "boyd_power":
        ideal = ideal or IdealSpec.schatten(2.0)
        if ideal.kind == "operator" or not ideal.p > 1:
            raise InvalidExponent(f"boyd_power needs S_q or S_q,inf with q > 1, got {ideal}")
    if levels is None:
        levels = 3 if kind == "besov" else 6
    if modes is None:
        modes = ("rank_one",) if kind in ("weak", "besov") else HOLDER_MODES
    _check_positive(n=n, dim=dim, trials=trials, levels=levels)
    fn = partial(_schatten_trial, n=n, dim=dim, alpha=alpha, p=p, kind=kind, m=m, ideal=ideal, levels=levels,
                 seed=seed, modes=tuple(modes))
    cols = ["trial", "mode", "kind", "lhs", "rhs", "ratio", "norm", "prefactor"] + (["besov"] if kind == "besov" else [])
    params = {"n": n, "dim": dim, "trials": trials, "alpha": alpha, "p": p, "seed": seed, "kind": kind,
              "levels": levels, "modes": list(modes)}
    if kind == "partial_sums":
        params["m"] = m
    if ideal is not None:
        params["ideal"] = str(ideal)
    rep = ExperimentReport(f"schatten_{kind}", params, cols, run_trials(fn, trials, jobs))
    rep.summarize(extra={"label": "empirical lower estimate of c_n"})
    return rep


# --------------------------------------------------------- quasicommutator


def _quasi_trial(trial: int, *, n: int, dim: int, alpha: float, levels: int, seed: int, modes: Sequence[str],
                 r_mode: str, commutator: bool) -> dict:
    rng, mode, f, A, B = _holder_setup(trial, n, dim, alpha, levels, seed, modes)
    pairs = _holder_pairs(f, A, B, levels, int(rng.integers(2 ** 31)))
    lam = lambda_norm(f, Modulus.power(alpha), pairs, polish=_POLISH)
    if commutator:
        B, mode = A, "commutator"
    if r_mode == "identity":
        R = np.eye(dim, dtype=complex)
    else:
        R = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2 * dim)
    FA, FB = apply_function(f, A), apply_function(f, B)

    def sides(R):
        lhs = op_norm(FA @ R - R @ FB)
        c = max(op_norm(a @ R - R @ b) for a, b in zip(A.matrices, B.matrices))
        r = op_norm(R)
        return lhs, c, r

    lhs, c, r = sides(R)
    rhs2 = lam * c ** alpha * r ** (1 - alpha)
    star = float(modulus_star(Modulus.power(alpha), c / r)) if c > 0 else 0.0
    rhs1 = lam * r * star
    lhs2, c2, r2 = sides(2 * R)
    ratio = _ratio(lhs, rhs2)
    ratio_2r = _ratio(lhs2, lam * c2 ** alpha * r2 ** (1 - alpha))
    resid = quasicommutator_check(f, A, B, R, chain_kernels(f))
    scale = field_scale(f) * max(c, 1e-300)
    return {"trial": trial, "mode": mode, "lhs": lhs, "rhs": rhs2, "ratio": ratio, "rhs_star": rhs1,
            "ratio_star": _ratio(lhs, rhs1), "norm": lam, "max_qc": c, "r_norm": r,
            "prefactor": 1.0 / (1.0 - alpha), "scale_defect": abs(ratio_2r - ratio) / ratio if ratio else 0.0,
            "residual": resid, "residual_scaled": resid / scale if c > 0 else resid}


def quasicommutator_experiment(alpha: float = 0.5, n: int = 3, dim: int = 8, trials: int = 100,
                               seed: int = DEFAULT_SEED, r_mode: str = "random", commutator: bool = False,
                               levels: int = 6, modes: Sequence[str] = HOLDER_MODES, jobs: int = 1) -> ExperimentReport:
    """``||f(A)R - R f(B)||`` against ``||f||_alpha (max_j ||A_j R - R B_j||)^alpha ||R||^{1-alpha}``.

    ``ratio_star`` uses the modulus form ``||R|| omega*(max_j ||A_j R - R B_j|| / ||R||)``
    with ``omega(t) = t^alpha``.  ``residual`` is the exact quasicommutator
    identity with chain divided differences; ``scale_defect`` compares the
    ratio at R and 2R.  ``r_mode="identity"`` reproduces the Holder rows.
    """
    _check_alpha(alpha)
    if r_mode not in ("random", "identity"):
        raise ValidationError(f"unknown r_mode {r_mode!r}")
    _check_positive(n=n, dim=dim, trials=trials, levels=levels)
    fn = partial(_quasi_trial, n=n, dim=dim, alpha=alpha, levels=levels, seed=seed, modes=tuple(modes),
                 r_mode=r_mode, commutator=commutator)
    cols = ["trial", "mode", "lhs", "rhs", "ratio", "rhs_star", "ratio_star", "norm", "max_qc", "r_norm",
            "prefactor", "scale_defect", "residual", "residual_scaled"]
    rep = ExperimentReport("quasicommutator", {"n": n, "dim": dim, "trials": trials, "alpha": alpha, "seed": seed,
                                               "r_mode": r_mode, "commutator": commutator, "levels": levels,
                                               "modes": list(modes)}, cols, run_trials(fn, trials, jobs))
    rep.summarize(extra={"label": "empirical lower estimate of c_n",
                         "max_residual_scaled": float(np.max(rep.column("residual_scaled"))),
                         "max_scale_defect": float(np.max(rep.column("scale_defect")))})
    return rep


# --------------------------------------------------------------- identities


def _identity_formulas(n: int) -> list[str]:
    names = {1: ["birman_solomyak"], 2: ["two_variable"], 3: []}.get(n, [])
    return names + ["chain", "quasicommutator"]


def _identity_trial(trial: int, *, n: int, dim: int, sigma: float, seed: int) -> list[dict]:
    from ..doi import divided_differences, verify_sum_formula

    rng = trial_rng(seed, trial)
    f = periodic_bandlimited(n, sigma, 6, rng)
    A, B = tuple_pair(n, dim, rng, ("independent", "shared", "perturbed")[trial % 3])
    R = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2 * dim)
    delta = max(op_norm(a - b) for a, b in zip(A.matrices, B.matrices))
    qc = max(op_norm(a @ R - R @ b) for a, b in zip(A.matrices, B.matrices))
    fs = field_scale(f)
    rows = []
    for name in _identity_formulas(n):
        if name == "birman_solomyak":
            kernels = [divided_differences(f, "1d")]
        elif name == "two_variable":
            kernels = [divided_differences(f, "x"), divided_differences(f, "y")]
        else:
            kernels = chain_kernels(f)
        if name == "quasicommutator":
            res, size = quasicommutator_check(f, A, B, R, kernels), qc
        else:
            res, size = verify_sum_formula(f, A, B, kernels), delta
        scale = fs * max(1.0, sigma * size)
        rows.append({"trial": trial, "formula": name, "residual": res, "scale": scale, "scaled": res / scale})
    return rows


def identity_experiment(n: int = 3, dim: int = 8, trials: int = 50, sigma: float = 2.0, seed: int = DEFAULT_SEED,
                        jobs: int = 1) -> ExperimentReport:
    """Residuals of the exact finite-dimensional difference and quasicommutator formulas.

    Each trial checks the ordinary divided-difference formula (n = 1), the
    two-variable formula (n = 2), the chain formula for any n, and the
    quasicommutator formula with a random R.  Residuals are scaled by
    ``||f|| max(1, sigma * max_j ||A_j - B_j||)`` (resp. the quasicommutator
    differences).
    """
    _check_positive(n=n, dim=dim, trials=trials, sigma=sigma)
    fn = partial(_identity_trial, n=n, dim=dim, sigma=sigma, seed=seed)
    rows = [r for block in run_trials(fn, trials, jobs) for r in block]
    rep = ExperimentReport("identities", {"n": n, "dim": dim, "trials": trials, "sigma": sigma, "seed": seed},
                           ["trial", "formula", "residual", "scale", "scaled"], rows)
    worst = rep.column("scaled")
    rep.summary = {"trials": trials, "rows": len(rows), "formulas": _identity_formulas(n),
                   "max_scaled_residual": float(worst.max())}
    return rep
