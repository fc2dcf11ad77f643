from __future__ import annotations

import json
import math

import numpy as np
import pytest

from doilab.errors import AlphaOutOfRange, GridTooCoarse, InvalidExponent, ValidationError
from doilab.experiments import (
    ExperimentReport,
    counterexample_d2f,
    fourier_exponent,
    g_sanity,
    holder_experiment,
    holder_field,
    holder_sweep,
    ideal_lipschitz_experiment,
    identity_experiment,
    lipschitz_experiment,
    periodic_bandlimited,
    positive_multiplier_check_3d,
    quasicommutator_experiment,
    schatten_holder_experiment,
    section_norms,
    trial_rng,
    tuple_pair,
)
from doilab.funcalc.moduli import Modulus
from doilab.funcalc.norms import sup_norm
from doilab.linalg import IdealSpec, op_norm

SMALL = dict(n=2, dim=4, trials=4, seed=3)


@pytest.mark.parametrize("mode", ["shared", "independent", "perturbed", "rank_one", "equal"])
def test_tuple_pair_modes_commute(mode):
    A, B = tuple_pair(3, 6, trial_rng(0, 1), mode)
    for T in (A, B):
        for X in T.matrices:
            for Y in T.matrices:
                assert op_norm(X @ Y - Y @ X) <= 1e-10
    if mode == "equal":
        assert A is B
    if mode == "rank_one":
        for a, b in zip(A.matrices, B.matrices):
            assert np.linalg.matrix_rank(a - b, tol=1e-9) <= 1


def test_tuple_pair_unknown_mode():
    with pytest.raises(ValidationError):
        tuple_pair(2, 3, trial_rng(0, 0), "nope")


def test_periodic_bandlimited():
    f = periodic_bandlimited(2, 3.0, 6, trial_rng(1, 0))
    assert f.sigma == pytest.approx(3.0)
    period = 2 * math.pi * 4 / 3.0
    x = np.random.default_rng(0).uniform(0, 1, (10, 2))
    assert np.allclose(f(x), f(x + period), atol=1e-12)


def test_holder_field_bands():
    f = holder_field(1, 0.5, 4, trial_rng(2, 0))
    r = np.linalg.norm(f.freqs, axis=1)
    assert np.all((r >= 1) & (r < 32))
    with pytest.raises(AlphaOutOfRange):
        holder_field(1, 1.5, 3, trial_rng(0, 0))


def test_lipschitz_equal_tuples_give_zero():
    rep = lipschitz_experiment(n=2, dim=4, trials=3, modes=("equal",))
    assert np.all(rep.column("lhs") == 0) and np.all(rep.column("ratio") == 0)


def test_scalar_sine_bound():
    # n = 1, dim = 1: |sin a - sin b| <= |a - b|
    rep = lipschitz_experiment(n=1, dim=1, trials=20, sigma=1.0, terms=1)
    assert rep.summary["max_ratio"] <= 1.0 + 1e-9


def test_operator_spec_matches_lipschitz():
    a = lipschitz_experiment(**SMALL)
    b = ideal_lipschitz_experiment(IdealSpec.operator(), **SMALL)
    assert a.csv_text() == b.csv_text()


def test_hilbert_schmidt_contractivity():
    rep = ideal_lipschitz_experiment(IdealSpec.schatten(2.0), n=3, dim=6, trials=9)
    assert np.all(rep.column("hs_ratio") <= 1 + 1e-10)
    assert "hs_ratio" in rep.columns


def test_lipschitz_ratios_finite():
    rep = lipschitz_experiment(n=3, dim=8, trials=6)
    assert rep.summary["finite"] == 6 and rep.summary["max_ratio"] < 10


def test_holder_power_columns():
    rep = holder_experiment(0.5, levels=3, **SMALL)
    assert rep.summary["finite"] == 4
    assert np.allclose(rep.column("prefactor"), 2.0)
    assert rep.summary["label"] == "empirical lower estimate of c_n"


def test_holder_omega_divergent():
    rep = holder_experiment(0.5, kind="omega", omega=Modulus.linear(), levels=2, **SMALL)
    assert all(row["divergent"] for row in rep.rows if row["max_delta"] > 0)


def test_holder_log_star_gap():
    rep = holder_experiment(0.5, kind="log", levels=2, **SMALL)
    assert np.max(rep.column("star_gap")) <= 1e-6


def test_holder_alpha_range():
    with pytest.raises(AlphaOutOfRange):
        holder_experiment(1.0, **SMALL)
    with pytest.raises(AlphaOutOfRange):
        quasicommutator_experiment(0.0, **SMALL)


def test_holder_sweep_summary():
    rep = holder_sweep(alphas=(0.4, 0.8), levels=2, **SMALL)
    assert [r["alpha"] for r in rep.rows] == [0.4, 0.8]
    assert "trend_slope" in rep.summary and "nondecreasing" in rep.summary


def test_identity_r_reproduces_holder_rows():
    h = holder_experiment(0.5, levels=3, **SMALL)
    q = quasicommutator_experiment(0.5, levels=3, r_mode="identity", **SMALL)
    assert np.allclose(h.column("ratio"), q.column("ratio"), rtol=1e-12)
    assert np.max(q.column("residual_scaled")) <= 1e-8


def test_quasicommutator_random_and_commutator():
    q = quasicommutator_experiment(0.5, levels=3, **SMALL)
    assert q.summary["max_residual_scaled"] <= 1e-8
    assert q.summary["max_scale_defect"] <= 1e-10
    c = quasicommutator_experiment(0.5, levels=3, commutator=True, **SMALL)
    assert all(r["mode"] == "commutator" for r in c.rows)
    assert c.summary["max_residual_scaled"] <= 1e-8


def test_partial_sums_m0_reduces_to_operator_norm():
    h = holder_experiment(0.5, levels=3, **SMALL)
    s = schatten_holder_experiment(2.0, 0.5, "partial_sums", m=0, levels=3, **SMALL)
    assert np.allclose(h.column("ratio"), s.column("ratio"), rtol=1e-10)


@pytest.mark.parametrize("kind,p", [("schatten", 2.0), ("partial_sums", 3.0), ("boyd_power", 2.0),
                                    ("weak", 1.0), ("besov", 1.0)])
def test_schatten_kinds_finite(kind, p):
    rep = schatten_holder_experiment(p, 0.5, kind, levels=2, **SMALL)
    assert rep.summary["finite"] == 4
    assert np.all(rep.column("prefactor") > 0)


@pytest.mark.parametrize("kind,p", [("schatten", 1.0), ("partial_sums", 0.5), ("weak", 2.0), ("besov", 1.5)])
def test_schatten_invalid_exponent(kind, p):
    with pytest.raises(InvalidExponent):
        schatten_holder_experiment(p, 0.5, kind, **SMALL)


def test_schatten_boyd_rejects_operator():
    with pytest.raises(InvalidExponent):
        schatten_holder_experiment(2.0, 0.5, "boyd_power", ideal=IdealSpec.operator(), **SMALL)


def test_identity_experiment_small():
    rep = identity_experiment(n=2, dim=4, trials=3)
    assert rep.summary["max_scaled_residual"] <= 1e-8
    assert set(rep.summary["formulas"]) == {"two_variable", "chain", "quasicommutator"}


def test_report_bytes_deterministic(tmp_path):
    a = holder_experiment(0.5, levels=2, **SMALL)
    b = holder_experiment(0.5, levels=2, **SMALL)
    assert a.csv_text() == b.csv_text() and a.json_text() == b.json_text()
    csv_path, json_path = a.write(tmp_path)
    payload = json.loads(json_path.read_text())
    assert payload["schema_version"] == 1 and payload["name"] == "holder_power"
    assert csv_path.read_text().splitlines()[0].split(",") == a.columns


def test_jobs_do_not_change_results():
    a = lipschitz_experiment(n=2, dim=4, trials=6, jobs=1)
    b = lipschitz_experiment(n=2, dim=4, trials=6, jobs=2)
    assert a.csv_text() == b.csv_text()


def test_report_clean_infinities():
    rep = ExperimentReport("x", {"v": math.inf}, ["a"], [{"a": 1.0}], {"m": math.nan})
    payload = json.loads(rep.json_text())
    assert payload["params"]["v"] == "inf" and payload["summary"]["m"] == "nan"


def test_counterexample_pieces():
    s = g_sanity()
    assert s["odd_defect"] <= 1e-12 and 1 - 1e-3 <= s["sup_over_g_pi"] <= 1 + 1e-12
    ft = fourier_exponent(points=6)
    assert abs(ft["exponent"] + 1) <= 0.1
    sec = section_norms((4, 8, 16))
    assert sec[2] / sec[0] > 2
    with pytest.raises(GridTooCoarse):
        section_norms((4, 8), h=1.0)
    with pytest.raises(ValidationError):
        section_norms((8, 4))


def test_counterexample_reports_small():
    rep = counterexample_d2f(sizes=(4, 8, 16), h=0.25)
    assert rep.summary["d2_growth"] > 1.5
    assert rep.summary["surrogates"]["kappa"] == "sin(u)/(pi u)"
    pos = positive_multiplier_check_3d(sizes=(2, 4, 8), h=0.5)
    assert pos.summary["d1_spread"] <= 1.3 and pos.summary["d3_spread"] <= 1.3
