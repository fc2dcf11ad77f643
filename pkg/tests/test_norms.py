from __future__ import annotations

import math

import numpy as np
import pytest

from doilab.errors import EmptyRange, GridTooCoarse, SamplerUnsupported
from doilab.funcalc.fields import Sampler, TrigSum, make_bandlimited
from doilab.funcalc.filters import band_weight
from doilab.funcalc.moduli import Modulus
from doilab.funcalc.norms import (
    bernstein_check,
    besov_seminorm,
    lambda_norm,
    lp_band,
    lp_component,
    lp_tail,
    lp_tail_check,
    sample_pairs,
    sup_norm,
)


def cos1(freq: float, n: int = 1) -> TrigSum:
    xi = np.zeros(n)
    xi[0] = freq
    return TrigSum.from_real([1.0], [0.0], [xi])


def test_sup_norm_of_cosine():
    assert sup_norm(cos1(3.0)) == pytest.approx(1.0, abs=1e-12)


def test_bernstein_equality_case():
    assert bernstein_check(cos1(4.0), (1,)) == pytest.approx(1.0, abs=1e-9)


def test_bernstein_zero_order():
    f = make_bandlimited(2, 3.0, 6, seed=1)
    assert bernstein_check(f, (0, 0)) == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(5))
def test_bernstein_random_n2(seed):
    f = make_bandlimited(2, 2.0, 8, seed=seed, period=2 * math.pi)
    assert bernstein_check(f, (1, 1), points=256) <= 1.0 + 1e-3


def test_bernstein_needs_trigsum():
    with pytest.raises(SamplerUnsupported):
        bernstein_check(Sampler(1, lambda x: x[..., 0]), (1,))


def test_lp_component_single_band():
    l = 3
    f = cos1(2.0 ** l)
    vals = lp_component(f, l, grid_size=64)
    assert np.allclose(vals, f.on_grid([np.linspace(0, 2 * math.pi, 64, endpoint=False)]) * float(band_weight(8.0, 3)))


def test_lp_component_below_band_vanishes():
    f = cos1(1.0) + cos1(1.5)
    assert np.all(lp_component(f, 3, grid_size=32) == 0)


def test_adjacent_bands_reconstruct():
    f = cos1(5.0)
    total = lp_band(f, 2) + lp_band(f, 3)
    x = np.linspace(0, 6, 50)[:, None]
    assert np.allclose(total(x), f(x), atol=1e-14)


@pytest.mark.parametrize("n,l", [(1, 2), (2, 1), (2, 3)])
def test_exact_matches_fft(n, l):
    f = make_bandlimited(n, 12.0, 10, seed=3, period=2 * math.pi)
    exact = lp_component(f, l, grid_size=64, method="exact")
    fft = lp_component(f, l, grid_size=64, method="fft")
    assert np.max(np.abs(exact - fft)) <= 1e-8


def test_fft_grid_too_coarse():
    with pytest.raises(GridTooCoarse):
        lp_component(cos1(2.0), 5, grid_size=16, method="fft")


def test_besov_single_band():
    f = cos1(2.0 ** 4)
    # |xi| = 2^l0 sits entirely in band l0 (w(1) = 1)
    assert besov_seminorm(f, 1.0, 1.0, range(0, 8)) == pytest.approx(16.0, rel=1e-9)


def test_besov_constant_is_zero():
    assert besov_seminorm(TrigSum.constant(3.0, 2), 1.0, 1.0, range(-2, 4)) == 0.0


def test_besov_empty_range():
    with pytest.raises(EmptyRange):
        besov_seminorm(cos1(1.0), 1.0, 1.0, [])


def test_lambda_norm_cosine_lipschitz():
    f = cos1(1.0)
    pairs = sample_pairs(1, 20000, scales=(1e-4, 1.0), seed=0)
    val = lambda_norm(f, Modulus.linear(), pairs)
    assert 0.99 <= val <= 1.0 + 1e-12


def test_lambda_norm_polish_only_grows():
    f = make_bandlimited(2, 3.0, 5, seed=4)
    pairs = sample_pairs(2, 300, seed=1)
    w = Modulus.power(0.5)
    assert lambda_norm(f, w, pairs, polish=4) >= lambda_norm(f, w, pairs)


def test_lambda_norm_empty():
    with pytest.raises(EmptyRange):
        lambda_norm(cos1(1.0), Modulus.linear(), (np.zeros((0, 1)), np.zeros((0, 1))))
    with pytest.raises(EmptyRange):
        lambda_norm(cos1(1.0), Modulus.linear(), (np.ones((3, 1)), np.ones((3, 1))))


def test_lp_tail_keeps_high_terms():
    f = cos1(1.0) + cos1(40.0)
    high = lp_tail(f, 4)
    assert np.allclose(np.linalg.norm(high.freqs, axis=1), 40.0)


def test_lp_tail_check_zero_field():
    assert lp_tail_check(TrigSum.constant(0.0, 1).scale(0.0), Modulus.power(0.5), 2, lam=1.0) == 0.0


def test_lp_tail_check_low_field_has_no_tail():
    assert lp_tail_check(cos1(1.0), Modulus.power(0.5), 4) == 0.0


def test_lp_tail_check_bounded_across_levels():
    rng = np.random.default_rng(0)
    from doilab.experiments.ensembles import holder_field

    f = holder_field(1, 0.5, 7, rng)
    w = Modulus.power(0.5)
    lam = lambda_norm(f, w, sample_pairs(1, 5000, seed=2), polish=4)
    ratios = [lp_tail_check(f, w, m, lam=lam) for m in range(7)]
    assert all(math.isfinite(r) for r in ratios)
    assert max(ratios) <= 10.0
