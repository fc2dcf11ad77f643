from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from doilab.errors import InvalidSigma, SamplerUnsupported, ValidationError
from doilab.funcalc.fields import Sampler, TrigSum, make_bandlimited, sine_integral_1d, sine_integral_field
from scipy.special import sici


def test_single_pair_is_cosine():
    xi = np.array([[1.5, -0.5]])
    f = TrigSum(np.array([0.5, 0.5]), np.concatenate([xi, -xi]))
    x = np.random.default_rng(0).uniform(-5, 5, (50, 2))
    assert np.allclose(f(x), np.cos(x @ xi[0]), atol=1e-14)
    assert f.sigma == pytest.approx(math.hypot(1.5, 0.5))


def test_missing_conjugate_rejected():
    with pytest.raises(ValidationError):
        TrigSum(np.array([1.0 + 0j]), np.array([[1.0]]))


def test_bandlimited_deterministic_and_bounded():
    f = make_bandlimited(3, 2.5, 12, seed=7)
    g = make_bandlimited(3, 2.5, 12, seed=7)
    assert np.array_equal(f.coeffs, g.coeffs) and np.array_equal(f.freqs, g.freqs)
    assert f.sigma == pytest.approx(2.5)
    assert np.all(np.linalg.norm(f.freqs, axis=1) <= 2.5 + 1e-12)
    x = np.random.default_rng(1).normal(size=(20, 3))
    assert np.all(np.isreal(f(x)))


@pytest.mark.parametrize("sigma", [0.0, -1.0, math.inf])
def test_invalid_sigma(sigma):
    with pytest.raises(InvalidSigma):
        make_bandlimited(2, sigma, 3)


def test_periodic_snap_has_lattice_frequencies():
    f = make_bandlimited(2, 3.0, 8, seed=2, period=2 * math.pi)
    assert np.allclose(f.freqs, np.round(f.freqs))
    x = np.random.default_rng(3).uniform(0, 1, (10, 2))
    assert np.allclose(f(x), f(x + 2 * math.pi), atol=1e-12)


def test_derivative_termwise():
    f = TrigSum.from_real([1.0], [0.3], [[2.0, 1.0]])
    x = np.random.default_rng(4).uniform(-3, 3, (30, 2))
    d = f.derivative((1, 1))
    # d/dx1 d/dx2 cos(2 x1 + x2 + 0.3) = -2 cos(...)
    assert np.allclose(d(x), -2 * np.cos(x @ [2.0, 1.0] + 0.3), atol=1e-12)
    assert np.allclose(f.gradient(x)[:, 0], -2 * np.sin(x @ [2.0, 1.0] + 0.3), atol=1e-12)


def test_on_grid_matches_pointwise():
    f = make_bandlimited(2, 2.0, 5, seed=5)
    ax = [np.linspace(0, 1, 7), np.linspace(-1, 0, 4)]
    mesh = np.stack(np.meshgrid(*ax, indexing="ij"), axis=-1)
    assert np.allclose(f.on_grid(ax), f(mesh), atol=1e-13)


def test_json_round_trip():
    f = make_bandlimited(3, 1.0, 4, seed=6)
    g = TrigSum.from_json(json.loads(json.dumps(f.to_json())))
    assert np.array_equal(f.coeffs, g.coeffs) and np.array_equal(f.freqs, g.freqs)


def test_sampler_unsupported_paths():
    s = Sampler(1, lambda x: np.sin(x[..., 0]))
    assert s(np.array([[math.pi / 2]]))[0] == pytest.approx(1.0)
    with pytest.raises(SamplerUnsupported):
        s.sigma
    with pytest.raises(SamplerUnsupported):
        s.derivative((1,))


def test_sine_integral_approximation():
    x = np.linspace(-6, 6, 41)
    assert np.max(np.abs(sine_integral_1d()(x[:, None]) - sici(x)[0])) < 1e-8


def test_sine_integral_field_compact_spectrum():
    f = sine_integral_field()
    assert f.sigma <= math.sqrt(3) + 1e-12
    x = np.random.default_rng(7).uniform(-3, 3, (25, 3))
    expect = sici(x[:, 0] - x[:, 2])[0] * np.sin(x[:, 1])
    assert np.allclose(f(x), expect, atol=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.floats(0.1, 10), st.integers(1, 10), st.integers(0, 2 ** 31))
def test_bandlimited_sigma_property(n, sigma, terms, seed):
    f = make_bandlimited(n, sigma, terms, seed=seed)
    assert f.sigma == pytest.approx(sigma)
    assert f.num_terms == 2 * terms
