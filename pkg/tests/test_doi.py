from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import make_tuple, random_hermitian
from doilab.doi import (
    KernelFunction,
    apply_function,
    chain_kernels,
    divided_differences,
    doi,
    quasicommutator_check,
    verify_sum_formula,
)
from doilab.errors import DimensionMismatch, IdentityViolation, NonFiniteKernel, VariantDimensionMismatch
from doilab.funcalc.fields import Sampler, TrigSum, make_bandlimited
from doilab.linalg import op_norm


def rand_T(dim, rng):
    return rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))


def test_apply_constant(rng):
    A, _, _ = make_tuple(2, 6, rng)
    assert np.allclose(apply_function(TrigSum.constant(2.5, 2), A), 2.5 * np.eye(6), atol=1e-12)


@pytest.mark.parametrize("j", [0, 1, 2])
def test_apply_coordinate(rng, j):
    A, _, _ = make_tuple(3, 5, rng)
    coord = Sampler(3, lambda x, j=j: x[..., j])
    assert np.allclose(apply_function(coord, A), A.matrices[j], atol=1e-10)


def test_apply_product(rng):
    A, _, _ = make_tuple(2, 7, rng)
    prod = Sampler(2, lambda x: x[..., 0] * x[..., 1])
    assert np.max(np.abs(apply_function(prod, A) - A.matrices[0] @ A.matrices[1])) <= 1e-8


def test_apply_dimension_mismatch(rng):
    A, _, _ = make_tuple(2, 4, rng)
    with pytest.raises(DimensionMismatch):
        apply_function(TrigSum.constant(1.0, 3), A)


def test_doi_constant_kernel_is_identity(rng):
    A, _, _ = make_tuple(2, 6, rng)
    B, _, _ = make_tuple(2, 6, rng)
    T = rand_T(6, rng)
    assert np.allclose(doi(KernelFunction.constant(1.0, 2), A, B, T), T, atol=1e-12)


def test_doi_left_slice(rng):
    A, _, _ = make_tuple(2, 6, rng)
    B, _, _ = make_tuple(2, 6, rng)
    T = rand_T(6, rng)
    phi = make_bandlimited(2, 1.5, 4, seed=3)
    K = KernelFunction(lambda x, y: phi(x) * np.ones(y.shape[:-1]), 2)
    assert np.allclose(doi(K, A, B, T), apply_function(phi, A) @ T, atol=1e-10)


def test_doi_one_variable_divided_difference(rng):
    A, _, _ = make_tuple(1, 8, rng)
    B, _, _ = make_tuple(1, 8, rng)
    f = make_bandlimited(1, 3.0, 5, seed=1)
    D = divided_differences(f, "1d")
    lhs = apply_function(f, A) - apply_function(f, B)
    rhs = doi(D, A, B, A.matrices[0] - B.matrices[0])
    assert op_norm(lhs - rhs) <= 1e-10


def test_square_divided_difference():
    sq = Sampler(1, lambda x: x[..., 0] ** 2)
    D = divided_differences(sq, "1d")
    x = np.array([[1.0], [-2.0], [0.3]])
    y = np.array([[4.0], [5.0], [0.3]])
    assert np.allclose(np.real(D(x, y)), (x + y)[:, 0], atol=1e-6)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_chain_telescoping(n):
    rng = np.random.default_rng(n)
    f = make_bandlimited(n, 2.0, 7, seed=n)
    x, y = rng.uniform(-3, 3, (2, 100, n))
    total = sum((x[:, j] - y[:, j]) * K(x, y) for j, K in enumerate(chain_kernels(f)))
    assert np.max(np.abs(total - (f(x) - f(y)))) <= 1e-10


@pytest.mark.parametrize("j", [0, 1, 2])
def test_chain_diagonal_limit(j):
    f = make_bandlimited(3, 2.0, 6, seed=11)
    rng = np.random.default_rng(j)
    x = rng.uniform(-2, 2, (20, 3))
    y = rng.uniform(-2, 2, (20, 3))
    y[:, j] = x[:, j]
    # with y_j = x_j the kernel is D_j f at (y_<j, x_j, x_>j)
    z = np.concatenate([y[:, :j], x[:, j:]], axis=1)
    alpha = [0, 0, 0]
    alpha[j] = 1
    K = divided_differences(f, f"chain_{j + 1}")
    assert np.max(np.abs(K(x, y) - f.derivative(alpha)(z))) <= 1e-8


@pytest.mark.parametrize("variant,n", [("1d", 2), ("x", 3), ("y", 1), ("chain_4", 3), ("chain_0", 2), ("bogus", 2)])
def test_variant_mismatch(variant, n):
    with pytest.raises(VariantDimensionMismatch):
        divided_differences(make_bandlimited(n, 1.0, 2), variant)


def test_two_variable_kernels(rng):
    f = make_bandlimited(2, 2.0, 6, seed=2)
    A, _, _ = make_tuple(2, 8, rng)
    B, _, _ = make_tuple(2, 8, rng)
    ks = [divided_differences(f, "x"), divided_differences(f, "y")]
    assert verify_sum_formula(f, A, B, ks) <= 1e-8


@pytest.mark.parametrize("n,dim", [(1, 6), (2, 8), (3, 8), (3, 12)])
def test_sum_formula_chain(n, dim):
    rng = np.random.default_rng(100 + n + dim)
    f = make_bandlimited(n, 2.0, 6, seed=dim)
    A, _, _ = make_tuple(n, dim, rng)
    B, _, _ = make_tuple(n, dim, rng)
    assert verify_sum_formula(f, A, B, chain_kernels(f)) <= 1e-8


def test_sum_formula_equal_tuples(rng):
    f = make_bandlimited(3, 2.0, 4, seed=1)
    A, _, _ = make_tuple(3, 6, rng)
    assert verify_sum_formula(f, A, A, chain_kernels(f)) <= 1e-12


def test_sum_formula_identity_violation(rng):
    f = make_bandlimited(2, 2.0, 4, seed=1)
    A, _, _ = make_tuple(2, 5, rng)
    B, _, _ = make_tuple(2, 5, rng)
    wrong = [KernelFunction.constant(1.0, 2)] * 2
    with pytest.raises(IdentityViolation):
        verify_sum_formula(f, A, B, wrong)


def test_non_finite_kernel(rng):
    A, _, _ = make_tuple(1, 4, rng)
    bad = KernelFunction(lambda x, y: 1.0 / (x[..., 0] - x[..., 0]), 1, "bad")
    with np.errstate(divide="ignore", invalid="ignore"):
        with pytest.raises(NonFiniteKernel):
            doi(bad, A, A, np.eye(4))


def test_doi_bilinear(rng):
    A, _, _ = make_tuple(2, 6, rng)
    B, _, _ = make_tuple(2, 6, rng)
    f, g = make_bandlimited(2, 2.0, 4, seed=1), make_bandlimited(2, 2.0, 4, seed=2)
    P, Q = divided_differences(f, "x"), divided_differences(g, "y")
    S, T = rand_T(6, rng), rand_T(6, rng)
    a, b = 0.7 - 0.2j, -1.3
    lin_T = doi(P, A, B, a * S + b * T) - a * doi(P, A, B, S) - b * doi(P, A, B, T)
    lin_K = doi(P.scale(a) + Q.scale(b), A, B, S) - a * doi(P, A, B, S) - b * doi(Q, A, B, S)
    assert np.max(np.abs(lin_T)) <= 1e-10 and np.max(np.abs(lin_K)) <= 1e-10


def test_hilbert_schmidt_contractive(rng):
    A, _, _ = make_tuple(3, 8, rng)
    B, _, _ = make_tuple(3, 8, rng)
    f = make_bandlimited(3, 2.0, 6, seed=5)
    K = divided_differences(f, "chain_2")
    sup = np.max(np.abs(K.outer(A.grid, B.grid)))
    for _ in range(10):
        T = rand_T(8, rng)
        assert np.linalg.norm(doi(K, A, B, T)) <= sup * np.linalg.norm(T) * (1 + 1e-12)


def test_projective_tensor_bound(rng):
    A, _, _ = make_tuple(1, 8, rng, spread=3.0)
    B, _, _ = make_tuple(1, 8, rng, spread=3.0)
    phis = [np.cos, np.sin, lambda t: np.cos(2 * t)]
    psis = [np.sin, np.cos, lambda t: 0.5 * np.sin(3 * t)]
    K = KernelFunction.separable([lambda x, p=p: p(x[..., 0]) for p in phis],
                                 [lambda y, q=q: q(y[..., 0]) for q in psis], 1)
    bound = 1 + 1 + 0.5
    for _ in range(20):
        T = rand_T(8, rng)
        assert op_norm(doi(K, A, B, T)) <= bound * op_norm(T) * (1 + 1e-12)


def test_quasicommutator_identity_reduces(rng):
    f = make_bandlimited(3, 2.0, 5, seed=4)
    A, _, _ = make_tuple(3, 8, rng)
    B, _, _ = make_tuple(3, 8, rng)
    ks = chain_kernels(f)
    q = quasicommutator_check(f, A, B, np.eye(8), ks)
    assert q == pytest.approx(verify_sum_formula(f, A, B, ks), abs=1e-13)


def test_quasicommutator_commutator_case(rng):
    f = make_bandlimited(3, 2.0, 5, seed=4)
    A, _, _ = make_tuple(3, 8, rng)
    R = rand_T(8, rng)
    assert quasicommutator_check(f, A, A, R, chain_kernels(f)) <= 1e-8


def test_quasicommutator_random(rng):
    f = make_bandlimited(3, 2.0, 5, seed=9)
    A, _, _ = make_tuple(3, 8, rng)
    B, _, _ = make_tuple(3, 8, rng)
    R = rand_T(8, rng)
    assert quasicommutator_check(f, A, B, R, chain_kernels(f)) <= 1e-8


def test_doi_shape_check(rng):
    A, _, _ = make_tuple(1, 4, rng)
    with pytest.raises(DimensionMismatch):
        doi(KernelFunction.constant(1.0, 1), A, A, np.eye(3))
