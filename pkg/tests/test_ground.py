import numpy as np
import pytest

from fmmd.errors import InvalidArgument
from fmmd.ground import (
    Cosine,
    CosineExponential,
    Dirac,
    Matern15,
    SquaredExponential,
    covariance_operator_matrix,
    eval_kernel,
    gram,
)
from fmmd.mesh import Mesh, uniform_mesh


def test_squared_exponential_values():
    k = SquaredExponential(0.5)
    assert eval_kernel(k, 0.3, 0.3) == 1.0
    assert eval_kernel(k, 0.0, 0.5) == pytest.approx(np.exp(-0.5))


def test_matern15_formula_and_symmetry():
    k = Matern15(1.0)
    r = np.sqrt(3) * 0.4
    assert eval_kernel(k, 0.1, 0.5) == pytest.approx((1 + r) * np.exp(-r))
    assert eval_kernel(k, 0.5, 0.1) == eval_kernel(k, 0.1, 0.5)


def test_cosine_kernel_is_periodic_sum():
    k = Cosine(3)
    assert eval_kernel(k, 0.0, 0.0) == pytest.approx(3.0)
    assert eval_kernel(k, 0.2, 0.0) == pytest.approx(1 + np.cos(0.4 * np.pi) + np.cos(0.8 * np.pi))
    assert eval_kernel(k, 1.0, 0.0) == pytest.approx(3.0)


def test_cosine_kernel_rescales_to_unit_interval():
    k = Cosine(4)
    assert eval_kernel(k, 2.0, 0.0, interval=(0, 4)) == pytest.approx(eval_kernel(k, 0.5, 0.0))


@pytest.mark.parametrize("F", [1, 3, 5])
def test_cosine_gram_rank(F):
    # cos(2 pi n (s - t)) splits into a cos and a sin term, except n = 0
    K = gram(Cosine(F), uniform_mesh(64))
    assert np.linalg.matrix_rank(K, tol=1e-8 * np.abs(K).max()) == 2 * F - 1


def test_cosine_exponential_is_product():
    k = CosineExponential(20, np.sqrt(10))
    d = 0.37
    expected = np.exp(-d**2 / 20) * sum(np.cos(2 * np.pi * n * d) for n in range(20))
    assert eval_kernel(k, d, 0.0) == pytest.approx(expected)


def test_dirac_gram_is_identity():
    assert np.array_equal(gram(Dirac(), uniform_mesh(7)), np.eye(7))


@pytest.mark.parametrize("k", [SquaredExponential(0.2), Matern15(0.3), CosineExponential(5, 0.3)])
def test_gram_is_symmetric_psd(k):
    K = gram(k, uniform_mesh(80))
    assert np.array_equal(K, K.T)
    assert np.linalg.eigvalsh(K).min() > -1e-8 * np.abs(K).max()


def test_covariance_operator_forms_are_similar():
    m = Mesh([0.0, 0.1, 0.4, 0.45, 0.9, 1.0])
    A, B = covariance_operator_matrix(SquaredExponential(0.3), m)
    assert np.allclose(np.sort(np.linalg.eigvals(A).real), np.linalg.eigvalsh(B))
    assert np.allclose(B, B.T)


def test_covariance_operator_trace_matches_integral():
    # trace of C_k0 = int k0(t, t) dt = 1 on the unit interval
    _, B = covariance_operator_matrix(SquaredExponential(0.3), uniform_mesh(200))
    assert np.trace(B) == pytest.approx(1.0)


def test_covariance_operator_acts_as_integral():
    m = uniform_mesh(2001)
    A, _ = covariance_operator_matrix(Matern15(0.5), m)
    y = np.ones(m.size)
    # (C 1)(0) = int_0^1 k(s, 0) ds in closed form for Matern-1.5
    a = np.sqrt(3) / 0.5
    exact = (2 - (2 + a) * np.exp(-a)) / a
    assert (A @ y)[0] == pytest.approx(exact, rel=2e-3)


@pytest.mark.parametrize(
    "make", [lambda: SquaredExponential(0.0), lambda: Matern15(-1), lambda: Cosine(0), lambda: Cosine(2.5),
             lambda: CosineExponential(3, np.inf)]
)
def test_invalid_parameters(make):
    with pytest.raises(InvalidArgument):
        make()
