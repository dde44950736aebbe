import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fmmd.errors import DegenerateBandwidth, InsufficientData, InvalidArgument
from fmmd.features import Identity, IntegralOp, Square, fit_fpca, mapped_sq_distance
from fmmd.ground import SquaredExponential
from fmmd.kernels import (
    Cov,
    ImqT,
    MedianRule,
    RandomFeature,
    SeT,
    gram_matrices,
    kernel_eval,
    median_heuristic,
    pooled_gram,
)
from fmmd.mesh import FunctionSet, inner_product, uniform_mesh


def _random_set(m, n, seed):
    return FunctionSet(m, np.random.default_rng(seed).standard_normal((n, m.size)))


def test_se_and_imq_values(mesh50):
    x = mesh50.sample(lambda t: t)
    y = mesh50.sample(lambda t: 1 - t)
    d2 = mapped_sq_distance(Identity(), x, y)
    assert kernel_eval(SeT(Identity(), 2.0), x, y) == pytest.approx(np.exp(-d2 / 8))
    assert kernel_eval(ImqT(Identity(), 2.0), x, y) == pytest.approx((d2 / 4 + 1) ** -0.5)
    assert kernel_eval(SeT(), x, x) == 1.0


def test_cov_kernel(mesh50):
    x = mesh50.sample(np.sin)
    y = mesh50.sample(np.cos)
    assert kernel_eval(Cov(), x, y) == pytest.approx(inner_product(x, y) ** 2)


def test_square_kernel_sums_two_parts(mesh50):
    x = mesh50.sample(lambda t: t)
    y = mesh50.sample(lambda t: 2 * t)
    k = SeT(Square(), [1.0, 3.0])
    d = mapped_sq_distance(Square(), x, y, [1.0, 3.0])
    assert kernel_eval(k, x, y) == pytest.approx(np.exp(-0.5 * d))


def test_paired_matches_matrix_diagonal(mesh50):
    X, Y = _random_set(mesh50, 6, 0), _random_set(mesh50, 6, 1)
    for k in (SeT(Identity(), 3.0), ImqT(Square(), [2.0, 4.0]), Cov(),
              SeT(IntegralOp(SquaredExponential(0.2), mesh50), 0.5)):
        M = k.matrix(X.values, Y.values, mesh50)
        assert np.allclose(k.paired(X.values, Y.values, mesh50), np.diag(M))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 10.0))
def test_gram_is_symmetric_psd_with_unit_diagonal(seed, gamma):
    m = uniform_mesh(20)
    Z = _random_set(m, 12, seed)
    for k in (SeT(Identity(), gamma), ImqT(Identity(), gamma)):
        K = pooled_gram(k, Z)
        assert np.array_equal(K, K.T)
        assert np.allclose(np.diag(K), 1.0)
        assert np.linalg.eigvalsh(K).min() > -1e-10


def test_gram_matrices_blocks(mesh50):
    X, Y = _random_set(mesh50, 4, 0), _random_set(mesh50, 4, 1)
    k = SeT(Identity(), 2.0)
    Kxx, Kyy, Kxy = gram_matrices(k, X, Y)
    assert Kxy[1, 2] == pytest.approx(kernel_eval(k, X[1], Y[2]))
    assert Kyy[0, 3] == pytest.approx(kernel_eval(k, Y[0], Y[3]))
    assert Kxx.shape == (4, 4)


def test_median_heuristic_brute_force(mesh50):
    X, Y = _random_set(mesh50, 5, 0), _random_set(mesh50, 4, 1)
    Z = X.concat(Y)
    d = [mapped_sq_distance(Identity(), Z[i], Z[j]) for i, j in itertools.combinations(range(9), 2)]
    assert median_heuristic(Identity(), X, Y)[0] == pytest.approx(np.median(d))
    sq = median_heuristic(Square(), X, Y)
    d2 = [np.dot(mesh50.weights, (Z[i].values ** 2 - Z[j].values ** 2) ** 2)
          for i, j in itertools.combinations(range(9), 2)]
    assert sq == pytest.approx([np.median(d), np.median(d2)])


def test_median_heuristic_degenerate(mesh50):
    same = FunctionSet(mesh50, np.ones((4, 50)))
    with pytest.raises(DegenerateBandwidth):
        median_heuristic(Identity(), same)
    with pytest.raises(InsufficientData):
        median_heuristic(Identity(), FunctionSet(mesh50, np.ones((1, 50))))
    # mostly duplicates: zero median falls back to the positive median
    vals = np.zeros((5, 50))
    vals[4] = 1.0
    g = median_heuristic(Identity(), FunctionSet(mesh50, vals))
    assert g[0] == pytest.approx(1.0)


def test_median_rule_builds_kernels(mesh50):
    X, Y = _random_set(mesh50, 10, 0), _random_set(mesh50, 10, 1)
    k = MedianRule(Square())(X, Y)
    assert isinstance(k, SeT) and k.bandwidths.size == 2
    assert np.allclose(k.bandwidths ** 2, median_heuristic(Square(), X, Y))
    assert isinstance(MedianRule(family="imq")(X, Y), ImqT)
    kf = MedianRule(fit=lambda Z: fit_fpca(Z, 0.9))(X, Y)
    assert kf.T.retained >= 1


def test_random_feature_approximates_se_in_coefficients():
    m = uniform_mesh(200)
    t = m.points
    basis = FunctionSet(m, np.vstack([np.ones_like(t), np.sqrt(2) * np.cos(np.pi * t)]))
    G = (basis.values * m.weights) @ basis.values.T
    basis = FunctionSet(m, np.linalg.solve(np.linalg.cholesky(G), basis.values))
    lam = np.array([1.0, 0.5])
    k = RandomFeature(lam, basis, n_features=20000, seed=1)
    x = m.sample(lambda s: 0.3 + 0 * s)
    y = m.sample(lambda s: np.cos(np.pi * s))
    cx = (basis.values * m.weights) @ x.values
    cy = (basis.values * m.weights) @ y.values
    exact = np.exp(-0.5 * np.sum(lam * (cx - cy) ** 2))
    assert kernel_eval(k, x, y) == pytest.approx(exact, abs=0.02)
    assert kernel_eval(k, x, x) == pytest.approx(1.0)


def test_random_feature_is_deterministic_given_seed(mesh50):
    basis = FunctionSet(mesh50, (np.eye(50)[:3] / mesh50.sqrt_weights))
    X = _random_set(mesh50, 3, 2)
    a = RandomFeature(np.ones(3), basis, 50, seed=4).matrix(X.values, X.values, mesh50)
    b = RandomFeature(np.ones(3), basis, 50, seed=4).matrix(X.values, X.values, mesh50)
    assert np.array_equal(a, b)


def test_random_feature_validation(mesh50):
    basis = FunctionSet(mesh50, np.ones((2, 50)))
    with pytest.raises(InvalidArgument):
        RandomFeature(np.ones(3), basis)
    with pytest.raises(InvalidArgument):
        RandomFeature(np.ones(2), basis, n_features=0)
