"""The compiled kernels and the numpy fallback must agree."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fmmd import _core
from fmmd._core import _fallback

cy = pytest.importorskip("fmmd._core._kernels")


def test_backend_is_compiled_when_available():
    assert _core.BACKEND == "cython"


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 9), st.integers(1, 9), st.integers(1, 12))
def test_weighted_sq_dists_agree(seed, na, nb, N):
    rng = np.random.default_rng(seed)
    A, B = rng.standard_normal((na, N)), rng.standard_normal((nb, N))
    w = rng.uniform(0.1, 1.0, N)
    assert np.allclose(cy.weighted_sq_dists(A, B, w), _fallback.weighted_sq_dists(A, B, w), rtol=1e-13, atol=1e-14)


def test_identical_rows_give_exact_zero_distance():
    A = np.random.default_rng(0).standard_normal((5, 7))
    w = np.full(7, 1 / 7)
    for mod in (cy, _fallback):
        assert np.all(np.diag(mod.weighted_sq_dists(A, A, w)) == 0.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 10))
def test_u_statistic_agrees(seed, n):
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((2 * n, 3))
    K = np.exp(-0.5 * ((Z[:, None] - Z[None]) ** 2).sum(-1))
    args = (K[:n, :n].copy(), K[n:, n:].copy(), K[:n, n:].copy())
    assert cy.u_statistic(*args) == pytest.approx(_fallback.u_statistic(*args), abs=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 8), st.integers(1, 20))
def test_permuted_statistics_agree(seed, n, B):
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((2 * n, 2))
    K = np.ascontiguousarray(np.exp(-0.5 * ((Z[:, None] - Z[None]) ** 2).sum(-1)))
    perms = np.stack([rng.permutation(2 * n) for _ in range(B)]).astype(np.intp)
    assert np.allclose(cy.permuted_u_statistics(K, perms), _fallback.permuted_u_statistics(K, perms), atol=1e-13)


def test_identity_permutation_reproduces_statistic():
    rng = np.random.default_rng(1)
    Z = rng.standard_normal((8, 2))
    K = np.ascontiguousarray(np.exp(-0.5 * ((Z[:, None] - Z[None]) ** 2).sum(-1)))
    perms = np.arange(8, dtype=np.intp)[None]
    stat = _fallback.u_statistic(K[:4, :4], K[4:, 4:], K[:4, 4:])
    assert cy.permuted_u_statistics(K, perms)[0] == pytest.approx(stat, abs=1e-14)
