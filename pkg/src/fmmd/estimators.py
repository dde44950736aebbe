"""MMD estimators, the permutation two-sample test and power harness."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _core
from .errors import InsufficientData, InvalidArgument
from .kernels import KernelSpec, pooled_gram
from .mesh import FunctionSet, _check_same_mesh


@dataclass(frozen=True)
class TestResult:
    statistic: float
    threshold: float
    p_value: float
    reject: bool
    n_permutations: int
    alpha: float

    __test__ = False  # not a pytest class


@dataclass(frozen=True)
class PowerReport:
    rejection_rate: float
    n_trials: int
    seeds: tuple = field(repr=False)
    rejections: tuple = field(repr=False, default=())

    @property
    def stderr(self) -> float:
        p = self.rejection_rate
        return math.sqrt(p * (1 - p) / self.n_trials)


def _check_square(Kxx, Kyy, Kxy):
    n = Kxx.shape[0]
    if Kxx.shape != (n, n) or Kyy.shape != Kxx.shape or Kxy.shape != Kxx.shape:
        raise InvalidArgument(
            f"equal sample sizes required, got {Kxx.shape}, {Kyy.shape}, {Kxy.shape}"
        )
    if n < 2:
        raise InsufficientData("the U-statistic needs n >= 2")


def mmd_u_statistic(Kxx, Kyy, Kxy) -> float:
    """Unbiased estimate ``1/(n(n-1)) sum_{i != j} h(z_i, z_j)``.

    ``h(z_i, z_j) = k(x_i, x_j) + k(y_i, y_j) - k(x_i, y_j) - k(x_j, y_i)``,
    so the diagonal of ``Kxy`` never enters.
    """
    Kxx, Kyy, Kxy = (np.asarray(K, dtype=float) for K in (Kxx, Kyy, Kxy))
    _check_square(Kxx, Kyy, Kxy)
    return float(_core.u_statistic(Kxx, Kyy, Kxy))


def linear_h(k: KernelSpec, X: FunctionSet, Y: FunctionSet) -> np.ndarray:
    """``h(z_{2i-1}, z_{2i})`` for each of the ``n/2`` disjoint consecutive pairs."""
    _check_same_mesh(X.mesh, Y.mesh)
    n = len(X)
    if len(Y) != n:
        raise InvalidArgument("equal sample sizes required")
    if n < 2 or n % 2:
        raise InvalidArgument(f"linear estimator needs an even n >= 2, got {n}")
    x1, x2 = X.values[0::2], X.values[1::2]
    y1, y2 = Y.values[0::2], Y.values[1::2]
    m = X.mesh
    return (k.paired(x1, x2, m) - k.paired(x1, y2, m)) + (k.paired(y1, y2, m) - k.paired(x2, y1, m))


def mmd_linear(k: KernelSpec, X: FunctionSet, Y: FunctionSet) -> float:
    """Linear-time estimate ``(2/n) sum_{i=1}^{n/2} h(z_{2i-1}, z_{2i})``."""
    h = linear_h(k, X, Y)
    return float(2.0 * h.sum() / len(X))


def permutation_indices(rng: np.random.Generator, size: int, n_perm: int) -> np.ndarray:
    return np.stack([rng.permutation(size) for _ in range(n_perm)]).astype(np.intp)


def permutation_threshold(perm_stats: np.ndarray, alpha: float) -> float:
    """Order statistic ``ceil((1 - alpha)(B + 1))`` of the permuted statistics."""
    B = perm_stats.size
    r = math.ceil((1 - alpha) * (B + 1) - 1e-12)
    r = min(max(r, 1), B)
    return float(np.sort(perm_stats)[r - 1])


def gram_permutation_test(K: np.ndarray, n: int, alpha: float, n_perm: int, rng) -> TestResult:
    """Permutation test on a pooled ``(2n, 2n)`` Gram matrix (first n rows = X)."""
    if not 0 < alpha < 1:
        raise InvalidArgument(f"alpha must lie in (0, 1), got {alpha}")
    if n_perm < 1:
        raise InvalidArgument("n_perm must be >= 1")
    if n < 2:
        raise InsufficientData("the U-statistic needs n >= 2")
    K = np.ascontiguousarray(K, dtype=float)
    stat = float(_core.u_statistic(K[:n, :n], K[n:, n:], K[:n, n:]))
    perms = permutation_indices(rng, 2 * n, n_perm)
    null = _core.permuted_u_statistics(K, perms)
    thr = permutation_threshold(null, alpha)
    p = (1 + int(np.count_nonzero(null >= stat))) / (n_perm + 1)
    return TestResult(stat, thr, p, bool(stat > thr), int(n_perm), float(alpha))


def permutation_test(
    k: KernelSpec, X: FunctionSet, Y: FunctionSet, alpha=0.05, n_perm=1000, seed=None
) -> TestResult:
    """Kernel two-sample test with a permutation-bootstrap threshold.

    One Gram matrix is built on the pooled sample; each permutation only
    re-indexes it.
    """
    _check_same_mesh(X.mesh, Y.mesh)
    if len(X) != len(Y):
        raise InvalidArgument("equal sample sizes required")
    K = pooled_gram(k, X.concat(Y))
    return gram_permutation_test(K, len(X), alpha, n_perm, np.random.default_rng(seed))


def trial_seeds(seed, n_trials: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(n_trials)


def power_harness(
    genP: Callable,
    genQ: Callable,
    n: int,
    kernel,
    alpha=0.05,
    n_trials=100,
    n_perm=200,
    seed=0,
) -> PowerReport:
    """Rejection rate of the permutation test over independent trials.

    ``genP(rng, n)`` and ``genQ(rng, n)`` return FunctionSets.  ``kernel`` is
    a KernelSpec or a callable ``(X, Y) -> KernelSpec`` re-evaluated every
    trial, such as :class:`~fmmd.kernels.MedianRule`.  Trial ``i`` draws all
    of its randomness from child ``i`` of ``SeedSequence(seed)``.
    """
    children = trial_seeds(seed, n_trials)
    rejects = []
    for child in children:
        rng = np.random.default_rng(child)
        X = genP(rng, n)
        Y = genQ(rng, n)
        k = kernel if isinstance(kernel, KernelSpec) else kernel(X, Y)
        K = pooled_gram(k, X.concat(Y))
        rejects.append(gram_permutation_test(K, n, alpha, n_perm, rng).reject)
    rate = sum(rejects) / n_trials
    seeds = tuple((c.entropy, c.spawn_key) for c in children)
    return PowerReport(rate, n_trials, seeds, tuple(rejects))
