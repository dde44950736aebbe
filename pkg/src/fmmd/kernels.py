"""Kernels on function space and their Gram matrices.

* :class:`SeT`  ``exp(-1/2 sum_p ||T(x)_p - T(y)_p||^2 / gamma_p^2)``
* :class:`ImqT` ``(sum_p ||T(x)_p - T(y)_p||^2 / gamma_p^2 + 1)^(-1/2)``
* :class:`Cov`  ``<x, y>^2``
* :class:`RandomFeature` Monte-Carlo integral kernel over Gaussian directions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _core
from .errors import DegenerateBandwidth, InsufficientData, InvalidArgument
from .features import FeatureMap, Identity, _bandwidths
from .mesh import FunctionSample, FunctionSet, _check_same_mesh


class KernelSpec:
    def matrix(self, A: np.ndarray, B: np.ndarray, mesh) -> np.ndarray:
        """Kernel matrix between the rows of two ``(n, N)`` value arrays."""
        raise NotImplementedError

    def paired(self, A: np.ndarray, B: np.ndarray, mesh) -> np.ndarray:
        """``k(A[i], B[i])`` for each row; O(n) kernel evaluations."""
        return np.array([self.matrix(a[None], b[None], mesh)[0, 0] for a, b in zip(A, B)])


@dataclass(frozen=True, eq=False)
class _DistanceKernel(KernelSpec):
    T: FeatureMap = field(default_factory=Identity)
    bandwidths: object = 1.0

    def __post_init__(self):
        g = _bandwidths(self.bandwidths, self.T.n_parts)
        g.setflags(write=False)
        object.__setattr__(self, "bandwidths", g)

    def sq_dists(self, A, B, mesh) -> np.ndarray:
        pa = self.T.transform(A, mesh)
        pb = pa if B is A else self.T.transform(B, mesh)
        D = np.zeros((len(A), len(B)))
        for a, b, g in zip(pa, pb, self.bandwidths):
            D += _core.weighted_sq_dists(a, b, mesh.weights) / g**2
        return D

    def paired_sq_dists(self, A, B, mesh) -> np.ndarray:
        pa = self.T.transform(A, mesh)
        pb = self.T.transform(B, mesh)
        out = np.zeros(len(A))
        for a, b, g in zip(pa, pb, self.bandwidths):
            out += ((a - b) ** 2) @ mesh.weights / g**2
        return out

    def matrix(self, A, B, mesh):
        return self._profile(self.sq_dists(A, B, mesh))

    def paired(self, A, B, mesh):
        return self._profile(self.paired_sq_dists(A, B, mesh))


@dataclass(frozen=True, eq=False)
class SeT(_DistanceKernel):
    """Squared-exponential T kernel; Lipschitz constant ``1/sqrt(e)`` in ``||T.||/gamma``."""

    lipschitz = 1.0 / np.sqrt(np.e)

    @staticmethod
    def _profile(d2):
        return np.exp(-0.5 * d2)


@dataclass(frozen=True, eq=False)
class ImqT(_DistanceKernel):
    """Inverse multiquadric T kernel; Lipschitz constant ``2/(3 sqrt 3)``."""

    lipschitz = 2.0 / (3.0 * np.sqrt(3.0))

    @staticmethod
    def _profile(d2):
        return 1.0 / np.sqrt(d2 + 1.0)


@dataclass(frozen=True)
class Cov(KernelSpec):
    """``<x, y>^2``; only sensitive to second moments."""

    def matrix(self, A, B, mesh):
        return ((np.asarray(A) * mesh.weights) @ np.asarray(B).T) ** 2

    def paired(self, A, B, mesh):
        return ((np.asarray(A) * np.asarray(B)) @ mesh.weights) ** 2


def _cos_sin(u):
    return np.stack([np.cos(u), np.sin(u)], axis=-1)


@dataclass(frozen=True, eq=False)
class RandomFeature(KernelSpec):
    """``(1/n_S) sum_l Phi(sum_i sqrt(lam_i) x_i eta_il) . Phi(sum_j sqrt(lam_j) y_j eta_jl)``.

    ``x_i = <x, e_i>`` are coefficients in the basis ``basis`` (rows of a
    FunctionSet) and ``eta`` is a fixed standard-normal ``(n_S, len(lam))``
    array drawn once from ``seed``.  ``phi`` maps an array of projections to
    features; the default stacks cos and sin so the kernel estimates
    ``exp(-1/2 sum_i lam_i (x_i - y_i)^2)``.
    """

    eigvalues: np.ndarray
    basis: FunctionSet
    n_features: int = 1000
    phi: Callable | None = None
    seed: int = 0

    def __post_init__(self):
        lam = np.asarray(self.eigvalues, dtype=float).ravel()
        if lam.size != len(self.basis) or np.any(lam < 0):
            raise InvalidArgument("need one nonnegative eigenvalue per basis function")
        if int(self.n_features) != self.n_features or self.n_features < 1:
            raise InvalidArgument("n_features must be a positive integer")
        eta = np.random.default_rng(self.seed).standard_normal((int(self.n_features), lam.size))
        object.__setattr__(self, "eigvalues", lam)
        object.__setattr__(self, "_eta", eta)

    def features(self, values, mesh) -> np.ndarray:
        _check_same_mesh(mesh, self.basis.mesh)
        coef = np.asarray(values) @ (self.basis.values * mesh.weights).T
        u = (coef * np.sqrt(self.eigvalues)) @ self._eta.T
        f = (self.phi or _cos_sin)(u)
        return f.reshape(f.shape[0], -1)

    def matrix(self, A, B, mesh):
        fa = self.features(A, mesh)
        fb = fa if B is A else self.features(B, mesh)
        return fa @ fb.T / self.n_features

    def paired(self, A, B, mesh):
        return np.einsum("ij,ij->i", self.features(A, mesh), self.features(B, mesh)) / self.n_features


def kernel_eval(k: KernelSpec, x: FunctionSample, y: FunctionSample) -> float:
    _check_same_mesh(x.mesh, y.mesh)
    return float(k.matrix(x.values[None, :], y.values[None, :], x.mesh)[0, 0])


def gram_matrices(k: KernelSpec, X: FunctionSet, Y: FunctionSet):
    """Return ``(Kxx, Kyy, Kxy)``."""
    _check_same_mesh(X.mesh, Y.mesh)
    K = pooled_gram(k, X.concat(Y))
    n = len(X)
    return K[:n, :n], K[n:, n:], K[:n, n:]


def pooled_gram(k: KernelSpec, Z: FunctionSet) -> np.ndarray:
    """Symmetric Gram matrix of a single (pooled) set."""
    K = k.matrix(Z.values, Z.values, Z.mesh)
    return np.ascontiguousarray(0.5 * (K + K.T))


def median_heuristic(T: FeatureMap, X: FunctionSet, Y: FunctionSet | None = None) -> np.ndarray:
    """Squared bandwidths ``gamma_p^2``, one per direct-sum part of ``T``.

    Each is the median of ``||T(a)_p - T(b)_p||^2`` over unordered pairs of
    distinct pooled samples; zero distances count.
    """
    Z = X if Y is None else X.concat(Y)
    if len(Z) < 2:
        raise InsufficientData("median heuristic needs at least two samples")
    iu = np.triu_indices(len(Z), k=1)
    out = []
    for part in T.transform(Z.values, Z.mesh):
        d = _core.weighted_sq_dists(part, part, Z.mesh.weights)[iu]
        med = float(np.median(d))
        if not med > 0:
            if np.all(d == 0):
                raise DegenerateBandwidth("all pairwise distances are zero")
            # more than half the pairs coincide; fall back to the positive median
            med = float(np.median(d[d > 0]))
        out.append(med)
    return np.array(out)


@dataclass(frozen=True)
class MedianRule:
    """Build a kernel from the data via the median heuristic.

    ``family`` is ``"se"`` or ``"imq"``; ``fit`` optionally refits ``T``
    on the pooled data first (used for FPCA).
    """

    T: FeatureMap | None = None
    family: str = "se"
    fit: Callable | None = None

    def __call__(self, X: FunctionSet, Y: FunctionSet) -> KernelSpec:
        T = self.fit(X.concat(Y)) if self.fit is not None else (self.T or Identity())
        gamma = np.sqrt(median_heuristic(T, X, Y))
        cls = {"se": SeT, "imq": ImqT}[self.family]
        return cls(T, gamma)
