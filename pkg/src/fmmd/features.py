"""Feature maps T used inside the SE-T and IMQ-T kernels.

Every map works on point values.  ``transform`` is the batched form used by
the Gram code: it takes an ``(n, N)`` array and returns one ``(n, N)`` array
per direct-sum part.  ``operator_matrix`` gives the linear maps in the
quadrature-symmetrised coordinates ``v = W^1/2 x`` where the mesh inner
product becomes the Euclidean one; the Gaussian closed forms work there.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSpectrum, IncompatibleMesh, InsufficientData, InvalidArgument
from .ground import GroundKernel, covariance_operator_matrix
from .mesh import FunctionSample, FunctionSet, Mesh, _check_same_mesh

DEGENERATE_RTOL = 1e-12


@dataclass(frozen=True)
class MappedSample:
    parts: tuple

    def __post_init__(self):
        if not 1 <= len(self.parts) <= 2:
            raise InvalidArgument("a mapped sample has one or two parts")


class FeatureMap:
    n_parts = 1
    linear = True
    mesh: Mesh | None = None

    def transform(self, values: np.ndarray, mesh: Mesh) -> list[np.ndarray]:
        raise NotImplementedError

    def apply(self, x: FunctionSample) -> MappedSample:
        self._check_mesh(x.mesh)
        parts = self.transform(x.values[None, :], x.mesh)
        return MappedSample(tuple(FunctionSample(x.mesh, p[0]) for p in parts))

    def _check_mesh(self, mesh: Mesh):
        if self.mesh is not None and self.mesh is not mesh and self.mesh != mesh:
            raise IncompatibleMesh(f"map built for {self.mesh!r}, got {mesh!r}")

    def operator_matrix(self, mesh: Mesh) -> np.ndarray:
        """Symmetric matrix of a linear map in ``W^1/2``-scaled coordinates."""
        raise InvalidArgument(f"{type(self).__name__} is not a linear operator")


@dataclass(frozen=True)
class Identity(FeatureMap):
    def transform(self, values, mesh):
        return [np.asarray(values, dtype=float)]

    def operator_matrix(self, mesh):
        return np.eye(mesh.size)


@dataclass(frozen=True)
class Square(FeatureMap):
    """``T(x) = (x, x**2)`` into the direct sum of two L2 copies."""

    n_parts = 2
    linear = False

    def transform(self, values, mesh):
        v = np.asarray(values, dtype=float)
        return [v, v * v]


@dataclass(frozen=True, eq=False)
class Spectral(FeatureMap):
    """``T x = sum_n sqrt(lambda_n) <x, e_n> e_n``.

    ``eigfunctions`` holds the e_n as rows of a FunctionSet on the target
    mesh; they must be orthonormal under the mesh inner product.
    """

    eigvalues: np.ndarray
    eigfunctions: FunctionSet

    def __post_init__(self):
        lam = np.array(self.eigvalues, dtype=float).ravel()
        if lam.size != len(self.eigfunctions):
            raise InvalidArgument("one eigenvalue per eigenfunction required")
        if np.any(lam <= 0):
            raise InvalidArgument("eigenvalues must be strictly positive")
        if np.any(np.diff(lam) > 0):
            raise InvalidArgument("eigenvalues must be sorted in descending order")
        E = self.eigfunctions.values
        G = (E * self.eigfunctions.mesh.weights) @ E.T
        if not np.allclose(G, np.eye(lam.size), atol=1e-8, rtol=0):
            raise InvalidArgument("eigenfunctions are not orthonormal on the mesh")
        lam.setflags(write=False)
        object.__setattr__(self, "eigvalues", lam)

    @property
    def mesh(self):
        return self.eigfunctions.mesh

    def coefficients(self, values) -> np.ndarray:
        """``<x, e_n>`` for each row of ``values``."""
        return np.asarray(values) @ (self.eigfunctions.values * self.mesh.weights).T

    def transform(self, values, mesh):
        self._check_mesh(mesh)
        c = self.coefficients(values) * np.sqrt(self.eigvalues)
        return [c @ self.eigfunctions.values]

    def operator_matrix(self, mesh):
        self._check_mesh(mesh)
        U = self.eigfunctions.values * mesh.sqrt_weights
        return (U.T * np.sqrt(self.eigvalues)) @ U


@dataclass(frozen=True, eq=False)
class Fpca(Spectral):
    """Spectral map fitted by :func:`fit_fpca`; keeps the variance target."""

    var_fraction: float = 1.0
    mean: np.ndarray | None = field(default=None, repr=False)

    @property
    def retained(self) -> int:
        return self.eigvalues.size


@dataclass(frozen=True, eq=False)
class IntegralOp(FeatureMap):
    """``T = C_k0`` materialised as ``A = K0 W`` on a mesh (no square root)."""

    ground: GroundKernel
    mesh: Mesh

    def __post_init__(self):
        A, B = covariance_operator_matrix(self.ground, self.mesh)
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    def transform(self, values, mesh):
        self._check_mesh(mesh)
        return [np.asarray(values) @ self.A.T]

    def operator_matrix(self, mesh):
        self._check_mesh(mesh)
        return np.array(self.B)


def apply(T: FeatureMap, x: FunctionSample) -> MappedSample:
    return T.apply(x)


def mapped_sq_distance(T: FeatureMap, x: FunctionSample, y: FunctionSample, bandwidths=1.0) -> float:
    """``sum_p ||T(x)_p - T(y)_p||^2 / gamma_p^2`` over the direct-sum parts."""
    _check_same_mesh(x.mesh, y.mesh)
    gam = _bandwidths(bandwidths, T.n_parts)
    px = T.transform(x.values[None, :], x.mesh)
    py = T.transform(y.values[None, :], y.mesh)
    w = x.mesh.weights
    return float(sum(np.dot(w, (a[0] - b[0]) ** 2) / g**2 for a, b, g in zip(px, py, gam)))


def _bandwidths(bandwidths, n_parts) -> np.ndarray:
    g = np.atleast_1d(np.asarray(bandwidths, dtype=float))
    if g.size == 1 and n_parts > 1:
        g = np.repeat(g, n_parts)
    if g.size != n_parts:
        raise InvalidArgument(f"{n_parts} bandwidth(s) expected, got {g.size}")
    if np.any(~np.isfinite(g)) or np.any(g <= 0):
        raise InvalidArgument("bandwidths must be positive")
    return g


def spectral_from_eigpairs(eigvalues, eigvectors, mesh: Mesh) -> Spectral:
    """Build a Spectral map from eigenvectors ``u`` of a symmetrised matrix."""
    U = np.asarray(eigvectors)
    return Spectral(np.asarray(eigvalues), FunctionSet(mesh, (U / mesh.sqrt_weights[:, None]).T))


def _fix_signs(E: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(E), axis=1)
    s = np.sign(E[np.arange(E.shape[0]), idx])
    s[s == 0] = 1.0
    return E * s[:, None]


def fit_fpca(pool: FunctionSet, var_fraction: float = 0.95) -> Fpca:
    """Empirical functional principal components of a pooled sample.

    The pool is centred on its mean and the covariance operator (``1/(n-1)``
    normalisation) is eigendecomposed through the symmetric form
    ``W^1/2 C W^1/2``.  The smallest F whose cumulative eigenvalue fraction
    reaches ``var_fraction`` is kept.  Each eigenfunction's largest-magnitude
    value is made positive.
    """
    n = len(pool)
    if n < 2:
        raise InsufficientData(f"FPCA needs at least 2 samples, got {n}")
    if not 0 < var_fraction <= 1:
        raise InvalidArgument(f"var_fraction must lie in (0, 1], got {var_fraction}")
    mesh = pool.mesh
    mu = pool.values.mean(axis=0)
    Z = (pool.values - mu) * mesh.sqrt_weights
    # eigen-decomposition of W^1/2 C W^1/2 = Z^T Z / (n - 1) via the SVD of Z
    _, s, Vt = np.linalg.svd(Z, full_matrices=False)
    lam = s**2 / (n - 1)
    if lam.size == 0 or lam[0] <= 0 or not np.isfinite(lam[0]):
        raise DegenerateSpectrum("pooled sample has no variance")
    keep = lam > DEGENERATE_RTOL * lam[0]
    lam, Vt = lam[keep], Vt[keep]
    frac = np.cumsum(lam) / lam.sum()
    F = int(np.searchsorted(frac, var_fraction - 1e-12) + 1)
    F = min(F, lam.size)
    E = _fix_signs(Vt[:F] / mesh.sqrt_weights)
    return Fpca(lam[:F], FunctionSet(mesh, E), var_fraction=float(var_fraction), mean=mu)
