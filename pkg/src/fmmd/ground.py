"""Scalar kernels k0(s, t) on the 1-D domain.

These build covariance operators, Gaussian process laws and interpolants.
Cosine-type kernels count frequencies in cycles per unit interval, so their
arguments are mapped onto [0, 1] using the mesh interval first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .mesh import Mesh

_SQRT3 = np.sqrt(3.0)


class GroundKernel:
    """Base class.  Subclasses implement ``_k(diff)`` on unit-scaled lags."""

    rescale = False

    def __call__(self, s, t, interval=(0.0, 1.0)):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        d = s - t
        if self.rescale:
            d = d / (interval[1] - interval[0])
        return self._k(d)

    def cross(self, s, t, interval=(0.0, 1.0)) -> np.ndarray:
        """Matrix ``k0(s_i, t_j)``."""
        s = np.asarray(s, dtype=float)[:, None]
        t = np.asarray(t, dtype=float)[None, :]
        return self(s, t, interval)


@dataclass(frozen=True)
class SquaredExponential(GroundKernel):
    lengthscale: float

    def __post_init__(self):
        _positive("lengthscale", self.lengthscale)

    def _k(self, d):
        return np.exp(-0.5 * (d / self.lengthscale) ** 2)


@dataclass(frozen=True)
class Matern15(GroundKernel):
    lengthscale: float

    def __post_init__(self):
        _positive("lengthscale", self.lengthscale)

    def _k(self, d):
        r = _SQRT3 * np.abs(d) / self.lengthscale
        return (1.0 + r) * np.exp(-r)


@dataclass(frozen=True)
class Cosine(GroundKernel):
    n_freq: int
    rescale = True

    def __post_init__(self):
        _count("n_freq", self.n_freq)

    def _k(self, d):
        d = np.asarray(d)
        n = np.arange(self.n_freq).reshape((-1,) + (1,) * d.ndim)
        return np.cos(2 * np.pi * n * d).sum(axis=0)


@dataclass(frozen=True)
class CosineExponential(GroundKernel):
    """Squared-exponential damping times ``Cosine(n_freq)``.

    The lengthscale is measured on the unit-scaled axis, like the frequencies.
    """

    n_freq: int
    lengthscale: float
    rescale = True

    def __post_init__(self):
        _count("n_freq", self.n_freq)
        _positive("lengthscale", self.lengthscale)

    def _k(self, d):
        return SquaredExponential(self.lengthscale)._k(d) * Cosine(self.n_freq)._k(d)


@dataclass(frozen=True)
class Dirac(GroundKernel):
    """White noise, ``k0(s, t) = 1`` when ``s == t`` and 0 otherwise."""

    def _k(self, d):
        return (np.asarray(d) == 0).astype(float)


def _positive(name, v):
    if not (np.isfinite(v) and v > 0):
        raise InvalidArgument(f"{name} must be > 0, got {v!r}")


def _count(name, v):
    if int(v) != v or v < 1:
        raise InvalidArgument(f"{name} must be a positive integer, got {v!r}")


def eval_kernel(k: GroundKernel, s: float, t: float, interval=(0.0, 1.0)) -> float:
    return float(k(s, t, interval))


def gram(k: GroundKernel, mesh: Mesh) -> np.ndarray:
    """``K[i, j] = k0(t_i, t_j)`` on the mesh points."""
    K = k.cross(mesh.points, mesh.points, mesh.interval)
    return 0.5 * (K + K.T)


def covariance_operator_matrix(k: GroundKernel, mesh: Mesh):
    """Discretised covariance operator ``(C y)(t) = int k0(s, t) y(s) ds``.

    Returns
    -------
    A : ndarray
        ``K W``, the operator acting on point values.
    B : ndarray
        ``W^1/2 K W^1/2``, symmetric and similar to ``A``.  Its spectrum and
        trace approximate those of the operator.
    """
    K = gram(k, mesh)
    sw = mesh.sqrt_weights
    A = K * mesh.weights[None, :]
    B = sw[:, None] * K * sw[None, :]
    return A, B
