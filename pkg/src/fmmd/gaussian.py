"""Gaussian processes on a mesh and exact MMD formulas for the SE-T kernel.

All operators live in the quadrature-symmetrised coordinates ``v = W^1/2 x``
in which the mesh inner product is Euclidean.  A Gaussian process with point
covariance ``Sigma`` then has covariance operator ``W^1/2 Sigma W^1/2`` and the
SE-T kernel with bandwidth ``gamma`` uses the matrix ``T / gamma``.  With
``T = I / gamma`` this reproduces the ``gamma_N = gamma_0 sqrt(N)`` scaling of
a Euclidean Gauss kernel on raw vectors.

Formulas
--------
With ``A = TST``, ``B = TRT`` and ``d = T(a - b)``::

    MMD^2 = det(I+2A)^-1/2 + det(I+2B)^-1/2
            - 2 det(I+A+B)^-1/2 exp(-1/2 <(I+A+B)^-1 d, d>)

The variance components ``xi_1`` (quadratic estimator) and ``xi_2``
(linear estimator) follow from three Gaussian integrals of the kernel,
see :func:`_alpha` and :func:`_beta`.  Determinants are accumulated as sums
of ``log1p`` of eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSNR, InvalidArgument, InvalidOperator, NumericalFailure
from .ground import Dirac, GroundKernel, covariance_operator_matrix, gram
from .mesh import FunctionSample, FunctionSet, Mesh, uniform_mesh

PSD_RTOL = 1e-8
COMMUTE_RTOL = 1e-8
SNR_TOL = 1e-300


# -- linear algebra helpers ----------------------------------------------------------


def _sym(M) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != M.shape[1]:
        raise InvalidOperator(f"operator must be square, got {M.shape}")
    return 0.5 * (M + M.T)


def _check_psd(M, name="operator") -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != M.shape[1]:
        raise InvalidOperator(f"{name} must be square, got {M.shape}")
    scale = max(np.abs(M).max(), 1e-300)
    if np.abs(M - M.T).max() > 1e-10 * scale:
        raise InvalidOperator(f"{name} is not symmetric")
    M = 0.5 * (M + M.T)
    ev = np.linalg.eigvalsh(M)
    if ev[0] < -PSD_RTOL * max(ev[-1], 0.0) - 1e-300 and ev[0] < -1e-14 * scale:
        raise InvalidOperator(f"{name} is not positive semi-definite (min eig {ev[0]:.3g})")
    return M


def psd_sqrt(M) -> np.ndarray:
    """Symmetric square root; negative round-off eigenvalues are clipped."""
    ev, U = np.linalg.eigh(_sym(M))
    return (U * np.sqrt(np.clip(ev, 0, None))) @ U.T


def _vec(v, n) -> np.ndarray:
    if isinstance(v, FunctionSample):
        v = v.values * v.mesh.sqrt_weights
    v = np.zeros(n) if v is None else np.atleast_1d(np.asarray(v, dtype=float))
    if v.shape != (n,):
        raise InvalidArgument(f"expected a vector of length {n}, got shape {v.shape}")
    return v


def _logdet_i_plus(M) -> float:
    """``log det(I + M)`` for symmetric PSD ``M``."""
    ev = np.linalg.eigvalsh(_sym(M))
    return float(np.sum(np.log1p(np.clip(ev, 0, None))))


def _inv_quad_i_plus(M, d) -> float:
    """``<(I + M)^-1 d, d>`` for symmetric PSD ``M``."""
    ev, U = np.linalg.eigh(_sym(M))
    c = U.T @ d
    return float(np.sum(c * c / (1.0 + np.clip(ev, 0, None))))


def commute(*mats, rtol=COMMUTE_RTOL) -> bool:
    for i, P in enumerate(mats):
        for Q in mats[i + 1:]:
            scale = np.linalg.norm(P) * np.linalg.norm(Q)
            if np.linalg.norm(P @ Q - Q @ P) > rtol * max(scale, 1e-300):
                return False
    return True


# -- Gaussian measures on a mesh -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class GaussianSpec:
    """Gaussian process ``GP(mean, cov)`` restricted to a mesh.

    ``cov`` is a ground kernel or an explicit ``(N, N)`` covariance of the
    point values.  ``jitter=None`` means ``1e-10 * trace / N``.
    """

    mesh: Mesh
    mean: FunctionSample | None = None
    cov: GroundKernel | np.ndarray = field(default_factory=Dirac)
    jitter: float | None = None

    def cov_matrix(self) -> np.ndarray:
        if isinstance(self.cov, GroundKernel):
            return gram(self.cov, self.mesh)
        S = np.asarray(self.cov, dtype=float)
        if S.shape != (self.mesh.size,) * 2:
            raise InvalidArgument(f"covariance must be {self.mesh.size}x{self.mesh.size}")
        return _check_psd(S, "covariance")

    def mean_values(self) -> np.ndarray:
        if self.mean is None:
            return np.zeros(self.mesh.size)
        if self.mean.mesh != self.mesh:
            raise InvalidArgument("mean lives on a different mesh")
        return np.asarray(self.mean.values)

    def operator(self) -> np.ndarray:
        """Covariance operator in symmetrised coordinates."""
        sw = self.mesh.sqrt_weights
        return sw[:, None] * self.cov_matrix() * sw[None, :]

    def mean_coords(self) -> np.ndarray:
        return self.mean_values() * self.mesh.sqrt_weights


def cholesky_jittered(S: np.ndarray, jitter: float | None = None, max_tries: int = 3):
    """Cholesky factor of ``S + jitter I``, raising jitter x10 up to 3 times."""
    N = S.shape[0]
    if jitter is None:
        jitter = 1e-10 * np.trace(S) / N
    if not jitter > 0:
        jitter = 1e-10
    for _ in range(max_tries + 1):
        try:
            return np.linalg.cholesky(S + jitter * np.eye(N)), jitter
        except np.linalg.LinAlgError:
            jitter *= 10
    raise NumericalFailure("covariance not factorisable after jitter escalation")


def sample_gp(spec: GaussianSpec, n: int, seed=None) -> FunctionSet:
    """``n`` independent draws ``mean + L eta`` with ``L L^T = Sigma + jitter I``."""
    if int(n) != n or n < 1:
        raise InvalidArgument("n must be a positive integer")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    L, _ = cholesky_jittered(spec.cov_matrix(), spec.jitter)
    eta = rng.standard_normal((int(n), spec.mesh.size))
    return FunctionSet(spec.mesh, spec.mean_values() + eta @ L.T)


# -- operator triples --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OperatorTriple:
    """Kernel map ``T`` and covariances ``S`` (of P) and ``R`` (of Q)."""

    T: np.ndarray
    S: np.ndarray
    R: np.ndarray
    commuting_flag: bool = field(init=False)

    def __post_init__(self):
        T = _sym(self.T)
        S = _check_psd(self.S, "S")
        R = _check_psd(self.R, "R")
        if not T.shape == S.shape == R.shape:
            raise InvalidOperator("T, S and R must share one shape")
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "commuting_flag", commute(T, S, R))

    @property
    def dim(self) -> int:
        return self.T.shape[0]

    @classmethod
    def from_specs(cls, T, P: GaussianSpec, Q: GaussianSpec, gamma=1.0):
        """Triple for the SE-T kernel with map matrix ``T`` and bandwidth gamma."""
        T = np.atleast_2d(np.asarray(T, dtype=float)) / gamma
        return cls(T, P.operator(), Q.operator())


def mean_embedding(T, S, a, x) -> float:
    """Mean embedding of ``N(a, S)`` under the SE-T kernel, evaluated at ``x``."""
    T = _sym(T)
    S = _check_psd(S, "S")
    n = T.shape[0]
    A = T @ S @ T
    d = T @ (_vec(x, n) - _vec(a, n))
    return float(np.exp(-0.5 * _logdet_i_plus(A) - 0.5 * _inv_quad_i_plus(A, d)))


def _mmd_commuting(A, B, d) -> float:
    t1 = np.exp(-0.5 * _logdet_i_plus(2 * A))
    t2 = np.exp(-0.5 * _logdet_i_plus(2 * B))
    C = A + B
    t3 = np.exp(-0.5 * _logdet_i_plus(C) - 0.5 * _inv_quad_i_plus(C, d))
    return float(t1 + t2 - 2 * t3)


def _mmd_general(A, B, d) -> float:
    Bh = psd_sqrt(B)
    ev, U = np.linalg.eigh(A)
    inv = (U / (1.0 + np.clip(ev, 0, None))) @ U.T
    logdet = _logdet_i_plus(A) + _logdet_i_plus(Bh @ inv @ Bh)
    t1 = np.exp(-0.5 * _logdet_i_plus(2 * A))
    t2 = np.exp(-0.5 * _logdet_i_plus(2 * B))
    t3 = np.exp(-0.5 * logdet - 0.5 * _inv_quad_i_plus(A + B, d))
    return float(t1 + t2 - 2 * t3)


def _reduced(ops: OperatorTriple, a, b):
    n = ops.dim
    T = ops.T
    A = _sym(T @ ops.S @ T)
    B = _sym(T @ ops.R @ T)
    d = T @ (_vec(a, n) - _vec(b, n))
    return A, B, d


def closed_form_mmd(ops: OperatorTriple, a=None, b=None, method="auto") -> float:
    """Squared MMD between ``N(a, S)`` and ``N(b, R)`` for the SE-T kernel.

    ``method`` is ``"general"`` (symmetric square roots, valid for any
    triple), ``"commuting"`` (simplified determinant) or ``"auto"``, which
    takes the commuting path only when the triple's flag is set.
    """
    A, B, d = _reduced(ops, a, b)
    if method == "auto":
        method = "commuting" if ops.commuting_flag else "general"
    if method == "commuting":
        return _mmd_commuting(A, B, d)
    if method == "general":
        return _mmd_general(A, B, d)
    raise InvalidArgument(f"unknown method {method!r}")


# -- variance components -----------------------------------------------------------


def _ld(*diags) -> float:
    """``log det`` of a product of diagonal factors ``prod_k diag_k``."""
    return float(sum(np.sum(np.log(v)) for v in diags))


def _diagonalise(A, B, d):
    """Common eigenbasis of commuting ``A`` and ``B``."""
    ev, U = np.linalg.eigh(A + np.pi * B)
    a = np.einsum("ij,jk,ki->i", U.T, A, U)
    b = np.einsum("ij,jk,ki->i", U.T, B, U)
    scale = max(np.abs(A).max(), np.abs(B).max(), 1e-300)
    off = max(
        np.abs(U.T @ A @ U - np.diag(a)).max(), np.abs(U.T @ B @ U - np.diag(b)).max()
    )
    if off > 1e-7 * scale:
        raise InvalidOperator("operators do not share an eigenbasis")
    return np.clip(a, 0, None), np.clip(b, 0, None), U.T @ d


def _alpha(a, b, c2):
    """Contribution of the first sample to ``xi_1`` (diagonal form).

    ``a, b`` are eigenvalues of ``TST`` and ``TRT``; ``c2`` the squared
    coordinates of ``T(a - b)`` in the shared eigenbasis.
    """
    one = np.ones_like(a)
    sig = (one + a) * (one + b) + a * (2 + a + b)
    return (
        np.exp(-0.5 * _ld(1 + a, 1 + 3 * a))
        - np.exp(-_ld(1 + 2 * a))
        + np.exp(-0.5 * _ld(1 + b, 1 + 2 * a + b) - np.sum(c2 / (1 + 2 * a + b)))
        - np.exp(-_ld(1 + a + b) - np.sum(c2 / (1 + a + b)))
        - 2 * np.exp(-0.5 * _ld(sig) - 0.5 * np.sum((1 + 2 * a) * c2 / sig))
        + 2 * np.exp(-0.5 * _ld(1 + 2 * a, 1 + a + b) - 0.5 * np.sum(c2 / (1 + a + b)))
    )


def _beta(a, b, c2):
    """Contribution of the first sample to ``xi_2`` (diagonal form)."""
    one = np.ones_like(a)
    sig = (one + a) * (one + b) + a * (2 + a + b)
    return (
        np.exp(-0.5 * _ld(1 + 4 * a))
        - np.exp(-_ld(1 + 2 * a))
        + np.exp(-0.5 * _ld(1 + 2 * (a + b)) - np.sum(c2 / (1 + 2 * (a + b))))
        - np.exp(-_ld(1 + a + b) - np.sum(c2 / (1 + a + b)))
        + 4 * np.exp(-0.5 * _ld(1 + a + b, 1 + 2 * a) - 0.5 * np.sum(c2 / (1 + a + b)))
        - 4 * np.exp(-0.5 * _ld(sig) - 0.5 * np.sum((1 + 2 * a) * c2 / sig))
    )


def xi_general(ops: OperatorTriple, a=None, b=None):
    """``(xi_1, xi_2)`` for ``P = N(a, S)``, ``Q = N(b, R)`` with commuting T, S, R.

    ``xi_1 = Var_z E_z' h(z, z')`` and ``xi_2 = Var_{z,z'} h(z, z')``.
    Values below round-off are clipped to zero.
    """
    if not ops.commuting_flag:
        raise InvalidOperator("xi formulas require T, S and R to commute")
    A, B, d = _reduced(ops, a, b)
    ea, eb, c = _diagonalise(A, B, d)
    c2 = c * c
    xi1 = _alpha(ea, eb, c2) + _alpha(eb, ea, c2)
    xi2 = _beta(ea, eb, c2) + _beta(eb, ea, c2)
    return _clip(xi1), _clip(xi2)


def _clip(v, tol=1e-10):
    if v < -tol:
        raise NumericalFailure(f"variance evaluated to {v:.3g}")
    return max(float(v), 0.0)


def xi_mean_shift(T, S, m):
    """``(xi_1, xi_2)`` for ``P = N(0, S)``, ``Q = N(m, S)`` with T, S commuting.

    Evaluates the mean-shift closed form with ``Sigma_S = (I+TST)(I+3TST)``.
    """
    T = _sym(T)
    S = _check_psd(S, "S")
    if not commute(T, S):
        raise InvalidOperator("xi_mean_shift requires T and S to commute")
    n = T.shape[0]
    A = _sym(T @ S @ T)
    ev, U = np.linalg.eigh(A)
    a = np.clip(ev, 0, None)
    c2 = (U.T @ (T @ _vec(m, n))) ** 2
    sig = (1 + a) * (1 + 3 * a)
    q2 = np.sum(c2 / (1 + 2 * a))
    q3 = np.sum(c2 / (1 + 3 * a))
    q4 = np.sum(c2 / (1 + 4 * a))
    qs = np.sum((1 + 2 * a) * c2 / sig)
    det_s = np.exp(-0.5 * _ld(sig))
    det2 = np.exp(-_ld(1 + 2 * a))
    xi1 = 2 * det_s * (1 + np.exp(-q3) - 2 * np.exp(-0.5 * qs)) - 2 * det2 * (
        1 + np.exp(-q2) - 2 * np.exp(-0.5 * q2)
    )
    xi2 = (
        2 * np.exp(-0.5 * _ld(1 + 4 * a)) * (1 + np.exp(-q4))
        - 2 * det2 * (1 + np.exp(-q2) - 4 * np.exp(-0.5 * q2))
        - 8 * det_s * np.exp(-0.5 * qs)
    )
    return _clip(xi1), _clip(xi2)


def snr_ratio(ops: OperatorTriple, a=None, b=None) -> float:
    """``MMD^2 / sqrt(xi_2)``, the power proxy for the linear-time test."""
    _, xi2 = xi_general(ops, a, b)
    if not xi2 > SNR_TOL:
        raise DegenerateSNR(f"xi_2 = {xi2:.3g} is not positive")
    return closed_form_mmd(ops, a, b) / np.sqrt(xi2)


# -- scaling laws and median lemma ---------------------------------------------------


def scaling_rhs(case: str, m, k0: GroundKernel | None = None, N: int | None = None,
                ref_points: int = 2001, interval=(0.0, 1.0)) -> float:
    """Large-mesh limit of ``MMD^2 / sqrt(xi_2)`` for a mean shift ``m``.

    ``case="white_noise"`` gives ``sqrt(N) |m|^2 / (2 sqrt(1 + |m|^2))``;
    ``case="smooth_cov"`` gives
    ``|m|^2 / (2 sqrt(|C|_HS^2 + |C^1/2 m|^2))`` with ``C`` the covariance
    operator of ``k0`` on a reference mesh.  ``m`` is a callable.
    """
    ref = uniform_mesh(ref_points, interval)
    mv = np.broadcast_to(np.asarray(m(ref.points), dtype=float), ref.points.shape)
    m2 = float(np.dot(ref.weights, mv * mv))
    if case == "white_noise":
        if N is None:
            raise InvalidArgument("white_noise case needs N")
        return float(np.sqrt(N) * m2 / (2 * np.sqrt(1 + m2)))
    if case == "smooth_cov":
        if k0 is None:
            raise InvalidArgument("smooth_cov case needs a ground kernel")
        _, B = covariance_operator_matrix(k0, ref)
        v = mv * ref.sqrt_weights
        return float(m2 / (2 * np.sqrt(np.sum(B * B) + v @ B @ v)))
    raise InvalidArgument(f"unknown case {case!r}")


def median_lemma(mu1, mu2, S1, S2):
    """Expected squared distance of independent Gaussians on R^N and the bound
    on ``|median / expectation - 1|``.  Plain Euclidean norms and traces."""
    mu1 = np.atleast_1d(np.asarray(mu1, dtype=float))
    mu2 = np.atleast_1d(np.asarray(mu2, dtype=float))
    S1 = _check_psd(S1, "S1")
    S2 = _check_psd(S2, "S2")
    dm2 = float(np.sum((mu1 - mu2) ** 2))
    expect = float(np.trace(S1) + np.trace(S2)) + dm2
    if expect == 0:
        return 0.0, 0.0
    bound = float(np.sqrt(2.0) * np.sqrt(max(0.0, 1.0 - dm2**2 / expect**2)))
    return expect, bound
