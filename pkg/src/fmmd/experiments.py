"""Synthetic benchmarks, the mesh-scaling study, size/power on real curves and
the closed-form validation battery.

Every experiment generates each trial's data once and runs every requested
kernel on it.  Trial randomness comes from ``SeedSequence([seed, cell])``
children, so rows are reproducible cell by cell and independent of which
kernels are selected.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import DataError, InvalidArgument
from .estimators import gram_permutation_test, linear_h, mmd_u_statistic
from .features import IntegralOp, Identity, Square, fit_fpca
from .gaussian import GaussianSpec, OperatorTriple, closed_form_mmd, sample_gp, xi_general
from .ground import CosineExponential, Dirac, Matern15, SquaredExponential, gram
from .kernels import Cov, MedianRule, SeT, gram_matrices, pooled_gram
from .mesh import FunctionSet, Mesh, read_function_set, uniform_mesh
from .reconstruction import KernelInterp, Observation

EXPERIMENTS = (
    "scaling", "mean-shift", "var-shift-1", "var-shift-2",
    "higher-order", "validate", "size", "growth",
)
KERNELS = ("ID", "CEXP", "COV", "SQR", "FPCA")
ROW_FIELDS = ("experiment", "kernel", "delta", "n", "N", "power", "stderr", "seed")
VALIDATE_FIELDS = ("case", "closed_form", "mc_mean", "mc_se", "xi2_theory", "xi2_empirical")

# experiment -> (delta grid, n, mesh sizes)
_DEFAULTS = {
    "scaling": ((0.0, 0.02, 0.5), (50,), (10, 25, 50, 100, 250)),
    "mean-shift": ((0.0, 0.5, 1.0, 1.5, 2.0), (100,), (100,)),
    "var-shift-1": ((0.0, 5.0, 10.0, 15.0, 20.0), (100,), (100,)),
    "var-shift-2": ((1.0, 1.2, 1.4, 1.6, 1.8, 2.0), (25,), (500,)),
    "higher-order": ((0.0, 1.0, 2.0, 3.0, 4.0), (15,), (100,)),
    "validate": ((), (500,), (50,)),
    "size": ((0.0,), (5, 15, 25), (31,)),
    "growth": ((), (5, 15, 25, 35), ()),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings for one experiment run; ``None`` fields take per-experiment defaults.

    For ``scaling`` the ``deltas`` grid holds the GP lengthscales ``l``
    (0 means white noise).  For ``size``/``growth`` ``n`` is the grid of
    subsample sizes M.
    """

    experiment: str
    deltas: tuple | None = None
    n: tuple | None = None
    mesh: tuple | None = None
    kernels: tuple = KERNELS
    alpha: float = 0.05
    n_trials: int = 100
    n_perm: int = 200
    seed: int = 0
    out: str | None = None
    data: tuple = ()

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise InvalidArgument(f"unknown experiment {self.experiment!r}")
        d, n, N = _DEFAULTS[self.experiment]
        for name, default in (("deltas", d), ("n", n), ("mesh", N)):
            v = getattr(self, name)
            v = default if v is None else tuple(np.atleast_1d(v).tolist())
            object.__setattr__(self, name, tuple(v))
        ks = tuple(k.upper() for k in np.atleast_1d(self.kernels).tolist())
        bad = [k for k in ks if k not in KERNELS]
        if bad or not ks:
            raise InvalidArgument(f"kernels must be drawn from {KERNELS}, got {bad or ks}")
        object.__setattr__(self, "kernels", ks)
        if not 0 < self.alpha < 1:
            raise InvalidArgument("alpha must lie in (0, 1)")
        for name in ("n_trials", "n_perm"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise InvalidArgument(f"{name} must be a positive integer")
        if any(int(v) != v or v < 1 for v in self.n + self.mesh):
            raise InvalidArgument("sample sizes and mesh sizes must be positive integers")
        if self.experiment not in ("validate", "growth") and not self.deltas:
            raise InvalidArgument("the delta grid is empty")
        object.__setattr__(self, "data", tuple(str(p) for p in self.data))


# -- kernels -------------------------------------------------------------------------


def kernel_factory(name: str, mesh: Mesh) -> Callable:
    """Callable ``(X, Y) -> KernelSpec`` with median-heuristic bandwidths."""
    if name == "ID":
        return MedianRule(Identity())
    if name == "CEXP":
        return MedianRule(IntegralOp(CosineExponential(20, math.sqrt(10.0)), mesh))
    if name == "COV":
        return lambda X, Y: Cov()
    if name == "SQR":
        return MedianRule(Square())
    if name == "FPCA":
        return MedianRule(fit=lambda Z: fit_fpca(Z, 0.95))
    raise InvalidArgument(f"unknown kernel {name!r}")


def _power_row(experiment, kernel, delta, n, N, rejects, seed):
    p = float(np.mean(rejects))
    return {
        "experiment": experiment, "kernel": kernel, "delta": float(delta), "n": int(n),
        "N": int(N), "power": p, "stderr": math.sqrt(p * (1 - p) / len(rejects)),
        "seed": int(seed),
    }


def run_cell(gen: Callable, n: int, kernels: dict, cfg: ExperimentConfig, cell: int) -> dict:
    """Rejection indicators per kernel for one grid cell.

    ``gen(rng, n)`` returns ``(X, Y)``; every kernel sees the same draws.
    """
    children = np.random.SeedSequence([cfg.seed, cell]).spawn(cfg.n_trials)
    out = {name: [] for name in kernels}
    for child in children:
        # one stream for the data, one per entry of KERNELS for the permutations
        data_ss, *test_ss = child.spawn(1 + len(KERNELS))
        X, Y = gen(np.random.default_rng(data_ss), n)
        for name, factory in kernels.items():
            K = pooled_gram(factory(X, Y), X.concat(Y))
            rng = np.random.default_rng(test_ss[KERNELS.index(name)])
            res = gram_permutation_test(K, len(X), cfg.alpha, cfg.n_perm, rng)
            out[name].append(res.reject)
    return out


# -- generators ----------------------------------------------------------------------


def _noisy(rng, values, sd):
    return values + sd * rng.standard_normal(values.shape)


def mean_shift_generator(mesh: Mesh, delta: float, noise_sd: float = 0.5):
    t = mesh.points
    s, c = math.sqrt(2) * np.sin(2 * np.pi * t), math.sqrt(2) * np.cos(2 * np.pi * t)

    def draw(rng, n, shift):
        xi10 = rng.normal(0, math.sqrt(10), (n, 1))
        xi5 = rng.normal(0, math.sqrt(5), (n, 1))
        return _noisy(rng, t + shift + xi10 * s + xi5 * c, noise_sd)

    def gen(rng, n):
        X = draw(rng, n, 0.0)
        Y = draw(rng, n, delta * t**3)
        return FunctionSet(mesh, X), FunctionSet(mesh, Y)

    return gen


def var_shift_1_generator(mesh: Mesh, delta: float, noise_sd: float = 0.5):
    t = mesh.points
    s, c = math.sqrt(2) * np.sin(2 * np.pi * t), math.sqrt(2) * np.cos(2 * np.pi * t)

    def draw(rng, n, var_sin):
        a = rng.normal(0, math.sqrt(var_sin), (n, 1))
        b = rng.normal(0, math.sqrt(5), (n, 1))
        return _noisy(rng, a * s + b * c, noise_sd)

    def gen(rng, n):
        return FunctionSet(mesh, draw(rng, n, 10.0)), FunctionSet(mesh, draw(rng, n, 10.0 + delta))

    return gen


def student_t(rng, df, size):
    """Student-t draws as a normal over ``sqrt(chi2_df / df)``."""
    return rng.standard_normal(size) / np.sqrt(rng.chisquare(df, size) / df)


def var_shift_2_generator(mesh: Mesh, delta: float):
    t = mesh.points
    k = np.arange(1, 11)[:, None]
    scale = math.sqrt(2) / np.sqrt(k)
    S = scale * np.sin(np.pi * k * t)
    C = scale * np.cos(np.pi * k * t)

    def draw(rng, n):
        return student_t(rng, 5, (n, 10)) @ S + student_t(rng, 5, (n, 10)) @ C

    def gen(rng, n):
        return FunctionSet(mesh, draw(rng, n)), FunctionSet(mesh, delta * draw(rng, n))

    return gen


def hall_basis(t, n_terms=15):
    """Rows ``psi_1..psi_n`` and ``psi*_1..psi*_n`` evaluated at ``t``."""
    t = np.asarray(t, dtype=float)
    psi = np.empty((n_terms, t.size))
    star = np.empty((n_terms, t.size))
    psi[0] = star[0] = 1.0
    for j in range(2, n_terms + 1):
        psi[j - 1] = math.sqrt(2) * np.sin((j - 1) * np.pi * t)
        u = (j - 1) * np.pi * (2 * t - 1)
        star[j - 1] = math.sqrt(2) * (np.cos(u) if j % 2 == 0 else np.sin(u))
    return psi, star


def sample_py(rng, size):
    """Inverse-CDF draws from the density ``0.8 + 0.4 t`` on [0, 1]."""
    u = rng.uniform(size=size)
    return (-0.8 + np.sqrt(0.64 + 0.8 * u)) / 0.4


def hall_generator(mesh: Mesh, delta: float, n_obs: int = 20, noise_var=(0.01, 0.09),
                   smoothing_var: float = 0.01):
    """Irregularly observed curves reconstructed onto ``mesh`` by a Matern-1.5
    GP posterior mean."""
    k = np.arange(1, 16)
    a = np.exp(-k / 2.0)
    b = k**-2.0
    rec = KernelInterp(mesh, Matern15(1.0), noise_var=smoothing_var)

    def curve(rng, locs, extra, sd):
        psi, star = hall_basis(locs)
        v = (a * rng.standard_normal(15)) @ psi
        if extra:
            v = v + (delta * b * rng.standard_normal(15)) @ star
        return rec(Observation(locs, _noisy(rng, v, sd), sd, mesh.interval)).values

    def gen(rng, n):
        X = [curve(rng, np.sort(rng.uniform(size=n_obs)), False, math.sqrt(noise_var[0]))
             for _ in range(n)]
        Y = [curve(rng, np.sort(sample_py(rng, n_obs)), True, math.sqrt(noise_var[1]))
             for _ in range(n)]
        return FunctionSet(mesh, np.array(X)), FunctionSet(mesh, np.array(Y))

    return gen


GENERATORS = {
    "mean-shift": mean_shift_generator,
    "var-shift-1": var_shift_1_generator,
    "var-shift-2": var_shift_2_generator,
    "higher-order": hall_generator,
}


# -- runners ---------------------------------------------------------------------


def run_benchmark(cfg: ExperimentConfig) -> list[dict]:
    """Power per (delta, kernel) for one of the synthetic benchmarks."""
    if cfg.experiment not in GENERATORS:
        raise InvalidArgument(f"{cfg.experiment!r} is not a synthetic benchmark")
    rows = []
    cell = 0
    for N in cfg.mesh:
        mesh = uniform_mesh(N, (0.0, 1.0))
        kernels = {name: kernel_factory(name, mesh) for name in cfg.kernels}
        for n in cfg.n:
            for delta in cfg.deltas:
                gen = GENERATORS[cfg.experiment](mesh, delta)
                res = run_cell(gen, n, kernels, cfg, cell)
                rows += [_power_row(cfg.experiment, k, delta, n, N, r, cfg.seed) for k, r in res.items()]
                cell += 1
    return sort_rows(rows)


def scaling_generator(mesh: Mesh, lengthscale: float, shift: float = 0.05):
    cov = Dirac() if lengthscale == 0 else SquaredExponential(lengthscale)
    P = GaussianSpec(mesh, None, cov)
    Q = GaussianSpec(mesh, mesh.sample(lambda t: np.full_like(t, shift)), cov)

    def gen(rng, n):
        return sample_gp(P, n, rng), sample_gp(Q, n, rng)

    return gen


def run_scaling(cfg: ExperimentConfig, shift: float = 0.05) -> list[dict]:
    """Power of the SE-I test as the mesh refines; the delta column holds ``l``."""
    rows = []
    cell = 0
    for lengthscale in cfg.deltas:
        for N in cfg.mesh:
            mesh = uniform_mesh(N, (0.0, 1.0))
            kernels = {"ID": kernel_factory("ID", mesh)}
            for n in cfg.n:
                res = run_cell(scaling_generator(mesh, lengthscale, shift), n, kernels, cfg, cell)
                rows.append(_power_row("scaling", "ID", lengthscale, n, N, res["ID"], cfg.seed))
                cell += 1
    return sort_rows(rows)


def synthetic_null_pool(n_curves: int = 54, n_points: int = 31, seed: int = 0) -> FunctionSet:
    """Stand-in for a single class of real curves: the mean-shift null law."""
    mesh = uniform_mesh(n_points, (0.0, 1.0))
    X, _ = mean_shift_generator(mesh, 0.0)(np.random.default_rng([seed, 999]), n_curves)
    return X


def _load(path) -> FunctionSet:
    return read_function_set(path)


def run_size(cfg: ExperimentConfig, pool: FunctionSet | None = None) -> list[dict]:
    """Null rejection rate from two disjoint size-M subsets of one class."""
    if pool is None:
        pool = _load(cfg.data[0]) if cfg.data else synthetic_null_pool(seed=cfg.seed)
    kernels = {name: kernel_factory(name, pool.mesh) for name in cfg.kernels}
    rows = []
    for cell, M in enumerate(cfg.n):
        if 2 * M > len(pool):
            raise InvalidArgument(f"M={M} needs {2 * M} curves, the class has {len(pool)}")

        def gen(rng, _n, M=M):
            idx = rng.choice(len(pool), 2 * M, replace=False)
            return pool[idx[:M]], pool[idx[M:]]

        res = run_cell(gen, M, kernels, cfg, cell)
        rows += [_power_row("size", k, 0.0, M, pool.mesh.size, r, cfg.seed) for k, r in res.items()]
    return sort_rows(rows)


def run_growth(cfg: ExperimentConfig, classes=None) -> list[dict]:
    """Power from size-M subsamples of two classes (two CSV paths in ``data``)."""
    if classes is None:
        if len(cfg.data) != 2:
            raise InvalidArgument("growth needs two data files (one per class)")
        classes = tuple(_load(p) for p in cfg.data)
    A, B = classes
    if A.mesh != B.mesh:
        raise DataError("the two classes are not observed on the same mesh")
    kernels = {name: kernel_factory(name, A.mesh) for name in cfg.kernels}
    rows = []
    for cell, M in enumerate(cfg.n):
        if M > min(len(A), len(B)):
            raise InvalidArgument(f"M={M} exceeds a class size ({len(A)}, {len(B)})")

        def gen(rng, _n, M=M):
            return (pool[rng.choice(len(pool), M, replace=False)] for pool in (A, B))

        res = run_cell(lambda rng, n: tuple(gen(rng, n)), M, kernels, cfg, cell)
        rows += [_power_row("growth", k, math.nan, M, A.mesh.size, r, cfg.seed) for k, r in res.items()]
    return sort_rows(rows)


# -- closed-form validation -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ValidationCase:
    """An SE-T kernel and two Gaussian laws with a known squared MMD."""

    name: str
    T: object
    gamma: float
    P: GaussianSpec
    Q: GaussianSpec
    triple: OperatorTriple = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self, "triple",
            OperatorTriple.from_specs(self.T.operator_matrix(self.P.mesh), self.P, self.Q, self.gamma),
        )

    @property
    def kernel(self) -> SeT:
        return SeT(self.T, self.gamma)

    def closed_form(self) -> float:
        return closed_form_mmd(self.triple, self._a(), self._b())

    def xi(self):
        if not self.triple.commuting_flag:
            return math.nan, math.nan
        return xi_general(self.triple, self._a(), self._b())

    def _a(self):
        return self.P.mean_coords()

    def _b(self):
        return self.Q.mean_coords()


def validation_battery(n_points: int = 50) -> list[ValidationCase]:
    """Fixed cases on a uniform mesh plus two scalar cases on a one-point mesh."""
    mesh = uniform_mesh(n_points, (0.0, 1.0))
    se = SquaredExponential(0.2)
    K = gram(se, mesh)
    const = mesh.sample(lambda t: np.full_like(t, 0.5))
    sine = mesh.sample(lambda t: np.sin(2 * np.pi * t))
    ramp = mesh.sample(lambda t: 0.8 * t)
    cexp = IntegralOp(CosineExponential(5, 0.3), mesh)
    one = Mesh([0.5], [1.0], (0.0, 1.0))
    unit = one.sample(lambda t: np.ones_like(t))
    cases = [
        ValidationCase("identical", Identity(), 1.0, GaussianSpec(mesh, None, se), GaussianSpec(mesh, None, se)),
        ValidationCase("mean-shift", Identity(), 1.0, GaussianSpec(mesh, None, se), GaussianSpec(mesh, const, se)),
        ValidationCase("cov-shift", Identity(), 1.0, GaussianSpec(mesh, None, K), GaussianSpec(mesh, None, 2 * K)),
        ValidationCase(
            "white-noise-shift", Identity(), 1.0,
            GaussianSpec(mesh, None, Dirac()), GaussianSpec(mesh, sine, Dirac()),
        ),
        ValidationCase(
            "cexp-noncommuting", cexp, 1.0,
            GaussianSpec(mesh, None, SquaredExponential(0.1)), GaussianSpec(mesh, ramp, Matern15(0.3)),
        ),
        ValidationCase("scalar-mean", Identity(), 1.0, GaussianSpec(one, None, np.eye(1)), GaussianSpec(one, unit, np.eye(1))),
        ValidationCase("scalar-var", Identity(), 1.0, GaussianSpec(one, None, np.eye(1)), GaussianSpec(one, None, 2 * np.eye(1))),
    ]
    return cases


def monte_carlo_case(case: ValidationCase, n: int, reps: int, seed=0):
    """U-statistic estimates over ``reps`` independent samples of size ``n``,
    and the pooled linear-estimator ``h`` values (whose variance is ``xi_2``)."""
    rng = np.random.default_rng(seed)
    k = case.kernel
    stats, hs = [], []
    for _ in range(reps):
        X = sample_gp(case.P, n, rng)
        Y = sample_gp(case.Q, n, rng)
        stats.append(mmd_u_statistic(*gram_matrices(k, X, Y)))
        hs.append(linear_h(k, X, Y))
    return np.array(stats), np.concatenate(hs)


def run_validate(cfg: ExperimentConfig):
    """Closed form vs Monte-Carlo rows and the list of flagged cases.

    A case is flagged when ``|mc_mean - closed_form| > 3 mc_se``.
    """
    rows, flagged = [], []
    n = cfg.n[0]
    for i, case in enumerate(validation_battery(cfg.mesh[0])):
        cf = case.closed_form()
        stats, h = monte_carlo_case(case, n, cfg.n_trials, np.random.SeedSequence([cfg.seed, i]))
        mean = float(stats.mean())
        se = float(stats.std(ddof=1) / math.sqrt(stats.size)) if stats.size > 1 else math.nan
        _, xi2 = case.xi()
        rows.append({
            "case": case.name, "closed_form": cf, "mc_mean": mean, "mc_se": se,
            "xi2_theory": float(xi2), "xi2_empirical": float(h.var(ddof=1)),
        })
        if not abs(mean - cf) <= 3 * se + 1e-12:
            flagged.append(case.name)
    return rows, flagged


# -- CSV -------------------------------------------------------------------------------


def sort_rows(rows: list[dict]) -> list[dict]:
    def key(r):
        d = r.get("delta", 0.0)
        return (r["experiment"], r["kernel"], -math.inf if math.isnan(d) else d, r["n"], r["N"])

    return sorted(rows, key=key)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_rows(rows: list[dict], fh_or_path, fields=ROW_FIELDS) -> None:
    """Write rows with a fixed header; floats use ``repr`` so they round-trip."""
    if isinstance(fh_or_path, (str, bytes)) or hasattr(fh_or_path, "__fspath__"):
        with open(fh_or_path, "w", newline="") as fh:
            return write_rows(rows, fh, fields)
    w = csv.writer(fh_or_path, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([_fmt(r[f]) for f in fields])


_INT_FIELDS = {"n", "N", "seed"}
_STR_FIELDS = {"experiment", "kernel", "case"}


def read_rows(path) -> list[dict]:
    """Load a CSV written by :func:`write_rows`."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise DataError("empty file", line=1)
        out = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(f"expected {len(header)} fields, got {len(row)}", line=lineno)
            rec = {}
            for f, v in zip(header, row):
                try:
                    rec[f] = v if f in _STR_FIELDS else int(v) if f in _INT_FIELDS else float(v)
                except ValueError:
                    raise DataError(f"bad value {v!r} for {f}", line=lineno) from None
            out.append(rec)
    return out


def run(cfg: ExperimentConfig):
    """Dispatch; returns ``(rows, fields, flagged)``."""
    if cfg.experiment == "validate":
        rows, flagged = run_validate(cfg)
        return rows, VALIDATE_FIELDS, flagged
    if cfg.experiment == "scaling":
        return run_scaling(cfg), ROW_FIELDS, []
    if cfg.experiment == "size":
        return run_size(cfg), ROW_FIELDS, []
    if cfg.experiment == "growth":
        return run_growth(cfg), ROW_FIELDS, []
    return run_benchmark(cfg), ROW_FIELDS, []


def paper_scale(cfg: ExperimentConfig) -> ExperimentConfig:
    return replace(cfg, n_trials=500, n_perm=1000)
