"""Meshes on 1-D intervals, discretised functions and their L2 geometry.

A function observed on a mesh is stored as its vector of point values.  The
L2 inner product is approximated by the weighted sum ``sum_i w_i x_i y_i``:
uniform meshes carry equal weights ``(t_max - t_min) / N`` and any other mesh
carries trapezoid weights.  Equal weights make ``||x_N - y_N||^2`` a Riemann
sum, so kernels built on it stay stable as the mesh is refined.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import DataError, IncompatibleMesh, InvalidArgument

_SUM_RTOL = 1e-12


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def trapezoid_weights(points) -> np.ndarray:
    t = np.asarray(points, dtype=float)
    if t.size < 2:
        raise InvalidArgument("trapezoid weights need at least two points")
    dt = np.diff(t)
    w = np.zeros_like(t)
    w[:-1] += dt / 2
    w[1:] += dt / 2
    return w


class Mesh:
    """Ordered sample locations on ``[t_min, t_max]`` with quadrature weights.

    Parameters
    ----------
    points : array_like
        Strictly increasing locations inside ``interval``.
    weights : array_like, optional
        Positive quadrature weights summing to the interval length.  Defaults
        to trapezoid weights, which requires the points to span the interval.
    interval : (float, float), optional
        Defaults to ``(points[0], points[-1])``.
    """

    __slots__ = ("points", "weights", "interval", "uniform", "_sqrt_w")

    def __init__(self, points, weights=None, interval=None, uniform=False):
        t = _frozen(points)
        if t.ndim != 1 or t.size < 1:
            raise InvalidArgument("mesh points must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(t)):
            raise InvalidArgument("mesh points must be finite")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise InvalidArgument("mesh points must be strictly increasing")
        if interval is None:
            interval = (float(t[0]), float(t[-1]))
        lo, hi = float(interval[0]), float(interval[1])
        if not hi > lo:
            raise InvalidArgument(f"degenerate interval ({lo}, {hi})")
        if t[0] < lo or t[-1] > hi:
            raise InvalidArgument("mesh points fall outside the interval")
        w = trapezoid_weights(t) if weights is None else np.array(weights, dtype=float)
        if w.shape != t.shape:
            raise InvalidArgument("weights and points differ in length")
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise InvalidArgument("quadrature weights must be positive and finite")
        if abs(w.sum() - (hi - lo)) > _SUM_RTOL * (hi - lo) * max(1, t.size):
            raise InvalidArgument(
                f"weights sum to {w.sum()!r}, expected interval length {hi - lo!r}"
            )
        w.setflags(write=False)
        object.__setattr__(self, "points", t)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "interval", (lo, hi))
        object.__setattr__(self, "uniform", bool(uniform))
        sw = np.sqrt(w)
        sw.setflags(write=False)
        object.__setattr__(self, "_sqrt_w", sw)

    def __setattr__(self, name, value):
        raise AttributeError("Mesh is immutable")

    def __len__(self) -> int:
        return self.points.size

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def length(self) -> float:
        return self.interval[1] - self.interval[0]

    @property
    def sqrt_weights(self) -> np.ndarray:
        return self._sqrt_w

    def unit_points(self) -> np.ndarray:
        """Points rescaled affinely onto [0, 1]."""
        lo, hi = self.interval
        return (self.points - lo) / (hi - lo)

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Mesh):
            return NotImplemented
        return (
            self.interval == other.interval
            and np.array_equal(self.points, other.points)
            and np.array_equal(self.weights, other.weights)
        )

    def __hash__(self):
        return hash((self.interval, self.points.tobytes(), self.weights.tobytes()))

    def __repr__(self):
        kind = "uniform" if self.uniform else "irregular"
        return f"Mesh({kind}, N={self.size}, interval={self.interval})"

    def sample(self, f) -> "FunctionSample":
        """Evaluate a callable on the mesh."""
        return FunctionSample(self, np.broadcast_to(f(self.points), self.points.shape))


def uniform_mesh(n_points: int, interval=(0.0, 1.0)) -> Mesh:
    """Evenly spaced mesh including both endpoints, every weight ``length / N``."""
    if int(n_points) != n_points or n_points < 2:
        raise InvalidArgument(f"uniform_mesh needs n_points >= 2, got {n_points}")
    lo, hi = float(interval[0]), float(interval[1])
    if not hi > lo:
        raise InvalidArgument(f"degenerate interval ({lo}, {hi})")
    n = int(n_points)
    return Mesh(np.linspace(lo, hi, n), np.full(n, (hi - lo) / n), (lo, hi), uniform=True)


def mesh_from_points(points, interval=None, rtol=1e-9) -> Mesh:
    """Build a mesh from raw locations, detecting the uniform case."""
    t = np.asarray(points, dtype=float)
    if t.size >= 2:
        span = (t[0], t[-1]) if interval is None else interval
        if span[0] == t[0] and span[1] == t[-1]:
            grid = np.linspace(t[0], t[-1], t.size)
            if np.allclose(t, grid, rtol=0, atol=rtol * (t[-1] - t[0])):
                return Mesh(t, np.full(t.size, (t[-1] - t[0]) / t.size), span, uniform=True)
    return Mesh(t, None, interval)


def _check_same_mesh(a: Mesh, b: Mesh):
    if a is not b and a != b:
        raise IncompatibleMesh(f"{a!r} and {b!r} differ")


@dataclass(frozen=True, eq=False)
class FunctionSample:
    """Point values of one function on a mesh."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.mesh.size,):
            raise InvalidArgument(
                f"expected {self.mesh.size} values, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise InvalidArgument("function values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def _binary(self, other, op):
        if isinstance(other, FunctionSample):
            _check_same_mesh(self.mesh, other.mesh)
            other = other.values
        return FunctionSample(self.mesh, op(self.values, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return FunctionSample(self.mesh, -self.values)


class FunctionSet:
    """Samples sharing one mesh, stored row-wise in an ``(n, N)`` array."""

    __slots__ = ("mesh", "values", "ids")

    def __init__(self, mesh: Mesh, values, ids: Sequence[str] | None = None):
        v = np.array(values, dtype=float)
        if v.ndim == 1 and v.size == mesh.size:
            v = v[None, :]
        if v.ndim != 2 or v.shape[1] != mesh.size:
            raise InvalidArgument(
                f"values must have shape (n, {mesh.size}), got {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise InvalidArgument("function values must be finite")
        v.setflags(write=False)
        if ids is None:
            ids = [f"s{i}" for i in range(v.shape[0])]
        elif len(ids) != v.shape[0]:
            raise InvalidArgument("one id per sample required")
        object.__setattr__(self, "mesh", mesh)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "ids", tuple(str(i) for i in ids))

    def __setattr__(self, name, value):
        raise AttributeError("FunctionSet is immutable")

    @classmethod
    def from_samples(cls, samples: Sequence[FunctionSample]) -> "FunctionSet":
        if not samples:
            raise InvalidArgument("empty sample list")
        mesh = samples[0].mesh
        for s in samples[1:]:
            _check_same_mesh(mesh, s.mesh)
        return cls(mesh, np.stack([s.values for s in samples]))

    def __len__(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, i):
        if isinstance(i, (int, np.integer)):
            return FunctionSample(self.mesh, self.values[i])
        idx = np.arange(len(self))[i]
        return FunctionSet(self.mesh, self.values[idx], [self.ids[j] for j in idx])

    def __iter__(self) -> Iterator[FunctionSample]:
        for i in range(len(self)):
            yield self[i]

    @property
    def samples(self) -> list[FunctionSample]:
        return list(self)

    def concat(self, other: "FunctionSet") -> "FunctionSet":
        _check_same_mesh(self.mesh, other.mesh)
        return FunctionSet(
            self.mesh, np.vstack([self.values, other.values]), self.ids + other.ids
        )

    def __repr__(self):
        return f"FunctionSet(n={len(self)}, {self.mesh!r})"


def inner_product(x: FunctionSample, y: FunctionSample) -> float:
    """Quadrature inner product ``sum_i w_i x_i y_i``."""
    _check_same_mesh(x.mesh, y.mesh)
    return float(np.dot(x.mesh.weights, x.values * y.values))


def sq_distance(x: FunctionSample, y: FunctionSample) -> float:
    _check_same_mesh(x.mesh, y.mesh)
    d = x.values - y.values
    return float(np.dot(x.mesh.weights, d * d))


def norm(x: FunctionSample) -> float:
    return float(np.sqrt(inner_product(x, x)))


# -- CSV -----------------------------------------------------------------------


def write_function_set(fs: FunctionSet, path) -> None:
    """Write ``t,<id1>,<id2>,...`` with one row per mesh point."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", *fs.ids])
        for j, t in enumerate(fs.mesh.points):
            w.writerow([repr(float(t)), *(repr(float(v)) for v in fs.values[:, j])])


def read_function_set(path, interval=None) -> FunctionSet:
    """Load a FunctionSet written by :func:`write_function_set`.

    Raises
    ------
    DataError
        On a missing file or any malformed row; the message carries the line.
    """
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from exc
    with fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError("empty file", line=1)
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0] != "t":
        raise DataError("header must be 't,<id1>,<id2>,...'", line=1)
    ts, vals = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataError(f"expected {len(header)} fields, got {len(row)}", line=lineno)
        try:
            nums = [float(c) for c in row]
        except ValueError as exc:
            raise DataError(str(exc), line=lineno) from None
        if not all(np.isfinite(nums)):
            raise DataError("non-finite value", line=lineno)
        ts.append(nums[0])
        vals.append(nums[1:])
    if len(ts) < 2:
        raise DataError("need at least two mesh points")
    try:
        mesh = mesh_from_points(ts, interval)
    except InvalidArgument as exc:
        raise DataError(f"bad mesh column: {exc}") from None
    return FunctionSet(mesh, np.array(vals).T, header[1:])
