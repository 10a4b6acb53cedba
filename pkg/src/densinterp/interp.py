"""Compile a pointwise density estimator into a piecewise lattice interpolant.

The unit cube is split into ``m**d`` cells of width ``h = 1/m``.  Each cell
``j`` carries the principal lattice of degree ``ell`` mapped by
``x -> h (x + j)`` and the estimator values at those nodes.  A query in cell
``j`` evaluates the Lagrange interpolant at the local point ``y/h - j``.

Cells are half-open ``[j h, (j+1) h)`` per axis, except that the last cell
of each axis is closed, so every point of the cube belongs to exactly one
cell.  Cells are stored in row-major order of ``j`` (first axis slowest),
nodes in the canonical lattice order.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from math import ceil, log2
import time

import numpy as np

from . import _backend
from .holder import uniform_bound
from .lattice import ResourceLimitError, lebesgue_constant, principal_lattice

DEFAULT_MAX_EVALS = 10**8
# keeps v * 2**p exactly representable in a double for |v| below ~2**4
MAX_PRECISION = 48


class OracleError(RuntimeError):
    """The estimator failed (raised or returned a non-finite value) at a mesh point."""

    def __init__(self, point, cause=None):
        self.point = np.asarray(point)
        msg = f"oracle failed at mesh point {self.point.tolist()}"
        if cause is not None:
            msg += f": {cause}"
        super().__init__(msg)


def _ceil_root(n, exponent):
    # smallest integer m >= 1 with m ** exponent >= n, robust to float error
    m = max(1, ceil(n ** (1.0 / exponent) - 1e-9))
    while m ** exponent < n:
        m += 1
    while m > 1 and (m - 1) ** exponent >= n:
        m -= 1
    return m


def choose_bandwidth(n, beta, dim):
    """Cells per axis ``m = ceil(n^{1/(2 beta + d)})`` and width ``h = 1/m``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    exponent = 2 * beta + dim
    if float(exponent).is_integer():
        exponent = int(exponent)
    m = _ceil_root(int(n), exponent)
    return m, 1.0 / m


@dataclass(frozen=True)
class GridGeometry:
    dim: int
    m: int
    ell: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"cells per axis must be >= 1, got {self.m}")

    @property
    def h(self):
        return 1.0 / self.m

    @property
    def lattice(self):
        return principal_lattice(self.ell, self.dim)

    @property
    def n_cells(self):
        return self.m ** self.dim

    @property
    def n_nodes(self):
        return self.lattice.size

    @property
    def n_mesh(self):
        return self.n_cells * self.n_nodes

    def cell_offsets(self):
        """Integer cell coordinates in row-major order, shape ``(m**d, d)``."""
        grids = np.meshgrid(*[np.arange(self.m)] * self.dim, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def mesh_points(self):
        """All mesh points ``(U_k + j) / m``; shape ``(m**d * M, d)``."""
        cells = self.cell_offsets()
        nodes = self.lattice.points
        pts = (nodes[None, :, :] + cells[:, None, :]) / self.m
        return pts.reshape(-1, self.dim)


def _check_in_cube(y, dim):
    y = np.asarray(y, dtype=np.float64)
    if y.shape[-1] != dim:
        raise ValueError(f"points must have {dim} coordinates, got {y.shape[-1]}")
    if not np.all(np.isfinite(y)) or np.any(y < 0.0) or np.any(y > 1.0):
        bad = y.reshape(-1, dim)
        mask = ~np.all((bad >= 0.0) & (bad <= 1.0), axis=1)
        raise ValueError(f"query point {bad[mask][0].tolist()} lies outside [0, 1]^{dim}")
    return y


def cell_index(geometry, y):
    y = _check_in_cube(y, geometry.dim)
    j = np.minimum(np.floor(y * geometry.m), geometry.m - 1).astype(np.int64)
    return tuple(int(v) for v in j)


def default_precision(n, spec):
    """Fixed-point bits ``ceil(log2(n) beta/(2 beta + d)) + 4``."""
    return int(ceil(log2(max(n, 1)) * spec.rate_exponent)) + 4


def value_bound(spec):
    return uniform_bound(spec) + 1.0


@lru_cache(maxsize=None)
def stability_constant(ell, dim):
    """Measured Lebesgue constant max_x sum_k |p_k(x)| over the unit cube.

    Perturbing every node value of a cell by at most delta moves the cell
    polynomial by at most this constant times delta anywhere in the cell.
    """
    return lebesgue_constant(principal_lattice(ell, dim), n_points=10_000, seed=0,
                             region="cube")


@dataclass(frozen=True, eq=False)
class PiecewiseInterpolant:
    geometry: GridGeometry
    values: np.ndarray = field(repr=False)
    spec: object
    precision: int = 0
    meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        g = self.geometry
        if vals.shape != (g.n_cells, g.n_nodes):
            raise ValueError(f"values must have shape {(g.n_cells, g.n_nodes)}, got {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def dim(self):
        return self.geometry.dim

    @property
    def quantized(self):
        return self.precision > 0

    @property
    def bound(self):
        return value_bound(self.spec)

    def query_batch(self, points, backend=None):
        pts = np.atleast_2d(_check_in_cube(points, self.dim))
        impl = _backend if backend is None else _backend.get(backend)
        g = self.geometry
        return impl.piecewise_query(self.values, g.m, g.ell, g.lattice.nodes,
                                    np.ascontiguousarray(pts))

    def __call__(self, y):
        return float(self.query_batch(np.reshape(y, (1, -1)))[0])

    def mesh_values(self):
        return self.values.reshape(-1)


def query(fi, y):
    return fi(y)


def quantize(values, precision, bound):
    """Round to multiples of 2^-precision; returns the integer codes."""
    scale = float(2 ** precision)
    if np.any(np.abs(values) > bound):
        worst = float(np.max(np.abs(values)))
        raise ValueError(
            f"value {worst:.6g} exceeds the quantization range [-{bound:.6g}, {bound:.6g}]; "
            "raise L or store in full precision")
    return np.rint(np.asarray(values) * scale).astype(np.int64)


def _evaluate_oracle(oracle, points, threads):
    batch = getattr(oracle, "evaluate", None)
    chunks = np.array_split(np.arange(points.shape[0]), max(1, threads))
    chunks = [c for c in chunks if c.size]

    def pointwise(idx):
        out = np.empty(idx.size)
        for pos, i in enumerate(idx):
            try:
                out[pos] = float(oracle(points[i]))
            except Exception as exc:
                raise OracleError(points[i], exc) from exc
        return out

    def run(idx):
        out = None
        if batch is not None:
            try:
                out = np.asarray(batch(points[idx]), dtype=np.float64).reshape(-1)
            except Exception:
                out = None  # redo point by point to locate the failure
        if out is None:
            out = pointwise(idx)
        bad = ~np.isfinite(out)
        if bad.any():
            raise OracleError(points[idx[np.argmax(bad)]], "non-finite value")
        return out

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    return np.concatenate(parts) if parts else np.empty(0)


def build(oracle, n, spec, precision=None, threads=1, max_evals=DEFAULT_MAX_EVALS,
          description=None):
    """Query ``oracle`` on the mesh and return the piecewise interpolant.

    Parameters
    ----------
    oracle : callable
        ``oracle(y)`` for a point ``y`` of shape ``(d,)``.  If it also has an
        ``evaluate(points)`` method, that is used for batches of mesh points.
        With ``threads > 1`` the oracle must be safe to call concurrently.
    n : int
        Sample size of the estimator; fixes the partition width.
    spec : HolderSpec
    precision : int, ``"default"`` or None
        Fixed-point bits for quantized storage; None keeps full doubles.
    """
    m, _ = choose_bandwidth(n, spec.beta, spec.dim)
    geometry = GridGeometry(spec.dim, m, spec.ell)
    lat = principal_lattice(spec.ell, spec.dim)
    total = m ** spec.dim * lat.size
    if total > max_evals:
        raise ResourceLimitError(f"mesh has {total} points (cap {max_evals})")
    if precision == "default":
        precision = default_precision(n, spec)
    points = geometry.mesh_points()
    start = time.perf_counter()
    values = _evaluate_oracle(oracle, points, int(threads))
    elapsed = time.perf_counter() - start
    p = 0
    if precision:
        p = int(precision)
        if not 1 <= p <= MAX_PRECISION:
            raise ValueError(f"precision must be in [1, {MAX_PRECISION}] bits, got {p}")
        values = quantize(values, p, value_bound(spec)) / float(2 ** p)
    meta = {
        "beta": spec.beta, "L": spec.L, "n": int(n),
        "estimator": description if description is not None else _describe(oracle),
        "built_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "precision": p, "oracle_calls": int(points.shape[0]),
        "build_seconds": elapsed,
    }
    return PiecewiseInterpolant(geometry, values.reshape(geometry.n_cells, lat.size),
                                spec, p, meta)


def _describe(oracle):
    describe = getattr(oracle, "describe", None)
    if callable(describe):
        return describe()
    return {"estimator": type(oracle).__name__}
