"""Principal lattice of the standard simplex and its Lagrange basis.

Ordering convention (frozen; the PLIF format and Vandermonde indexing rely on
it): multi-indices of degree <= ell in ``d`` variables are listed graded by
total degree, and within one degree in *decreasing* lexicographic order.
For d = 2, ell = 2 this gives

    (0,0), (1,0), (0,1), (2,0), (1,1), (0,2)

Lattice node ``k`` is the point ``s_k / ell`` where ``s_k`` is the ``k``-th
multi-index of degree <= ell, so nodes and monomials share one ordering.
Nodes are kept as exact integer barycentric numerators (s_0, s_1, ..., s_d)
with s_0 = ell - |s|.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from . import _backend

DEFAULT_MAX_NODES = 10**6


class ResourceLimitError(RuntimeError):
    """A requested structure would exceed its configured size cap."""


def multi_indices(ell, dim):
    """All exponent tuples of degree <= ``ell`` in ``dim`` variables, canonical order."""
    return list(_multi_indices(int(ell), int(dim)))


@lru_cache(maxsize=None)
def _multi_indices(ell, dim):
    out = []
    for deg in range(ell + 1):
        out.extend(_compositions(deg, dim))
    return tuple(out)


def _compositions(total, parts):
    # lexicographically decreasing compositions of ``total`` into ``parts``
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def barycentric(x):
    """Barycentric coordinates (1 - sum(x), x_1, ..., x_d) w.r.t. 0, e_1, ..., e_d.

    A 2-D array is treated as one point per row.
    """
    x = np.asarray(x, dtype=np.float64)
    return np.concatenate((1.0 - x.sum(axis=-1, keepdims=True), x), axis=-1)


@dataclass(frozen=True, eq=False)
class PrincipalLattice:
    """The ``ell``-th principal lattice of the standard ``dim``-simplex.

    ``nodes`` is an ``(M, dim+1)`` int64 array of barycentric numerators.
    """

    ell: int
    dim: int
    nodes: np.ndarray = field(repr=False)

    @property
    def size(self):
        return self.nodes.shape[0]

    @property
    def points(self):
        """Cartesian node coordinates, shape ``(M, dim)``."""
        if self.ell == 0:
            return np.zeros((1, self.dim))
        return self.nodes[:, 1:] / self.ell

    def __len__(self):
        return self.size


def lattice_size(ell, dim):
    return comb(ell + dim, ell)


def principal_lattice(ell, dim, max_nodes=DEFAULT_MAX_NODES):
    """Enumerate the principal lattice P_ell of the unit ``dim``-simplex."""
    if ell < 0 or dim < 1:
        raise ValueError(f"need ell >= 0 and dim >= 1, got ell={ell}, dim={dim}")
    return _principal_lattice(int(ell), int(dim), int(max_nodes))


@lru_cache(maxsize=64)
def _principal_lattice(ell, dim, max_nodes):
    size = lattice_size(ell, dim)
    if size > max_nodes:
        raise ResourceLimitError(
            f"principal lattice of degree {ell} in dimension {dim} has "
            f"{size} nodes (cap {max_nodes})")
    idx = np.array(_multi_indices(ell, dim), dtype=np.int64).reshape(size, dim)
    nodes = np.empty((size, dim + 1), dtype=np.int64)
    nodes[:, 0] = ell - idx.sum(axis=1)
    nodes[:, 1:] = idx
    nodes.setflags(write=False)
    return PrincipalLattice(ell, dim, nodes)


def basis_eval(lat, i, x):
    """Lagrange basis polynomial p_i of ``lat`` at ``x`` (product formula).

    Uses the integer numerators directly:
    p_i(x) = prod_t prod_{r < s_t} (ell*lambda_t(x) - r) / (s_t - r).
    """
    s = lat.nodes[i]
    lam = barycentric(x) * lat.ell
    val = 1.0
    for t, st in enumerate(s):
        for r in range(int(st)):
            val *= (lam[t] - r) / (st - r)
    return float(val)


def basis_matrix(lat, x):
    """All basis polynomials at the rows of ``x``; shape ``(q, M)``."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != lat.dim:
        raise ValueError(f"points must have {lat.dim} columns, got {x.shape[1]}")
    return _backend.lattice_basis(lat.nodes, lat.ell, np.ascontiguousarray(x))


def interpolate_eval(lat, values, x):
    """Evaluate sum_i p_i(x) * values[i].

    ``x`` may be a single point or an array of points (one per row).
    """
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (lat.size,):
        raise ValueError(f"expected {lat.size} node values, got shape {values.shape}")
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    out = basis_matrix(lat, x.reshape(1, -1) if single else x) @ values
    return float(out[0]) if single else out


def monomials(points, ell):
    """Matrix of monomials x^alpha over canonical multi-indices; shape ``(q, M)``."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    alphas = np.array(multi_indices(ell, points.shape[1]), dtype=np.int64)
    return np.prod(points[:, None, :] ** alphas[None, :, :], axis=2)


def vandermonde(lat):
    """V[k, alpha] = U_k ** alpha with canonical row and column ordering."""
    return monomials(lat.points, lat.ell)


def min_singular_value(V):
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 2 or V.shape[0] != V.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {V.shape}")
    try:
        sv = np.linalg.svd(V, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"SVD did not converge: {exc}") from exc
    return float(sv.min())


def sv_lower_bound(ell, dim):
    """Closed-form lower bound C(ell+d, ell)^-3 4^-ell ell^(-2 ell); 1 at ell = 0."""
    if ell == 0:
        return 1.0
    return comb(ell + dim, ell) ** -3.0 * 4.0 ** -ell * float(ell) ** (-2 * ell)


def lebesgue_constant(lat, n_points=10_000, seed=0, region="cube"):
    """Estimate max_x sum_i |p_i(x)| by random sampling.

    ``region`` is ``"cube"`` (the whole unit cube, which is where cell
    polynomials are queried) or ``"simplex"``. Vertices of the cube are
    always included since the extremum tends to sit on the boundary.
    """
    rng = np.random.default_rng(seed)
    x = rng.random((n_points, lat.dim))
    if region == "simplex":
        x = _fold_into_simplex(x)
        corners = np.vstack([np.zeros(lat.dim), np.eye(lat.dim)])
    elif region == "cube":
        corners = np.array(np.meshgrid(*[[0.0, 1.0]] * lat.dim)).reshape(lat.dim, -1).T
    else:
        raise ValueError(f"unknown region {region!r}")
    x = np.vstack([x, corners])
    return float(np.abs(basis_matrix(lat, x)).sum(axis=1).max())


def _fold_into_simplex(u):
    # uniform on the simplex via sorted spacings
    d = u.shape[1]
    s = np.sort(u, axis=1)
    edges = np.hstack([np.zeros((u.shape[0], 1)), s, np.ones((u.shape[0], 1))])
    return np.diff(edges, axis=1)[:, 1:d + 1]


def random_simplex_points(n, dim, rng):
    return _fold_into_simplex(rng.random((n, dim)))

