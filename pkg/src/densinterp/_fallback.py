"""Pure numpy implementations of the hot kernels.

Signatures mirror ``_kernels.pyx`` exactly; ``_backend`` picks one at import.
Inputs are assumed validated by the caller (shapes, dtypes, cube membership).
"""
import numpy as np

NAME = "python"

# Query points per chunk for the KDE double loop; bounds peak memory to
# roughly _KDE_CHUNK_ELEMS doubles.
_KDE_CHUNK_ELEMS = 1 << 21


def _level_table(x, ell):
    """w[q, t, k] = prod_{r<k} (ell*lambda_t(x_q) - r) / k!  for k = 0..ell."""
    q, d = x.shape
    scaled = np.empty((q, d + 1))
    scaled[:, 0] = ell * (1.0 - x.sum(axis=1))
    scaled[:, 1:] = ell * x
    w = np.ones((q, d + 1, ell + 1))
    for k in range(1, ell + 1):
        w[:, :, k] = w[:, :, k - 1] * (scaled - (k - 1)) / k
    return w


def lattice_basis(nodes, ell, x):
    """Evaluate every Lagrange basis polynomial at the rows of ``x``.

    Parameters
    ----------
    nodes : (M, d+1) int64 array of integer barycentric numerators.
    ell : lattice degree.
    x : (q, d) float64 array of points in local coordinates.

    Returns
    -------
    (q, M) float64 array.
    """
    x = np.asarray(x, dtype=np.float64)
    w = _level_table(x, ell)
    cols = np.arange(nodes.shape[1])
    # (q, M, d+1) gather, then product over barycentric slots
    return w[:, cols[None, :], nodes].prod(axis=2)


def piecewise_query(values, m, ell, nodes, y):
    """Evaluate the piecewise interpolant at the rows of ``y`` (inside the cube)."""
    y = np.asarray(y, dtype=np.float64)
    q, d = y.shape
    scaled = y * m
    cell = np.minimum(np.floor(scaled), m - 1).astype(np.int64)
    local = scaled - cell
    flat = np.zeros(q, dtype=np.int64)
    for axis in range(d):
        flat = flat * m + cell[:, axis]
    basis = lattice_basis(nodes, ell, local)
    return np.einsum("qk,qk->q", basis, values[flat])


def kde_sum(samples, queries, coef, h):
    """Unnormalized product-kernel sum  sum_i prod_a K((X_ia - y_a) / h).

    ``coef`` holds the 1-D profile in ascending power basis on [-1, 1];
    the profile is zero outside that interval.
    """
    samples = np.asarray(samples, dtype=np.float64)
    queries = np.asarray(queries, dtype=np.float64)
    n, d = samples.shape
    q = queries.shape[0]
    out = np.zeros(q)
    if n == 0:
        return out
    step = max(1, _KDE_CHUNK_ELEMS // max(1, n * d))
    rev = np.asarray(coef, dtype=np.float64)[::-1]
    inv_h = 1.0 / h
    for start in range(0, q, step):
        block = queries[start:start + step]
        u = (samples[None, :, :] - block[:, None, :]) * inv_h
        uc = np.clip(u, -2.0, 2.0)  # far samples must not overflow before masking
        val = np.zeros_like(u)
        for c in rev:
            val *= uc
            val += c
        val[np.abs(u) > 1.0] = 0.0
        out[start:start + step] = val.prod(axis=2).sum(axis=1)
    return out
