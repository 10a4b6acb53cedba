"""Covering nets of Hölder balls built from the interpolation mesh.

With cell width ``h`` chosen so that ``h**beta <= delta``, rounding every
mesh value to a multiple of ``delta`` maps each function of the class to a
net index.  The net is never enumerated: only its size and the assignment
map are computed.  Logarithms are natural.
"""
from dataclasses import dataclass
from math import log, sqrt

import numpy as np

from .holder import taylor_error_bound, uniform_bound
from .interp import GridGeometry, stability_constant


def _cells_for_delta(delta, beta):
    # smallest m with m ** -beta <= delta
    m = max(1, int(np.ceil(delta ** (-1.0 / beta) - 1e-9)))
    while m ** -beta > delta * (1 + 1e-12):
        m += 1
    while m > 1 and (m - 1) ** -beta <= delta:
        m -= 1
    return m


@dataclass(frozen=True)
class NetSpec:
    spec: object
    delta: float

    def __post_init__(self):
        if not 0 < self.delta <= 1:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")

    @property
    def cells_per_axis(self):
        return _cells_for_delta(self.delta, self.spec.beta)

    @property
    def h(self):
        return 1.0 / self.cells_per_axis

    @property
    def geometry(self):
        return GridGeometry(self.spec.dim, self.cells_per_axis, self.spec.ell)

    @property
    def mesh_points(self):
        return self.geometry.n_mesh

    @property
    def value_range(self):
        B = uniform_bound(self.spec)
        return -B, B


def net_log_size(ns):
    """M (1/h)^d log((2B + delta) / delta)."""
    B = uniform_bound(ns.spec)
    return ns.mesh_points * log((2 * B + ns.delta) / ns.delta)


def net_assign(ns, f):
    """Quantization levels round(f(U) / delta) at every mesh point, row-major cells."""
    pts = ns.geometry.mesh_points()
    vals = np.asarray(f(pts), dtype=np.float64).reshape(-1)
    B = uniform_bound(ns.spec)
    if np.any(np.abs(vals) > B):
        raise ValueError(
            f"function reaches {np.max(np.abs(vals)):.6g} on the mesh, above the class "
            f"bound {B:.6g}; it cannot belong to the class")
    return np.rint(vals / ns.delta).astype(np.int64)


def closeness_constant(ns):
    """C with sup|f - g| <= C delta whenever f and g share a net index.

    Each cell polynomial is within tau * delta of its function (Taylor bound on
    a cell of diameter sqrt(d) h), values sharing a level differ by at most
    delta, and the Lebesgue constant Lambda carries node errors to the whole
    cell: C = Lambda (1 + 2 tau) + 2 tau.
    """
    tau = taylor_error_bound(ns.spec, sqrt(ns.spec.dim) * ns.h) / ns.delta
    lam = stability_constant(ns.spec.ell, ns.spec.dim)
    return lam * (1 + 2 * tau) + 2 * tau


def entropy_table(spec, deltas):
    rows = []
    for delta in deltas:
        ns = NetSpec(spec, float(delta))
        rows.append({"delta": float(delta), "mesh_points": ns.mesh_points,
                     "log_net_size": net_log_size(ns)})
    return rows


def entropy_slopes(spec, deltas):
    """Least-squares slopes of log H against log(1/delta).

    ``raw`` fits log H directly; ``corrected`` fits log(H / log(1/delta)),
    removing the logarithmic factor by which this net is weaker than the
    delta^{-d/beta} rate.  Both should approach d / beta.
    """
    rows = entropy_table(spec, deltas)
    x = np.log(1.0 / np.array([r["delta"] for r in rows]))
    logH = np.log([r["log_net_size"] for r in rows])
    raw = np.polyfit(x, logH, 1)[0]
    corrected = np.polyfit(x, logH - np.log(x), 1)[0]
    return {"raw": float(raw), "corrected": float(corrected),
            "reference": spec.dim / spec.beta}
