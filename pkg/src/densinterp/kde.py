"""Kernel density estimator with product kernels of prescribed order.

This is the reference estimator that :mod:`densinterp.interp` compiles.  It
deliberately stays the plain Theta(n d) per-query sum.
"""
from dataclasses import dataclass, field
import warnings

import numpy as np
from numpy.polynomial import polynomial as P
from numpy.polynomial import legendre as Leg

from . import _backend

MAX_KERNEL_ORDER = 6


@dataclass(frozen=True, eq=False)
class Kernel:
    """Product kernel K(u) = prod_a k(u_a) with polynomial profile k on [-1, 1].

    ``coef`` is the profile in ascending power basis.
    """

    order: int
    coef: np.ndarray = field(repr=False)
    weight: str = "epanechnikov"

    def profile(self, u):
        u = np.asarray(u, dtype=np.float64)
        return np.where(np.abs(u) <= 1.0, P.polyval(u, self.coef), 0.0)

    def __call__(self, u):
        u = np.atleast_2d(np.asarray(u, dtype=np.float64))
        return self.profile(u).prod(axis=1)

    def moment(self, j):
        """Exact integral of u^j k(u) over [-1, 1]."""
        prim = P.polyint(P.polymul(self.coef, [0] * j + [1]))
        return float(P.polyval(1.0, prim) - P.polyval(-1.0, prim))

    def abs_moment(self, j, nodes=64):
        """Integral of |u|^j |k(u)| by Gauss-Legendre on each sign-constant piece."""
        roots = P.polyroots(self.coef)
        cuts = sorted({-1.0, 0.0, 1.0, *[r.real for r in roots
                                           if abs(r.imag) < 1e-12 and -1 < r.real < 1]})
        x, w = Leg.leggauss(nodes)
        total = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            u = 0.5 * (b - a) * x + 0.5 * (a + b)
            total += 0.5 * (b - a) * np.sum(w * np.abs(u) ** j * np.abs(P.polyval(u, self.coef)))
        return float(total)

    @property
    def legendre_coef(self):
        return Leg.poly2leg(self.coef)


def _weight_moment(weight, power):
    # integral over [-1, 1] of w(u) u^power, power even
    base = 2.0 / (power + 1)
    if weight == "uniform":
        return base
    if weight == "epanechnikov":
        return base - 2.0 / (power + 3)
    raise ValueError(f"unknown kernel weight {weight!r}")


def legendre_kernel(ell, weight="epanechnikov"):
    """Kernel of order ``ell``: moments 1..ell vanish and the integral is one.

    The profile is w(u) q(u) with q an even polynomial of degree
    2 floor(ell/2) fixed by the moment conditions; ``weight`` is ``"uniform"``
    (w = 1, the classical Legendre kernel sum_m phi_m(0) phi_m(u)) or
    ``"epanechnikov"`` (w = 1 - u^2, which gives 3/4 (1 - u^2) for ell <= 1).
    Odd moments vanish by symmetry.
    """
    ell = int(ell)
    if not 0 <= ell <= MAX_KERNEL_ORDER:
        raise ValueError(f"kernel order must be in [0, {MAX_KERNEL_ORDER}], got {ell}")
    p = ell // 2
    A = np.array([[_weight_moment(weight, 2 * (i + j)) for i in range(p + 1)]
                  for j in range(p + 1)])
    rhs = np.zeros(p + 1)
    rhs[0] = 1.0
    c = np.linalg.solve(A, rhs)
    q = np.zeros(2 * p + 1)
    q[::2] = c
    w = [1.0] if weight == "uniform" else [1.0, 0.0, -1.0]
    return Kernel(ell, P.polymul(q, w), weight)


def epanechnikov_kernel():
    return legendre_kernel(1, "epanechnikov")


def default_bandwidth(n, beta, dim):
    return float(n) ** (-1.0 / (2 * beta + dim))


@dataclass(frozen=True, eq=False)
class KdeModel:
    samples: np.ndarray = field(repr=False)
    kernel: Kernel
    bandwidth: float

    def __post_init__(self):
        s = np.ascontiguousarray(np.atleast_2d(self.samples), dtype=np.float64)
        if s.shape[0] == 0:
            raise ValueError("KDE needs at least one sample")
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_spec(cls, samples, spec, weight="epanechnikov"):
        """KDE with kernel order ``spec.ell`` and bandwidth n^{-1/(2 beta + d)}."""
        samples = np.atleast_2d(np.asarray(samples, dtype=np.float64))
        if samples.shape[1] != spec.dim:
            raise ValueError(f"samples have {samples.shape[1]} columns, spec has dim {spec.dim}")
        h = default_bandwidth(samples.shape[0], spec.beta, spec.dim)
        return cls(samples, legendre_kernel(spec.ell, weight), h)

    @property
    def n(self):
        return self.samples.shape[0]

    @property
    def dim(self):
        return self.samples.shape[1]

    def evaluate(self, points, backend=None):
        """Batch evaluation at the rows of ``points``."""
        pts = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=np.float64)))
        if pts.shape[1] != self.dim:
            raise ValueError(f"points must have {self.dim} columns, got {pts.shape[1]}")
        impl = _backend if backend is None else _backend.get(backend)
        raw = impl.kde_sum(self.samples, pts, self.kernel.coef, self.bandwidth)
        return raw / (self.n * self.bandwidth ** self.dim)

    def __call__(self, y):
        return float(self.evaluate(np.reshape(y, (1, -1)))[0])

    def describe(self):
        return {"estimator": "kde", "n": self.n, "dim": self.dim,
                "bandwidth": self.bandwidth, "kernel_order": self.kernel.order,
                "kernel_weight": self.kernel.weight}


def kde_eval(model, y):
    return model(y)


def load_samples_csv(path):
    """Read one point per row, ``d`` float columns in [0, 1].  A header row is skipped."""
    with open(path) as fh:
        first = fh.readline()
    try:
        [float(tok) for tok in first.replace(",", " ").split()]
        skip = 0
    except ValueError:
        skip = 1
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)  # empty file; reported below
        data = np.loadtxt(path, delimiter=",", ndmin=2, skiprows=skip, comments="#")
    if data.size == 0:
        raise ValueError(f"{path}: no samples")
    if np.any(data < 0) or np.any(data > 1) or not np.all(np.isfinite(data)):
        raise ValueError(f"{path}: samples must be finite and lie in [0, 1]")
    return data


def _trial_rng(seed, index):
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def assumption1_check(spec, density, n, trials, seed=0, multipliers=None,
                      interior=True, kernel_weight="epanechnikov"):
    """Empirical tail of the pointwise KDE error against 2 exp(-t^2 / eps^2).

    Each trial draws an independent data set of size ``n`` and a uniform query
    point ``y`` (restricted to [h, 1-h]^d when ``interior``).  ``eps`` is the
    RMS of the observed errors and ``c_star = eps * n^{beta/(2 beta + d)}``.
    """
    if trials < 100:
        raise ValueError(f"need at least 100 trials, got {trials}")
    h = default_bandwidth(n, spec.beta, spec.dim)
    lo, hi = (h, 1 - h) if interior else (0.0, 1.0)
    if lo >= hi:
        raise ValueError(f"interior region is empty for n={n} (h={h:.3g})")
    errors = np.empty(trials)
    for t in range(trials):
        rng = _trial_rng(seed, t)
        data = density.sample(n, rng)
        y = rng.uniform(lo, hi, spec.dim)
        model = KdeModel.from_spec(data, spec, kernel_weight)
        errors[t] = model(y) - density(y)
    eps = float(np.sqrt(np.mean(errors ** 2)))
    if multipliers is None:
        multipliers = [1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0]
    rows = []
    for mult in multipliers:
        t = mult * eps
        if t > 1.0:
            break
        freq = float(np.mean(np.abs(errors) > t))
        rows.append({"t": t, "t_over_eps": mult, "frequency": freq,
                     "bound": float(2.0 * np.exp(-mult ** 2))})
    return {
        "n": n, "trials": trials, "seed": seed, "interior": interior,
        "bandwidth": h, "eps": eps,
        "c_star": eps * n ** spec.rate_exponent,
        "mean_error": float(errors.mean()),
        "rows": rows,
        "errors": errors,
    }
