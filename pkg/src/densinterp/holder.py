"""Hölder-class parameters, Taylor utilities and synthetic ground-truth densities.

Two density families are provided, both with closed-form derivatives of all
orders so that class membership constants can be certified analytically:

``trig``
    f(x) = 1 + sum_j a_j prod_i sin(2 pi k_j x_i), integer k_j >= 1 and
    sum_j |a_j| <= 1.
``bump``
    Mixture f(x) = sum_j w_j prod_i b((x_i - c_ji) / r_j) / r_j of raised-cosine
    bumps b(u) = c cos^{2K}(pi u / 2) on [-1, 1].  Each bump lies inside the
    cube and vanishes to order 2K at its edge, so f is C^{2K-1} on all of R^d
    with Lipschitz derivatives of order 2K - 1 and admits any beta <= 2K.

Certified constant: for |s| = ell and gamma = beta - ell,
|D^s f(x) - D^s f(y)| <= min(G |x-y|, W) <= G^gamma W^(1-gamma) |x-y|^gamma
where G bounds |grad D^s f| and W bounds the oscillation of D^s f.  The
certified L is the larger of that value and sup|f| / d^(3 ell/2 + 1/2), the
latter keeping the uniform-boundedness bound valid for densities that do not
vanish on the boundary of the cube.
"""
from dataclasses import dataclass
from itertools import product
from math import comb, factorial, ceil, pi, sqrt

import numpy as np

from .lattice import multi_indices


@dataclass(frozen=True)
class HolderSpec:
    beta: float
    L: float
    dim: int

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")

    @property
    def ell(self):
        """Largest integer strictly below beta."""
        return int(ceil(self.beta)) - 1

    @property
    def gamma(self):
        return self.beta - self.ell

    @property
    def rate_exponent(self):
        """beta / (2 beta + d); minimax error decays like n ** -rate_exponent."""
        return self.beta / (2 * self.beta + self.dim)


def uniform_bound(spec):
    return spec.dim ** (1.5 * spec.ell + 0.5) * spec.L


def taylor_error_bound(spec, dist):
    return spec.L * spec.dim ** (spec.ell / 2) / factorial(spec.ell) * dist ** spec.beta


def _multi_factorial(s):
    out = 1
    for v in s:
        out *= factorial(v)
    return out


def taylor_eval(derivative, center, ell, y):
    """Degree-``ell`` Taylor polynomial at ``center`` evaluated at ``y``.

    ``derivative(s, x)`` must return D^s f(x) for a multi-index tuple ``s``.
    """
    center = np.asarray(center, dtype=np.float64)
    diff = np.asarray(y, dtype=np.float64) - center
    total = 0.0
    for s in multi_indices(ell, center.size):
        total += np.prod(diff ** np.array(s)) / _multi_factorial(s) * derivative(s, center)
    return float(total)


def _as_points(x, dim):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim <= 1
    x = x.reshape(-1, dim)
    return x, single


class SyntheticDensity:
    """Base class: a density on [0,1]^d with exact evaluation and sampling."""

    kind = "abstract"

    def __init__(self, dim, beta):
        self.dim = int(dim)
        L = self.certified_L(beta)
        self.spec = HolderSpec(float(beta), L, self.dim)
        if self.dim <= 2:
            mass = self.total_mass()
            if abs(mass - 1.0) > 1e-6:
                raise ValueError(f"{self.kind} density integrates to {mass}, not 1")

    # subclasses provide: _eval(points), derivative(s, x), sup_abs_derivative(s),
    # oscillation(s), max_smoothness, breakpoints(axis)

    def __call__(self, x):
        pts, single = _as_points(x, self.dim)
        out = self._eval(pts)
        return float(out[0]) if single else out

    def sup_bound(self):
        return self.sup_abs_derivative((0,) * self.dim)

    def certified_L(self, beta):
        if beta > self.max_smoothness:
            raise ValueError(
                f"{self.kind} density with these parameters is only certified for "
                f"beta <= {self.max_smoothness}, got {beta}")
        ell = int(ceil(beta)) - 1
        gamma = beta - ell
        holder_L = 0.0
        for s in multi_indices(ell, self.dim):
            if sum(s) != ell:
                continue
            grad = 0.0
            for axis in range(self.dim):
                up = list(s)
                up[axis] += 1
                grad += self.sup_abs_derivative(tuple(up)) ** 2
            G = sqrt(grad)
            W = self.oscillation(s)
            holder_L = max(holder_L, G ** gamma * W ** (1.0 - gamma))
        sup_L = self.sup_bound() / self.dim ** (1.5 * ell + 0.5)
        return float(max(holder_L, sup_L))

    def total_mass(self, pieces=32, order=8):
        """Composite Gauss-Legendre integral over the cube (d <= 2)."""
        nodes, weights = np.polynomial.legendre.leggauss(order)
        axes = []
        for axis in range(self.dim):
            brk = np.unique(np.concatenate([np.linspace(0, 1, pieces + 1),
                                            self.breakpoints(axis)]))
            a, b = brk[:-1, None], brk[1:, None]
            xs = (0.5 * (b - a) * nodes + 0.5 * (a + b)).ravel()
            ws = (0.5 * (b - a) * weights).ravel()
            axes.append((xs, ws))
        grids = np.meshgrid(*[g for g, _ in axes], indexing="ij")
        wts = np.ones_like(grids[0])
        for i, (_, ws) in enumerate(axes):
            shape = [1] * self.dim
            shape[i] = -1
            wts = wts * ws.reshape(shape)
        pts = np.stack([g.ravel() for g in grids], axis=1)
        return float(np.sum(self._eval(pts) * wts.ravel()))

    def breakpoints(self, axis):
        return np.array([0.0, 1.0])

    def sample(self, n, rng):
        if self.dim == 1:
            return self._sample_inverse_cdf(n, rng)
        return self._sample_rejection(n, rng)

    def _sample_inverse_cdf(self, n, rng, tol=1e-10):
        u = rng.random(n)
        lo = np.zeros(n)
        hi = np.ones(n)
        # monotone bisection; the width halves each step
        for _ in range(int(np.ceil(np.log2(1.0 / tol)))):
            mid = 0.5 * (lo + hi)
            below = self.cdf(mid) < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return (0.5 * (lo + hi)).reshape(n, 1)

    def _sample_rejection(self, n, rng):
        envelope = min(uniform_bound(self.spec), self.sup_bound())
        out = np.empty((0, self.dim))
        while out.shape[0] < n:
            need = n - out.shape[0]
            batch = max(1024, int(1.2 * need * envelope))
            cand = rng.random((batch, self.dim))
            keep = rng.random(batch) * envelope < self._eval(cand)
            out = np.vstack([out, cand[keep]])
        return out[:n]

    def describe(self):
        return {"kind": self.kind, "dim": self.dim, "beta": self.spec.beta,
                "L": self.spec.L, **self.params()}


class TrigDensity(SyntheticDensity):
    kind = "trig"
    max_smoothness = float("inf")

    def __init__(self, dim=1, a=(0.5,), k=None, beta=2.0):
        self.a = np.atleast_1d(np.asarray(a, dtype=np.float64))
        if k is None:
            k = np.arange(1, self.a.size + 1)
        self.k = np.atleast_1d(np.asarray(k, dtype=np.int64))
        if self.k.shape != self.a.shape:
            raise ValueError("trig density needs one frequency per amplitude")
        if np.any(self.k < 1):
            raise ValueError("trig frequencies must be integers >= 1")
        if np.abs(self.a).sum() > 1.0:
            raise ValueError(
                f"sum |a| = {np.abs(self.a).sum():.4g} > 1 would allow negative density")
        self.omega = 2 * pi * self.k
        super().__init__(dim, beta)

    def params(self):
        return {"a": self.a.tolist(), "k": self.k.tolist()}

    def _eval(self, pts):
        out = np.ones(pts.shape[0])
        for a, w in zip(self.a, self.omega):
            out += a * np.prod(np.sin(w * pts), axis=1)
        return out

    def derivative(self, s, x):
        x = np.asarray(x, dtype=np.float64)
        s = tuple(int(v) for v in s)
        total = 1.0 if sum(s) == 0 else 0.0
        for a, w in zip(self.a, self.omega):
            term = a
            for xi, si in zip(x, s):
                term *= w ** si * np.sin(w * xi + si * pi / 2)
            total += term
        return float(total)

    def sup_abs_derivative(self, s):
        deg = sum(s)
        pert = float(np.sum(np.abs(self.a) * self.omega ** deg))
        return pert + (1.0 if deg == 0 else 0.0)

    def oscillation(self, s):
        return 2.0 * float(np.sum(np.abs(self.a) * self.omega ** sum(s)))

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = x.copy()
        for a, w in zip(self.a, self.omega):
            out = out + a * (1.0 - np.cos(w * x)) / w
        return out


class BumpDensity(SyntheticDensity):
    kind = "bump"

    def __init__(self, dim=1, centers=None, radii=None, weights=None, order=1,
                 beta=2.0, seed=0, count=2):
        self.order = int(order)
        if self.order < 1:
            raise ValueError("bump order must be >= 1")
        rng = np.random.default_rng(seed)
        if radii is None:
            radii = np.full(count if centers is None else len(centers), 0.25)
        self.radii = np.atleast_1d(np.asarray(radii, dtype=np.float64))
        J = self.radii.size
        if centers is None:
            centers = rng.uniform(self.radii[:, None], 1 - self.radii[:, None], (J, dim))
        self.centers = np.asarray(centers, dtype=np.float64).reshape(J, dim)
        if weights is None:
            weights = np.full(J, 1.0 / J)
        self.weights = np.atleast_1d(np.asarray(weights, dtype=np.float64))
        if self.weights.shape != (J,) or np.any(self.weights < 0):
            raise ValueError("bump weights must be nonnegative, one per component")
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"bump weights sum to {self.weights.sum()}, not 1")
        if np.any(self.radii <= 0) or np.any(self.radii > 0.5):
            raise ValueError("bump radii must lie in (0, 0.5]")
        lo = self.centers - self.radii[:, None]
        hi = self.centers + self.radii[:, None]
        if np.any(lo < -1e-12) or np.any(hi > 1 + 1e-12):
            raise ValueError("every bump must be supported inside the unit cube")
        K = self.order
        # b(u) = 1/2 + sum_m coef_m cos(m pi u) on [-1, 1]
        self._cos = np.array([comb(2 * K, K - m) / comb(2 * K, K) for m in range(1, K + 1)])
        self._freq = pi * np.arange(1, K + 1)
        self._peak = 4.0 ** K / (2 * comb(2 * K, K))
        self.max_smoothness = 2.0 * K
        super().__init__(dim, beta)

    def params(self):
        return {"centers": self.centers.tolist(), "radii": self.radii.tolist(),
                "weights": self.weights.tolist(), "order": self.order}

    def _profile(self, u, p):
        # p-th derivative of b at u, zero outside [-1, 1]
        val = np.zeros_like(u)
        for c, w in zip(self._cos, self._freq):
            val = val + c * w ** p * np.cos(w * u + p * pi / 2)
        if p == 0:
            val = val + 0.5
        return np.where(np.abs(u) <= 1.0, val, 0.0)

    def _profile_sup(self, p):
        if p == 0:
            return self._peak
        return float(np.sum(self._cos * self._freq ** p))

    def _eval(self, pts):
        out = np.zeros(pts.shape[0])
        for c, r, w in zip(self.centers, self.radii, self.weights):
            u = (pts - c) / r
            out += w / r ** self.dim * np.prod(self._profile(u, 0), axis=1)
        return out

    def derivative(self, s, x):
        x = np.asarray(x, dtype=np.float64)
        total = 0.0
        for c, r, w in zip(self.centers, self.radii, self.weights):
            term = w / r ** (self.dim + sum(s))
            for xi, ci, si in zip(x, c, s):
                term *= self._profile(np.array((xi - ci) / r), int(si))
            total += float(term)
        return total

    def sup_abs_derivative(self, s):
        total = 0.0
        for r, w in zip(self.radii, self.weights):
            term = w / r ** (self.dim + sum(s))
            for si in s:
                term *= self._profile_sup(int(si))
            total += term
        return total

    def oscillation(self, s):
        if sum(s) == 0:
            return self.sup_bound()  # f >= 0 and vanishes outside the bumps
        return 2.0 * self.sup_abs_derivative(s)

    def breakpoints(self, axis):
        c = self.centers[:, axis]
        return np.clip(np.concatenate([c - self.radii, c + self.radii]), 0, 1)

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        for c, r, w in zip(self.centers[:, 0], self.radii, self.weights):
            u = np.clip((x - c) / r, -1.0, 1.0)
            prim = 0.5 * (u + 1.0)
            for coef, fr in zip(self._cos, self._freq):
                prim = prim + coef * np.sin(fr * u) / fr
            out = out + w * prim
        return out


FAMILIES = {"trig": TrigDensity, "bump": BumpDensity}


def split_kind(kind):
    """``"trig2d"`` -> ("trig", 2); ``"trig"`` -> ("trig", None)."""
    stem = kind[:-1] if kind.endswith("d") else ""
    base = stem.rstrip("0123456789")
    if stem and base != stem:
        return base, int(stem[len(base):])
    return kind, None


def make_density(kind, params=None, seed=0, beta=2.0):
    """Construct a synthetic density by family name.

    ``kind`` may carry a dimension suffix (``"trig1d"``, ``"bump2d"``).
    ``seed`` only matters for parameters drawn at random (bump centers).
    """
    params = dict(params or {})
    base, dim = split_kind(kind)
    if dim is not None:
        params["dim"] = dim
    if base not in FAMILIES:
        raise ValueError(f"unknown density family {kind!r}; choose from {sorted(FAMILIES)}")
    if base == "bump":
        params.setdefault("seed", seed)
    return FAMILIES[base](beta=beta, **params)


def density_eval(sd, x):
    return sd(x)


def density_sample(sd, n, seed):
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return sd.sample(int(n), rng)


def finite_difference(f, x, s, step=1e-4):
    """Central finite-difference estimate of D^s f at ``x`` (tensor stencil)."""
    x = np.asarray(x, dtype=np.float64)
    stencils = []
    for p in s:
        offsets = [(p / 2 - j) * step for j in range(p + 1)]
        coefs = [(-1) ** j * comb(p, j) for j in range(p + 1)]
        stencils.append(list(zip(offsets, coefs)))
    pts, wts = [], []
    for combo in product(*stencils):
        pts.append(x + np.array([o for o, _ in combo]))
        wts.append(np.prod([c for _, c in combo]))
    vals = f(np.array(pts))
    return float(np.dot(wts, vals) / step ** sum(s))


def holder_spot_check(sd, pairs=200, seed=0, step=1e-4, rtol=0.05):
    """Randomized check of |D^s f(x) - D^s f(y)| <= L |x - y|^gamma at |s| = ell.

    Derivatives come from finite differences, so this is independent of the
    analytic derivative formulas.  Returns the worst observed ratio
    |D^s f(x) - D^s f(y)| / (L |x - y|^gamma); passing means <= 1 + rtol.
    """
    rng = np.random.default_rng(seed)
    spec = sd.spec
    orders = [s for s in multi_indices(spec.ell, sd.dim) if sum(s) == spec.ell]
    margin = step * (spec.ell + 1)
    worst = 0.0
    for _ in range(pairs):
        s = orders[rng.integers(len(orders))]
        x = rng.uniform(margin, 1 - margin, sd.dim)
        direction = rng.normal(size=sd.dim)
        direction /= np.linalg.norm(direction)
        y = np.clip(x + rng.uniform(0.01, 0.2) * direction, margin, 1 - margin)
        dist = np.linalg.norm(x - y)
        if dist == 0:
            continue
        diff = abs(finite_difference(sd, x, s, step) - finite_difference(sd, y, s, step))
        worst = max(worst, diff / (spec.L * dist ** spec.gamma))
    return worst, worst <= 1 + rtol


def shipped_densities():
    """The synthetic densities exercised by the test and acceptance suites."""
    return [
        make_density("trig1d", {"a": [0.5]}, beta=2.0),
        make_density("trig1d", {"a": [0.3, 0.2], "k": [1, 3]}, beta=0.7),
        make_density("trig1d", {"a": [0.4]}, beta=3.0),
        make_density("trig2d", {"a": [0.6]}, beta=2.0),
        make_density("trig2d", {"a": [0.3, 0.2], "k": [1, 2]}, beta=1.5),
        make_density("bump1d", {"order": 1}, seed=3, beta=2.0),
        make_density("bump1d", {"order": 2}, seed=4, beta=3.5),
        make_density("bump2d", {"order": 1, "radii": [0.3, 0.2]}, seed=5, beta=2.0),
        make_density("bump2d", {"order": 2, "radii": [0.35]}, seed=6, beta=1.0),
    ]
