"""Hölder-class property checks shared by the unit and acceptance suites."""
import numpy as np

from densinterp.holder import HolderSpec, taylor_error_bound, taylor_eval, uniform_bound


def random_pairs(dim, count, max_dist, rng):
    x = rng.random((count, dim))
    step = rng.normal(size=(count, dim))
    step *= (rng.uniform(0, max_dist, count) / np.linalg.norm(step, axis=1))[:, None]
    y = np.clip(x + step, 0.0, 1.0)
    return x, y


def taylor_control(sd, spec, pairs=1000, max_dist=0.2, seed=0):
    """Worst ratio |f(y) - T_x f(y)| / taylor_error_bound(spec, |x - y|) over random pairs."""
    rng = np.random.default_rng(seed)
    xs, ys = random_pairs(sd.dim, pairs, max_dist, rng)
    fy = sd(ys)
    worst = 0.0
    for x, y, f in zip(xs, ys, fy):
        dist = float(np.linalg.norm(x - y))
        if dist == 0.0:
            continue
        err = abs(f - taylor_eval(sd.derivative, x, spec.ell, y))
        worst = max(worst, err / taylor_error_bound(spec, dist))
    return worst


def grid(dim, points=10_000):
    per_axis = int(round(points ** (1.0 / dim)))
    axis = np.linspace(0.0, 1.0, per_axis)
    mesh = np.meshgrid(*[axis] * dim, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


def boundedness(sd):
    """sup |f| on a 10^4-point grid divided by the uniform bound."""
    return float(np.max(np.abs(sd(grid(sd.dim)))) / uniform_bound(sd.spec))


def inclusion_spec(spec):
    """(floor-beta, d^{3/2} L), the larger class a density with beta > 1 must also lie in."""
    return HolderSpec(float(spec.ell), spec.dim ** 1.5 * spec.L, spec.dim)
