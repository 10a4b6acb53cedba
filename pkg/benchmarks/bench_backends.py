"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_backends.py [--repeats 5] [--json out.json]

Each kernel runs on identical inputs under both backends; the table reports
best-of-repeats time per call, per-item time, the speedup and the largest
absolute disagreement between the two outputs.
"""
import argparse
import json
import sys
import time

import numpy as np

from densinterp import _backend
from densinterp.holder import HolderSpec, make_density
from densinterp.interp import build
from densinterp.kde import KdeModel
from densinterp.lattice import principal_lattice


def best_time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(rng):
    for ell, d in [(2, 1), (3, 2), (4, 3)]:
        lat = principal_lattice(ell, d)
        x = rng.random((20_000, d))
        yield (f"lattice_basis ell={ell} d={d}", 20_000,
               lambda impl, lat=lat, x=x, ell=ell: impl.lattice_basis(lat.nodes, ell, x))

    for beta, d, n in [(2.0, 1, 10 ** 5), (2.0, 2, 10 ** 5), (3.0, 3, 10 ** 4)]:
        sd = make_density("trig", {"a": [0.5], "dim": d}, beta=beta)
        fi = build(sd, n, HolderSpec(beta, sd.spec.L, d))
        g = fi.geometry
        y = rng.random((200_000, d))
        yield (f"piecewise_query d={d} m={g.m} M={g.n_nodes}", 200_000,
               lambda impl, fi=fi, g=g, y=y: impl.piecewise_query(
                   fi.values, g.m, g.ell, g.lattice.nodes, y))

    for d, n in [(1, 10 ** 4), (1, 10 ** 5), (2, 10 ** 4)]:
        sd = make_density(f"trig{d}d", {"a": [0.5]}, beta=2.0)
        model = KdeModel.from_spec(sd.sample(n, rng), sd.spec)
        q = rng.random((500, d))
        coef = model.kernel.coef
        yield (f"kde_sum d={d} n={n}", 500 * n,
               lambda impl, s=model.samples, q=q, c=coef, h=model.bandwidth:
               impl.kde_sum(s, q, c, h))


def run(repeats):
    if not _backend.compiled_available():
        sys.exit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    py, cy = _backend.get("python"), _backend.get("cython")
    rng = np.random.default_rng(0)
    rows = []
    for name, items, fn in cases(rng):
        t_py, out_py = best_time(lambda: fn(py), repeats)
        t_cy, out_cy = best_time(lambda: fn(cy), repeats)
        rows.append({"kernel": name, "python_s": t_py, "cython_s": t_cy,
                     "python_ns_per_item": 1e9 * t_py / items,
                     "cython_ns_per_item": 1e9 * t_cy / items,
                     "speedup": t_py / t_cy,
                     "max_abs_diff": float(np.max(np.abs(np.asarray(out_py)
                                                         - np.asarray(out_cy))))})
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--json", help="also write the rows to this file")
    args = ap.parse_args(argv)
    rows = run(args.repeats)
    print(f"{'kernel':<40} {'python ms':>10} {'cython ms':>10} {'speedup':>8} {'max diff':>9}")
    for r in rows:
        print(f"{r['kernel']:<40} {1e3 * r['python_s']:>10.2f} {1e3 * r['cython_s']:>10.2f} "
              f"{r['speedup']:>8.1f} {r['max_abs_diff']:>9.1e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
