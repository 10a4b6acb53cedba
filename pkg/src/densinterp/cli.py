"""Command-line entry point: ``densinterp {build,query,bench,entropy,tail,timing}``."""
import argparse
import csv
import json
import sys
import time

import numpy as np

from .bench import ExperimentConfig, query_timing, run_bench
from .entropy import entropy_slopes, entropy_table
from .holder import HolderSpec, make_density, split_kind
from .interp import build
from .kde import KdeModel, assumption1_check, load_samples_csv
from .plif import deserialize, serialize


def parse_density(text):
    """``"trig1d:a=0.5/0.2,k=1/3"`` -> ("trig1d", {"a": [0.5, 0.2], "k": [1, 3]}).

    List values are separated by ``/``.
    """
    kind, _, rest = text.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, raw = item.partition("=")
        if not eq:
            raise argparse.ArgumentTypeError(f"bad density parameter {item!r}")
        vals = [_number(v) for v in raw.split("/")]
        params[key.strip()] = vals if len(vals) > 1 or key in ("a", "k", "radii", "weights") else vals[0]
    if "centers" in params:
        params["centers"] = np.atleast_1d(params["centers"]).tolist()
    return kind, params


def _number(tok):
    try:
        return int(tok)
    except ValueError:
        return float(tok)


def _precision(text):
    if text == "default":
        return "default"
    p = int(text)
    return p or None


def _float_list(text):
    return [float(v) for v in text.split(",") if v]


def _int_list(text):
    return [int(float(v)) for v in text.split(",") if v]


def _emit(obj, stream=None):
    print(json.dumps(obj, indent=2, sort_keys=True, default=_to_builtin), file=stream or sys.stdout)


def _to_builtin(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(type(obj).__name__)


def _add_common(p, need_out=True):
    p.add_argument("--beta", type=float, default=2.0, help="smoothness beta")
    p.add_argument("--L", type=float, default=None, help="Hölder constant")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--precision", type=_precision, default=None,
                   help="fixed-point bits for quantized storage, or 'default'")
    p.add_argument("--interior-only", action="store_true",
                   help="measure errors on [h, 1-h]^d only")
    if need_out:
        p.add_argument("--out", required=True)


def cmd_build(args):
    if (args.samples is None) == (args.density is None):
        raise SystemExit("build: give exactly one of --samples or --density")
    if args.samples is not None:
        data = load_samples_csv(args.samples)
        if args.L is None:
            raise SystemExit("build: --L is required with --samples")
        n = data.shape[0] if args.n_from_file or args.n is None else args.n
        spec = HolderSpec(args.beta, args.L, data.shape[1])
        oracle = KdeModel.from_spec(data, spec)
        source = {"samples": args.samples}
    else:
        if args.n is None:
            raise SystemExit("build: --n is required with --density")
        kind, params = parse_density(args.density)
        if split_kind(kind)[1] is None:
            params.setdefault("dim", args.dim)
        density = make_density(kind, params, seed=args.seed, beta=args.beta)
        spec = HolderSpec(args.beta, args.L if args.L is not None else density.spec.L,
                          density.dim)
        n = args.n
        if args.oracle == "density":
            oracle = density
        else:
            rng = np.random.default_rng(np.random.SeedSequence(entropy=args.seed))
            oracle = KdeModel.from_spec(density.sample(n, rng), spec)
        source = {"density": density.describe()}
    start = time.perf_counter()
    fi = build(oracle, n, spec, precision=args.precision, threads=args.threads)
    nbytes = serialize(fi, args.out)
    _emit({
        "out": args.out, "n": int(n), "d": spec.dim, "ell": spec.ell, "beta": spec.beta,
        "L": spec.L, "m": fi.geometry.m, "M": fi.geometry.n_nodes,
        "oracle_calls": fi.meta["oracle_calls"], "bytes": nbytes,
        "precision": fi.precision, "build_seconds": time.perf_counter() - start,
        "source": source,
    })


def _iter_point_chunks(args, dim, chunk):
    if args.point:
        yield np.array([[float(v) for v in p.split(",")] for p in args.point])
    if args.points:
        with open(args.points) as fh:
            buf = []
            for line in csv.reader(fh):
                if not line or line[0].startswith("#"):
                    continue
                try:
                    buf.append([float(v) for v in line])
                except ValueError:
                    continue  # header
                if len(buf) >= chunk:
                    yield np.array(buf)
                    buf = []
            if buf:
                yield np.array(buf)


def cmd_query(args):
    fi = deserialize(args.file)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        for pts in _iter_point_chunks(args, fi.dim, args.batch_size):
            if pts.shape[1] != fi.dim:
                raise SystemExit(f"query: points have {pts.shape[1]} coordinates, "
                                 f"interpolant has d={fi.dim}")
            try:
                vals = fi.query_batch(pts)
            except ValueError as exc:
                raise SystemExit(f"query: {exc}")
            out.write("".join(f"{v!r}\n" for v in vals.tolist()))
    finally:
        if out is not sys.stdout:
            out.close()


def cmd_bench(args):
    kind, params = parse_density(args.density)
    kind, dim = split_kind(kind)
    if dim is not None:
        args.dim = dim
    cfg = ExperimentConfig(
        beta=args.beta, L=args.L, dim=args.dim, density=kind, density_params=params,
        n_list=args.n_list, trials=args.trials, seed=args.seed,
        grid_size=args.grid_size, interior_only=args.interior_only,
        precision=args.precision if args.precision != "default" else None,
        threads=args.threads)
    report = run_bench(cfg)
    report.to_csv(args.out + ".csv")
    report.to_json(args.out + ".json")
    summary = {k: report.meta[k] for k in ("slope_interp", "slope_kde", "reference_slope",
                                           "stability_constant") if k in report.meta}
    summary["csv"] = args.out + ".csv"
    summary["json"] = args.out + ".json"
    _emit(summary)


def cmd_entropy(args):
    L = args.L if args.L is not None else 1.0
    spec = HolderSpec(args.beta, L, args.dim)
    rows = entropy_table(spec, args.deltas)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(["delta", "mesh_points", "log_net_size"])
        for r in rows:
            writer.writerow([repr(r["delta"]), r["mesh_points"], repr(r["log_net_size"])])
    finally:
        if out is not sys.stdout:
            out.close()
    if len(rows) >= 2:
        _emit({"slope": entropy_slopes(spec, args.deltas)},
              sys.stdout if args.out else sys.stderr)


def cmd_tail(args):
    kind, params = parse_density(args.density)
    if split_kind(kind)[1] is None:
        params.setdefault("dim", args.dim)
    density = make_density(kind, params, seed=args.seed, beta=args.beta)
    spec = HolderSpec(args.beta, args.L if args.L is not None else density.spec.L, density.dim)
    rep = assumption1_check(spec, density, args.n, args.trials, seed=args.seed,
                            interior=not args.full_cube)
    rep.pop("errors")
    _emit(rep)


def cmd_timing(args):
    _emit(query_timing(n_small=args.n_small, n_large=args.n_large, beta=args.beta,
                       dim=args.dim, interp_queries=args.queries, seed=args.seed))


def make_parser():
    parser = argparse.ArgumentParser(
        prog="densinterp",
        description="Compile density estimators into piecewise lattice interpolants.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="compile an estimator into a PLIF file")
    _add_common(p)
    p.add_argument("--samples", help="CSV of sample points, one per row")
    p.add_argument("--density", help="synthetic density, e.g. trig1d:a=0.5")
    p.add_argument("--n", type=int, help="sample size")
    p.add_argument("--n-from-file", action="store_true", help="take n from the CSV row count")
    p.add_argument("--oracle", choices=["kde", "density"], default="kde",
                   help="compile a KDE of n samples (default) or the density itself")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="evaluate a PLIF file")
    p.add_argument("file")
    p.add_argument("--point", action="append", help="comma-separated coordinates; repeatable")
    p.add_argument("--points", help="CSV of query points")
    p.add_argument("--out", help="write values here instead of stdout")
    p.add_argument("--batch-size", type=int, default=65536)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("bench", help="rate experiment against a synthetic density")
    _add_common(p)
    p.add_argument("--density", default="trig1d:a=0.5")
    p.add_argument("--n-list", type=_int_list, default=[2 ** k for k in range(10, 17)])
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--grid-size", type=int, default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("entropy", help="covering-net sizes for a Hölder ball")
    _add_common(p, need_out=False)
    p.add_argument("--deltas", type=_float_list, default=[2.0 ** -k for k in range(3, 9)])
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("tail", help="empirical pointwise tail of the KDE error")
    _add_common(p, need_out=False)
    p.add_argument("--density", default="trig1d:a=0.5")
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--full-cube", action="store_true",
                   help="draw query points from the whole cube instead of [h, 1-h]^d")
    p.set_defaults(func=cmd_tail)

    p = sub.add_parser("timing", help="per-query time of the interpolant and the KDE")
    _add_common(p, need_out=False)
    p.add_argument("--n-small", type=int, default=10**4)
    p.add_argument("--n-large", type=int, default=10**6)
    p.add_argument("--queries", type=int, default=10**6)
    p.set_defaults(func=cmd_timing)
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError) as exc:
        raise SystemExit(f"{args.command}: {exc}")


if __name__ == "__main__":
    main()
