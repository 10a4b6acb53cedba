"""Acceptance criteria 1-12, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py``; the terminal summary lists one
PASS/FAIL line per criterion.
"""
import time
from math import comb, log, sqrt

import numpy as np
import pytest

from densinterp.bench import ExperimentConfig, query_timing, run_bench
from densinterp.entropy import entropy_slopes
from densinterp.holder import HolderSpec, holder_spot_check, make_density, shipped_densities
from densinterp.interp import build, default_precision, stability_constant
from densinterp.kde import KdeModel, assumption1_check
from densinterp.lattice import (
    basis_eval, interpolate_eval, min_singular_value, monomials, multi_indices,
    principal_lattice, random_simplex_points, sv_lower_bound, vandermonde)
from densinterp.plif import HEADER_SIZE, TRAILER_SIZE, deserialize, packed_payload_bits, to_bytes
from holder_checks import boundedness, inclusion_spec, taylor_control


def test_c01_lattice_counting(criterion):
    t0 = time.perf_counter()
    bad = [(ell, d) for ell in range(6) for d in range(1, 6)
           if principal_lattice(ell, d, max_nodes=10 ** 6).size != comb(ell + d, ell)
           or len({tuple(r) for r in principal_lattice(ell, d).nodes}) != comb(ell + d, ell)]
    elapsed = time.perf_counter() - t0
    criterion(1, "lattice counting", not bad and elapsed < 1.0,
              f"30 (ell, d) pairs, mismatches={bad}, {elapsed:.3f}s < 1s")


def test_c02_lagrange_and_uniqueness(criterion):
    t0 = time.perf_counter()
    worst_lagrange = worst_repro = 0.0
    for ell in range(5):
        for d in range(1, 4):
            lat = principal_lattice(ell, d)
            gram = np.array([[basis_eval(lat, i, u) for u in lat.points]
                             for i in range(lat.size)])
            worst_lagrange = max(worst_lagrange, np.max(np.abs(gram - np.eye(lat.size))))
            rng = np.random.default_rng(1000 + 10 * ell + d)
            x = random_simplex_points(100, d, rng)
            mono_x = monomials(x, ell)
            mono_u = monomials(lat.points, ell)
            for _ in range(200):
                c = rng.uniform(-1, 1, len(multi_indices(ell, d)))
                err = np.abs(interpolate_eval(lat, mono_u @ c, x) - mono_x @ c)
                worst_repro = max(worst_repro, err.max())
    elapsed = time.perf_counter() - t0
    ok = worst_lagrange <= 1e-10 and worst_repro <= 1e-8 and elapsed < 30
    criterion(2, "Lagrange property and polynomial reproduction", ok,
              f"max|p_i(U_j)-delta_ij|={worst_lagrange:.2e} <= 1e-10, "
              f"reproduction error={worst_repro:.2e} <= 1e-8, {elapsed:.2f}s < 30s")


def test_c03_singular_value_bound(criterion):
    t0 = time.perf_counter()
    worst_margin = np.inf
    for ell in range(5):
        for d in range(1, 4):
            sigma = min_singular_value(vandermonde(principal_lattice(ell, d)))
            worst_margin = min(worst_margin, sigma / sv_lower_bound(ell, d))
    ref = min_singular_value(vandermonde(principal_lattice(1, 1)))
    elapsed = time.perf_counter() - t0
    ok = worst_margin >= 1.0 and abs(ref - 0.6180339887) < 1e-8 \
        and sv_lower_bound(1, 1) == 1 / 32 and elapsed < 10
    criterion(3, "singular-value bound", ok,
              f"min sigma0/bound={worst_margin:.3g} >= 1, sigma0(1,1)={ref:.10f} >= 1/32, "
              f"{elapsed:.2f}s < 10s")


def test_c04_mesh_agreement(criterion):
    worst_full = worst_q = 0.0
    precision_ok = True
    for kind, params, beta, n in [("trig1d", {"a": [0.5]}, 2.0, 20_000),
                                  ("trig2d", {"a": [0.6]}, 2.0, 20_000),
                                  ("bump2d", {"order": 2}, 3.5, 5_000),
                                  ("trig1d", {"a": [0.4]}, 0.7, 5_000)]:
        sd = make_density(kind, params, seed=1, beta=beta)
        model = KdeModel.from_spec(sd.sample(n, np.random.default_rng(n)), sd.spec)
        full = build(model, n, sd.spec)
        quant = build(model, n, sd.spec, precision="default")
        pts = full.geometry.mesh_points()
        oracle = model.evaluate(pts)
        worst_full = max(worst_full, np.max(np.abs(full.query_batch(pts) - oracle)))
        p = quant.precision
        precision_ok &= p == default_precision(n, sd.spec)
        worst_q = max(worst_q, np.max(np.abs(quant.query_batch(pts) - oracle)) * 2.0 ** p)
    ok = worst_full <= 1e-12 and worst_q <= 1.0 and precision_ok
    criterion(4, "mesh agreement", ok,
              f"full max gap={worst_full:.2e} <= 1e-12, quantized max gap={worst_q:.3f} "
              "steps <= 1 step of 2^-p")


def test_c05_global_polynomial_exactness(criterion):
    worst = 0.0
    for ell in range(4):
        for d in (1, 2, 3):
            rng = np.random.default_rng(50 + 10 * ell + d)
            coef = rng.uniform(-1, 1, len(multi_indices(ell, d)))

            class Poly:
                def __call__(self, y):
                    return float(monomials(y, ell) @ coef)

                def evaluate(self, pts):
                    return monomials(pts, ell) @ coef

            fi = build(Poly(), 5000, HolderSpec(ell + 1.0, 1.0, d))
            m = fi.geometry.m
            pts = rng.random((1000, d))
            pts[:500, 0] = rng.integers(0, m + 1, 500) / m  # on cell faces
            pts[:100] = rng.integers(0, m + 1, (100, d)) / m  # lattice corners
            err = np.abs(fi.query_batch(pts) - monomials(pts, ell) @ coef)
            worst = max(worst, err.max())
    criterion(5, "global polynomial exactness", worst <= 1e-8,
              f"max error over 12 (ell, d) builds x 1000 points={worst:.2e} <= 1e-8")


@pytest.fixture(scope="module")
def rate_run():
    cfg = ExperimentConfig(beta=2.0, dim=1, density="trig", density_params={"a": [0.5]},
                           n_list=[2 ** k for k in range(10, 17)], trials=20, seed=0,
                           interior_only=True)
    return run_bench(cfg)


def test_c06_rate_reproduction(rate_run, criterion):
    slope = rate_run.meta["slope_interp"]
    wall = rate_run.meta["wall_seconds"]
    ok = abs(slope - (-0.4)) <= 0.15 and wall < 600
    consts = ", ".join(f"{r['measured_constant']:.3f}" for r in rate_run.rows)
    criterion(6, "rate reproduction", ok,
              f"slope={slope:.4f} in -0.4 +- 0.15 (KDE slope "
              f"{rate_run.meta['slope_kde']:.4f}); measured constants [{consts}] vs formula "
              f"c~={rate_run.meta['c_tilde_formula']:.3g}; {wall:.0f}s < 600s")


def test_c07_no_degradation(rate_run, criterion):
    lam = stability_constant(1, 1)
    slack = []
    for r in rate_run.rows:
        n = r["n"]
        allowed = 3 * r["sup_err_kde"] + lam * sqrt(log(n)) * n ** -0.4
        slack.append(allowed - r["sup_err_interp"])
    criterion(7, "no degradation", min(slack) >= 0,
              f"min over rows of 3 err(f^) + {lam:g} sqrt(log n) n^-2/5 - err(f~) "
              f"= {min(slack):.4f} >= 0")


def test_c08_query_time_independence(criterion):
    t0 = time.perf_counter()
    res = query_timing(n_small=10 ** 4, n_large=10 ** 6, beta=2.0, dim=1)
    elapsed = time.perf_counter() - t0
    ok = res["interp_ratio"] <= 1.5 and res["kde_ratio"] >= 50 and elapsed < 300
    criterion(8, "query-time independence", ok,
              f"f~ ratio={res['interp_ratio']:.3f} <= 1.5 "
              f"({res['interp_small'] * 1e9:.1f} vs {res['interp_large'] * 1e9:.1f} ns), "
              f"KDE ratio={res['kde_ratio']:.1f} >= 50, backend={res['backend']}, "
              f"{elapsed:.0f}s < 300s")


def test_c09_storage_contract(criterion):
    details, ok = [], True
    for beta, d, n, L in [(2.0, 1, 10 ** 5, 40.0), (2.0, 2, 10 ** 5, 40.0),
                          (3.0, 2, 20_000, 10.0), (4.0, 1, 10 ** 5, 20.0)]:
        sd = make_density(f"trig{d}d", {"a": [0.5]}, beta=beta)
        spec = HolderSpec(beta, L, d)
        full = build(sd, n, spec)
        quant = build(sd, n, spec, precision="default")
        g = full.geometry
        size = HEADER_SIZE + 8 * g.m ** d * g.n_nodes + TRAILER_SIZE
        fb, qb = to_bytes(full), to_bytes(quant)
        p = quant.precision
        lam = stability_constant(spec.ell, d)
        pts = np.random.default_rng(0).random((10_000, d))
        dev = np.max(np.abs(deserialize(fb).query_batch(pts) - deserialize(qb).query_batch(pts)))
        case_ok = len(fb) == size and len(qb) == size and dev <= 2.0 ** -p * lam
        ok &= case_ok
        details.append(f"(beta={beta:g},d={d}) bytes={len(fb)}/{len(qb)}=={size}, "
                       f"packed={packed_payload_bits(quant)} bits, "
                       f"dev={dev * 2 ** p:.3f}*2^-{p} <= {lam:g}*2^-{p}")
    criterion(9, "storage contract", ok, "; ".join(details))


def test_c10_kde_error_tail(criterion):
    sd = make_density("trig1d", {"a": [0.5]}, beta=2.0)
    rep = assumption1_check(sd.spec, sd, 4096, 2000, seed=0, multipliers=[1.0, 2.0, 3.0])
    eps = rep["eps"]
    freq = float(np.mean(np.abs(rep["errors"]) > 3 * eps))
    criterion(10, "KDE pointwise error tail", freq < 0.01,
              f"eps={eps:.4f} (c*={rep['c_star']:.3f}), P(|err| > 3 eps)={freq:.4f} < 0.01 "
              f"(reference 2e^-9={2 * np.exp(-9):.1e})")


def test_c11_entropy_shape(criterion):
    t0 = time.perf_counter()
    deltas = [2.0 ** -k for k in range(3, 9)]
    parts, ok = [], True
    for beta, d in [(1.0, 1), (2.0, 1), (1.0, 2)]:
        s = entropy_slopes(HolderSpec(beta, 1.0, d), deltas)
        ok &= abs(s["corrected"] - d / beta) <= 0.2
        parts.append(f"(beta={beta:g},d={d}) slope={s['corrected']:.3f} vs {d / beta:g} "
                     f"[raw {s['raw']:.3f}]")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 1.0
    criterion(11, "entropy shape", ok, "; ".join(parts) + f"; {elapsed:.3f}s < 1s")


def test_c12_holder_class_checks(criterion):
    t0 = time.perf_counter()
    failures, worst = [], {"taylor": 0.0, "bound": 0.0, "inclusion": 0.0, "spot": 0.0}
    for i, sd in enumerate(shipped_densities()):
        name = f"{sd.kind}{sd.dim}d/beta={sd.spec.beta:g}"
        r_taylor = taylor_control(sd, sd.spec, pairs=1000, seed=i)
        r_bound = boundedness(sd)
        r_incl = taylor_control(sd, inclusion_spec(sd.spec), pairs=1000, seed=100 + i) \
            if sd.spec.beta > 1 else 0.0
        r_spot, spot_ok = holder_spot_check(sd, pairs=200, seed=i)
        for key, val in (("taylor", r_taylor), ("bound", r_bound), ("inclusion", r_incl),
                         ("spot", r_spot)):
            worst[key] = max(worst[key], val)
        if r_taylor > 1 or r_bound > 1 or r_incl > 1 or not spot_ok:
            failures.append(name)
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 60
    criterion(12, "Hölder class checks", ok,
              f"9 densities; worst ratios taylor={worst['taylor']:.3f}, "
              f"bound={worst['bound']:.3f}, inclusion={worst['inclusion']:.3f} (all <= 1), "
              f"spot={worst['spot']:.3f} <= 1.05; failures={failures}; {elapsed:.1f}s < 60s")
