"""Acceptance criteria, one test each, with a PASS/FAIL line per criterion.

Run alone with ``python3 -m pytest tests/test_acceptance.py -v -s``; the
summary block at the end of any pytest run repeats the lines.
"""
import math
import sys
import time

import numpy as np
import pytest

from conftest import record
from qfriction import (
    ZERO_TEMPERATURE,
    ModelParams,
    SweepTable,
    bose_occupation,
    decoherence_velocity_sweep,
    force_term_f2,
    force_term_f3,
    friction_force,
    im_s1_exact,
    im_s1_smallv,
    integrate_2d_region,
    integrate_oscillatory,
    plate_term_s2,
    plate_term_s3,
    principal_value_1d,
    velocity_sweep,
)
from qfriction.cli import main as cli_main
from qfriction.integrands import light_cone_region
from qfriction.oracle import (
    OracleConfig,
    oracle_f2,
    oracle_f3,
    oracle_f3_plus,
    oracle_pv,
    oracle_s2,
    oracle_s3,
)
from qfriction.quadrature import Tolerance

W, O = 0.03, 0.01
BETAS = (ZERO_TEMPERATURE, 1.0, 0.1)
TIGHT = Tolerance(1e-16, 1e-13)


def label(beta):
    return "inf" if beta == ZERO_TEMPERATURE else f"{beta:g}"


def test_criterion_01_zero_velocity_nullity():
    start = time.perf_counter()
    ok = True
    for beta in (ZERO_TEMPERATURE, 10.0, 1.0, 0.1):
        fb = friction_force(ModelParams(W, O, v=0.0, beta=beta))
        ok &= (fb.f1, fb.f2, fb.f3, fb.total) == (0.0, 0.0, 0.0, 0.0)
    elapsed = time.perf_counter() - start
    ok &= elapsed < 1.0
    record(1, ok, f"every term exactly 0 for 4 betas in {elapsed:.3f} s")
    assert ok


def test_criterion_02_zero_temperature_reduction():
    worst = 0.0
    for v in (0.2, 0.5, 0.8):
        p = ModelParams(W, O, v=v)
        fb = friction_force(p)
        single = fb.f3_prefactor * oracle_f3_plus(p)
        worst = max(worst, abs(fb.total / single - 1.0))
    ok = worst <= 1e-8
    record(2, ok, f"max relative deviation from the zeta_+ term alone {worst:.2e} (limit 1e-8)")
    assert ok


def test_criterion_03_force_curve_shape():
    start = time.perf_counter()
    grid = np.linspace(0.05, 0.9, 50)
    curves = {}
    for beta in BETAS:
        t = velocity_sweep(ModelParams(W, O, a=1e-6, beta=beta), grid, jobs=None)
        curves[beta] = (np.abs(np.array(t.column("total"), dtype=float)),
                        np.array(t.column("error_estimate"), dtype=float))
    elapsed = time.perf_counter() - start

    rises = {}
    for beta, (f, e) in curves.items():
        # strictly increasing up to the summed error estimates of neighbours
        drops = np.nonzero(~(f[1:] > f[:-1] - (e[1:] + e[:-1])))[0]
        rises[beta] = (len(drops) == 0, grid[drops[0]] if len(drops) else None)
    order_ok = bool(np.all(curves[0.1][0] >= curves[1.0][0] - curves[0.1][1] - curves[1.0][1])
                    and np.all(curves[1.0][0] >= curves[ZERO_TEMPERATURE][0]
                               - curves[1.0][1] - curves[ZERO_TEMPERATURE][1]))
    mono_ok = all(r[0] for r in rises.values())
    ok = mono_ok and order_ok and elapsed < 600
    detail = ", ".join(
        f"beta={label(b)} " + ("increasing" if r[0] else f"turns down at v={r[1]:.3f}")
        for b, r in rises.items())
    record(3, ok, f"{detail}; temperature ordering {'holds' if order_ok else 'violated'}; "
                  f"{elapsed:.1f} s")
    assert ok


def test_criterion_04_small_velocity_slope():
    vs = np.geomspace(0.02, 0.2, 11)
    f = [abs(friction_force(ModelParams(W, O, v=v, beta=0.1)).total) for v in vs]
    slope = float(np.polyfit(np.log(vs), np.log(f), 1)[0])
    ok = abs(slope - 1.0) <= 0.15
    record(4, ok, f"log-log slope of |F| over v in [0.02, 0.2] at beta=0.1 is {slope:.3f} "
                  f"(target 1.0 +- 0.15)")
    assert ok


def test_criterion_05_oracle_certification():
    start = time.perf_counter()
    rng = np.random.default_rng(20240611)
    cfg = OracleConfig(mc_samples=4_000_000)
    worst = 0.0
    failures = []
    for i in range(5):
        v = float(rng.uniform(0.1, 0.8))
        beta = float(np.exp(rng.uniform(math.log(0.1), math.log(10.0))))
        p = ModelParams(W, O, v=v, beta=beta)
        checks = [
            ("F2", force_term_f2(p).value, oracle_f2(p, cfg)),
            ("S2", plate_term_s2(p).value, oracle_s2(p, cfg)),
            ("F2 grid", force_term_f2(p).value, (oracle_f2(p, cfg, "grid"), 0.0)),
            ("S2 grid", plate_term_s2(p).value, (oracle_s2(p, cfg, "grid"), 0.0)),
            ("F3", force_term_f3(p).value, (oracle_f3(p, cfg), 0.0)),
            ("S3", plate_term_s3(p).value, (oracle_s3(p, cfg), 0.0)),
        ]
        for name, prod, (ref, se) in checks:
            bound = 3 * se + 1e-4 * abs(ref)
            worst = max(worst, abs(prod - ref) / bound)
            if abs(prod - ref) > bound:
                failures.append(f"{name} at v={v:.3f} beta={beta:.3f}")
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 1800
    record(5, ok, f"F2, S2 (Monte Carlo and grid), F3, S3 at 5 random points: worst "
                  f"|diff|/(3 sigma + 1e-4 rel) = {worst:.2f}; {elapsed:.1f} s"
                  + (f"; failed: {failures}" if failures else ""))
    assert ok


def test_criterion_06_influence_action_anchors():
    worst = 0.0
    for beta in (ZERO_TEMPERATURE, 10.0, 1.0, 0.1):
        n = bose_occupation(W, beta)
        exact = im_s1_exact(ModelParams(W, O, v=0.0, beta=beta), TIGHT).value
        worst = max(worst, abs(exact / (math.pi * W * (2 * n + 1) / 2) - 1))

    def rel_err(v):
        p = ModelParams(W, O, v=v, beta=1.0)
        # the closed form carries twice the integral's normalization
        ex = 2 * im_s1_exact(p, TIGHT).value
        return abs(im_s1_smallv(p) - ex) / ex

    ratio = rel_err(0.04) / rel_err(0.02)
    ok = worst <= 1e-8 and ratio >= 8.0
    record(6, ok, f"v=0 semicircle anchor rel. error {worst:.1e}; small-v error ratio "
                  f"(0.04 vs 0.02) {ratio:.2f} (need >= 8)")
    assert ok


def test_criterion_07_decoherence_curve_shape():
    grid = np.linspace(0.0, 0.95, 20)
    curves = {}
    for beta in BETAS:
        p0 = ModelParams(W, O, beta=beta).with_plate_coupling(0.01)
        t = decoherence_velocity_sweep(p0, grid, jobs=None)
        curves[beta] = np.array(t.column("t_d"), dtype=float)
    mono = {b: bool(np.all(np.diff(c) <= 0)) for b, c in curves.items()}
    at_rest = [curves[b][0] for b in BETAS]
    order_ok = at_rest[0] > at_rest[1] > at_rest[2]
    end = np.array([curves[b][-1] for b in BETAS])
    spread = float((end.max() - end.min()) / end.mean())
    ok = all(mono.values()) and order_ok and spread < 0.2
    record(7, ok, f"monotone non-increasing: {'yes' if all(mono.values()) else mono}; "
                  f"v=0 ordering {'holds' if order_ok else 'violated'}; spread at v=0.95 is "
                  f"{spread:.3g} of the mean (limit 0.2)")
    assert ok


def test_criterion_08_resonance(tmp_path):
    out = tmp_path / "resonance.csv"
    status = cli_main(["resonance-sweep", "--v", "0.01", "--w-tilde", "0.03",
                       "--plate-coupling", "0.01", "--beta", "1,10",
                       "--grid", "0.005:0.06:41", "--out", str(out), "--log-level", "WARNING"])
    t = SweepTable.read_csv(out)
    step = (0.06 - 0.005) / 40
    found = {b: t.metadata[f"argmin_o_tilde@beta={b}"] for b in ("1.0", "10.0")}
    ok = all(abs(x - 0.03) <= step for x in found.values())
    failed = {b: sum(1 for c in t.column(f"converged@beta={b}") if c == 0) for b in ("1.0", "10.0")}
    record(8, ok, f"argmin O at beta=1: {found['1.0']:.6g}, beta=10: {found['10.0']:.6g} "
                  f"(step {step:.6g}); points without an estimate {failed}; exit {status}")
    assert ok


def test_criterion_09_quadrature_suite():
    rng = np.random.default_rng(99)
    pv_worst = 0.0
    for _ in range(20):
        a, b, c = rng.normal(size=3), rng.uniform(0.2, 3.0, 3), rng.uniform(0, 2 * math.pi, 3)

        def g(x, a=a, b=b, c=c):
            return sum(a[i] * np.cos(b[i] * x + c[i]) for i in range(3))

        x0 = float(rng.uniform(-0.5, 0.5))
        diff = abs(principal_value_1d(g, x0, -1.0, 1.0).value - oracle_pv(g, x0, -1.0, 1.0))
        pv_worst = max(pv_worst, diff)

    def one(x):
        return np.ones_like(x)

    osc = max(abs(integrate_oscillatory(one, lambda x, w=w: w * x, 0.0, 2 * math.pi / w).value)
              for w in (10.0, 100.0, 1000.0))
    sinc_err = abs(integrate_oscillatory(one, lambda x: 100.0 * x, 0.0, 1.0).value
                   - math.sin(100.0) / 100.0)
    exp_exact = (1 - math.exp(-10) * (math.cos(500) - 50 * math.sin(500))) / 2501
    exp_err = abs(integrate_oscillatory(lambda x: np.exp(-x), lambda x: 50.0 * x, 0.0, 10.0).value
                  - exp_exact)
    area = integrate_2d_region(lambda x, y: np.ones_like(x),
                               light_cone_region(ModelParams(W, O, v=0.0))).value
    area_err = abs(area / (math.pi * W * W) - 1)
    ok = pv_worst < 1e-6 and osc < 1e-10 and sinc_err < 1e-10 and exp_err < 1e-10 and area_err < 1e-8
    record(9, ok, f"PV vs excision max diff {pv_worst:.1e}; full periods {osc:.1e}; "
                  f"sinc {sinc_err:.1e}; damped {exp_err:.1e}; disk area rel. {area_err:.1e}")
    assert ok


def test_criterion_10_determinism(tmp_path):
    runs = [
        ["force-sweep", "--grid", "0.05:0.9:12", "--beta", "inf,1,0.1"],
        ["decoherence-sweep"],
        ["point", "--v", "0.4", "--beta", "inf,2"],
    ]
    same = []
    for k, args in enumerate(runs):
        a, b = tmp_path / f"a{k}.csv", tmp_path / f"b{k}.csv"
        cli_main(args + ["--out", str(a), "--jobs", "1", "--log-level", "WARNING"])
        cli_main(args + ["--out", str(b), "--jobs", "4", "--log-level", "WARNING"])
        same.append(a.read_bytes() == b.read_bytes())
    ok = all(same)
    record(10, ok, f"{sum(same)}/{len(same)} CLI configurations byte-identical across reruns "
                   f"(serial vs 4 workers)")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
