"""Acceptance gate: every criterion at its stated tolerance, one pass/fail
line printed per criterion (run with -s to see them)."""

import math
import time

import mpmath as mp
import numpy as np
import pytest

import triprod as tp
from triprod.lorentz import iwasawa_t_batch
from triprod.triple import recursion_suite, asymptotic_slope_test, \
    t_st_closed_ratio_test

mp.mp.dps = 30


def _report(name, ok, detail, elapsed, budget):
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}: {detail}  ({elapsed:.1f}s, budget {budget}s)")


def test_criterion_1_group_model():
    t0 = time.time()
    worst_metric = worst_round = worst_entry = 0.0
    for d in (2, 3, 4, 5):
        dim = tp.Dimension(d)
        rng = np.random.default_rng(100 + d)
        j = tp.j_metric(dim)
        for _ in range(1000):
            g = tp.random_element(dim, rng)
            worst_metric = max(worst_metric,
                               np.abs(g.m.T @ j @ g.m - j).max())
            fac = tp.iwasawa(g)
            back = tp.reassemble(fac, dim)
            worst_round = max(worst_round, np.abs(back.m - g.m).max())
            b = g.m[:, d]
            et = (b[d] + b[d - 1]) / (1.0 + (b[: d - 1] ** 2).sum())
            ref = et ** dim.rho
            worst_entry = max(worst_entry,
                              abs(tp.a_power(g, dim.rho) - ref) / ref)
    elapsed = time.time() - t0
    ok = worst_metric < 1e-12 and worst_round < 1e-10 \
        and worst_entry < 1e-10 and elapsed < 5.0
    _report("criterion-1 group model",
            ok, f"metric {worst_metric:.2e}, roundtrip {worst_round:.2e}, "
                f"entry {worst_entry:.2e}", elapsed, 5)
    assert worst_metric < 1e-12
    assert worst_round < 1e-10
    assert worst_entry < 1e-10
    assert elapsed < 5.0


def test_criterion_2_k_integral_identity():
    t0 = time.time()
    all_ok = True
    worst = 0.0
    for d in (2, 3):
        dim = tp.Dimension(d)
        rng = np.random.default_rng(200 + d)
        for i in range(5):
            y = tp.random_element(dim, rng)
            rep = tp.lemma12_check(d, y, lambda ks: ks[..., 0, 0] ** 2,
                                   100_000, 3000 + 10 * d + i)
            all_ok = all_ok and rep.passed
            worst = max(worst, rep.max_residual)
    elapsed = time.time() - t0
    ok = all_ok and elapsed < 30.0
    _report("criterion-2 K-integral identity", ok,
            f"worst |mean|/3SE {worst:.3f}", elapsed, 30)
    assert all_ok
    assert elapsed < 30.0


def test_criterion_3_orbit_counts():
    t0 = time.time()
    ok = True
    for d in range(2, 7):
        rep = tp.open_orbit_count(d)
        expected = 2 if d == 2 else 1
        ok = ok and rep.open_orbit_count == expected \
            and rep.tangent_rank == d - 1
        rng = np.random.default_rng(300 + d)
        for _ in range(20):
            ok = ok and tp.am_tangent_rank(
                d, rng.standard_normal(d - 1)) == d - 1
    elapsed = time.time() - t0
    _report("criterion-3 orbit counts", ok and elapsed < 1.0,
            "counts 2,1,1,1,1; ranks d-1 at 20 random base points",
            elapsed, 1)
    assert ok
    assert elapsed < 1.0


def test_criterion_4_recursion_ladder():
    t0 = time.time()
    pts = [tp.AbcParams(a, b, c, 2) for (a, b, c) in
           [(1.5, 1.5, 1.5), (2.0, 2.0, 1.5), (1.3, 1.3, 1.45),
            (1.5, 1.75, 1.6), (1.8, 2.1, 1.7), (2.25, 2.0, 1.75)]]
    reports = recursion_suite(2, pts, tol=1e-4, quad_tol=1e-6)
    elapsed = time.time() - t0
    ok = True
    details = []
    for rep in reports:
        ok = ok and rep.passed and len(rep.residuals) >= 5
        details.append(f"{rep.identity_name} {rep.max_residual:.1e}"
                       f"({len(rep.residuals)}pt)")
    ok = ok and elapsed < 120.0
    _report("criterion-4 recursion ladder", ok, ", ".join(details),
            elapsed, 120)
    for rep in reports:
        assert rep.passed, (rep.identity_name, rep.max_residual)
        assert len(rep.residuals) >= 5, rep.identity_name
    assert elapsed < 120.0


def test_criterion_5_ratio_constancy():
    t0 = time.time()
    ok = True
    details = []
    for d in (2, 3, 4):
        dim = tp.Dimension(d)
        pts = [tp.SpectralTriple(lam, 0.7j, 0.3j, dim)
               for lam in (0.5j, 1j, 1.5j, 2j, 3j)]
        rep = t_st_closed_ratio_test(pts, 1e-3)
        const = rep.points[-1]["fitted_constant"]
        imag_ok = abs(const.imag) / abs(const) < 1e-3 and const.real > 0
        ok = ok and rep.passed and imag_ok
        details.append(f"d={d} spread {rep.max_residual:.1e} "
                       f"const {const.real:.6f}")
        assert rep.passed, (d, rep.max_residual)
        assert imag_ok, (d, const)
    elapsed = time.time() - t0
    ok = ok and elapsed < 300.0
    _report("criterion-5 ratio constancy", ok, "; ".join(details),
            elapsed, 300)
    assert elapsed < 300.0


def test_criterion_6_asymptotics():
    t0 = time.time()
    rep = asymptotic_slope_test(3, 0.7j, 0.3j, [8.0, 16.0, 32.0], tol=1e-6)
    elapsed = time.time() - t0
    stirling = next(p for p in rep.points if "stirling_residual" in p)
    steps = [p for p in rep.points if "step" in p]
    conclusive = [p for p in rep.points
                  if "E" in p and p.get("sigma_E") is not None]
    ok = rep.passed and stirling["stirling_residual"] < 1e-6 \
        and elapsed < 600.0
    _report("criterion-6 asymptotics", ok,
            f"stirling residual {stirling['stirling_residual']:.1e}, "
            f"{len(conclusive)}/3 points conclusive, steps "
            + "; ".join(str(s) for s in steps), elapsed, 600)
    assert rep.passed, rep.points
    assert stirling["stirling_residual"] < 1e-6
    assert elapsed < 600.0


def test_criterion_7_special_function_floor():
    t0 = time.time()
    # recurrence on a grid (mod 2 pi i), reflection via |Gamma(it)|
    worst = 0.0
    for re in (0.3, 1.0, 4.0, 12.0):
        for im in (-20.0, -1.0, 0.5, 8.0, 40.0):
            z = complex(re, im)
            diff = tp.log_gamma(z + 1) - tp.log_gamma(z) \
                - np.log(complex(z))
            k = round(diff.imag / (2 * math.pi))
            worst = max(worst, abs(diff - 2j * math.pi * k))
    for t in (0.5, 3.0, 11.0, 30.0):
        lhs = 2.0 * tp.log_gamma(1j * t).real
        rhs = math.log(math.pi / (t * math.sinh(math.pi * t)))
        worst = max(worst, abs(lhs - rhs))
    env_ok = True
    for sigma in (0.25, 0.5, 1.0):
        for t in (10.0, 20.0, 40.0):
            ref = float(abs(mp.gamma(mp.mpc(sigma, t))))
            rel = abs(ref - tp.stirling_abs(sigma, t)) / ref
            env_ok = env_ok and rel < 2.0 / t
    elapsed = time.time() - t0
    ok = worst < 1e-10 and env_ok and elapsed < 1.0
    _report("criterion-7 special functions", ok,
            f"identity residual {worst:.1e}, envelope within 2/|t|",
            elapsed, 1)
    assert worst < 1e-10
    assert env_ok
    assert elapsed < 1.0


def test_criterion_8_oracle_spot_values():
    t0 = time.time()
    res = tp.i_n(tp.AbcParams(1.0, 1.0, 1.0, 1), 1e-7)
    want = math.pi ** 2 / 2.0
    rel = abs(res.value.real - want) / want
    cn_ok = (tp.c_n(1) == 1.0
             and abs(tp.c_n(2) - 2.0) < 1e-14
             and abs(tp.c_n(3) - 2 * math.pi) < 1e-14 * 2 * math.pi)
    elapsed = time.time() - t0
    ok = rel < 1e-6 and cn_ok and elapsed < 10.0
    _report("criterion-8 oracle spot values", ok,
            f"I_1(1,1,1) rel {rel:.1e}; c_n exact", elapsed, 10)
    assert rel < 1e-6
    assert cn_ok
    assert elapsed < 10.0
