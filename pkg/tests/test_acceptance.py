"""Acceptance suite: one PASS/FAIL line per criterion, each at its stated tolerance."""

import math
import time

import numpy as np
import pytest

from fracperim.coercivity import default_param_grid, gap, scan_positivity
from fracperim.experiments import (
    admissible_sample,
    continuity_experiment,
    random_direction,
    rescale_c1,
    sample_rng,
    stability_experiment,
)
from fracperim.functionals import (
    first_variation_F,
    perimeter_ball_direct,
    ratio_F,
    ratio_F_ball,
    richardson_second,
    second_variation_F,
    second_variation_F_at_zero,
)
from fracperim.geometry import regraph
from fracperim.specfun import FracParams, A_coefficient, ball_volume, lambda_eigenvalue, perimeter_ball, sphere_area
from fracperim.sphere import SphereFunction, c1_norm_estimate, seminorm_gagliardo

RESULTS = {}
P = FracParams(2, 0.25, 0.75)


def report(name, ok, detail, elapsed=None, budget=None):
    if budget is not None:
        detail += f"; runtime {elapsed:.1f}s (budget {budget:g}s)"
        ok = ok and elapsed < budget
    line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
    RESULTS[name] = line
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def stability():
    t0 = time.perf_counter()
    res = stability_experiment(P, K=8, samples=50, seed=0, eps=0.05)
    return res, time.perf_counter() - t0


def test_c01_spectral_identities():
    t0 = time.perf_counter()
    worst = 0.0
    for n in range(2, 8):
        for alpha in np.round(np.arange(0.1, 1.0, 0.1), 10):
            A = A_coefficient(n, alpha, np.arange(3))
            expect = np.array([0.0, alpha, 2 * n * alpha / (n - alpha)])
            worst = max(worst, float(np.max(np.abs(A - expect))))
    report("C01 spectral identities", worst < 1e-10, f"max abs err {worst:.2e} (tol 1e-10)", time.perf_counter() - t0, 1)


def test_c02_eigenvalue_oracle():
    t0 = time.perf_counter()
    worst = 0.0
    for n in (2, 3):
        for alpha in (0.25, 0.5, 0.75):
            for k in range(1, 9):
                Y = SphereFunction.harmonic(n, k, 1)
                q = seminorm_gagliardo(Y, alpha, method="quadrature")
                worst = max(worst, abs(q / lambda_eigenvalue(n, alpha, k) - 1))
            assert seminorm_gagliardo(SphereFunction.harmonic(n, 0, 1), alpha, method="quadrature") == 0.0
    report("C02 eigenvalue oracle", worst < 1e-6, f"max rel err {worst:.2e} (tol 1e-6)", time.perf_counter() - t0, 60)


def test_c03_ball_perimeter():
    t0 = time.perf_counter()
    worst = max(abs(perimeter_ball_direct(2, a) / perimeter_ball(2, a) - 1) for a in (0.25, 0.5, 0.75))
    elapsed = time.perf_counter() - t0
    per = sphere_area(2)
    a = 1e-3
    low = a / per * perimeter_ball(2, a)
    low_err = abs(low / ball_volume(2) - 1)
    high = a / per * perimeter_ball(2, 1 - a)
    high_err = abs(high / per - 1)
    # informational: the alpha -> 1 limit is the (n-1)-ball volume
    omega = math.pi ** ((2 - 1) / 2) / math.gamma((2 - 1) / 2 + 1)
    ok = worst < 1e-3 and low_err < 0.01 and high_err < 0.02
    report(
        "C03 ball perimeter",
        ok,
        f"direct rel err {worst:.2e} (tol 1e-3); alpha->0 limit rel err {low_err:.2e} (tol 1e-2); "
        f"alpha->1 limit {high:.6f} vs P(B) {per:.6f}, rel err {high_err:.2e} (tol 2e-2), "
        f"vs omega_(n-1) {omega:.6f}",
        elapsed,
        300,
    )


def test_c04_coercivity_scan():
    t0 = time.perf_counter()
    gap_v = ratio_v = 0
    for p in default_param_grid():
        rep = scan_positivity(p, 200)
        gap_v += len(rep.gap_violations)
        ratio_v += len(rep.ratio_violations)
    report(
        "C04 coercivity scan",
        gap_v == 0 and ratio_v == 0,
        f"damped-gap violations {gap_v}, increment-ratio violations {ratio_v} (need 0)",
        time.perf_counter() - t0,
        10,
    )


def test_c05_criticality_and_hessian():
    t0 = time.perf_counter()
    K = 8
    zero = SphereFunction.zeros(2, K)
    first = max(abs(first_variation_F(zero, P, SphereFunction.harmonic(2, k, 1, K=K))) for k in range(K + 1))
    d2_y1 = abs(second_variation_F(zero, P, phi=SphereFunction.harmonic(2, 1, 1, K=K)))
    d2_c = abs(second_variation_F(zero, P, phi=SphereFunction.constant(2, 1.0, K=K)))
    F0 = ratio_F_ball(P)
    hess = 0.0
    for k in range(2, K + 1):
        q = second_variation_F(zero, P, phi=SphereFunction.harmonic(2, k, 1, K=K))
        hess = max(hess, abs(q / (F0 / sphere_area(2) * gap(P, k)[0]) - 1))
    ok = first < 1e-8 and d2_y1 < 1e-8 and d2_c < 1e-8 and hess < 1e-8
    report(
        "C05 criticality and Hessian",
        ok,
        f"max |dF(0)[Y_k]| {first:.2e}, |d2F(0)[Y_1]| {d2_y1:.2e}, |d2F(0)[1]| {d2_c:.2e} (tol 1e-8); "
        f"Hessian max rel err {hess:.2e} (tol 1e-8)",
        time.perf_counter() - t0,
        10,
    )


def test_c06_finite_difference_consistency():
    t0 = time.perf_counter()
    F0 = ratio_F_ball(P)
    worst = 0.0
    for i in range(20):
        u = admissible_sample(2, 8, P.t, 0.05, sample_rng(6, i))
        fd = richardson_second(lambda h: ratio_F(u * h, P), 1.0, F0)
        worst = max(worst, abs(fd / second_variation_F_at_zero(u, P) - 1))
    report("C06 finite-difference consistency", worst < 1e-3, f"max rel err {worst:.2e} (tol 1e-3)", time.perf_counter() - t0, 600)


def test_c07_local_stability(stability):
    res, elapsed = stability
    s = res.summary
    ok = res.checks["deficit_positive"] and res.checks["coercivity_floor"] and res.checks["quadrature_ok"]
    report(
        "C07 local stability",
        ok,
        f"positivity violations {s['positivity_violations']}, floor violations {s['floor_violations']}/50; "
        f"min deficit/||u||_H^2 {s['deficit_over_h_norm']['min']:.4e} vs c_spectral/2 {s['kappa']:.4e}",
        elapsed,
        1800,
    )


def test_c08_continuity_along_rays():
    t0 = time.perf_counter()
    res = continuity_experiment(P)
    c1 = [r["c1_norm"] for r in res.rows]
    report(
        "C08 continuity along rays",
        res.ok and len(res.rows) == 30,
        f"slope {res.slope:+.3f} (need |slope| <= 0.3) over C1 norms [{min(c1):.1e}, {max(c1):.2f}], "
        f"max ratio {res.max_ratio:.3e}",
        time.perf_counter() - t0,
        1800,
    )


def test_c09_regraph():
    t0 = time.perf_counter()
    res_max = ratio_max = 0.0
    for i in range(20):
        rng = sample_rng(9, i)
        c1 = rng.uniform(0.005, 0.05)
        u = rescale_c1(random_direction(2, 8, 0.5, rng, low=0), c1)
        r = regraph(u)
        res_max = max(res_max, r.residual)
        ratio_max = max(ratio_max, c1_norm_estimate(r.v) / c1_norm_estimate(u))
    report(
        "C09 regraph",
        res_max < 1e-8 and ratio_max <= 5.0,
        f"max residual {res_max:.2e} (tol 1e-8), max C1 ratio {ratio_max:.3f} (need <= 5)",
        time.perf_counter() - t0,
        60,
    )


def test_c10_asymmetry_form(stability):
    res, _ = stability
    s = res.summary
    report(
        "C10 asymmetry form",
        res.checks["asymmetry_validated"],
        f"fitted c {s['fitted_asymmetry_c']:.4e} on {s['asymmetry_holdout']} holdout samples, "
        f"{s['asymmetry_violations']} violations on the rest",
    )
