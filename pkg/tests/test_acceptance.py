"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line with the measured
quantities, then asserts. Run with ``pytest -v tests/test_acceptance.py``.
"""

import math
import time
from fractions import Fraction
from math import sqrt

import numpy as np
import pytest
import scipy.linalg
import scipy.sparse as sp

from linimp.auxvars import build_aux, consistency_defect, gamma_update
from linimp.bench import ExperimentConfig, convergence_study, fit_slope, resonant_steps, run_one
from linimp.fields import Field, FourierGrid, Grid1D, dft_direct, fft, fourier_operator, fv_laplacian, star_mesh
from linimp.integrate import LIMethod, StepperState, consistency_residuals, method_from_spec, run
from linimp.problems import ProblemSpec, nls_soliton, nls_star, nonlocal_cubic
from linimp.solvers import BandedMatrixC, banded_lu_solve, bicgstab
from linimp.stability import classify, matrix_eigenvalues, stability_function
from linimp.tableau import REGISTRY_NODES, collocation_tableau, registry, registry_names


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return emit


# closed-form tableaux, typed independently of the library registry
def _printed_tableaux():
    r3, r7 = sqrt(3), sqrt(7)
    km2, kp2 = (7 - r7) ** 2, (7 + r7) ** 2
    F = Fraction
    return {
        "gauss2": (
            [0.5 - r3 / 6, 0.5 + r3 / 6],
            [[1 / 4, 1 / 4 - r3 / 6], [1 / 4 + r3 / 6, 1 / 4]],
            [1 / 2, 1 / 2],
        ),
        "trapezoid2": ([0, 1], [[0, 0], [1 / 2, 1 / 2]], [1 / 2, 1 / 2]),
        "nonAstable2": ([F(1, 4), F(1, 3)], [[5 / 8, -3 / 8], [2 / 3, -1 / 3]], [-2, 3]),
        "lobatto4uniform": (
            [F(0), F(1, 3), F(2, 3), F(1)],
            [[0, 0, 0, 0], [1 / 8, 19 / 72, -5 / 72, 1 / 72], [1 / 9, 4 / 9, 1 / 9, 0], [1 / 8, 3 / 8, 3 / 8, 1 / 8]],
            [1 / 8, 3 / 8, 3 / 8, 1 / 8],
        ),
        "fiveStageNotASI": (
            [0.25, 0.5 - r7 / 14, 0.5, 0.5 + r7 / 14, 0.75],
            [
                [3259 / 1440, -1421 / 720 - 21 * r7 / 64, 163 / 120, -1421 / 720 + 21 * r7 / 64, 829 / 1440],
                [km2 * (281 * r7 + 1120) / 15435, -343 / 180 - 107 * r7 / 315, km2 * (106 * r7 + 455) / 10290,
                 -km2 * (97 * r7 + 770) / 17640, km2 * (71 * r7 + 280) / 15435],
                [203 / 90, -343 / 180 - 7 * r7 / 24, 22 / 15, -343 / 180 + 7 * r7 / 24, 53 / 90],
                [-kp2 * (281 * r7 - 1120) / 15435, kp2 * (97 * r7 - 770) / 17640, -kp2 * (106 * r7 - 455) / 10290,
                 -343 / 180 + 107 * r7 / 315, -kp2 * (71 * r7 - 280) / 15435],
                [363 / 160, -147 / 80 - 21 * r7 / 64, 63 / 40, -147 / 80 + 21 * r7 / 64, 93 / 160],
            ],
            [128 / 45, -343 / 90, 44 / 15, -343 / 90, 128 / 45],
        ),
        "fiveStageInotA": (
            [F(1, 4), F(1, 3), F(1, 2), F(2, 3), F(3, 4)],
            [
                [4453 / 2400, -4347 / 1600, 221 / 120, -1917 / 1600, 1123 / 2400],
                [3824 / 2025, -133 / 50, 742 / 405, -179 / 150, 944 / 2025],
                [281 / 150, -513 / 200, 29 / 15, -243 / 200, 71 / 150],
                [3808 / 2025, -194 / 75, 824 / 405, -28 / 25, 928 / 2025],
                [1503 / 800, -4131 / 1600, 81 / 40, -1701 / 1600, 393 / 800],
            ],
            [176 / 75, -189 / 50, 58 / 15, -189 / 50, 176 / 75],
        ),
    }


def test_criterion_01_tableau_oracles(report):
    start = time.perf_counter()
    worst = 0.0
    for name, (c, A, b) in _printed_tableaux().items():
        t = collocation_tableau(c)
        worst = max(worst, np.max(np.abs(t.A - np.array(A, float))), np.max(np.abs(t.b - np.array(b, float))))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 1.0
    report(1, ok, f"max entry deviation {worst:.2e}, {elapsed:.3f} s")
    assert ok


def test_criterion_02_stability_matrix(report):
    start = time.perf_counter()
    f = {name: classify(registry(name)).flags() for name in registry_names()}
    elapsed = time.perf_counter() - start
    checks = {
        "gauss2 A_hat": f["gauss2"]["A_hat"],
        "trapezoid2 A_hat": f["trapezoid2"]["A_hat"],
        "nonAstable2 not A, not I": not f["nonAstable2"]["A"] and not f["nonAstable2"]["I"],
        "lobatto4uniform A_hat": f["lobatto4uniform"]["A_hat"],
        "fiveStageNotASI A, AS, not ASI": f["fiveStageNotASI"]["A"] and f["fiveStageNotASI"]["AS"]
        and not f["fiveStageNotASI"]["ASI"],
        "fiveStageInotA I, not A": f["fiveStageInotA"]["I"] and not f["fiveStageInotA"]["A"],
    }
    bad = [k for k, v in checks.items() if not v]
    ok = not bad and elapsed < 1.0
    report(2, ok, f"{len(checks) - len(bad)}/{len(checks)} classifications as expected, {elapsed:.3f} s {bad or ''}")
    assert ok


def _draw_aux_case(rng, s):
    # stratified nodes, one per subinterval of [0, 1]
    c = (np.arange(s) + rng.uniform(0.15, 0.85, s)) / s
    while True:
        eig = 0.9 * np.sqrt(rng.uniform(0, 1, s)) * np.exp(2j * np.pi * rng.uniform(0, 1, s))
        gaps = np.abs(eig[:, None] - eig[None, :]) + 10 * np.eye(s)
        if gaps.min() >= 0.1:
            return c, eig


def test_criterion_03_aux_round_trip(report):
    rng = np.random.default_rng(7)
    worst_eig = worst_defect = worst_mono = 0.0
    for draw in range(50):
        s = 2 + draw % 4
        c, eig = _draw_aux_case(rng, s)
        a = build_aux(c, eig)
        got = list(matrix_eigenvalues(a.D))
        for z in eig:
            k = int(np.argmin([abs(z - w) for w in got]))
            worst_eig = max(worst_eig, abs(z - got.pop(k)))
        worst_defect = max(worst_defect, consistency_defect(a))
        for k in range(s):
            out = gamma_update(a, ((c - 1) ** k)[:, None], np.array([0.0**k]))
            worst_mono = max(worst_mono, np.max(np.abs(out[:, 0] - c**k)))
    ok = worst_eig <= 1e-9 and worst_defect <= 1e-10 and worst_mono <= 1e-10
    report(3, ok, f"spectrum error {worst_eig:.2e}, consistency defect {worst_defect:.2e}, monomial error {worst_mono:.2e}")
    assert ok


def test_criterion_04_consistency_residual_orders(report):
    start = time.perf_counter()
    p = nls_soliton(q=4.0, alpha=1.0, c=0.5, grid=Grid1D(-50.0, 50.0, 2**12))
    m = LIMethod.from_registry("trapezoid2", [0.5, -0.5])
    hs = [2.0**-k for k in range(4, 10)]
    R = np.array([consistency_residuals(m, p, h, 0.5) for h in hs])
    slopes = [fit_slope(hs, R[:, j]).slope for j in range(3)]
    elapsed = time.perf_counter() - start
    ok = slopes[0] >= 1.8 and slopes[1] >= 2.8 and slopes[2] >= 2.8 and elapsed < 30
    report(4, ok, f"slopes R1 {slopes[0]:.2f}, R2 {slopes[1]:.2f}, R3 {slopes[2]:.2f}, {elapsed:.1f} s")
    assert ok


def test_criterion_05_order_two(report):
    start = time.perf_counter()
    cfg = ExperimentConfig(
        "soliton1d", ["li:trapezoid2:eig=0.5,-0.5"], [1 / 2, 1 / 4, 1 / 8, 1 / 16], 1.0,
        problem_params=dict(q=4, alpha=1, c=0, left=-50, right=50, M=2**12),
    )
    records, slopes = convergence_study(cfg)
    slope = slopes[cfg.methods[0]].slope
    elapsed = time.perf_counter() - start
    ok = 1.8 <= slope <= 2.3 and elapsed < 120
    errs = ", ".join(f"{r.final_error:.2e}" for r in records)
    report(5, ok, f"final-error slope {slope:.2f} (errors {errs}), {elapsed:.1f} s")
    assert ok


def test_criterion_06_order_four(report):
    start = time.perf_counter()
    cfg = ExperimentConfig(
        "soliton1d", ["li:lobatto4uniform:eig=i/2,-i/2,i/4,-i/4"], [1 / 4, 1 / 5, 1 / 6, 1 / 7, 1 / 8, 1 / 10], 1.0,
        problem_params=dict(q=8, alpha=4, c=0.5, left=-62.5, right=62.5, M=2**14),
        norm="max",
    )
    records, slopes = convergence_study(cfg)
    slope = slopes[cfg.methods[0]].slope
    elapsed = time.perf_counter() - start
    ok = 3.6 <= slope <= 4.5 and elapsed < 600
    report(6, ok, f"max-over-steps slope {slope:.2f}, {elapsed:.1f} s")
    assert ok


def test_criterion_07_order_five_and_resonance(report):
    start = time.perf_counter()
    method = "li:fiveStageNotASI:eig=" + ",".join(f"{k}/6" for k in range(1, 6))
    p = nonlocal_cubic(30)
    hs = [2.0**-k for k in range(3, 9)]
    errs = [run_one(method, p, h, 1.0).final_error for h in hs]
    slope = fit_slope(hs, errs).slope
    alpha = 3 * sqrt(7) / 56
    ks = list(range(8, 29))
    failed = 0
    for k, h in zip(ks, resonant_steps(alpha, ks)):
        rec = run_one(method, p, h, 1.0)
        if rec.status != "completed" or math.log10(rec.final_error) > 3:
            failed += 1
    elapsed = time.perf_counter() - start
    ok = 4.6 <= slope <= 5.3 and failed >= 15 and elapsed < 60
    report(7, ok, f"regular slope {slope:.2f}, resonant failures {failed}/{len(ks)}, {elapsed:.1f} s")
    assert ok


def test_criterion_08_non_a_stable_failure(report):
    start = time.perf_counter()
    p = nls_soliton(q=4.0, alpha=1.0, c=0.0, grid=Grid1D(-50.0, 50.0, 2**12))
    hs = [1.25 * 2.0**-k for k in range(5)]
    recs = [run_one("li:nonAstable2:eig=0.5,-0.5", p, h, 5.0) for h in hs]
    errs = np.array([r.final_error for r in recs])
    norm0 = p.norm(p.u0)
    finite = np.isfinite(errs)
    trend = fit_slope(hs, errs).slope if finite.sum() >= 2 else -math.inf
    grows = errs[-1] > errs[0] and trend < 0
    ok = grows and errs[-1] > 10 * norm0 and time.perf_counter() - start < 120
    logs = ", ".join("inf" if not np.isfinite(e) else f"{np.log10(e):.2f}" for e in errs)
    report(8, ok, f"log10 errors {logs} (h decreasing), initial norm {norm0:.3f}, {time.perf_counter() - start:.1f} s")
    assert ok


def test_criterion_09_mass_conservation(report):
    start = time.perf_counter()
    p = nls_soliton(q=4.0, alpha=1.0, c=0.0, grid=Grid1D(-50.0, 50.0, 2**12))
    drift = {}
    for name in ("gauss2", "trapezoid2"):
        res = run(method_from_spec(f"li:{name}:eig=0.5,-0.5"), p, 0.05, 50.0, telemetry=True)
        assert res.steps == 1000
        mass = np.array([r.mass for r in res.telemetry])
        drift[name] = np.max(np.abs(mass - mass[0])) / mass[0]
    elapsed = time.perf_counter() - start
    ok = drift["gauss2"] <= 1e-10 and drift["trapezoid2"] > 1e-8 and elapsed < 60
    report(9, ok, f"relative mass drift gauss2 {drift['gauss2']:.2e}, trapezoid2 {drift['trapezoid2']:.2e}, {elapsed:.1f} s")
    assert ok


def test_criterion_10_star_domain(report):
    start = time.perf_counter()
    gauss, trap = "li:gauss2:eig=0.5,-0.5", "li:trapezoid2:eig=0.5,-0.5"
    cfg = ExperimentConfig(
        "star2d", ["cn", gauss, "strang"], [1.25e-4, 6.25e-5, 3.125e-5, 1.5625e-5], 0.01,
        problem_params=dict(q=1, R=1, refine=3),
    )
    p = nls_star(q=1.0, R=1.0, refinement=3)
    assert p.size == 768
    _, slopes = convergence_study(cfg, p)

    def drifts(method):
        res = run(method_from_spec(method), p, 1.25e-4, 0.01, telemetry=True)
        m = np.array([r.mass for r in res.telemetry])
        e = np.array([r.energy for r in res.telemetry])
        return np.max(np.abs(m - m[0])) / m[0], np.max(np.abs(e - e[0])) / abs(e[0])

    mass_gauss, _ = drifts(gauss)
    mass_trap, _ = drifts(trap)
    _, energy_cn = drifts("cn")
    elapsed = time.perf_counter() - start
    ok = (
        slopes["cn"].slope >= 1.8
        and slopes[gauss].slope >= 1.8
        and mass_gauss <= 1e-9
        and mass_trap > 1e-12
        and energy_cn <= 1e-9
        and elapsed < 900
    )
    report(
        10, ok,
        f"slopes CN {slopes['cn'].slope:.2f}, LI-gauss2 {slopes[gauss].slope:.2f}, Strang {slopes['strang'].slope:.2f}; "
        f"mass drift gauss2 {mass_gauss:.1e}, trapezoid2 {mass_trap:.1e}; CN energy drift {energy_cn:.1e}; {elapsed:.0f} s",
    )
    assert ok


def test_criterion_11_linear_regime(report):
    g = FourierGrid(16, k_min=-8)
    L = fourier_operator(g, lambda k: -1j * k**2, factor=1j)
    p = ProblemSpec("linear", L, lambda u: np.zeros_like(u), np.exp(-np.abs(g.modes)).astype(complex))
    h = 0.1
    worst = {}
    for name in registry_names():
        t = registry(name)
        eig = [k / (t.s + 1) for k in range(1, t.s + 1)]
        m = LIMethod(t, build_aux(REGISTRY_NODES[name], eig), name)
        st = StepperState(0.0, Field(p.u0, g), np.zeros((t.s, g.K), complex))
        out = m.step(p, h, st).u.values
        worst[name] = float(np.max(np.abs(out - stability_function(t)(h * L.symbol) * p.u0)))
    ok = max(worst.values()) <= 1e-12
    report(11, ok, "max mode error " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
    assert ok


def test_criterion_12_numerical_kernels(report):
    rng = np.random.default_rng(12)
    x = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    fft_err = float(np.max(np.abs(fft(x) - dft_direct(x))))

    lu_err = 0.0
    done = 0
    while done < 200:
        n = int(rng.integers(1, 65))
        kl, ku = int(rng.integers(0, min(n, 6))), int(rng.integers(0, min(n, 6)))
        M = np.zeros((n, n), dtype=complex)
        for d in range(-kl, ku + 1):
            i = np.arange(max(0, -d), min(n, n - d))
            M[i, i + d] = rng.standard_normal(i.size) + 1j * rng.standard_normal(i.size)
        if np.linalg.cond(M) > 1e4:
            continue  # comparisons are only meaningful for well-conditioned systems
        b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        ours = banded_lu_solve(BandedMatrixC.from_dense(M, kl, ku), b)
        ref = scipy.linalg.lu_solve(scipy.linalg.lu_factor(M), b)
        lu_err = max(lu_err, np.linalg.norm(ours - ref) / np.linalg.norm(ref))
        done += 1

    mesh = star_mesh(1.0, 0)
    L = fv_laplacian(mesh, 1j)
    A = (sp.identity(12, format="csr") - 0.05 * L.matrix).tocsr()
    rhs = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    inv_d = 1 / A.diagonal()
    xs = bicgstab(lambda v: A @ v, lambda v: inv_d * v, rhs, tol=1e-12)
    dense = np.linalg.solve(A.toarray(), rhs)
    krylov_err = np.linalg.norm(xs - dense) / np.linalg.norm(dense)

    ok = fft_err <= 1e-12 and lu_err <= 1e-10 and krylov_err <= 1e-10
    report(12, ok, f"FFT vs DFT {fft_err:.1e}, banded vs dense LU {lu_err:.1e}, BiCGStab vs dense {krylov_err:.1e}")
    assert ok
