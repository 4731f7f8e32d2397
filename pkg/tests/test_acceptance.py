"""Acceptance criteria; each test prints one PASS/FAIL line at its stated tolerance."""

import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from etalab.cy import ChernData, CurvatureInputs, calabi_identity_residual, cy3_heat_coefficients
from etalab.degeneration import Family, GrowthKind, boundary_growth_fit, monodromy_around
from etalab.kronecker import default_tau_grid, fit_kronecker_exponents, kronecker_report
from etalab.modular import (
    covering_j_from_lambda,
    discriminant_modular,
    eta,
    j_invariant,
    lambda_function,
    theta_constants,
)
from etalab.torus import (
    Normalization,
    TauPoint,
    crossover_time,
    heat_trace_direct,
    heat_trace_poisson,
    torus_trace,
)
from etalab.zeta import (
    default_fit_grid,
    extract_heat_coefficients,
    regularized_determinant_epstein,
    regularized_determinant_mellin,
)

REPORT = []
GRID = default_tau_grid()


def verdict(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    REPORT.append(line)
    print(line)
    assert ok, line


def reduced_points(count, seed):
    """Deterministic points with |Re| <= 1/2, |tau| >= 1, Im <= 4."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        x, y = rng.uniform(-0.5, 0.5), rng.uniform(0.5, 4.0)
        if x * x + y * y >= 1.0:
            out.append(TauPoint(float(x), float(y)))
    return out


def test_criterion_1_two_oracle_determinants():
    taus = [TauPoint(0, 1), TauPoint(0, 2), TauPoint(1, 1), TauPoint(0.5, 1.5), TauPoint(0.3, 0.9)]
    start = time.perf_counter()
    worst = 0.0
    for tau in taus:
        mellin = regularized_determinant_mellin(tau).determinant
        epstein = regularized_determinant_epstein(tau).determinant
        worst = max(worst, abs(mellin - epstein) / abs(epstein))
    elapsed = time.perf_counter() - start
    verdict(1, worst < 1e-6 and elapsed < 10.0,
            f"Mellin vs Epstein max rel diff {worst:.2e} (< 1e-6), {elapsed:.2f} s (< 10 s)")


def test_criterion_2_kronecker_regression():
    start = time.perf_counter()
    fit = fit_kronecker_exponents(GRID)
    report = kronecker_report(fit)
    elapsed = time.perf_counter() - start
    ok = (len(GRID) == 20 and fit.integer_exponents and fit.rms_residual < 1e-8
          and elapsed < 30.0 and report["fitted_law"] and report["discrepancy"])
    verdict(2, ok, f"{report['fitted_law']}, rms {fit.rms_residual:.1e} (< 1e-8), "
                   f"{elapsed:.2f} s (< 30 s); discrepancy: {report['discrepancy']}")


def test_criterion_3_modular_identities():
    pts = reduced_points(50, 3)
    delta_err = max(abs(discriminant_modular(t) - (2 * math.pi) ** 12 * eta(t) ** 24)
                    / abs(discriminant_modular(t)) for t in pts)
    jacobi_err = 0.0
    for t in pts:
        t2, t3, t4 = theta_constants(t)
        jacobi_err = max(jacobi_err, abs(t3 ** 4 - t2 ** 4 - t4 ** 4) / abs(t3 ** 4))
    verdict(3, delta_err < 1e-9 and jacobi_err < 1e-12,
            f"Delta vs (2 pi)^12 eta^24 rel {delta_err:.1e} (< 1e-9) at 50 reduced points; "
            f"Jacobi rel {jacobi_err:.1e} (< 1e-12)")


def test_criterion_4_covering_consistency():
    cover_err = 0.0
    orbit_err = 0.0
    for tau in GRID:
        lam = lambda_function(tau)
        j = j_invariant(tau)
        cover_err = max(cover_err, abs(covering_j_from_lambda(lam) - j) / abs(j))
        base = covering_j_from_lambda(lam)
        for image in (1 - lam, 1 / lam, 1 / (1 - lam), lam / (lam - 1), (lam - 1) / lam):
            orbit_err = max(orbit_err, abs(covering_j_from_lambda(image) - base) / abs(base))
    verdict(4, cover_err < 1e-9 and orbit_err < 1e-10,
            f"j vs covering_j_from_lambda(lambda) rel {cover_err:.1e} (< 1e-9) on 20 points; "
            f"S3 orbit rel {orbit_err:.1e} (< 1e-10)")


def test_criterion_5_heat_coefficient_constancy():
    taus = reduced_points(10, 5)
    err_m1 = err_0 = 0.0
    for tau in taus:
        trace = torus_trace(tau, Normalization.UNIT_VOLUME)
        exp_ = extract_heat_coefficients(
            trace, 1, 1, default_fit_grid(tau, Normalization.UNIT_VOLUME))
        err_m1 = max(err_m1, abs(exp_.a(1) - 1 / (4 * math.pi)))
        err_0 = max(err_0, abs(exp_.a(0) + 1))
    rng = np.random.default_rng(7)
    middle = {cy3_heat_coefficients(ChernData(3, float(L), float(c)))["a_m2"]
              for L, c in zip(rng.uniform(1e-3, 1e3, 200), rng.uniform(-1e3, 1e3, 200))}
    middle.add(cy3_heat_coefficients(ChernData(3, 0.0, 0.0, allow_zero=True))["a_m2"])
    verdict(5, err_m1 < 1e-6 and err_0 < 1e-4 and middle == {0.0},
            f"a_m1 - 1/(4 pi) max {err_m1:.1e} (< 1e-6), a0 + 1 max {err_0:.1e} (< 1e-4) "
            f"over 10 unit-volume tori; cy3 a_m2 values {sorted(middle)}")


def test_criterion_6_threefold_formulas():
    a = cy3_heat_coefficients(ChernData(3, 5.0, 50.0))
    err = max(abs(a["a_m3"] - 5 / (4 * math.pi)), abs(a["a_m1"] + 50 / (720 * math.pi)))
    fixtures = [CurvatureInputs(0, r, 0, 0, r) for r in (0.0, 1.0, 7.0, 123.456, 1e6)]
    residuals = [calabi_identity_residual(f) for f in fixtures]
    verdict(6, err < 1e-12 and all(r == 0 for r in residuals) and all(f.ricci_flat for f in fixtures),
            f"quintic coefficient error {err:.1e} (< 1e-12); Calabi residuals {residuals}")


def test_criterion_7_boundary_growth():
    radii = np.geomspace(1e-8, 1e-4, 9)
    leg = boundary_growth_fit(Family.LEGENDRE_AT_0, radii)
    equi = boundary_growth_fit(Family.EQUIANHARMONIC, radii)
    m0 = monodromy_around(0)
    ok = (leg.kind is GrowthKind.LOGARITHMIC and abs(leg.constant / math.pi - 1) < 0.01
          and leg.fit_r2 > 0.999 and equi.kind is GrowthKind.POWER
          and abs(equi.exponent + 1 / 3) < 1e-3
          and m0.entries == ((1, 2), (0, 1)) and m0.residual < 1e-6)
    verdict(7, ok, f"Legendre {leg.kind.value} slope/pi {leg.constant / math.pi:.6f} "
                   f"r2 {leg.fit_r2:.8f}; Equianharmonic {equi.kind.value} exponent "
                   f"{equi.exponent:.6f}; M0 {m0.entries} residual {m0.residual:.1e}")


def test_criterion_8_psi_structure():
    psi1, psi2 = [], []
    for norm in Normalization:
        for tau in GRID:
            res = regularized_determinant_mellin(tau, norm)
            psi1.append(res.psi1)
            psi2.append(res.psi2)
    min_psi1 = min(psi1)
    verdict(8, all(p > 0 for p in psi2) and math.isfinite(min_psi1),
            f"min psi2 {min(psi2):.3e} (> 0) over {len(psi2)} points; min psi1 {min_psi1:.6g}")


def test_criterion_9_poisson_identity():
    worst = 0.0
    for norm in Normalization:
        for tau in GRID:
            tc = crossover_time(tau, norm)
            for t in np.geomspace(tc / 10, tc * 10, 9):
                d = heat_trace_direct(tau, norm, float(t), 1e-13)
                p = heat_trace_poisson(tau, norm, float(t), 1e-13)
                worst = max(worst, abs(d - p))
    verdict(9, worst < 1e-10,
            f"direct vs dual max abs diff {worst:.1e} (< 1e-10) over [t_c/10, 10 t_c] on grid tori")


def test_criterion_10_cli_determinism():
    script = Path(__file__).with_name("cli_sweep.py")
    runs = [subprocess.run([sys.executable, str(script)], capture_output=True, check=True).stdout
            for _ in range(2)]
    verdict(10, runs[0] == runs[1] and len(runs[0]) > 0,
            f"two CLI sweeps byte-identical ({len(runs[0])} bytes)")

