"""Acceptance gate: eight end-to-end criteria, one summary line each.

Each test computes its criterion, registers the outcome with the shared
conftest recorder (so the terminal summary shows one pass/fail line per
criterion), and then asserts.  Tolerances are fixed, not tuned per run.
"""

import math

import numpy as np
import pytest
from scipy import integrate

from conftest import record_criterion
from nlspec.asymptotics import compare_bounds, fit_exponent
from nlspec.discretize import (BoxGrid, MultiplierOperator, assemble_stiffness,
                               kernel_form_multiplier, truncation_shift_bound)
from nlspec.eigensolve import dense_lowest, lanczos_lowest
from nlspec.operators import (IsotropicStable, LevyStable, LogCorrected,
                              PowerPotential, SimplePower, VariableOrder,
                              tail_mass)
from nlspec.rates import (curve_trace, lambda_integral, lambda_integral_from,
                          profile_from_parts, thm23_lower, weyl_exponent)
from nlspec.ritz import (build_basis, difference_form_entry, form_matrix,
                         frequency_form_entry, ritz_scaling_check, ritz_values)


@pytest.fixture(scope="module")
def spectrum_1d():
    # psi = |xi|, V = x^2 on [-40, 40) with 8192 points, lowest 200
    grid = BoxGrid(1, 40.0, 8192)
    op = MultiplierOperator.from_symbol(grid, IsotropicStable(1.0),
                                        PowerPotential(1.0, 2.0))
    return lanczos_lowest(lambda v: op.apply(v), grid.size, 200, tol=1e-7,
                          seed=0, max_iter=4000, check_every=100)


@pytest.fixture(scope="module")
def spectrum_1d_b():
    # psi = |xi|^1.5, V = x^4 on [-12, 12) with 2048 points, lowest 150
    grid = BoxGrid(1, 12.0, 2048)
    op = MultiplierOperator.from_symbol(grid, IsotropicStable(1.5),
                                        PowerPotential(1.0, 4.0))
    return lanczos_lowest(lambda v: op.apply(v), grid.size, 150, tol=1e-7,
                          seed=0, max_iter=2048, check_every=100)


@pytest.fixture(scope="module")
def spectrum_2d():
    # psi = |xi|, V = |x|^2 in two dimensions, 256 points per axis, lowest 60
    grid = BoxGrid(2, 12.0, 256)
    op = MultiplierOperator.from_symbol(grid, IsotropicStable(1.0),
                                        PowerPotential(1.0, 2.0))
    return lanczos_lowest(lambda v: op.apply(v.reshape(grid.shape)).ravel(),
                          grid.size, 60, tol=1e-6, seed=0, max_iter=1900,
                          check_every=100)


def test_criterion_1_exponent_recovery_1d(spectrum_1d):
    assert spectrum_1d.converged
    fit = fit_exponent(spectrum_1d, (30, 200))
    target = weyl_exponent(1, 2.0, 1.0)
    err = abs(fit.slope - target)
    ok = err <= 0.05
    record_criterion(1, ok, f"1-D slope {fit.slope:.4f} vs 2/3, err {err:.4f} <= 0.05")
    assert ok


def test_criterion_2_exponent_second_point(spectrum_1d_b):
    assert spectrum_1d_b.converged
    fit = fit_exponent(spectrum_1d_b, (30, 150))
    target = weyl_exponent(1, 4.0, 1.5)
    err = abs(fit.slope - target)
    ok = err <= 0.07
    record_criterion(2, ok, f"slope {fit.slope:.4f} vs 12/11, err {err:.4f} <= 0.07")
    assert ok


def test_criterion_3_exponent_recovery_2d(spectrum_2d):
    assert spectrum_2d.converged
    fit = fit_exponent(spectrum_2d, (15, 60))
    target = weyl_exponent(2, 2.0, 1.0)
    err = abs(fit.slope - target)
    ok = err <= 0.08
    record_criterion(3, ok, f"2-D slope {fit.slope:.4f} vs 1/3, err {err:.4f} <= 0.08")
    assert ok


def test_criterion_4_trace_curve_ordering(spectrum_1d, spectrum_1d_b, spectrum_2d):
    configs = [
        (spectrum_1d, IsotropicStable(1.0), PowerPotential(1.0, 2.0), 1),
        (spectrum_1d_b, IsotropicStable(1.5), PowerPotential(1.0, 4.0), 1),
        (spectrum_2d, IsotropicStable(1.0), PowerPotential(1.0, 2.0), 2),
    ]
    total = 0
    for spec, sym, V, d in configs:
        total += len(compare_bounds(spec, [curve_trace(sym, V, d)]))
    ok = total == 0
    record_criterion(4, ok, f"heat-trace lower curve: {total} violations "
                            "across the three configurations")
    assert ok


def test_criterion_5_ritz_domination_and_scaling():
    basis = build_basis(16, 1, 2.0, 1.0)
    A = form_matrix(basis, IsotropicStable(1.0), PowerPotential(1.0, 2.0))
    I = np.array([basis.norm_sq(kv) for kv in basis.indices()])
    mu = ritz_values(A, I).eigenvalues
    grid = BoxGrid(1, 30.0, 4096)
    op = MultiplierOperator.from_symbol(grid, IsotropicStable(1.0),
                                        PowerPotential(1.0, 2.0))
    ref = lanczos_lowest(lambda v: op.apply(v), grid.size, 12,
                         tol=1e-10, seed=0).eigenvalues
    dominated = bool(np.all(mu[:10] >= ref[:10] * 0.99))
    slope = ritz_scaling_check(2.0, 1.0, 1, [4, 8, 16, 32])
    slope_ok = abs(slope - 2.0 / 3.0) <= 0.10
    ok = dominated and slope_ok
    record_criterion(5, ok, f"domination j<=10 {dominated} "
                            f"(min margin {(mu[:10] / ref[:10]).min():.3f}), "
                            f"scaling slope {slope:.4f} vs 2/3 +- 0.10")
    assert ok


def test_criterion_6_oracle_equivalences():
    # (a) dense vs Lanczos lowest 10 at dimension 1024
    grid = BoxGrid(1, 15.0, 1024)
    op = MultiplierOperator.from_symbol(grid, IsotropicStable(1.0),
                                        PowerPotential(1.0, 2.0))
    M = np.zeros((1024, 1024))
    e = np.zeros(1024)
    for j in range(1024):
        e[j] = 1.0
        M[:, j] = op.apply(e)
        e[j] = 0.0
    gap_solver = np.abs(dense_lowest(M, 10).eigenvalues -
                        lanczos_lowest(lambda v: op.apply(v), 1024, 10,
                                       tol=1e-11, seed=0).eigenvalues).max()
    ok_a = gap_solver <= 1e-8

    # (b) closed-form tent norms vs quadrature
    basis = build_basis(8, 1, 2.0, 1.0)
    rel_norm = 0.0
    for kv in basis.indices():
        q, _ = integrate.quad(lambda s: basis.tent(kv[0], s) ** 2,
                              *basis.axis_interval(kv[0]))
        rel_norm = max(rel_norm, abs(basis.norm_sq(kv) - q) / q)
    ok_b = rel_norm <= 1e-12

    # (c) frequency route vs difference route on one tent, after adding
    # back the exact energy of the truncated jump range
    kv = (2,)
    freq = frequency_form_entry(basis, kv, kv, kernel_form_multiplier(1, 1.0),
                                tol=1e-10)
    diff = difference_form_entry(basis, kv, kv, LevyStable(1, 1.0, 8.0))
    allowance = 2.0 * basis.norm_sq(kv) * tail_mass(LevyStable(1, 1.0, math.inf), 8.0)
    rel_route = abs(freq - (diff + allowance)) / freq
    ok_c = rel_route <= 1e-4

    # (d) synthetic rate integral against the closed form t^-q / q
    rel_lam = max(abs(lambda_integral_from(lambda r: r ** -q, 1.0) - 1.0 / q) * q
                  for q in (0.25, 0.5, 1.0))
    ok_d = rel_lam <= 1e-6

    ok = ok_a and ok_b and ok_c and ok_d
    record_criterion(6, ok, f"solver gap {gap_solver:.1e} <= 1e-8, "
                            f"norms {rel_norm:.1e} <= 1e-12, "
                            f"routes {rel_route:.1e} <= 1e-4, "
                            f"rate integral {rel_lam:.1e} <= 1e-6")
    assert ok


def test_criterion_7_rate_pipeline_consistency():
    # constant order: the lower-bound curve must grow with the same exponent
    profile = profile_from_parts(1.0, PowerPotential(1.0, 2.0),
                                 SimplePower(0.26), d=1, kappa=0.5)
    ns = np.logspace(2, 6, 17)
    vals = np.array([thm23_lower(profile, 1.0, 1.0, float(n)) for n in ns])
    slope = float(np.polyfit(np.log(ns), np.log(vals), 1)[0])
    target = weyl_exponent(1, 2.0, 1.0)
    const_ok = abs(slope - target) <= 0.02

    # variable order: the rate integral must decay strictly faster than the
    # constant-order power alpha0 theta / (theta + alpha0) (sign test)
    kernel = VariableOrder(1, 0.5, 1.4, math.e, math.inf)
    profile_v = profile_from_parts(kernel, PowerPotential(1.0, 2.0),
                                   LogCorrected(1, 0, 4.0), d=1, kappa=1.0)
    ts = np.logspace(2, 6, 13)
    lams = np.array([lambda_integral(profile_v, float(t)) for t in ts])
    slope_v = float(np.polyfit(np.log(ts), np.log(lams), 1)[0])
    q0 = weyl_exponent(1, 2.0, 0.5)
    sign_ok = -slope_v > q0

    ok = const_ok and sign_ok
    record_criterion(7, ok, f"constant-order slope {slope:.4f} vs {target:.4f} "
                            f"+- 0.02; corrected decay {-slope_v:.4f} > {q0:.4f}")
    assert ok


def test_criterion_8_truncation_shift():
    V = PowerPotential(1.0, 2.0)
    full = LevyStable(1, 1.0, math.inf)
    bound = truncation_shift_bound(full, 8.0)

    grid_f = BoxGrid(1, 20.0, 4096)
    op = MultiplierOperator.from_radial_multiplier(
        grid_f, kernel_form_multiplier(1, 1.0), V)
    lam_full = lanczos_lowest(lambda v: op.apply(v), grid_f.size, 10,
                              tol=1e-8, seed=0).eigenvalues

    grid_s = BoxGrid(1, 20.0, 2048)
    S = assemble_stiffness(grid_s, LevyStable(1, 1.0, 8.0), V)
    lam_trunc = dense_lowest(S.operator_matrix().toarray(), 10).eigenvalues

    shift = float(np.abs(lam_full - lam_trunc).max())
    ok = shift <= bound
    record_criterion(8, ok, f"max shift {shift:.4f} <= bound {bound:.4f} "
                            "for truncation range 8")
    assert ok
