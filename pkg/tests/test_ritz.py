import math

import numpy as np
import pytest
from scipy import integrate

from nlspec.discretize import kernel_form_multiplier
from nlspec.errors import UnsupportedDimension
from nlspec.operators import (IsotropicStable, LevyStable, PowerPotential,
                              VariableOrder, tail_mass)
from nlspec.ritz import (build_basis, difference_form_entry, form_matrix,
                         frequency_form_entry, potential_entry, ritz_scaling_check,
                         ritz_values)


@pytest.fixture(scope="module")
def basis_d1():
    return build_basis(8, 1, 2.0, 1.0)


class TestBuildBasis:
    def test_first_knots(self, basis_d1):
        assert basis_d1.knots[0] == 1.0
        assert basis_d1.knots[1] == pytest.approx(2.0 ** (1.0 / 3.0))

    def test_knots_increasing(self):
        b = build_basis(50, 1, 3.0, 0.7)
        assert np.all(np.diff(b.knots) > 0)

    def test_spacing_band(self):
        # (xi(k+1) - xi(k)) * k^{theta/(theta+alpha)} bounded above and below
        b = build_basis(10000, 1, 2.0, 1.0)
        k = np.arange(1, b.n + 1)
        ratio = np.diff(b.knots) * k ** (2.0 / 3.0)
        assert ratio.max() / ratio.min() < 4.0

    def test_norms_match_quadrature(self, basis_d1):
        for kv in basis_d1.indices():
            q, _ = integrate.quad(lambda s: basis_d1.tent(kv[0], s) ** 2,
                                  *basis_d1.axis_interval(kv[0]))
            assert basis_d1.norm_sq(kv) == pytest.approx(q, rel=1e-12)

    def test_2d_norms_product(self):
        b = build_basis(3, 2, 2.0, 1.0)
        for kv in b.indices():
            per_axis = 1.0
            for k in kv:
                a, bb = b.axis_interval(k)
                per_axis *= (bb - a) ** 3 / 12.0
            assert b.norm_sq(kv) == pytest.approx(per_axis)

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            build_basis(0, 1, 2.0, 1.0)
        with pytest.raises(UnsupportedDimension):
            build_basis(4, 3, 2.0, 1.0)
        with pytest.raises(ValueError):
            build_basis(4, 1, 2.0, 2.5)


class TestTentTransform:
    def test_matches_numeric_transform(self, basis_d1):
        # closed form pinned against direct quadrature at 20 frequencies
        k = 3
        a, b = basis_d1.axis_interval(k)
        for xi in np.linspace(0.3, 40.0, 20):
            re, _ = integrate.quad(lambda s: basis_d1.tent(k, s) * math.cos(xi * s),
                                   a, b, limit=200)
            im, _ = integrate.quad(lambda s: -basis_d1.tent(k, s) * math.sin(xi * s),
                                   a, b, limit=200)
            got = basis_d1.tent_transform(k, xi)
            assert got.real == pytest.approx(re, abs=1e-10)
            assert got.imag == pytest.approx(im, abs=1e-10)

    def test_zero_frequency_is_area(self, basis_d1):
        k = 2
        a, b = basis_d1.axis_interval(k)
        area = (0.5 * (b - a)) ** 2
        assert basis_d1.tent_transform(k, 0.0) == pytest.approx(area)


class TestFormMatrix:
    def test_symmetric(self, basis_d1):
        A = form_matrix(basis_d1, IsotropicStable(1.0), PowerPotential(1.0, 2.0))
        assert np.abs(A - A.T).max() < 1e-10

    def test_disjoint_supports_orthogonal(self, basis_d1):
        for k in range(1, 5):
            for l in range(k + 1, 6):
                q, _ = integrate.quad(
                    lambda s: basis_d1.tent(k, s) * basis_d1.tent(l, s),
                    basis_d1.knots[0], basis_d1.knots[-1], limit=200)
                assert abs(q) < 1e-14

    def test_potential_part_scaling(self):
        # int u_k^2 V / (I_k xi(n+1)^theta) stays bounded over the basis
        b = build_basis(32, 1, 2.0, 1.0)
        V = PowerPotential(1.0, 2.0)
        cap = b.knots[-1] ** 2.0
        ratios = [potential_entry(b, kv, V) / (b.norm_sq(kv) * cap)
                  for kv in b.indices()]
        assert max(ratios) < 2.0

    def test_diagonal_kinetic_scaling(self):
        # A_kk / (I_k n^{theta alpha/(theta+alpha)}) uniformly bounded
        mult = kernel_form_multiplier(1, 1.0)
        worst = 0.0
        for n in (8, 16, 32):
            b = build_basis(n, 1, 2.0, 1.0)
            for kv in b.indices():
                e = frequency_form_entry(b, kv, kv, mult)
                worst = max(worst, e / (b.norm_sq(kv) * n ** (2.0 / 3.0)))
        assert worst < 60.0

    def test_offdiagonal_locality_bound(self):
        b = build_basis(12, 1, 2.0, 1.0)
        J = LevyStable(1, 1.0, math.inf)
        for k, l in [(2, 5), (3, 9), (1, 12)]:
            gap = b.knots[l - 1] - b.knots[k]
            entry = difference_form_entry(b, (k,), (l,), J)
            cap = 4.0 * tail_mass(J, gap) * math.sqrt(
                b.norm_sq((k,)) * b.norm_sq((l,)))
            assert abs(entry) <= cap

    def test_routes_agree_after_truncation_allowance(self, basis_d1):
        mult = kernel_form_multiplier(1, 1.0)
        J = LevyStable(1, 1.0, 8.0)
        Jfull = LevyStable(1, 1.0, math.inf)
        kv = (2,)
        freq = frequency_form_entry(basis_d1, kv, kv, mult, tol=1e-10)
        diff = difference_form_entry(basis_d1, kv, kv, J)
        allowance = 2.0 * basis_d1.norm_sq(kv) * tail_mass(Jfull, 8.0)
        assert abs(freq - (diff + allowance)) <= 1e-4 * freq

    def test_variable_order_route_symmetric_positive(self):
        b = build_basis(5, 1, 2.0, 1.0)
        J = VariableOrder(1, 0.5, 1.0, math.e, 1.0)
        A = form_matrix(b, J, PowerPotential(1.0, 2.0))
        assert np.abs(A - A.T).max() == 0.0
        assert np.all(np.diag(A) > 0)


class TestRitzValues:
    def test_single_function_rayleigh_quotient(self):
        b = build_basis(1, 1, 2.0, 1.0)
        A = form_matrix(b, IsotropicStable(1.0), PowerPotential(1.0, 2.0))
        I = np.array([b.norm_sq(kv) for kv in b.indices()])
        mu = ritz_values(A, I)
        assert mu.eigenvalues[0] == pytest.approx(A[0, 0] / I[0])

    def test_sorted_ascending(self, basis_d1):
        A = form_matrix(basis_d1, IsotropicStable(1.0), PowerPotential(1.0, 2.0))
        I = np.array([basis_d1.norm_sq(kv) for kv in basis_d1.indices()])
        mu = ritz_values(A, I)
        assert np.all(np.diff(mu.eigenvalues) >= 0)
        assert mu.solver == "ritz"

    def test_rejects_bad_norms(self):
        with pytest.raises(ValueError):
            ritz_values(np.eye(2), np.array([1.0, 0.0]))

    def test_2d_form_has_symmetry_pairs(self):
        b = build_basis(3, 2, 2.0, 1.0)
        A = form_matrix(b, IsotropicStable(1.0), PowerPotential(1.0, 2.0))
        I = np.array([b.norm_sq(kv) for kv in b.indices()])
        mu = ritz_values(A, I).eigenvalues
        # swapping axes is a symmetry, so off-axis index pairs come in twos
        assert mu[1] == pytest.approx(mu[2], rel=1e-10)


class TestScalingCheck:
    def test_synthetic_slope(self):
        ns = np.array([4, 8, 16, 32], dtype=float)
        slope = np.polyfit(np.log(ns), np.log(ns ** (2.0 / 3.0)), 1)[0]
        assert slope == pytest.approx(2.0 / 3.0, abs=1e-12)

    def test_rescaling_invariance(self):
        ns = np.array([4, 8, 16, 32], dtype=float)
        base = np.polyfit(np.log(ns), np.log(ns**0.5), 1)[0]
        scaled = np.polyfit(np.log(ns), np.log(7.0 * ns**0.5), 1)[0]
        assert base == pytest.approx(scaled, abs=1e-12)

    def test_d1_exponent(self):
        slope = ritz_scaling_check(2.0, 1.0, 1, [4, 8, 16, 24])
        assert slope == pytest.approx(2.0 / 3.0, abs=0.1)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            ritz_scaling_check(2.0, 1.0, 1, [4, 8])
        with pytest.raises(ValueError):
            ritz_scaling_check(2.0, 1.0, 1, [8, 4, 16, 32])
