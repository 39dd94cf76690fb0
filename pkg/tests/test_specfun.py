import math

import numpy as np
import pytest

from coulscat import specfun


def weierstrass_log_gamma(z: complex, terms: int = 1_000_000) -> complex:
    """Independent product-formula oracle for log Gamma.

    log Gamma(z) = -ln z - gamma z + sum_k [z/k - ln(1 + z/k)]; the truncated
    tail is corrected by its leading term z^2/(2K), leaving O(|z|^3/K^2).
    """
    k = np.arange(1, terms + 1, dtype=float)
    series = np.sum(z / k - np.log(1.0 + z / k))
    tail = z * z / (2.0 * terms)
    return -np.log(z) - np.euler_gamma * z + series + tail


class TestLogGamma:
    def test_trivial_values(self):
        assert specfun.log_gamma_complex(1.0) == pytest.approx(0.0, abs=1e-14)
        assert specfun.log_gamma_complex(5.0).real == pytest.approx(math.log(24.0), rel=1e-14)

    def test_against_product_formula_oracle(self):
        for z in (1.0 + 1.0j, 2.5 + 0.5j, 1.0 + 10.0j):
            oracle = weierstrass_log_gamma(z)
            assert specfun.log_gamma_complex(z) == pytest.approx(oracle, abs=1e-9)

    def test_pole_and_nan_rejection(self):
        with pytest.raises(ValueError):
            specfun.log_gamma_complex(0.0)
        with pytest.raises(ValueError):
            specfun.log_gamma_complex(-3.0)
        with pytest.raises(ValueError):
            specfun.log_gamma_complex(complex(float("nan"), 0.0))


class TestCoulombSigma:
    def test_free_case_is_zero(self):
        for l in (0, 7, 4000):
            assert specfun.coulomb_sigma_exact(l, 0.0) == 0.0

    @pytest.mark.parametrize("eta", [1.0, -1.0, 10.0, -10.0, 800.0, -800.0])
    def test_recurrence_residual(self, eta):
        s = specfun.coulomb_sigma_table(6000, eta)
        steps = np.arctan2(eta, np.arange(1.0, 6001.0))
        assert np.max(np.abs(np.diff(s) - steps)) <= 1e-12

    def test_scalar_matches_table_start(self):
        for eta in (1.0, 800.0):
            s0 = specfun.coulomb_sigma_exact(0, eta)
            assert s0 == specfun.coulomb_sigma_table(0, eta)[0]
            # scalar recurrence over a modest lattice
            for l in (1, 2, 50):
                lhs = specfun.coulomb_sigma_exact(l, eta) - specfun.coulomb_sigma_exact(l - 1, eta)
                assert lhs == pytest.approx(math.atan2(eta, l), abs=1e-12)

    def test_sigma0_against_product_formula(self):
        oracle = weierstrass_log_gamma(1.0 + 1.0j).imag
        assert specfun.coulomb_sigma_exact(0, 1.0) == pytest.approx(oracle, abs=1e-9)

    @pytest.mark.parametrize("eta", [0.3, 5.0, 800.0])
    def test_antisymmetry_in_eta(self, eta):
        s_plus = specfun.coulomb_sigma_table(200, eta)
        s_minus = specfun.coulomb_sigma_table(200, -eta)
        assert np.max(np.abs(s_plus + s_minus)) <= 1e-13


class TestAsymptoticSigma:
    def test_free_case(self):
        assert specfun.coulomb_sigma_asymptotic(3, 0.0) == 0.0

    def test_phase_factor_error_eta800_l0(self):
        exact = specfun.coulomb_sigma_exact(0, 800.0)
        asym = specfun.coulomb_sigma_asymptotic(0, 800.0)
        assert abs(np.exp(2j * asym) - np.exp(2j * exact)) <= 2e-3

    def test_phase_factor_error_eta10_l1000(self):
        exact = specfun.coulomb_sigma_exact(1000, 10.0)
        asym = specfun.coulomb_sigma_asymptotic(1000, 10.0)
        assert abs(np.exp(2j * asym) - np.exp(2j * exact)) <= 1e-3

    def test_error_decreases_along_rays(self):
        # fixed eta, growing l: phase-factor error shrinks monotonically
        for eta in (2.0, 50.0):
            errs = []
            for l in (0, 10, 100, 1000, 5000):
                e = specfun.coulomb_sigma_exact(l, eta)
                a = specfun.coulomb_sigma_asymptotic(l, eta)
                errs.append(abs(np.exp(2j * a) - np.exp(2j * e)))
            assert all(b < a for a, b in zip(errs, errs[1:]))


class TestDsigmaDeta:
    def test_euler_gamma_at_origin(self):
        assert specfun.dsigma_deta(0, 0.0) == pytest.approx(-np.euler_gamma, rel=1e-12)

    @pytest.mark.parametrize("l", [0, 5, 100])
    @pytest.mark.parametrize("eta", [1.0, -1.0, 10.0, -10.0, 800.0, -800.0])
    def test_against_central_differences(self, l, eta):
        h = 1e-5
        fd = (specfun.coulomb_sigma_exact(l, eta + h)
              - specfun.coulomb_sigma_exact(l, eta - h)) / (2.0 * h)
        an = specfun.dsigma_deta(l, eta)
        assert abs(fd - an) / abs(an) <= 1e-6

    def test_large_l_limit(self):
        l, eta = 10_000, 7.0
        limit = 0.5 * math.log((l + 1.0) ** 2 + eta * eta)
        assert abs(specfun.dsigma_deta(l, eta) - limit) <= 1e-4


class TestLegendre:
    def test_forward_direction_all_ones(self):
        row = specfun.legendre_row(0.0, 500)
        assert np.all(row.values == 1.0)

    def test_backward_direction_alternating(self):
        row = specfun.legendre_row(math.pi, 500)
        assert np.all(row.values == (-1.0) ** np.arange(501))

    def test_right_angle_values(self):
        row = specfun.legendre_row(math.pi / 2.0, 2)
        assert row.values[1] == pytest.approx(0.0, abs=1e-16)
        assert row.values[2] == pytest.approx(-0.5, rel=1e-14)

    def test_orthogonality_by_quadrature(self):
        # Gauss-Legendre nodes make the integral exact for degree <= 2n-1
        nodes, weights = np.polynomial.legendre.leggauss(64)
        thetas = np.arccos(nodes)
        rows = specfun.legendre_rows(thetas, 50)
        gram = (rows * weights[:, None]).T @ rows
        expected = np.diag(2.0 / (2.0 * np.arange(51) + 1.0))
        assert np.max(np.abs(gram - expected)) <= 1e-10

    @pytest.mark.parametrize("theta", [0.4, math.pi / 2, 2.9])
    def test_recurrence_residual_and_bound(self, theta):
        l_max = 6000
        row = specfun.legendre_rows(np.array([theta]), l_max)[0]
        x = math.cos(theta)
        l = np.arange(1.0, l_max)
        resid = (l + 1.0) * row[2:] - (2.0 * l + 1.0) * x * row[1:-1] + l * row[:-2]
        assert np.max(np.abs(resid)) <= 1e-12
        assert np.max(np.abs(row)) <= 1.0 + 1e-14


class TestWignerD00:
    def test_unity_at_zero(self):
        for l in (0, 17, 4000):
            assert specfun.wigner_d00_small_angle(l, 0.0) == 1.0

    def test_matches_legendre_l100(self):
        exact = specfun.legendre_row(0.01, 100).values[100]
        assert abs(specfun.wigner_d00_small_angle(100, 0.01) - exact) <= 1e-3

    def test_matches_legendre_l1000(self):
        exact = specfun.legendre_row(0.005, 1000).values[1000]
        assert abs(specfun.wigner_d00_small_angle(1000, 0.005) - exact) <= 1e-3

    def test_domain_guard(self):
        with pytest.raises(ValueError):
            specfun.wigner_d00_small_angle(10, 0.5)


class TestIIntegral:
    def test_closed_form_vs_quadrature_l0(self):
        closed = specfun.i_integral_closed_form(0, 1e-3)
        quadv = specfun.i_integral_quadrature(0, 1e-3)
        assert abs(quadv - closed) / closed <= 1e-5

    def test_suppressed_large_l_still_agrees(self):
        # l = 3/eps: both forms down by e^-9, relative agreement survives
        closed = specfun.i_integral_closed_form(3000, 1e-3)
        quadv = specfun.i_integral_quadrature(3000, 1e-3)
        assert closed / specfun.i_integral_closed_form(0, 1e-3) == pytest.approx(
            math.exp(-(1e-3) ** 2 * (3000.5 ** 2 - 0.25)), rel=1e-12)
        assert abs(quadv - closed) / closed <= 1e-3

    def test_eps_scaling_identity(self):
        for l in (0, 250, 1900):
            ratio = (specfun.i_integral_closed_form(l, 2e-3)
                     / specfun.i_integral_closed_form(l, 1e-3))
            expected = 4.0 * math.exp(-3.0 * (1e-3) ** 2 * (l + 0.5) ** 2)
            assert ratio == pytest.approx(expected, rel=1e-12)
