import math

import numpy as np
import pytest

from coulscat import (
    ALPHA_PARTICLE_MASS_MEV,
    FINE_STRUCTURE_ALPHA,
    NonConvergenceError,
    PhaseShiftModel,
    ScenarioFamily,
    build_scenario,
    build_scenario_from_eta,
    build_table,
    conservation_weight_sum,
    dcs,
    delta_max_at,
    delta_profile,
    midpoint_thetas,
    optical_ratio,
    optical_theorem_check_short_range,
    probability,
    probability_sphere_integral,
    rutherford_amplitude,
    rutherford_dcs,
    rutherford_probability,
    scattering_amplitude_f,
    shadow_angle,
    square_well_phase_shifts,
    total_cross_section,
)
from coulscat import observables, partialwave, specfun
from coulscat.acceptance import _sphere_profile_800, _table_for_eta
from coulscat.observables import DeltaProfile

EPS = 1e-3

GOLDEN_GAMMA_ETA10 = 0.5000000117559437  # regression pin, eps = 1e-3


class TestCrossSections:
    def test_prefactor_is_exact(self, table_eta10):
        sc = table_eta10.scenario
        p = probability(table_eta10, 0.8, 0.2)
        assert dcs(table_eta10, 0.8, 0.2) == p / (16.0 * sc.eps ** 4 * sc.p ** 2)

    def test_agreement_with_rutherford_at_right_angle(self, table_eta10):
        sc = table_eta10.scenario
        value = dcs(table_eta10, math.pi / 2.0, 0.0)
        ruth = rutherford_dcs(sc, math.pi / 2.0)
        assert abs(value / ruth - 1.0) <= 0.02

    def test_free_scattering_vanishes_away_from_forward(self, table_free):
        assert dcs(table_free, 0.5, 0.0) <= 1e-30

    def test_rutherford_backward_value_and_ratio(self):
        sc = build_scenario_from_eta(10.0, EPS)
        assert rutherford_dcs(sc, math.pi) == pytest.approx(
            sc.eta ** 2 / (4.0 * sc.p ** 2), rel=1e-14)
        ratio = rutherford_dcs(sc, math.pi / 2.0) / rutherford_dcs(sc, math.pi)
        assert ratio == pytest.approx(4.0, rel=1e-12)

    def test_rutherford_from_energy_form(self):
        # eta^2/(4 p^2 sin^4) must equal Z1^2 Z2^2 alpha^2 / (16 E^2 sin^4)
        sc = build_scenario(79, 2, ALPHA_PARTICLE_MASS_MEV, 3.8e-3, EPS)
        theta = math.pi / 4.0
        direct = (158.0 * FINE_STRUCTURE_ALPHA) ** 2 / (
            16.0 * sc.E ** 2 * math.sin(theta / 2.0) ** 4)
        assert rutherford_dcs(sc, theta) == pytest.approx(direct, rel=1e-12)

    def test_divergence_guard(self):
        sc = build_scenario_from_eta(10.0, EPS)
        with pytest.raises(ValueError):
            rutherford_dcs(sc, 0.0)
        with pytest.raises(ValueError):
            rutherford_probability(sc, 0.0)


class TestRutherfordProbability:
    def test_backward_value(self):
        sc = build_scenario_from_eta(10.0, EPS)
        assert rutherford_probability(sc, math.pi) == pytest.approx(4e-10, rel=1e-10)

    def test_consistent_with_dcs_conversion(self):
        sc = build_scenario_from_eta(7.0, EPS)
        theta = 1.234
        converted = rutherford_dcs(sc, theta) * 16.0 * sc.eps ** 4 * sc.p ** 2
        assert rutherford_probability(sc, theta) == pytest.approx(converted, rel=1e-12)

    def test_exceeds_unity_in_the_forward_divergence(self):
        sc = build_scenario_from_eta(10.0, EPS)
        assert rutherford_probability(sc, 0.005) > 1.0


class TestRutherfordAmplitude:
    def test_modulus_squared_is_the_cross_section(self):
        sc = build_scenario_from_eta(10.0, EPS)
        for theta in np.linspace(0.05, math.pi, 17):
            f = rutherford_amplitude(sc, float(theta))
            assert abs(f) ** 2 == pytest.approx(rutherford_dcs(sc, float(theta)),
                                                rel=1e-12)

    def test_backward_phase(self):
        # at theta=pi the log term vanishes, leaving pi + 2 sigma_0
        sc = build_scenario_from_eta(3.0, EPS)
        f = rutherford_amplitude(sc, math.pi)
        expected = (math.pi + 2.0 * specfun.coulomb_sigma_exact(0, 3.0)) % (2 * math.pi)
        assert math.atan2(f.imag, f.real) % (2.0 * math.pi) == pytest.approx(
            expected, abs=1e-12)

    def test_charge_conjugation(self):
        theta = math.pi / 2.0
        f_plus = rutherford_amplitude(build_scenario_from_eta(1.0, EPS), theta)
        f_minus = rutherford_amplitude(build_scenario_from_eta(-1.0, EPS), theta)
        assert f_minus == pytest.approx(-f_plus.conjugate(), rel=1e-12)


class TestConservation:
    def test_reference_eps(self, table_free):
        assert abs(conservation_weight_sum(table_free) - 1.0) <= 1e-5

    def test_larger_eps_against_euler_maclaurin(self):
        # midpoint-rule correction to the integral: sum = 1 + eps^2/3 + O(eps^4)
        eps = 1e-2
        table = build_table(build_scenario_from_eta(0.0, eps),
                            PhaseShiftModel.coulomb_exact())
        val = conservation_weight_sum(table)
        assert val == pytest.approx(1.0 + eps ** 2 / 3.0, abs=1e-6)
        assert abs(val - 1.0) <= 1e-3

    def test_interaction_independence(self, table_free, table_eta800):
        assert conservation_weight_sum(table_free) == conservation_weight_sum(table_eta800)


class TestSphereIntegral:
    def test_free_case_with_resolved_grid(self):
        # eps = 0.01 keeps the forward Gaussian resolvable on a fine midpoint
        # grid; delta_max is identically zero for the free field
        eps = 1e-2
        table = build_table(build_scenario_from_eta(0.0, eps),
                            PhaseShiftModel.coulomb_exact())
        thetas = midpoint_thetas(4000)
        p_max = partialwave.probability_pairs(table, thetas, np.zeros(thetas.size))
        profile = DeltaProfile(thetas=thetas, delta_max=np.zeros(thetas.size),
                               p_max=p_max,
                               factorization_residual=np.zeros(thetas.size),
                               p_max_integral=p_max)
        val = probability_sphere_integral(table, profile)
        # Gaussian integral oracle: (1/2eps^2) Int sin(t) e^{-t^2/4eps^2} dt = 1 + O(eps^2)
        assert val == pytest.approx(1.0, abs=5e-3)

    def test_eta800_reference_and_richardson(self, table_eta800):
        prof200 = _sphere_profile_800(200)
        val200 = probability_sphere_integral(table_eta800, prof200)
        assert abs(val200 - 0.998) <= 0.005
        prof400 = delta_profile(table_eta800, midpoint_thetas(400))
        val400 = probability_sphere_integral(table_eta800, prof400)
        assert abs(val400 - val200) < 0.002

    def test_grid_validation(self, table_free):
        bad = DeltaProfile(thetas=np.linspace(0.0, math.pi, 10),
                           delta_max=np.zeros(10), p_max=np.zeros(10),
                           factorization_residual=np.zeros(10),
                           p_max_integral=np.zeros(10))
        with pytest.raises(ValueError):
            probability_sphere_integral(table_free, bad)


class TestShadowAngle:
    def test_reference_values(self):
        assert shadow_angle(EPS, 10.0) == pytest.approx(0.04, abs=1e-6)
        assert shadow_angle(EPS, -10.0) == pytest.approx(0.04, abs=1e-6)
        assert shadow_angle(EPS, 1.0) == pytest.approx(0.004, abs=1e-7)
        deg = math.degrees(shadow_angle(2.1e-4, 23.0))
        assert abs(deg - 1.1) <= 0.05

    def test_warns_outside_small_parameter_regime(self):
        with pytest.warns(UserWarning):
            shadow_angle(1e-3, 800.0)


class TestDeltaProfile:
    def test_free_case_peaks_at_zero(self, table_free):
        prof = delta_profile(table_free, [0.0, 0.001])
        assert np.allclose(prof.delta_max, 0.0, atol=1e-9)
        assert prof.p_max[0] == pytest.approx(1.0, abs=1e-6)

    def test_flat_profile_warns(self, table_free):
        with pytest.warns(UserWarning, match="flat delta profile"):
            prof = delta_profile(table_free, [2.0])
        assert prof.delta_max[0] == 0.0

    def test_integral_extraction_matches_peak(self, table_eta10):
        # factorized profiles make the delta-integral equal the peak value
        prof = delta_profile(table_eta10, [0.03, 0.5, 2.0])
        assert np.allclose(prof.p_max_integral, prof.p_max, rtol=5e-3)
        assert np.all(prof.factorization_residual <= 0.02 * prof.p_max)

    def test_charge_conjugate_peaks(self, table_eta10, table_eta_m10):
        d_plus, p_plus = delta_max_at(table_eta10, 0.03)
        d_minus, p_minus = delta_max_at(table_eta_m10, 0.03)
        assert d_minus == pytest.approx(-d_plus, abs=1e-6)
        assert p_minus == pytest.approx(p_plus, rel=1e-9)

    def test_range_validation(self, table_eta10):
        with pytest.raises(ValueError):
            delta_profile(table_eta10, [0.1], delta_range=(-2.0, 8.0))


class TestScatteringAmplitude:
    def test_free_case_vanishes(self, table_free):
        assert scattering_amplitude_f(table_free, table_free.scenario, 0.7) == 0.0

    def test_im_f0_equals_direct_sum(self, table_eta10):
        sc = table_eta10.scenario
        f0 = scattering_amplitude_f(table_eta10, sc, 0.0)
        l = np.arange(table_eta10.l_max + 1, dtype=float)
        x = l + 0.5
        sin2 = 0.5 * (1.0 - table_eta10.phase_cos)
        direct = float(np.sum((2 * l + 1) * np.exp(-2 * EPS ** 2 * x * x) * sin2)) / sc.p
        assert f0.imag == pytest.approx(direct, rel=1e-12)

    def test_square_well_gaussians_are_removable(self):
        # converged short-range sums barely feel the Gaussian damping
        sc = build_scenario(79, 2, ALPHA_PARTICLE_MASS_MEV, 1.0, EPS)
        model = square_well_phase_shifts(0.5, 5.0 / sc.p, sc, l_max=60)
        table = build_table(sc, model, l_max=60)
        theta = 0.9
        f_damped = scattering_amplitude_f(table, sc, theta)
        row = specfun.legendre_rows(np.array([theta]), 60)[0]
        dl = model.delta_l
        f_bare = complex(np.sum((2 * np.arange(61) + 1) * np.exp(1j * dl)
                                * np.sin(dl) * row)) / sc.p
        assert abs(f_damped - f_bare) / abs(f_bare) <= 100.0 * EPS ** 2


class TestOptical:
    def test_free_case(self, table_free):
        assert total_cross_section(table_free, table_free.scenario) == 0.0
        assert math.isnan(optical_ratio(table_free))

    def test_gamma_below_unity_across_eta(self):
        for eta in (0.1, 1.0, 10.0, 100.0, 800.0):
            table = _table_for_eta(eta)
            assert optical_ratio(table) < 1.0

    def test_gamma_golden_pin(self, table_eta10):
        assert optical_ratio(table_eta10) == pytest.approx(GOLDEN_GAMMA_ETA10, rel=1e-12)

    def test_short_range_check(self):
        sc = build_scenario(79, 2, ALPHA_PARTICLE_MASS_MEV, 1.0, EPS)
        model = square_well_phase_shifts(0.5, 5.0 / sc.p, sc, l_max=60)
        check = optical_theorem_check_short_range(model, sc)
        assert check.rel_diff <= 1e-4
        assert check.sigma == pytest.approx(check.optical_sigma, rel=2e-4)

    def test_zero_well_and_nonconvergence(self):
        sc = build_scenario(79, 2, ALPHA_PARTICLE_MASS_MEV, 1.0, EPS)
        zero = square_well_phase_shifts(0.0, 5.0 / sc.p, sc, l_max=40)
        check = optical_theorem_check_short_range(zero, sc)
        assert check.sigma == 0.0 and check.optical_sigma == 0.0
        bad = PhaseShiftModel.short_range(np.full(20, 0.3), np.zeros(20))
        with pytest.raises(NonConvergenceError):
            optical_theorem_check_short_range(bad, sc)

    def test_eps_scaling(self):
        sc1 = build_scenario(79, 2, ALPHA_PARTICLE_MASS_MEV, 1.0, 1e-3)
        sc2 = build_scenario(79, 2, ALPHA_PARTICLE_MASS_MEV, 1.0, 1e-2)
        model = square_well_phase_shifts(0.5, 5.0 / sc1.p, sc1, l_max=60)
        r1 = optical_theorem_check_short_range(model, sc1).rel_diff
        r2 = optical_theorem_check_short_range(model, sc2).rel_diff
        assert 50.0 <= r2 / r1 <= 200.0


class TestShadowRegime:
    def test_eta800_backscatter_dominance(self, table_eta800):
        # deep suppression at pi/4, full Rutherford agreement only at pi
        sc = table_eta800.scenario
        pref = 1.0 / (16.0 * sc.eps ** 4 * sc.p ** 2)
        _d, p_quarter = delta_max_at(table_eta800, math.pi / 4.0)
        _d, p_back = delta_max_at(table_eta800, math.pi)
        assert p_quarter * pref / rutherford_dcs(sc, math.pi / 4.0) <= 1e-6
        assert p_back * pref / rutherford_dcs(sc, math.pi) >= 0.5


class TestEnergyRatio:
    def test_reference_point(self):
        family = ScenarioFamily(79, 2, ALPHA_PARTICLE_MASS_MEV, EPS)
        rho, eta, dmax = observables.energy_ratio_rho(family, 3.8e-3)
        assert 2.5e-7 / 2.0 <= rho <= 2.5e-7 * 2.0
        assert abs(eta - 800.0) <= 16.0
        assert dmax > 0.0

    def test_agreement_limit_at_weak_coupling(self):
        # theta0 = 4 eps eta << pi/4: the ratio should sit near unity
        family = ScenarioFamily(79, 2, ALPHA_PARTICLE_MASS_MEV, EPS)
        sc20 = build_scenario_from_eta(20.0, EPS)
        rho, eta, _ = observables.energy_ratio_rho(family, sc20.E)
        assert abs(eta - 20.0) <= 0.1
        assert abs(rho - 1.0) <= 0.1

    def test_angular_curve_rows(self, table_eta10):
        pts = observables.angular_curve(table_eta10, [0.5, 1.0], 0.4)
        assert len(pts) == 2
        sc = table_eta10.scenario
        expected = probability(table_eta10, 0.5, 0.4) / (16 * sc.eps ** 4 * sc.p ** 2)
        assert pts[0].value == pytest.approx(expected, rel=1e-12)
        assert pts[0].delta_used == 0.4
