"""Acceptance suite: every headline number the engine must reproduce.

Each criterion is a self-contained callable returning a CriterionResult; the
CLI `selftest` command and the pytest acceptance module both run this
registry.  Expensive artifacts (tables, the eta=800 sphere profile) are
cached at module level so criteria can share them.

Two checks are expected to fail and are reported honestly rather than
loosened: the pinned time-shift peak locations (criterion 5) and the 10%
Rutherford-agreement bound at theta = 0.1 (criterion 8, first clause).
Criterion 5's per-l shifts are cross-checked against an independent
classical-orbit transit-time oracle: at eta = +-10 both the series and the
orbit sit far below the pinned peak locations, and at eta = 800 the pin lies
between the series value and the orbit value, inside the leading-order
formalism's own slack (the trajectory shift there is no longer << R) but
outside the stated tolerance of the series value.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kinematics, observables, partialwave, scan, specfun
from .kinematics import build_scenario, build_scenario_from_eta
from .partialwave import PhaseShiftModel


@dataclass(frozen=True)
class CriterionResult:
    cid: int
    description: str
    passed: bool
    detail: str


EPS_REF = 1e-3


@functools.lru_cache(maxsize=32)
def _table_for_eta(eta: float, eps: float = EPS_REF):
    scenario = build_scenario_from_eta(eta, eps)
    return partialwave.build_table(scenario, PhaseShiftModel.coulomb_exact())


@functools.lru_cache(maxsize=4)
def _sphere_profile_800(n_intervals: int = 200):
    table = _table_for_eta(800.0)
    thetas = observables.midpoint_thetas(n_intervals)
    return observables.delta_profile(table, thetas)


def _classical_delta_oracle(eta: float, theta: float, eps: float) -> float:
    """Independent classical-orbit value of the scaled time shift.

    Transit time along the hyperbolic orbit for the angular momentum that
    scatters to `theta`, between endpoints at the in/out states' mean radius
    R - Delta(R), minus the free transit over the same distance, in the same
    delta units as the series.  Meaningful where one angular momentum
    dominates (outside the forward interference zone).  Differs from the
    series' per-l shift by finite-R orbit corrections the leading-order
    series drops: O((l^2 + eta^2)/(p^2 R sigma_x)) from the centrifugal
    phase, plus O(ln(1 - Delta/R)) pieces once Delta(R) is not << R.
    """
    scenario = build_scenario_from_eta(eta, eps)
    p, beta, R, sx = scenario.p, scenario.beta, scenario.R, scenario.sigma_x
    a = 2.0 * eta / p
    L = eta / math.tan(0.5 * theta)
    b = L / p
    rmin = 0.5 * (a + math.sqrt(a * a + 4.0 * b * b))
    # beta * t(r) = sqrt(r^2 - a r - b^2) + (a/2) ln(2r - a + 2 sqrt(...)) + C
    def bt(r: float) -> float:
        f = math.sqrt(max(r * r - a * r - b * b, 0.0))
        return f + 0.5 * a * math.log(2.0 * r - a + 2.0 * f)

    r_end = R - kinematics.log_shift(scenario)
    beta_transit = 2.0 * (bt(r_end) - bt(rmin))
    beta_free = beta * kinematics.free_transit_time(scenario)
    return (beta_transit - beta_free) / sx


def _c01(_=None) -> CriterionResult:
    val = kinematics.eta_bound(EPS_REF)
    ok = abs(val - 844.0) <= 1.0
    return CriterionResult(1, "strength bound eta_bound(0.001) = 844 +- 1", ok,
                           f"eta_bound(0.001) = {val:.3f}")


def _c02(_=None) -> CriterionResult:
    table = _table_for_eta(0.0)
    val = observables.conservation_weight_sum(table)
    ok = abs(val - 1.0) <= 1e-5
    return CriterionResult(2, "conservation weight sum = 1 +- 1e-5 at eps=0.001",
                           ok, f"weight sum = {val:.9f}")


def _c03(_=None) -> CriterionResult:
    table = _table_for_eta(800.0)
    profile = _sphere_profile_800()
    val = observables.probability_sphere_integral(table, profile)
    ok = abs(val - 0.998) <= 0.005
    return CriterionResult(3, "sphere integral at eta=800 = 0.998 +- 0.005",
                           ok, f"integral (200 midpoint intervals) = {val:.5f}")


def _c04(_=None) -> CriterionResult:
    a = observables.shadow_angle(EPS_REF, 10.0)
    am = observables.shadow_angle(EPS_REF, -10.0)
    b = observables.shadow_angle(EPS_REF, 1.0)
    c = math.degrees(observables.shadow_angle(2.1e-4, 23.0))
    ok = (abs(a - 0.04) <= 1e-6 and abs(am - 0.04) <= 1e-6
          and abs(b - 0.004) <= 1e-7 and abs(c - 1.1) <= 0.05)
    return CriterionResult(
        4, "shadow-zone widths 0.04 / 0.004 rad and 1.1 deg", ok,
        f"theta0(0.001,+-10)={a:.6f}, theta0(0.001,1)={b:.7f}, "
        f"theta0(2.1e-4,23)={c:.3f} deg",
    )


def _c05(_=None) -> CriterionResult:
    cases = [
        (10.0, 0.03, +0.4, 0.10),
        (10.0, 0.0, +1.2, 0.15),
        (-10.0, 0.03, -0.4, 0.10),
        (800.0, math.pi / 2.0, +5.3, 0.30),
    ]
    lines = []
    ok = True
    for eta, theta, target, tol in cases:
        table = _table_for_eta(eta)
        dmax, _ = observables.delta_max_at(table, theta)
        hit = abs(dmax - target) <= tol
        ok = ok and hit
        note = ""
        if theta >= 0.03 and abs(eta) >= 10.0:
            oracle = _classical_delta_oracle(eta, theta, EPS_REF)
            note = f" [classical orbit {oracle:+.3f}]"
        if eta == 800.0:
            scenario = build_scenario_from_eta(eta, EPS_REF)
            lit = partialwave.build_table(scenario,
                                          PhaseShiftModel.coulomb_asymptotic())
            dmax_lit, _ = observables.delta_max_at(lit, theta)
            note += f" [literal asymptotic shifts {dmax_lit:+.3f}]"
        lines.append(
            f"eta={eta:+g} theta={theta:.4g}: delta_max={dmax:+.3f} "
            f"(reference {target:+g} +- {tol}){note}"
        )
    return CriterionResult(5, "time-shift peak locations", ok, "; ".join(lines))


def _c06(_=None) -> CriterionResult:
    scenario = build_scenario(79, 2, kinematics.ALPHA_PARTICLE_MASS_MEV,
                              3.8e-3, EPS_REF)
    val = kinematics.time_shift_seconds(scenario, 5.3)
    ok = abs(val - 2.3e-16) <= 0.05 * 2.3e-16
    return CriterionResult(6, "time delay in seconds at delta=+5.3, E=3.8 keV",
                           ok, f"dt = {val:.4e} s (target 2.3e-16 +- 5%)")


def _c07(_=None) -> CriterionResult:
    m0 = kinematics.ALPHA_PARTICLE_MASS_MEV
    eta_low = build_scenario(79, 2, m0, 3.8e-3, EPS_REF).eta
    eta_high = build_scenario(79, 2, m0, 4.8, 2.1e-4).eta
    eps_bound = kinematics.eps_from_energy_width(2e-3, 4.8)
    ok = (abs(eta_low - 800.0) <= 0.02 * 800.0
          and abs(eta_high - 23.0) <= 0.02 * 23.0
          and eps_bound < 2.1e-4 and abs(eps_bound * 1e4 - 2.1) < 0.05)
    return CriterionResult(
        7, "kinematic correspondences eta(3.8 keV)=800, eta(4.8 MeV)=23, "
           "linewidth eps bound 2.1e-4", ok,
        f"eta(3.8 keV)={eta_low:.2f}, eta(4.8 MeV)={eta_high:.3f}, "
        f"eps bound={eps_bound:.4e}",
    )


def _c08(_=None) -> CriterionResult:
    table = _table_for_eta(10.0)
    scenario = table.scenario
    thetas = np.linspace(0.1, 3.0, 59)
    probs = partialwave.probability_pairs(table, thetas, np.full(thetas.size, 0.4))
    ruth = np.array([observables.rutherford_probability(scenario, t) for t in thetas])
    dev = np.abs(probs / ruth - 1.0)
    worst = float(dev.max())
    worst_theta = float(thetas[int(dev.argmax())])
    inner = np.linspace(0.005, 0.05, 10)
    probs_in = partialwave.probability_pairs(table, inner, np.full(inner.size, 0.4))
    ruth_in = np.array([observables.rutherford_probability(scenario, t) for t in inner])
    dev_in = float(np.max(np.abs(probs_in / ruth_in - 1.0)))
    ok = worst <= 0.10 and dev_in > 0.50
    return CriterionResult(
        8, "Rutherford agreement: dev <= 10% on [0.1, 3.0], > 50% below 0.05",
        ok,
        f"worst deviation {worst:.3f} at theta={worst_theta:.3f} "
        f"(bound 0.10); inner-zone max deviation {dev_in:.2f} (> 0.50 required)",
    )


def _c09(_=None) -> CriterionResult:
    family = observables.ScenarioFamily(79, 2, kinematics.ALPHA_PARTICLE_MASS_MEV,
                                        EPS_REF)
    energies_kev = [3.8, 10.0, 20.0, 50.0, 100.0, 200.0]
    rhos = []
    for ek in energies_kev:
        rho, _eta, _dmax = observables.energy_ratio_rho(family, ek * 1e-3)
        rhos.append(rho)
    ok = (2.5e-7 / 2.0 <= rhos[0] <= 2.5e-7 * 2.0) and all(
        b > a for a, b in zip(rhos, rhos[1:])
    )
    return CriterionResult(
        9, "energy-scan ratio rho(3.8 keV) = 2.5e-7 x/2, monotone", ok,
        "rho = " + ", ".join(f"{ek:g} keV: {r:.3e}" for ek, r in zip(energies_kev, rhos)),
    )


def _c10(_=None) -> CriterionResult:
    table = _table_for_eta(0.0)
    thetas = np.linspace(0.0, 10.0 * EPS_REF, 21)
    deltas = np.linspace(-4.0, 4.0, 17)
    field = partialwave.probability_grid(table, thetas, deltas)
    free = np.exp(-(thetas[:, None] ** 2) / (4.0 * EPS_REF ** 2)) * np.exp(
        -(deltas[None, :] ** 2) / 4.0
    )
    worst = float(np.max(np.abs(field - free)))
    ok = worst <= 5.0 * EPS_REF ** 2
    return CriterionResult(10, "free-case field matches the Gaussian product",
                           ok, f"max |P - P_free| = {worst:.3e} (tol {5*EPS_REF**2:.1e})")


def _c11(_=None) -> CriterionResult:
    # recurrence residual on built tables
    res_rec = 0.0
    for eta in (1.0, -1.0, 10.0, -10.0, 800.0, -800.0):
        s = specfun.coulomb_sigma_table(6000, eta)
        steps = np.arctan2(eta, np.arange(1.0, 6001.0))
        res_rec = max(res_rec, float(np.max(np.abs(np.diff(s) - steps))))
    # analytic eta-derivative vs central differences
    res_fd = 0.0
    h = 1e-5
    for l in (0, 5, 100):
        for eta in (1.0, -1.0, 10.0, -10.0, 800.0, -800.0):
            fd = (specfun.coulomb_sigma_exact(l, eta + h)
                  - specfun.coulomb_sigma_exact(l, eta - h)) / (2.0 * h)
            an = specfun.dsigma_deta(l, eta)
            res_fd = max(res_fd, abs(fd - an) / abs(an))
    # asymptotic phase-factor error constant
    const = 0.0
    for eta in (0.5, 1.0, 10.0, 100.0, 800.0):
        se = specfun.coulomb_sigma_table(6000, eta)
        sa = specfun.coulomb_sigma_asymptotic_table(6000, eta)
        mod = np.abs(np.arange(1.0, 6002.0) + 1j * eta)
        const = max(const, float(np.max(np.abs(np.exp(2j * sa) - np.exp(2j * se)) * mod)))
    ok = res_rec <= 1e-12 and res_fd <= 1e-6 and const <= 3.0
    return CriterionResult(
        11, "phase-shift identities (recurrence, derivative, asymptotic error)",
        ok,
        f"recurrence residual {res_rec:.2e} (<=1e-12); derivative vs FD "
        f"{res_fd:.2e} (<=1e-6); asymptotic constant {const:.3f} (<=3)",
    )


def _c12(_=None) -> CriterionResult:
    worst = 0.0
    for l in (0, 1000, 3000):
        closed = specfun.i_integral_closed_form(l, EPS_REF)
        quadv = specfun.i_integral_quadrature(l, EPS_REF)
        worst = max(worst, abs(quadv - closed) / closed)
    ok = worst <= 1e-3
    return CriterionResult(12, "angular overlap integral: closed form vs quadrature",
                           ok, f"worst relative difference {worst:.2e} (<=1e-3)")


def _c13(_=None) -> CriterionResult:
    rng = np.random.default_rng(20260811)
    worst = 0.0
    for eta in (0.1, 10.0, 800.0):
        table = _table_for_eta(eta)
        thetas = rng.uniform(0.0, math.pi, 100)
        deltas = rng.uniform(-6.0, 6.0, 100)
        for th, de in zip(thetas, deltas):
            a = partialwave.amplitude(table, th, de)
            af = partialwave.amplitude_forward(table, th, de)
            asc = partialwave.amplitude_scatter(table, th, de)
            worst = max(worst, abs(a - (af + 1j * asc)))
    ok = worst <= 1e-10
    return CriterionResult(13, "decomposition identity A = A_F + i A_S",
                           ok, f"max |A - (A_F + i A_S)| = {worst:.2e} (<=1e-10)")


def _square_well_setup(eps: float):
    scenario = build_scenario(79, 2, kinematics.ALPHA_PARTICLE_MASS_MEV, 1.0, eps)
    radius = 5.0 / scenario.p  # k * radius = 5
    model = partialwave.square_well_phase_shifts(0.5, radius, scenario, l_max=60)
    return scenario, model


def _c14(_=None) -> CriterionResult:
    scenario, model = _square_well_setup(EPS_REF)
    check = observables.optical_theorem_check_short_range(model, scenario)
    scenario10, model10 = _square_well_setup(1e-2)
    check10 = observables.optical_theorem_check_short_range(model10, scenario10)
    improvement = check10.rel_diff / check.rel_diff
    max_delta = float(np.max(np.abs(model.delta_l)))
    ok = check.rel_diff <= 1e-4 and 50.0 <= improvement <= 200.0
    return CriterionResult(
        14, "short-range optical theorem to O(eps^2)", ok,
        f"rel diff {check.rel_diff:.2e} (<=1e-4) at eps=0.001; x{improvement:.0f} "
        f"worse at eps=0.01; max |delta_l| = {max_delta:.2f} rad",
    )


def _c15(_=None) -> CriterionResult:
    table = _table_for_eta(10.0)
    grid = scan.GridSpec(0.0, 0.5, 120, -4.0, 4.0, 33)
    fields = [scan.sweep(table, grid, scan.Quantity.PROBABILITY, workers=w)
              for w in (1, 4, 8)]
    rerun = scan.sweep(table, grid, scan.Quantity.PROBABILITY, workers=4)
    same_workers = all(np.array_equal(fields[0].values, f.values) for f in fields[1:])
    same_rerun = np.array_equal(fields[1].values, rerun.values)
    ok = same_workers and same_rerun
    return CriterionResult(
        15, "bit-identical sweeps across 1/4/8 workers and reruns", ok,
        f"workers identical: {same_workers}; rerun identical: {same_rerun}",
    )


def _c16(_=None) -> CriterionResult:
    worst = 0.0
    deltas = np.linspace(-8.0, 8.0, 33)
    thetas = np.linspace(0.0, math.pi, 161)
    for eta in (0.0, 0.1, 1.0, 10.0, 800.0):
        table = _table_for_eta(eta)
        field = partialwave.probability_grid(table, thetas, deltas)
        worst = max(worst, float(field.max()))
    prof = _sphere_profile_800()
    worst = max(worst, float(np.max(prof.p_max)))
    ok = worst <= 1.0 + 1e-6
    return CriterionResult(16, "unitarity: no probability exceeds 1 + 1e-6",
                           ok, f"max probability sampled = {worst:.9f}")


CRITERIA: list[tuple[int, str, Callable[..., CriterionResult]]] = [
    (1, "strength bound", _c01),
    (2, "conservation weight sum", _c02),
    (3, "sphere integral at eta=800", _c03),
    (4, "shadow-zone estimates", _c04),
    (5, "time-shift extraction", _c05),
    (6, "time delay in seconds", _c06),
    (7, "kinematic correspondence", _c07),
    (8, "Rutherford agreement regime", _c08),
    (9, "energy-scan ratio", _c09),
    (10, "free-case oracle", _c10),
    (11, "phase-shift identities", _c11),
    (12, "overlap-integral oracle", _c12),
    (13, "decomposition identity", _c13),
    (14, "short-range optical theorem", _c14),
    (15, "determinism", _c15),
    (16, "unitarity", _c16),
]


def run_criterion(cid: int) -> CriterionResult:
    for c, _name, fn in CRITERIA:
        if c == cid:
            return fn()
    raise KeyError(f"no acceptance criterion {cid}")


def run_all(report=print) -> list[CriterionResult]:
    results = []
    for cid, _name, fn in CRITERIA:
        result = fn()
        results.append(result)
        status = "PASS" if result.passed else "FAIL"
        report(f"[{status}] criterion {cid:2d}: {result.description} -- {result.detail}")
    return results
