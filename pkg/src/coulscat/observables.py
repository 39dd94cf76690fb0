"""Physical outputs: cross sections, Rutherford references, conservation
integrals, time-shift profiles, scattering amplitude and optical-theorem
diagnostics.

The probability-to-cross-section prefactor for Gaussian wavepackets is

    d sigma / d Omega = p^2 / (16 sigma_p^4) * P(theta, delta)
                      = P(theta, delta) / (16 eps^4 p^2),

and the Rutherford reference is eta^2 / (4 p^2 sin^4(theta/2)), divergent in
the forward direction where the bounded wavepacket probability is not.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import partialwave, specfun
from .errors import NonConvergenceError
from .kinematics import PhysicalScenario, build_scenario
from .partialwave import PartialWaveTable, PhaseShiftKind, PhaseShiftModel

__all__ = [
    "DeltaProfile",
    "CrossSectionPoint",
    "ScenarioFamily",
    "OpticalCheck",
    "dcs",
    "rutherford_dcs",
    "rutherford_probability",
    "rutherford_amplitude",
    "conservation_weight_sum",
    "midpoint_thetas",
    "probability_sphere_integral",
    "shadow_angle",
    "default_delta_range",
    "delta_profile",
    "delta_max_at",
    "scattering_amplitude_f",
    "total_cross_section",
    "optical_ratio",
    "optical_theorem_check_short_range",
    "energy_ratio_rho",
    "angular_curve",
]


@dataclass(frozen=True)
class DeltaProfile:
    """delta_max(theta) and peak probabilities extracted by scanning.

    p_max is the probability at the refined peak location; p_max_integral is
    the alternative extraction (1/sqrt(4 pi)) * integral of P over delta,
    which equals p_max when the profile factorizes as a unit Gaussian in
    delta.  factorization_residual reports the worst deviation from that
    factorized form over the scanned delta samples (diagnostic only).
    """

    thetas: np.ndarray
    delta_max: np.ndarray
    p_max: np.ndarray
    factorization_residual: np.ndarray
    p_max_integral: np.ndarray


@dataclass(frozen=True)
class CrossSectionPoint:
    theta: float
    value: float
    delta_used: float


@dataclass(frozen=True)
class ScenarioFamily:
    """Fixed charges, mass and eps; energy varies across a scan."""

    Z1: int
    Z2: int
    m0: float
    eps: float

    def at_energy(self, E_mev: float) -> PhysicalScenario:
        return build_scenario(self.Z1, self.Z2, self.m0, E_mev, self.eps)


def dcs(table: PartialWaveTable, theta: float, delta: float) -> float:
    """Differential cross section P(theta, delta) / (16 eps^4 p^2) (1/MeV^2)."""
    sc = table.scenario
    return partialwave.probability(table, theta, delta) / (
        16.0 * sc.eps ** 4 * sc.p ** 2
    )


def rutherford_dcs(scenario: PhysicalScenario, theta: float) -> float:
    """Rutherford differential cross section eta^2 / (4 p^2 sin^4(theta/2))."""
    if not (0.0 < theta <= math.pi):
        raise ValueError("Rutherford cross section diverges at theta = 0")
    s2 = math.sin(0.5 * theta) ** 2
    return scenario.eta ** 2 / (4.0 * scenario.p ** 2 * s2 * s2)


def rutherford_probability(scenario: PhysicalScenario, theta: float) -> float:
    """Rutherford cross section converted to the probability scale.

    4 eps^4 eta^2 / sin^4(theta/2); a reference curve only, exceeding unity
    and diverging as theta -> 0.
    """
    if not (0.0 < theta <= math.pi):
        raise ValueError("Rutherford probability diverges at theta = 0")
    s2 = math.sin(0.5 * theta) ** 2
    return 4.0 * scenario.eps ** 4 * scenario.eta ** 2 / (s2 * s2)


def rutherford_amplitude(scenario: PhysicalScenario, theta: float) -> complex:
    """Closed-form Coulomb scattering amplitude.

    f(theta, p) = -(eta / (2 p sin^2(theta/2)))
                  * exp(-i eta ln(sin^2(theta/2)) + 2i sigma_0),
    whose modulus squared is the Rutherford cross section.
    """
    if not (0.0 < theta <= math.pi):
        raise ValueError("Coulomb amplitude diverges at theta = 0")
    eta = scenario.eta
    s2 = math.sin(0.5 * theta) ** 2
    sigma0 = specfun.coulomb_sigma_exact(0, eta)
    return -(eta / (2.0 * scenario.p * s2)) * complex(
        np.exp(1j * (-eta * math.log(s2) + 2.0 * sigma0))
    )


def conservation_weight_sum(table: PartialWaveTable) -> float:
    """Total-probability sum rule 8 eps^2 sum (l+1/2) exp(-4 eps^2 (l+1/2)^2).

    Equals 1 + O(eps^2) for any interaction; the phases drop out when the
    probability is integrated over all angles and time shifts.
    """
    eps = table.eps
    x = np.arange(table.l_max + 1, dtype=float) + 0.5
    return 8.0 * eps * eps * float(np.sum(x * np.exp(-4.0 * eps * eps * x * x)))


def midpoint_thetas(n_intervals: int) -> np.ndarray:
    """Midpoints of n equal intervals covering [0, pi]."""
    if n_intervals < 1:
        raise ValueError("need at least one interval")
    return (np.arange(n_intervals) + 0.5) * (math.pi / n_intervals)


def probability_sphere_integral(table: PartialWaveTable,
                                profile: DeltaProfile) -> float:
    """(1 / 2 eps^2) * integral over [0, pi] of sin(theta) P(theta, delta_max).

    Midpoint-rule sum over the profile's theta grid, which must be the
    midpoint grid of equal intervals on [0, pi].  Close to 1 when the
    per-theta peak probability accounts for the full flux.
    """
    thetas = np.asarray(profile.thetas, dtype=float)
    n = thetas.size
    expected = midpoint_thetas(n)
    if not np.allclose(thetas, expected, rtol=0.0, atol=1e-9):
        raise ValueError("profile thetas must be the midpoint grid of [0, pi]")
    width = math.pi / n
    integrand = np.sin(thetas) * np.asarray(profile.p_max, dtype=float)
    return width * float(np.sum(integrand)) / (2.0 * table.eps ** 2)


def shadow_angle(eps: float, eta: float) -> float:
    """Estimated angular width of the forward shadow zone: 4 eps |eta|.

    Follows from demanding the Rutherford form integrate to unit probability
    outside the suppressed cone; meaningful for eps |eta| << 1.
    """
    if eps * abs(eta) > 0.1:
        warnings.warn(
            f"shadow-angle estimate assumes eps*|eta| << 1, got {eps * abs(eta):.3g}",
            stacklevel=2,
        )
    return 4.0 * eps * abs(eta)


def default_delta_range(table: PartialWaveTable) -> tuple[float, float]:
    """Scan window: [-8, 8] widened to cover the xi hull plus 8 on each side."""
    lo = min(-8.0, float(np.min(table.xi)) - 8.0)
    hi = max(8.0, float(np.max(table.xi)) + 8.0)
    return lo, hi


def _refine_peak(deltas: np.ndarray, p_row: np.ndarray) -> float:
    """Coarse argmax plus 3-point parabolic refinement on log P.

    The log-parabola is exact for a Gaussian profile.  Falls back to the grid
    argmax when the peak sits on the boundary or a neighbour is non-positive.
    """
    i = int(np.argmax(p_row))
    if i == 0 or i == p_row.size - 1:
        return float(deltas[i])
    window = p_row[i - 1 : i + 2]
    if np.any(window <= 0.0):
        return float(deltas[i])
    y = np.log(window)
    denom = y[0] - 2.0 * y[1] + y[2]
    if denom >= 0.0:
        return float(deltas[i])
    offset = 0.5 * (y[0] - y[2]) / denom
    step = deltas[i + 1] - deltas[i]
    return float(deltas[i] + offset * step)


def delta_profile(table: PartialWaveTable, thetas,
                  delta_range: Optional[tuple[float, float]] = None,
                  coarse_n: Optional[int] = None) -> DeltaProfile:
    """Locate the probability peak in delta for each theta.

    Coarse scan over `delta_range` (default: `default_delta_range`, step 0.2)
    followed by parabolic refinement on log P; p_max re-evaluates P at the
    refined location.  The range must span at least [-8, 8] so the scan
    cannot miss a peak pushed outside the xi hull by interference.
    """
    thetas = np.asarray(thetas, dtype=float)
    if delta_range is None:
        delta_range = default_delta_range(table)
    lo, hi = float(delta_range[0]), float(delta_range[1])
    if lo > -8.0 or hi < 8.0:
        raise ValueError(f"delta_range must span at least [-8, 8], got [{lo}, {hi}]")
    if coarse_n is None:
        coarse_n = int(round((hi - lo) / 0.2)) + 1
    if coarse_n < 5:
        raise ValueError("coarse_n must be at least 5")
    deltas = np.linspace(lo, hi, coarse_n)

    grid = partialwave.probability_grid(table, thetas, deltas)
    delta_max = np.empty(thetas.size)
    n_flat = 0
    for i in range(thetas.size):
        prominence = float(grid[i].max() - grid[i].min())
        if prominence < 1e-12:
            n_flat += 1
            if grid[i].max() < 1e-30:
                # below the double-precision noise floor of the series;
                # the peak location is meaningless there
                delta_max[i] = 0.0
                continue
        delta_max[i] = _refine_peak(deltas, grid[i])
    if n_flat:
        warnings.warn(
            f"flat delta profile (peak prominence < 1e-12) at {n_flat} of "
            f"{thetas.size} angles",
            stacklevel=2,
        )
    p_max = partialwave.probability_pairs(table, thetas, delta_max)

    # alternative extraction: (1/sqrt(4 pi)) * integral P d delta on a grid
    # centred at the peak (trapezoid; Gaussian integrand converges fast)
    p_max_integral = np.empty(thetas.size)
    residual = np.empty(thetas.size)
    for i in range(thetas.size):
        d_loc = delta_max[i] + np.linspace(-10.0, 10.0, 81)
        p_loc = partialwave.probability_grid(table, thetas[i : i + 1], d_loc)[0]
        p_max_integral[i] = float(np.trapezoid(p_loc, d_loc)) / math.sqrt(4.0 * math.pi)
        gauss = np.exp(-((deltas - delta_max[i]) ** 2) / 4.0) * p_max[i]
        residual[i] = float(np.max(np.abs(grid[i] - gauss)))

    for arr in (delta_max, p_max, p_max_integral, residual):
        arr.flags.writeable = False
    return DeltaProfile(thetas=thetas, delta_max=delta_max, p_max=p_max,
                        factorization_residual=residual,
                        p_max_integral=p_max_integral)


def delta_max_at(table: PartialWaveTable, theta: float,
                 delta_range: Optional[tuple[float, float]] = None) -> tuple[float, float]:
    """(delta_max, p_max) at a single angle."""
    prof = delta_profile(table, [theta], delta_range=delta_range)
    return float(prof.delta_max[0]), float(prof.p_max[0])


def scattering_amplitude_f(table: PartialWaveTable, scenario: PhysicalScenario,
                           theta: float) -> complex:
    """Time-shift-integrated scattering amplitude (length units 1/MeV).

    f(theta) = (1/p) sum_l (2l+1) e^{-2 eps^2 (l+1/2)^2}
               e^{i sigma_l} sin sigma_l P_l(cos theta);
    the delta integral of the scattering part is done analytically (each
    shifted unit Gaussian integrates to one against the 1/sqrt(8 pi) measure).
    """
    row = specfun.legendre_rows(np.array([float(theta)]), table.l_max)[0]
    kern_re = table.weight * table.phase_sin * 0.5
    kern_im = table.weight * (1.0 - table.phase_cos) * 0.5
    re = float(np.sum(kern_re * row))
    im = float(np.sum(kern_im * row))
    return (re + 1j * im) / scenario.p


def _sin2_sums(table: PartialWaveTable) -> tuple[float, float]:
    """Gaussian-damped sums of (2l+1) sin^2(sigma_l): (4 eps^2 damping, 2 eps^2 damping)."""
    eps = table.eps
    l = np.arange(table.l_max + 1, dtype=float)
    x = l + 0.5
    sin2 = 0.5 * (1.0 - table.phase_cos)
    base = (2.0 * l + 1.0) * sin2
    heavy = float(np.sum(base * np.exp(-4.0 * eps * eps * x * x)))
    light = float(np.sum(base * np.exp(-2.0 * eps * eps * x * x)))
    return heavy, light


def total_cross_section(table: PartialWaveTable, scenario: PhysicalScenario) -> float:
    """sigma = (4 pi / p^2) sum (2l+1) e^{-4 eps^2 (l+1/2)^2} sin^2 sigma_l."""
    heavy, _light = _sin2_sums(table)
    return 4.0 * math.pi / scenario.p ** 2 * heavy


def optical_ratio(table: PartialWaveTable) -> float:
    """gamma = sigma / (4 pi Im f(0) / p); NaN marks the free case (0/0)."""
    heavy, light = _sin2_sums(table)
    if light == 0.0:
        return float("nan")
    return heavy / light


class OpticalCheck(NamedTuple):
    sigma: float
    optical_sigma: float  # (4 pi / p) Im f(0)
    rel_diff: float


def optical_theorem_check_short_range(model: PhaseShiftModel,
                                      scenario: PhysicalScenario) -> OpticalCheck:
    """Both sides of sigma = (4 pi / p) Im f(0) for a short-range model.

    Uses the wavepacket (Gaussian-damped) sums; for phase shifts that die off
    well inside the l-window the two sides agree to O(eps^2).
    """
    if model.kind is not PhaseShiftKind.SHORT_RANGE_TABLE:
        raise ValueError("optical-theorem check requires a short-range model")
    dl = model.delta_l
    tail = float(np.max(np.abs(dl[-10:]))) if dl.size >= 10 else float(np.max(np.abs(dl)))
    if tail > 1e-8:
        raise NonConvergenceError(
            f"phase shifts not converged at table end (max tail |delta_l| = {tail:.3g})"
        )
    eps = scenario.eps
    p = scenario.p
    l = np.arange(dl.size, dtype=float)
    x = l + 0.5
    base = (2.0 * l + 1.0) * np.sin(dl) ** 2
    sigma = 4.0 * math.pi / p ** 2 * float(np.sum(base * np.exp(-4.0 * eps * eps * x * x)))
    im_f0 = float(np.sum(base * np.exp(-2.0 * eps * eps * x * x))) / p
    optical = 4.0 * math.pi / p * im_f0
    rel = abs(sigma - optical) / optical if optical > 0.0 else 0.0
    return OpticalCheck(sigma=sigma, optical_sigma=optical, rel_diff=rel)


def energy_ratio_rho(family: ScenarioFamily, E_mev: float,
                     model: Optional[PhaseShiftModel] = None,
                     tail_tol: Optional[float] = None) -> tuple[float, float, float]:
    """Predicted-to-Rutherford cross-section ratio at theta = pi/4.

    Returns (rho, eta, delta_max).  delta_max is recomputed from the profile
    at each energy rather than fitted across energies.  Strength-bound errors
    propagate to the caller.
    """
    if model is None:
        model = PhaseShiftModel.coulomb_exact()
    scenario = family.at_energy(E_mev)
    table = partialwave.build_table(scenario, model, tail_tol=tail_tol)
    theta = math.pi / 4.0
    dmax, _pmax = delta_max_at(table, theta)
    rho = dcs(table, theta, dmax) / rutherford_dcs(scenario, theta)
    return rho, scenario.eta, dmax


def angular_curve(table: PartialWaveTable, thetas, delta) -> list[CrossSectionPoint]:
    """Differential cross section along a theta grid at fixed or per-theta delta."""
    thetas = np.asarray(thetas, dtype=float)
    deltas = np.broadcast_to(np.asarray(delta, dtype=float), thetas.shape)
    sc = table.scenario
    probs = partialwave.probability_pairs(table, thetas, np.ascontiguousarray(deltas))
    pref = 1.0 / (16.0 * sc.eps ** 4 * sc.p ** 2)
    return [
        CrossSectionPoint(theta=float(t), value=float(p) * pref, delta_used=float(d))
        for t, p, d in zip(thetas, probs, deltas)
    ]
