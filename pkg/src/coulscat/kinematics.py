"""Kinematics of a Gaussian wavepacket scattering off a Coulomb field.

Converts experimental inputs (charges Z1, Z2, projectile mass m0, kinetic
energy E, fractional momentum spread eps) into the natural-units quantities
the partial-wave machinery consumes.  Everything internal is MeV-based
natural units (hbar = c = 1):

    p       = sqrt(2 m0 E)          momentum (MeV)
    beta    = p / m0                nonrelativistic speed
    eta     = Z1 Z2 alpha / beta    Sommerfeld strength parameter
    sigma_p = eps * p               momentum spread (MeV)
    sigma_x = 1 / (2 sigma_p)       position spread (1/MeV), minimum uncertainty
    R       = sigma_x / sqrt(eps)   initial distance from the scattering centre

The R choice keeps wavepacket spreading negligible over the ~2R transit
while growing as eps^(-3/2); it implies 2 p R = eps^(-3/2) identically, so
ln(2pR) = (3/2) ln(1/eps) independent of energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ScenarioError

# CODATA-derived constants.  The projectile default is a helium nucleus.
HBARC_MEV_FM = 197.3269804
SECONDS_PER_INVERSE_MEV = 6.582119569e-22
FINE_STRUCTURE_ALPHA = 1.0 / 137.035999084
ALPHA_PARTICLE_MASS_MEV = 3727.379

# The leading-order asymptotics behind the whole construction assume
# eps << 1; beyond this cutoff results would silently degrade.
EPS_MAX = 0.1


@dataclass(frozen=True)
class UnitsContext:
    """Conversion constants between natural units and laboratory units."""

    hbar_c: float = HBARC_MEV_FM
    seconds_per_inverse_mev: float = SECONDS_PER_INVERSE_MEV
    fine_structure_alpha: float = FINE_STRUCTURE_ALPHA

    def length_to_fm(self, x_inv_mev: float) -> float:
        return x_inv_mev * self.hbar_c

    def fm_to_length(self, x_fm: float) -> float:
        return x_fm / self.hbar_c

    def time_to_seconds(self, t_inv_mev: float) -> float:
        return t_inv_mev * self.seconds_per_inverse_mev

    def seconds_to_time(self, t_s: float) -> float:
        return t_s / self.seconds_per_inverse_mev


DEFAULT_UNITS = UnitsContext()


@dataclass(frozen=True)
class PhysicalScenario:
    """Immutable bundle of experimental inputs and derived kinematics.

    Attributes
    ----------
    Z1, Z2 : int
        Atomic numbers of the field source and the projectile.
    m0 : float
        Projectile rest mass (MeV).
    E : float
        Nonrelativistic kinetic energy (MeV), E > 0.
    eps : float
        Fractional momentum spread sigma_p / p, 0 < eps < 0.1.
    p, beta, eta, sigma_p, sigma_x, R : float
        Derived quantities, see module docstring.
    """

    Z1: int
    Z2: int
    m0: float
    E: float
    eps: float
    p: float
    beta: float
    eta: float
    sigma_p: float
    sigma_x: float
    R: float


def _validate_inputs(m0: float, E: float, eps: float) -> None:
    if not (m0 > 0.0):
        raise ScenarioError(f"projectile mass must be positive, got {m0}")
    if not (E > 0.0):
        raise ScenarioError(f"kinetic energy must be positive, got {E}")
    if not (0.0 < eps < EPS_MAX):
        raise ScenarioError(
            f"fractional momentum spread must satisfy 0 < eps < {EPS_MAX}, got {eps}"
        )


def build_scenario(Z1: int, Z2: int, m0: float, E: float, eps: float,
                   alpha: float = FINE_STRUCTURE_ALPHA) -> PhysicalScenario:
    """Build a scenario from charges, mass, kinetic energy and eps (all MeV-based)."""
    _validate_inputs(m0, E, eps)
    p = math.sqrt(2.0 * m0 * E)
    beta = p / m0
    eta = Z1 * Z2 * alpha / beta
    sigma_p = eps * p
    sigma_x = 0.5 / sigma_p
    R = sigma_x / math.sqrt(eps)
    return PhysicalScenario(Z1=Z1, Z2=Z2, m0=m0, E=E, eps=eps, p=p, beta=beta,
                            eta=eta, sigma_p=sigma_p, sigma_x=sigma_x, R=R)


def build_scenario_from_eta(eta: float, eps: float, Z1: int = 79, Z2: int = 2,
                            m0: float = ALPHA_PARTICLE_MASS_MEV,
                            E_free: float = 1.0,
                            alpha: float = FINE_STRUCTURE_ALPHA) -> PhysicalScenario:
    """Build a scenario with a prescribed strength parameter eta.

    The energy is derived from eta (beta = |Z1 Z2| alpha / |eta|), and the
    projectile charge sign is flipped if needed so that sign(Z1 Z2) matches
    sign(eta).  At eta = 0 the energy is unconstrained; `E_free` is used and
    the field source charge is set to zero.
    """
    if eta == 0.0:
        return build_scenario(0, Z2, m0, E_free, eps, alpha=alpha)
    if Z1 == 0 or Z2 == 0:
        raise ScenarioError("nonzero eta requires nonzero charges")
    if (Z1 * Z2 > 0) != (eta > 0):
        Z2 = -Z2
    beta = abs(Z1 * Z2) * alpha / abs(eta)
    E = 0.5 * m0 * beta * beta
    scenario = build_scenario(Z1, Z2, m0, E, eps, alpha=alpha)
    # eta reconstructed from E rounds differently; rebuild with the exact value
    return PhysicalScenario(Z1=Z1, Z2=Z2, m0=m0, E=E, eps=eps, p=scenario.p,
                            beta=scenario.beta, eta=float(eta),
                            sigma_p=scenario.sigma_p, sigma_x=scenario.sigma_x,
                            R=scenario.R)


def eta_bound(eps: float) -> float:
    """Largest |eta| compatible with negligible spreading at this eps.

    Comes from allowing the logarithmic-phase trajectory shift to be at most
    R/2:  |eta| <= 1 / (4 eps^{3/2} |(3/2) ln(1/eps) - 1|).
    """
    if not (0.0 < eps < 1.0 / math.e):
        raise ScenarioError(f"eta_bound requires 0 < eps < 1/e, got {eps}")
    denom = 4.0 * eps ** 1.5 * abs(1.5 * math.log(1.0 / eps) - 1.0)
    if denom == 0.0:
        raise ScenarioError(f"eta_bound denominator vanishes at eps={eps}")
    return 1.0 / denom


def log_shift(scenario: PhysicalScenario) -> float:
    """Trajectory shift Delta(R) = (eta/p) (ln(2pR) - 1) from the logarithmic phase.

    The asymptotic Coulomb wave carries a phase -eta ln(2kr); the incoming
    state built at nominal radius R therefore actually peaks at R - Delta(R).
    Sign follows sign(eta): repulsive fields lag, attractive fields lead.
    """
    if scenario.eta == 0.0:
        return 0.0
    return (scenario.eta / scenario.p) * (math.log(2.0 * scenario.p * scenario.R) - 1.0)


def free_transit_time(scenario: PhysicalScenario) -> float:
    """Reference transit time: free flight over 2(R - Delta(R)) at speed beta."""
    return (2.0 * scenario.R - 2.0 * log_shift(scenario)) / scenario.beta


def scaled_shift(scenario: PhysicalScenario, T: float) -> float:
    """Dimensionless time-shift variable delta = (beta T - beta T_free) / sigma_x."""
    return scenario.beta * (T - free_transit_time(scenario)) / scenario.sigma_x


def time_shift_seconds(scenario: PhysicalScenario, delta: float,
                       units: UnitsContext = DEFAULT_UNITS) -> float:
    """Convert a scaled shift delta into a time delay in seconds (delta sigma_x / beta)."""
    return units.time_to_seconds(delta * scenario.sigma_x / scenario.beta)


def spreading_width(scenario: PhysicalScenario, t: float) -> float:
    """Gaussian wavepacket width sigma_x(t) = sqrt(sigma_x^2 + eps^2 (beta t)^2)."""
    return math.hypot(scenario.sigma_x, scenario.eps * scenario.beta * t)


def eps_from_energy_width(energy_width: float, E: float) -> float:
    """Fractional momentum spread implied by an energy linewidth.

    E = p^2/2m gives sigma_E/E = 2 sigma_p/p, so eps = energy_width / (2 E)
    when the linewidth is read as the energy spread of the packet.
    """
    if not (energy_width > 0.0 and E > 0.0):
        raise ScenarioError("energy width and energy must be positive")
    return energy_width / (2.0 * E)
