"""Wavepacket Coulomb scattering by partial-wave summation.

Computes the bounded wavepacket-to-wavepacket scattering probability
P(theta, delta), the differential cross section and its deviations from the
Rutherford formula, time delays and advancements, conservation sum rules and
optical-theorem diagnostics, for Coulomb and short-range phase-shift models.
"""

from .errors import (
    MatchingError,
    NonConvergenceError,
    ResourceLimitError,
    ScenarioError,
    StrengthBoundError,
    TruncationMismatchError,
)
from .kinematics import (
    ALPHA_PARTICLE_MASS_MEV,
    DEFAULT_UNITS,
    FINE_STRUCTURE_ALPHA,
    PhysicalScenario,
    UnitsContext,
    build_scenario,
    build_scenario_from_eta,
    eps_from_energy_width,
    eta_bound,
    free_transit_time,
    log_shift,
    scaled_shift,
    spreading_width,
    time_shift_seconds,
)
from .observables import (
    CrossSectionPoint,
    DeltaProfile,
    ScenarioFamily,
    conservation_weight_sum,
    dcs,
    delta_max_at,
    delta_profile,
    energy_ratio_rho,
    midpoint_thetas,
    optical_ratio,
    optical_theorem_check_short_range,
    probability_sphere_integral,
    rutherford_amplitude,
    rutherford_dcs,
    rutherford_probability,
    scattering_amplitude_f,
    shadow_angle,
    total_cross_section,
)
from .partialwave import (
    PartialWaveTable,
    PhaseShiftKind,
    PhaseShiftModel,
    amplitude,
    amplitude_forward,
    amplitude_scatter,
    build_table,
    choose_l_max,
    probability,
    square_well_phase_shifts,
)
from .scan import (
    EtaSweepResult,
    FieldResult,
    GridSpec,
    Quantity,
    TableCache,
    eta_sweep,
    field_to_csv,
    field_to_json,
    sweep,
)

__version__ = "1.0.0"
