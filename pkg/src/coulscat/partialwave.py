"""Partial-wave table and the bounded wavepacket-to-wavepacket amplitude.

The scattering amplitude between unit-normalized Gaussian wavepackets is a
finite series over angular momentum,

    A(theta, delta) = 2 eps^2 sum_l (2l+1) e^{-2 eps^2 (l+1/2)^2}
                      e^{-(delta - xi_l)^2 / 8} e^{2i sigma_l} P_l(cos theta),

with P(theta, delta) = |A|^2 <= 1 + O(eps^2).  delta is the scaled time-shift
variable (beta * time delay in units of sigma_x) and xi_l the per-l spatial
shift.  For the Coulomb field

    xi_l = 4 eps eta (ln(2pR) - 1 - d sigma_l / d eta),

twice the momentum-derivative of the phase shift in sigma_x units once the
logarithmic-phase trajectory shift is folded into the free-transit reference.
For a short-range potential with phase shifts delta_l the same series applies
with sigma_l -> delta_l and xi_l -> (2/sigma_x) d delta_l / dk.

Evaluation is vectorized per theta row with a fixed ascending-l reduction
order, so identical inputs give bit-identical results regardless of how work
is partitioned across threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import spherical_jn, spherical_yn

from . import specfun
from .errors import (
    MatchingError,
    StrengthBoundError,
    TruncationMismatchError,
)
from .kinematics import PhysicalScenario, eta_bound

__all__ = [
    "PhaseShiftKind",
    "PhaseShiftModel",
    "PartialWaveTable",
    "choose_l_max",
    "build_table",
    "amplitude",
    "probability",
    "amplitude_forward",
    "amplitude_scatter",
    "amplitude_grid",
    "probability_grid",
    "forward_grid",
    "scatter_grid",
    "probability_pairs",
    "square_well_phase_shifts",
    "export_table_csv",
]

# table rows processed per chunk when building Legendre values (memory bound)
_CHUNK_ELEMENTS = 1 << 25


class PhaseShiftKind(enum.Enum):
    COULOMB_EXACT = "coulomb-exact"
    COULOMB_ASYMPTOTIC = "coulomb-asym"
    SHORT_RANGE_TABLE = "short-range"


@dataclass(frozen=True)
class PhaseShiftModel:
    """Pluggable per-l phase-shift provider.

    For SHORT_RANGE_TABLE, `delta_l` (radians) and `ddelta_dk` (1/MeV) are
    equal-length finite arrays indexed by l.
    """

    kind: PhaseShiftKind
    delta_l: Optional[np.ndarray] = None
    ddelta_dk: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind is PhaseShiftKind.SHORT_RANGE_TABLE:
            if self.delta_l is None or self.ddelta_dk is None:
                raise ValueError("short-range model requires delta_l and ddelta_dk")
            dl = np.asarray(self.delta_l, dtype=float)
            dd = np.asarray(self.ddelta_dk, dtype=float)
            if dl.size < 1 or dl.shape != dd.shape:
                raise ValueError("delta_l and ddelta_dk must be equal-length, size >= 1")
            if not (np.all(np.isfinite(dl)) and np.all(np.isfinite(dd))):
                raise ValueError("short-range phase-shift arrays must be finite")
            object.__setattr__(self, "delta_l", dl)
            object.__setattr__(self, "ddelta_dk", dd)
        elif self.delta_l is not None or self.ddelta_dk is not None:
            raise ValueError("phase-shift arrays only apply to short-range models")

    @classmethod
    def coulomb_exact(cls) -> "PhaseShiftModel":
        return cls(kind=PhaseShiftKind.COULOMB_EXACT)

    @classmethod
    def coulomb_asymptotic(cls) -> "PhaseShiftModel":
        return cls(kind=PhaseShiftKind.COULOMB_ASYMPTOTIC)

    @classmethod
    def short_range(cls, delta_l, ddelta_dk) -> "PhaseShiftModel":
        return cls(kind=PhaseShiftKind.SHORT_RANGE_TABLE,
                   delta_l=np.asarray(delta_l, dtype=float),
                   ddelta_dk=np.asarray(ddelta_dk, dtype=float))


@dataclass(frozen=True)
class PartialWaveTable:
    """Immutable per-l cache of weights, phase factors and spatial shifts.

    weight[l]    = (2l+1) exp(-2 eps^2 (l+1/2)^2)
    phase_cos/sin = cos/sin of 2 sigma_l (or 2 delta_l for short range)
    xi[l]        = per-l spatial shift in sigma_x units
    tail_bound   = rigorous bound on the neglected angular weight beyond
                   l_max, relative to the retained total
    """

    l_max: int
    weight: np.ndarray
    phase_cos: np.ndarray
    phase_sin: np.ndarray
    xi: np.ndarray
    scenario: PhysicalScenario
    model: PhaseShiftModel
    tail_bound: float

    @property
    def eps(self) -> float:
        return self.scenario.eps


def choose_l_max(eps: float, tail_tol: Optional[float] = None) -> int:
    """Truncation index for the Gaussian-in-l weights.

    Default policy: smallest L with eps (L + 1/2) >= 6, i.e. relative tail
    weight below e^{-72}.  An explicit `tail_tol` in (0, 1e-3] instead picks
    the smallest L whose relative tail bound exp(-2 eps^2 (L+1/2)^2) is below
    the tolerance.
    """
    if tail_tol is None:
        return math.ceil(6.0 / eps - 0.5)
    if not (0.0 < tail_tol <= 1e-3):
        raise ValueError(f"tail_tol must be in (0, 1e-3], got {tail_tol}")
    return math.ceil(math.sqrt(math.log(1.0 / tail_tol) / (2.0 * eps * eps)) - 0.5)


def build_table(scenario: PhysicalScenario, model: PhaseShiftModel,
                tail_tol: Optional[float] = None,
                l_max: Optional[int] = None) -> PartialWaveTable:
    """Build the per-l table for a scenario and phase-shift model.

    Coulomb models are rejected when |eta| exceeds eta_bound(eps) (the
    trajectory shift would no longer be small against R).  Short-range tables
    must cover the chosen l_max.
    """
    eps = scenario.eps
    eta = scenario.eta
    if l_max is None:
        l_max = choose_l_max(eps, tail_tol)
    if l_max < 0:
        raise ValueError(f"l_max must be >= 0, got {l_max}")

    if model.kind is not PhaseShiftKind.SHORT_RANGE_TABLE:
        bound = eta_bound(eps)
        if abs(eta) > bound:
            raise StrengthBoundError(
                f"|eta| = {abs(eta):.6g} exceeds the strength bound "
                f"{bound:.6g} for eps = {eps:.6g}"
            )

    l = np.arange(l_max + 1, dtype=float)
    x = l + 0.5
    weight = (2.0 * l + 1.0) * np.exp(-2.0 * eps * eps * x * x)

    if model.kind is PhaseShiftKind.COULOMB_EXACT:
        sigma2 = 2.0 * specfun.coulomb_sigma_table(l_max, eta)
        if eta == 0.0:
            xi = np.zeros(l_max + 1)
        else:
            ln2pr = math.log(2.0 * scenario.p * scenario.R)
            xi = 4.0 * eps * eta * (ln2pr - 1.0 - specfun.dsigma_deta_table(l_max, eta))
    elif model.kind is PhaseShiftKind.COULOMB_ASYMPTOTIC:
        sigma2 = 2.0 * specfun.coulomb_sigma_asymptotic_table(l_max, eta)
        if eta == 0.0:
            xi = np.zeros(l_max + 1)
        else:
            # literal asymptotic shift, carrying both "-1" offsets; differs
            # from the derivative of the asymptotic phase by exactly -4 eps eta
            ln2pr = math.log(2.0 * scenario.p * scenario.R)
            lp1 = l + 1.0
            xi = 4.0 * eps * eta * (
                ln2pr - 1.0 - 0.5 * np.log(lp1 * lp1 + eta * eta) - 1.0
            )
    else:
        if model.delta_l.size < l_max + 1:
            raise TruncationMismatchError(
                f"short-range table covers l <= {model.delta_l.size - 1} "
                f"but l_max = {l_max} is required"
            )
        sigma2 = 2.0 * model.delta_l[: l_max + 1]
        xi = (2.0 / scenario.sigma_x) * model.ddelta_dk[: l_max + 1]

    phase_cos = np.cos(sigma2)
    phase_sin = np.sin(sigma2)

    # sum of neglected weights is bounded by the integral of 2x e^{-2 eps^2 x^2}
    # from l_max + 1/2; normalize by the retained sum
    tail_abs = math.exp(-2.0 * eps * eps * (l_max + 0.5) ** 2) / (2.0 * eps * eps)
    tail_bound = tail_abs / float(np.sum(weight))

    for arr in (weight, phase_cos, phase_sin, xi):
        arr.flags.writeable = False
    return PartialWaveTable(l_max=l_max, weight=weight, phase_cos=phase_cos,
                            phase_sin=phase_sin, xi=xi, scenario=scenario,
                            model=model, tail_bound=tail_bound)


# ---------------------------------------------------------------------------
# series evaluation
# ---------------------------------------------------------------------------

def _delta_factors(table: PartialWaveTable, deltas: np.ndarray) -> np.ndarray:
    """Gaussian time-shift factors exp(-(delta - xi_l)^2 / 8), shape (n_delta, L+1)."""
    d = deltas[:, None] - table.xi[None, :]
    return np.exp(-(d * d) / 8.0)


def _theta_chunks(n_theta: int, l_max: int):
    rows = max(1, _CHUNK_ELEMENTS // (8 * (l_max + 1)))
    for i0 in range(0, n_theta, rows):
        yield i0, min(i0 + rows, n_theta)


def _series_row(table: PartialWaveTable, p_row: np.ndarray, g: np.ndarray,
                kern_re: np.ndarray, kern_im: np.ndarray):
    """Reduce one theta row against a (n_delta, L+1) Gaussian factor matrix.

    np.sum reduces each row independently along the contiguous axis, so the
    result for a given point never depends on how many points share the call.
    """
    tre = kern_re * p_row
    tim = kern_im * p_row
    re = np.sum(g * tre[None, :], axis=1)
    im = np.sum(g * tim[None, :], axis=1)
    return re, im


def _eval_grid(table: PartialWaveTable, thetas, deltas, kern_re, kern_im,
               prefactor: float):
    thetas = np.asarray(thetas, dtype=float)
    deltas = np.asarray(deltas, dtype=float)
    out_re = np.empty((thetas.size, deltas.size))
    out_im = np.empty((thetas.size, deltas.size))
    g = _delta_factors(table, deltas)
    for i0, i1 in _theta_chunks(thetas.size, table.l_max):
        p_chunk = specfun.legendre_rows(thetas[i0:i1], table.l_max)
        for i in range(i0, i1):
            re, im = _series_row(table, p_chunk[i - i0], g, kern_re, kern_im)
            out_re[i] = prefactor * re
            out_im[i] = prefactor * im
    return out_re, out_im


def _kern_full(table: PartialWaveTable):
    # e^{2i sigma_l} kernel
    return table.weight * table.phase_cos, table.weight * table.phase_sin


def _kern_forward(table: PartialWaveTable):
    # unit kernel (the "1" of e^{2i sigma} = 1 + 2i e^{i sigma} sin sigma)
    return table.weight, np.zeros_like(table.weight)


def _kern_scatter(table: PartialWaveTable):
    # e^{i sigma} sin sigma = sin(2 sigma)/2 + i (1 - cos(2 sigma))/2
    return (table.weight * table.phase_sin * 0.5,
            table.weight * (1.0 - table.phase_cos) * 0.5)


def amplitude_grid(table: PartialWaveTable, thetas, deltas) -> np.ndarray:
    """Complex amplitude A on the outer product of thetas and deltas."""
    kr, ki = _kern_full(table)
    pref = 2.0 * table.eps ** 2
    re, im = _eval_grid(table, thetas, deltas, kr, ki, pref)
    return re + 1j * im


def probability_grid(table: PartialWaveTable, thetas, deltas) -> np.ndarray:
    """P = |A|^2 on the outer product of thetas and deltas."""
    kr, ki = _kern_full(table)
    pref = 2.0 * table.eps ** 2
    re, im = _eval_grid(table, thetas, deltas, kr, ki, pref)
    return re * re + im * im


def forward_grid(table: PartialWaveTable, thetas, deltas) -> np.ndarray:
    """Forward-peak part A_F (real) on the outer product grid."""
    kr, ki = _kern_forward(table)
    re, _im = _eval_grid(table, thetas, deltas, kr, ki, 2.0 * table.eps ** 2)
    return re


def scatter_grid(table: PartialWaveTable, thetas, deltas) -> np.ndarray:
    """Scattering part A_S (complex) on the outer product grid."""
    kr, ki = _kern_scatter(table)
    re, im = _eval_grid(table, thetas, deltas, kr, ki, 4.0 * table.eps ** 2)
    return re + 1j * im


def probability_pairs(table: PartialWaveTable, thetas, deltas) -> np.ndarray:
    """P at paired (theta_i, delta_i) points; arrays must be equal length."""
    thetas = np.asarray(thetas, dtype=float)
    deltas = np.asarray(deltas, dtype=float)
    if thetas.shape != deltas.shape or thetas.ndim != 1:
        raise ValueError("thetas and deltas must be equal-length 1-D arrays")
    kr, ki = _kern_full(table)
    pref = 2.0 * table.eps ** 2
    out = np.empty(thetas.size)
    for i0, i1 in _theta_chunks(thetas.size, table.l_max):
        p_chunk = specfun.legendre_rows(thetas[i0:i1], table.l_max)
        for i in range(i0, i1):
            g = _delta_factors(table, deltas[i : i + 1])
            re, im = _series_row(table, p_chunk[i - i0], g, kr, ki)
            out[i] = (pref * re[0]) ** 2 + (pref * im[0]) ** 2
    return out


def amplitude(table: PartialWaveTable, theta: float, delta: float) -> complex:
    """A(theta, delta) at a single point (same code path as the grid forms)."""
    if not (0.0 <= theta <= np.pi):
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    return complex(amplitude_grid(table, [theta], [delta])[0, 0])


def probability(table: PartialWaveTable, theta: float, delta: float) -> float:
    """P(theta, delta) = |A|^2 at a single point."""
    if not (0.0 <= theta <= np.pi):
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    return float(probability_grid(table, [theta], [delta])[0, 0])


def amplitude_forward(table: PartialWaveTable, theta: float, delta: float) -> float:
    """Forward-peak amplitude A_F(theta, delta); real by construction."""
    return float(forward_grid(table, [theta], [delta])[0, 0])


def amplitude_scatter(table: PartialWaveTable, theta: float, delta: float) -> complex:
    """Scattering amplitude part A_S(theta, delta); A = A_F + i A_S."""
    return complex(scatter_grid(table, [theta], [delta])[0, 0])


# ---------------------------------------------------------------------------
# spherical square well
# ---------------------------------------------------------------------------

def _square_well_deltas_at_k(k: float, radius: float, depth: float, m0: float,
                             ls: np.ndarray) -> np.ndarray:
    """Phase shifts from interior/exterior log-derivative matching at r = radius.

    Interior wavenumber k'^2 = k^2 + 2 m0 * depth (depth > 0 attracts).  For
    k'^2 < 0 the interior solution is the modified spherical Bessel i_l.
    """
    ka = k * radius
    ja = spherical_jn(ls, ka)
    dja = spherical_jn(ls, ka, derivative=True)
    ya = spherical_yn(ls, ka)
    dya = spherical_yn(ls, ka, derivative=True)
    kp2 = k * k + 2.0 * m0 * depth
    if kp2 > 0.0:
        kp = math.sqrt(kp2)
        ji = spherical_jn(ls, kp * radius)
        dji = spherical_jn(ls, kp * radius, derivative=True)
    else:
        from scipy.special import spherical_in

        kp = math.sqrt(-kp2)
        ji = spherical_in(ls, kp * radius)
        dji = spherical_in(ls, kp * radius, derivative=True)
    num = k * dja * ji - kp * dji * ja
    den = k * dya * ji - kp * dji * ya
    deltas = np.arctan2(num, den)
    bad = ~np.isfinite(deltas)
    if np.any(bad):
        raise MatchingError(np.nonzero(bad)[0])
    return deltas


def square_well_phase_shifts(depth: float, radius: float,
                             scenario: PhysicalScenario,
                             l_max: int) -> PhaseShiftModel:
    """Short-range model for a spherical well of the given depth (MeV) and radius (1/MeV).

    depth > 0 is an attractive well, depth < 0 a repulsive barrier.  The
    momentum derivative d delta_l / dk uses central differences with step
    1e-4 * p, after re-branching delta_l(k +- h) onto the same mod-pi sheet.
    """
    if not (radius > 0.0):
        raise ValueError(f"well radius must be positive, got {radius}")
    k = scenario.p
    ls = np.arange(l_max + 1)
    # beyond l ~ k*radius + margin the centrifugal barrier makes delta_l
    # underflow; skip the matching there and pin exact zeros
    l_cut = min(l_max, int(math.ceil(k * radius)) + 40)
    active = ls[: l_cut + 1]

    h = 1e-4 * k
    d0 = _square_well_deltas_at_k(k, radius, depth, scenario.m0, active)
    dm = _square_well_deltas_at_k(k - h, radius, depth, scenario.m0, active)
    dp = _square_well_deltas_at_k(k + h, radius, depth, scenario.m0, active)
    # atan2 branch jumps between k-h and k+h would wreck the difference
    dm = dm - np.pi * np.round((dm - d0) / np.pi)
    dp = dp - np.pi * np.round((dp - d0) / np.pi)
    ddk = (dp - dm) / (2.0 * h)

    delta_l = np.zeros(l_max + 1)
    ddelta_dk = np.zeros(l_max + 1)
    delta_l[: l_cut + 1] = d0
    ddelta_dk[: l_cut + 1] = ddk
    return PhaseShiftModel.short_range(delta_l, ddelta_dk)


def export_table_csv(table: PartialWaveTable, path) -> None:
    """Columnar dump (l, weight, cos2sigma, sin2sigma, xi) for inspection."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("l,weight,cos2sigma,sin2sigma,xi\n")
        for l in range(table.l_max + 1):
            fh.write(
                f"{l},{table.weight[l]:.17g},{table.phase_cos[l]:.17g},"
                f"{table.phase_sin[l]:.17g},{table.xi[l]:.17g}\n"
            )
