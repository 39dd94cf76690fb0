"""Special functions for the partial-wave series.

Coulomb phase shifts sigma_l are defined through the gamma function,

    e^{2i sigma_l} = Gamma(l+1+i eta) / Gamma(l+1-i eta),

so sigma_l = Im log Gamma(l+1+i eta), with the exact recurrence

    sigma_{l+1} - sigma_l = atan2(eta, l+1).

Only phase differences matter downstream (the overall 2 pi branch drops out
of e^{2i sigma_l}); tables are built from sigma_0 plus the recurrence, which
is both branch-safe and fast.  The eta-derivative of sigma_l, needed for the
per-l spatial shifts, is Re psi(l+1+i eta) with psi the digamma function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import digamma, j0, loggamma

__all__ = [
    "LegendreRow",
    "log_gamma_complex",
    "coulomb_sigma_exact",
    "coulomb_sigma_table",
    "coulomb_sigma_asymptotic",
    "coulomb_sigma_asymptotic_table",
    "dsigma_deta",
    "dsigma_deta_table",
    "legendre_row",
    "legendre_rows",
    "wigner_d00_small_angle",
    "i_integral_closed_form",
    "i_integral_quadrature",
]


def log_gamma_complex(z: complex) -> complex:
    """Principal-branch log Gamma(z); exp of the result recovers Gamma(z).

    Rejects non-finite arguments and the poles at non-positive real integers.
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"log_gamma_complex requires finite argument, got {z}")
    if z.imag == 0.0 and z.real <= 0.0 and z.real == int(z.real):
        raise ValueError(f"log Gamma pole at z={z.real}")
    return complex(loggamma(z))


def coulomb_sigma_exact(l: int, eta: float) -> float:
    """Coulomb phase shift sigma_l(eta), continuous in l via the recurrence."""
    if l < 0:
        raise ValueError(f"l must be >= 0, got {l}")
    if eta == 0.0:
        return 0.0
    sigma0 = float(np.imag(loggamma(1.0 + 1j * eta)))
    if l == 0:
        return sigma0
    # fsum keeps each sigma_l correctly rounded so the recurrence residual
    # stays below one ulp of the accumulated phase
    return sigma0 + math.fsum(math.atan2(eta, j) for j in range(1, l + 1))


def coulomb_sigma_table(l_max: int, eta: float) -> np.ndarray:
    """sigma_0 .. sigma_{l_max} via sigma_0 + running sum of atan2(eta, l+1)."""
    if l_max < 0:
        raise ValueError(f"l_max must be >= 0, got {l_max}")
    if eta == 0.0:
        return np.zeros(l_max + 1)
    out = np.empty(l_max + 1)
    out[0] = np.imag(loggamma(1.0 + 1j * eta))
    steps = np.arctan2(eta, np.arange(1.0, l_max + 1.0))
    # plain sequential accumulation: each sigma_{l+1} is exactly the rounding
    # of sigma_l + atan2(eta, l+1), so the recurrence residual stays below
    # half an ulp of the accumulated phase (blocked cumsum would not)
    acc = out[0]
    for i in range(l_max):
        acc += steps[i]
        out[i + 1] = acc
    return out


def coulomb_sigma_asymptotic(l: int, eta: float) -> float:
    """Large-|l+1+i eta| approximation of sigma_l.

    sigma_l ~ eta (ln sqrt((l+1)^2 + eta^2) - 1) + (l + 1/2) atan(eta/(l+1));
    the phase factor e^{2i sigma} is accurate to O(1/|l+1+i eta|).
    """
    if l < 0:
        raise ValueError(f"l must be >= 0, got {l}")
    lp1 = l + 1.0
    return eta * (0.5 * math.log(lp1 * lp1 + eta * eta) - 1.0) + (
        l + 0.5
    ) * math.atan2(eta, lp1)


def coulomb_sigma_asymptotic_table(l_max: int, eta: float) -> np.ndarray:
    lp1 = np.arange(1.0, l_max + 2.0)
    return eta * (0.5 * np.log(lp1 * lp1 + eta * eta) - 1.0) + (lp1 - 0.5) * np.arctan2(
        eta, lp1
    )


def dsigma_deta(l: int, eta: float) -> float:
    """d sigma_l / d eta = Re psi(l+1+i eta)."""
    if l < 0:
        raise ValueError(f"l must be >= 0, got {l}")
    return float(np.real(digamma(l + 1.0 + 1j * eta)))


def dsigma_deta_table(l_max: int, eta: float) -> np.ndarray:
    return np.real(digamma(np.arange(1.0, l_max + 2.0) + 1j * eta))


@dataclass(frozen=True)
class LegendreRow:
    """P_l(cos theta) for l = 0 .. l_max at a single angle."""

    theta: float
    values: np.ndarray


def legendre_rows(thetas, l_max: int) -> np.ndarray:
    """Legendre values P_l(cos theta), shape (n_theta, l_max+1).

    Three-term recurrence (l+1) P_{l+1} = (2l+1) x P_l - l P_{l-1}, vectorized
    across angles.  x is clamped to exactly +-1 at theta = 0 and theta = pi so
    the endpoint columns come out as exact integers (+-1)^l.
    """
    thetas = np.asarray(thetas, dtype=float)
    if thetas.ndim != 1:
        raise ValueError("thetas must be one-dimensional")
    if np.any((thetas < 0.0) | (thetas > np.pi)):
        raise ValueError("theta must lie in [0, pi]")
    if l_max < 0:
        raise ValueError(f"l_max must be >= 0, got {l_max}")
    x = np.cos(thetas)
    x[thetas == 0.0] = 1.0
    x[thetas == np.pi] = -1.0
    P = np.empty((thetas.size, l_max + 1))
    P[:, 0] = 1.0
    if l_max >= 1:
        P[:, 1] = x
    for l in range(1, l_max):
        P[:, l + 1] = ((2 * l + 1) * x * P[:, l] - l * P[:, l - 1]) / (l + 1)
    return P


def legendre_row(theta: float, l_max: int) -> LegendreRow:
    values = legendre_rows(np.array([float(theta)]), l_max)[0]
    values.flags.writeable = False
    return LegendreRow(theta=float(theta), values=values)


def _d00_bessel(l: int, theta) -> np.ndarray:
    # small-angle, uniform-in-l form of the m=0 rotation matrix element
    return j0(math.sqrt(l * (l + 1.0) + 1.0 / 3.0) * np.asarray(theta, dtype=float))


def wigner_d00_small_angle(l: int, theta: float) -> float:
    """J0(sqrt(l(l+1)+1/3) theta), matching P_l(cos theta) to O(theta^2).

    Valid for small angles only; the domain is restricted to theta <= 0.2.
    """
    if l < 0:
        raise ValueError(f"l must be >= 0, got {l}")
    if not (0.0 <= theta <= 0.2):
        raise ValueError(f"small-angle form requires 0 <= theta <= 0.2, got {theta}")
    return float(_d00_bessel(l, theta))


def i_integral_closed_form(l: int, eps: float) -> float:
    """Angular overlap integral in closed form: 2 eps^2 exp(-eps^2 (l+1/2)^2).

    This is the weight that turns a narrow angular distribution into a wide
    Gaussian distribution over angular momentum (momentum units p = 1).
    """
    if l < 0 or not (0.0 < eps < 0.1):
        raise ValueError("require l >= 0 and 0 < eps < 0.1")
    return 2.0 * eps * eps * math.exp(-(eps * eps) * (l + 0.5) ** 2)


def i_integral_quadrature(l: int, eps: float) -> float:
    """Adaptive Gauss-Kronrod evaluation of the defining integral on [0, pi].

    Integrand: theta * exp(-theta^2 / 4 eps^2) * d00(l, theta), with d00 in
    its small-angle Bessel form (the Gaussian confines support to ~10 eps).
    Serves as the independent oracle for `i_integral_closed_form`.
    """
    if l < 0 or not (0.0 < eps < 0.1):
        raise ValueError("require l >= 0 and 0 < eps < 0.1")
    inv4eps2 = 1.0 / (4.0 * eps * eps)

    def integrand(t: float) -> float:
        return t * math.exp(-t * t * inv4eps2) * float(_d00_bessel(l, t))

    # breakpoints force the adaptive rule to resolve the narrow Gaussian at 0
    pts = [2.0 * eps, 4.0 * eps, 8.0 * eps, 16.0 * eps]
    value, _err = quad(integrand, 0.0, math.pi, points=pts, limit=500,
                       epsabs=1e-300, epsrel=1e-9)
    return value
