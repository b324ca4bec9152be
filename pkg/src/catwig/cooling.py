"""Passive sideband cooling and anti-Stokes/Stokes thermometry.

Weak-coupling rate-equation model: the optical cavity scatters pump
photons into the anti-Stokes (cooling, ``A-``) and Stokes (heating,
``A+``) sidebands with Lorentzian rates

    A-/+ = Omega**2 (gamma_a / 4) / ((gamma_a / 2)**2 + (Delta +/- omega_c)**2)

with ``Omega = rate_scale * alpha * omega_c``. The overall scale only sets
how much pump is needed; ratios, limits and crossings are independent
of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import InstabilityError, ValidationError


@dataclass(frozen=True)
class CoolingConfig:
    """Pump and resonator parameters.

    ``alpha`` is the dimensionless pump sqrt(2 n_a) kappa, ``gamma_a`` the
    cavity power decay rate, ``gamma_m`` the mechanical damping rate and
    ``nth`` the bath occupation. ``detuning`` defaults to -omega_c.
    """

    alpha: float
    omega_c: float
    gamma_a: float
    gamma_m: float
    nth: float
    detuning: Optional[float] = None
    rate_scale: float = 1.0

    def __post_init__(self):
        for name in ("omega_c", "gamma_a", "gamma_m", "rate_scale"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive")
        if self.nth < 0:
            raise ValidationError("nth must be non-negative")
        if self.alpha < 0:
            raise ValidationError("alpha must be non-negative")

    @property
    def delta(self):
        return -self.omega_c if self.detuning is None else self.detuning

    def with_alpha(self, alpha):
        return CoolingConfig(alpha, self.omega_c, self.gamma_a, self.gamma_m, self.nth, self.detuning, self.rate_scale)


def cooling_rates(c: CoolingConfig):
    """Anti-Stokes and Stokes scattering rates (A-, A+) in 1/s."""
    omega = c.rate_scale * c.alpha * c.omega_c
    half = 0.5 * c.gamma_a
    a_minus = omega**2 * 0.25 * c.gamma_a / (half**2 + (c.delta + c.omega_c) ** 2)
    a_plus = omega**2 * 0.25 * c.gamma_a / (half**2 + (c.delta - c.omega_c) ** 2)
    return a_minus, a_plus


def sideband_asymmetry(c: CoolingConfig):
    """A- / A+; independent of pump strength."""
    half = 0.5 * c.gamma_a
    return (half**2 + (c.delta - c.omega_c) ** 2) / (half**2 + (c.delta + c.omega_c) ** 2)


def phonon_from_rates(a_minus, a_plus, gamma_m, nth):
    """Detailed-balance occupation (gamma_m nth + A+) / (gamma_m + A- - A+)."""
    damping = gamma_m + a_minus - a_plus
    if damping <= 0:
        raise InstabilityError(f"net damping {damping:.3g} is not positive (anti-damping regime)")
    return (gamma_m * nth + a_plus) / damping


def equilibrium_phonon(c: CoolingConfig):
    a_minus, a_plus = cooling_rates(c)
    return phonon_from_rates(a_minus, a_plus, c.gamma_m, c.nth)


def sideband_ratio(nbar, a_minus, a_plus):
    """Anti-Stokes/Stokes photon ratio nbar A- / ((nbar + 1) A+).

    ``nbar = inf`` gives the classical limit A- / A+.
    """
    if nbar < 0:
        raise ValidationError("nbar must be non-negative")
    if math.isinf(nbar):
        return a_minus / a_plus
    return nbar * a_minus / ((nbar + 1.0) * a_plus)


def low_field_ratio(c: CoolingConfig):
    """Ratio in the alpha -> 0 limit, where the mode sits at the bath occupation."""
    return c.nth / (c.nth + 1.0) * sideband_asymmetry(c)


def phonon_from_ratio(ratio, a_minus, a_plus):
    """Invert :func:`sideband_ratio` for the mean phonon number."""
    asym = a_minus / a_plus
    if not 0 <= ratio < asym:
        raise ValidationError(f"ratio must lie in [0, {asym:.6g}) for a finite occupation")
    return ratio / (asym - ratio)


def sweep(c: CoolingConfig, alphas):
    """Rows of (alpha, n_phonon, ratio, ratio_over_lowfield) for each pump strength."""
    r0 = low_field_ratio(c)
    rows = []
    for alpha in np.asarray(alphas, dtype=float):
        cc = c.with_alpha(float(alpha))
        if alpha == 0:
            n = c.nth
            ratio = r0
        else:
            a_minus, a_plus = cooling_rates(cc)
            n = phonon_from_rates(a_minus, a_plus, c.gamma_m, c.nth)
            ratio = sideband_ratio(n, a_minus, a_plus)
        rows.append((float(alpha), n, ratio, ratio / r0 if r0 > 0 else math.nan))
    return rows


def alpha_at_phonon(c: CoolingConfig, target, alpha_max=None, xtol=1e-12):
    """Pump strength at which the equilibrium occupation equals ``target``."""
    if alpha_max is None:
        alpha_max = 1.0
        while equilibrium_phonon(c.with_alpha(alpha_max)) > target:
            alpha_max *= 2.0
            if alpha_max > 1e12:
                raise ValidationError(f"occupation {target} is below the backaction floor")
    return brentq(lambda a: equilibrium_phonon(c.with_alpha(a)) - target, 0.0, alpha_max, xtol=xtol)


def alpha_at_ratio(c: CoolingConfig, target, alpha_max=None, xtol=1e-12):
    """Pump strength at which the measured sideband ratio equals ``target``."""

    def f(a):
        if a == 0:
            return low_field_ratio(c) - target
        a_minus, a_plus = cooling_rates(c.with_alpha(a))
        return sideband_ratio(phonon_from_rates(a_minus, a_plus, c.gamma_m, c.nth), a_minus, a_plus) - target

    if alpha_max is None:
        alpha_max = 1.0
        while f(alpha_max) > 0:
            alpha_max *= 2.0
            if alpha_max > 1e12:
                raise ValidationError(f"ratio {target} is below the backaction floor")
    return brentq(f, 0.0, alpha_max, xtol=xtol)
