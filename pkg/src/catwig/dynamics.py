"""Closed-form photon + cantilever evolution and interference visibility.

Phases are passed as the dimensionless product omega_c * t. The global
optical phase exp(-i omega_a t) multiplies both branches equally and is
unobservable in every quantity computed here, so it is dropped.

The exponents use ``1 - cos(x) = 2 sin(x/2)**2`` to stay accurate near
the revival where the two terms nearly cancel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .constants import K_B
from .errors import ValidationError


def one_minus_cos(phase):
    return 2.0 * np.sin(0.5 * np.asarray(phase, dtype=float)) ** 2


def _scalar_or_array(x):
    x = np.asarray(x)
    return x.item() if x.ndim == 0 else x


@dataclass(frozen=True)
class EvolvedAmplitudes:
    """Coherent amplitudes of the two cantilever branches at one instant.

    ``phi0`` is the branch with no photon in the cantilever arm,
    ``phi1`` the displaced branch. The relative branch phase is
    ``kerr_phase + cross_phase``.
    """

    phi0: complex
    phi1: complex
    kerr_phase: float
    cross_phase: float

    @property
    def relative_phase(self):
        return self.kerr_phase + self.cross_phase


def evolve_amplitudes(kappa, beta, phase):
    if kappa < 0:
        raise ValidationError(f"kappa must be non-negative, got {kappa!r}")
    rot = complex(math.cos(phase), -math.sin(phase))
    beta = complex(beta)
    phi0 = beta * rot
    phi1 = kappa * (1.0 - rot) + beta * rot
    kerr = kappa**2 * (phase - math.sin(phase))
    cross = -(phi0 * phi1.conjugate()).imag
    return EvolvedAmplitudes(phi0, phi1, kerr, cross)


def visibility_pure(kappa, phase):
    """Fringe visibility for a cantilever starting in a coherent state."""
    if kappa < 0:
        raise ValidationError(f"kappa must be non-negative, got {kappa!r}")
    return _scalar_or_array(np.exp(-(kappa**2) * one_minus_cos(phase)))


def visibility_thermal(kappa, nbar, phase):
    """Visibility for a thermal initial state with mean phonon number ``nbar``."""
    if kappa < 0:
        raise ValidationError(f"kappa must be non-negative, got {kappa!r}")
    if nbar < 0:
        raise ValidationError(f"nbar must be non-negative, got {nbar!r}")
    return _scalar_or_array(np.exp(-(kappa**2) * (2.0 * nbar + 1.0) * one_minus_cos(phase)))


def visibility_classical(params, temperature, phase):
    """High-temperature (hbar-free) visibility of a classical cantilever.

    ``temperature`` equal to zero gives visibility one at all phases.
    """
    if temperature < 0:
        raise ValidationError(f"temperature must be non-negative, got {temperature!r}")
    scale = (2.0 * params.n_round_trips / params.wavelength) ** 2
    variance = K_B * temperature / (params.mass * params.omega_c**2)
    return _scalar_or_array(np.exp(-variance * scale * one_minus_cos(phase)))


def entropy_from_visibility(v):
    """Von Neumann entropy (bits) of the photon given the visibility.

    Uses the closed form in ``v``; the endpoint values are the
    continuous limits, S(1) = 0 and S(0) = 1.
    """
    arr = np.asarray(v, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
        raise ValidationError("visibility must lie in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        s = 1.0 + 0.5 * arr * np.log2((1.0 - arr) / (1.0 + arr)) - 0.5 * np.log2(1.0 - arr**2)
    s = np.where(arr == 1.0, 0.0, s)
    return _scalar_or_array(s)


def binary_entropy(p):
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(p * np.log2(p) + (1 - p) * np.log2(1 - p))
    return _scalar_or_array(np.where((p == 0) | (p == 1), 0.0, h))


def state_separation(kappa, x0, phase):
    """Position-space distance (same units as ``x0``) between the branches."""
    return _scalar_or_array(math.sqrt(2.0) * x0 * kappa * one_minus_cos(phase))


def revival_half_width(kappa, nbar):
    """Half-width in omega_c t of the thermal revival peak at v = 1/2.

    Found by root bracketing on the right flank of the peak at 2 pi.
    """
    if kappa <= 0:
        raise ValidationError("kappa must be positive for a finite revival width")

    def f(delta):
        return visibility_thermal(kappa, nbar, 2.0 * math.pi + delta) - 0.5

    if f(math.pi) > 0:
        raise ValidationError("visibility never drops to 1/2; revival peak has no half-width")
    return brentq(f, 0.0, math.pi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
