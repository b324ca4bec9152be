"""Environmentally induced decoherence of the cantilever superposition.

The revival-peak damping uses a constant-rate envelope exp(-t/tau_dec)
at the maximum-separation timescale. Exact open-system treatments
lengthen the coherence time by a factor that is carried here as the
correction factor ``chi`` (8/3 for the published exact results).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .constants import HBAR, K_B
from .dynamics import visibility_thermal
from .errors import CatwigError, ValidationError
from .wigner import CatState, GridSpec, WignerGrid, _check_normalization, coherent_cross_wigner, coherent_overlap
from .params import ground_state_size

EXACT_CORRECTION = 8.0 / 3.0
IDENTITY_RTOL = 1e-9


class MarkovianValidityWarning(UserWarning):
    """Parameters leave the weak-coupling, high-temperature bath regime."""


@dataclass(frozen=True)
class DecoherenceParams:
    """Bath and device parameters for the decoherence timescale.

    ``mass`` and ``omega_c`` only enter through the diffusion form of the
    timescale and cancel from the result; they default to the ideal
    device (1e-12 kg, 2 pi x 1 kHz).
    """

    q_factor: float
    bath_temp: float
    kappa: float
    omega_c: float = 2.0 * math.pi * 1e3
    chi: float = 1.0
    mass: float = 1e-12

    def __post_init__(self):
        for name in ("q_factor", "bath_temp", "omega_c", "chi", "mass"):
            value = getattr(self, name)
            if not value > 0 or not math.isfinite(value):
                raise ValidationError(f"{name} must be strictly positive, got {value!r}")
        if self.kappa < 0:
            raise ValidationError(f"kappa must be non-negative, got {self.kappa!r}")

    @property
    def gamma(self):
        """Mechanical damping rate omega_c / Q."""
        return self.omega_c / self.q_factor

    @property
    def diffusion(self):
        """Momentum diffusion coefficient 2 m gamma k_B T_b."""
        return 2.0 * self.mass * self.gamma * K_B * self.bath_temp

    @property
    def t_eid(self):
        return HBAR * self.omega_c * self.q_factor / K_B

    @property
    def separation(self):
        """Maximum branch separation sqrt(8) kappa x0 in metres."""
        return math.sqrt(8.0) * self.kappa * ground_state_size(self.mass, self.omega_c)


def markovian_warnings(p: DecoherenceParams):
    if p.q_factor < 100:
        warnings.warn(f"Q = {p.q_factor:g} < 100: weak-coupling assumption is doubtful", MarkovianValidityWarning, stacklevel=3)
    if K_B * p.bath_temp < 10 * HBAR * p.omega_c:
        warnings.warn("k_B T_b < 10 hbar omega_c: high-temperature bath assumption is doubtful", MarkovianValidityWarning, stacklevel=3)


def tau_dec(p: DecoherenceParams) -> Optional[float]:
    """Superposition lifetime in seconds, scaled by ``p.chi``.

    Evaluates both the diffusion form hbar^2 / (D dx^2) and the
    closed form hbar Q / (16 k_B T_b kappa^2) and checks they agree.
    Returns None when kappa is zero: with no displacement there is no
    superposition to decohere.
    """
    markovian_warnings(p)
    if p.kappa == 0:
        return None
    diffusive = HBAR**2 / (p.diffusion * p.separation**2)
    closed = HBAR * p.q_factor / (16.0 * K_B * p.bath_temp * p.kappa**2)
    if abs(diffusive - closed) > IDENTITY_RTOL * closed:
        raise CatwigError(f"decoherence timescale forms disagree: {diffusive!r} vs {closed!r}")
    return p.chi * closed


def decoherence_rate(p: DecoherenceParams):
    """1 / tau_dec written through T_EID: 16 kappa^2 omega_c (T_b / T_EID) / chi."""
    return 16.0 * p.kappa**2 * p.omega_c * (p.bath_temp / p.t_eid) / p.chi


def envelope(p: DecoherenceParams, t):
    """Damping factor exp(-t / tau_dec); identically one when kappa = 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValidationError("time must be non-negative")
    tau = tau_dec(p)
    out = np.ones_like(t) if tau is None else np.exp(-t / tau)
    return out.item() if out.ndim == 0 else out


def revival_visibility(kappa, nbar, p: DecoherenceParams, t):
    """Thermal visibility at time ``t`` (seconds) times the decoherence envelope."""
    t = np.asarray(t, dtype=float)
    out = np.asarray(visibility_thermal(kappa, nbar, p.omega_c * t)) * envelope(p, t)
    return out.item() if out.ndim == 0 else out


def wigner_decohered(state: CatState, p: DecoherenceParams, t, grid: Optional[GridSpec] = None):
    """Cat Wigner grid with the interference term damped by exp(-t / tau_dec).

    The Gaussian lobes are untouched; the result is renormalized to
    unit integral.
    """
    if grid is None:
        grid = GridSpec.for_amplitude(state.max_amplitude)
    d = envelope(p, t)
    x, p_ax = grid.x[:, None], grid.p[None, :]
    lobes = abs(state.w0) ** 2 * np.real(coherent_cross_wigner(state.alpha0, state.alpha0, x, p_ax))
    lobes += abs(state.w1) ** 2 * np.real(coherent_cross_wigner(state.alpha1, state.alpha1, x, p_ax))
    coeff = state.w0 * np.conj(state.w1)
    fringes = 2.0 * np.real(coeff * coherent_cross_wigner(state.alpha0, state.alpha1, x, p_ax))
    norm = abs(state.w0) ** 2 + abs(state.w1) ** 2 + d * 2.0 * np.real(coeff * coherent_overlap(state.alpha1, state.alpha0))
    out = WignerGrid(grid.x, grid.p, (lobes + d * fringes) / norm, grid.dx, grid.dp)
    _check_normalization(out, math.sqrt(2.0) * state.max_amplitude + 5.0)
    return out


def dimensionless_params(kappa, bath_over_t_eid, chi=1.0):
    """DecoherenceParams in units omega_c = 1 for a bath at a fraction of T_EID.

    Used for the dimensionless phase-space pictures, where time is
    measured as omega_c t.
    """
    q = 1e7
    omega_c = 1.0
    t_eid = HBAR * omega_c * q / K_B
    return DecoherenceParams(q_factor=q, bath_temp=bath_over_t_eid * t_eid, kappa=kappa, omega_c=omega_c, chi=chi)
