"""Gravitational self-energy of a superposed cantilever and its collapse time.

Two uniform-sphere mass models are supported: the mass sits on atomic
nuclei of radius ``a`` (``nuclear-sphere``), or on spheres whose diameter
is the ground-state wavepacket size (``wavepacket``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import G, HBAR, SILICON_NUCLEAR_MASS
from .errors import DomainError, ValidationError
from .params import ground_state_size

NUCLEAR_RADIUS = 1e-15  # m
MODELS = ("nuclear-sphere", "wavepacket")


@dataclass(frozen=True)
class GravityModel:
    mass: float
    separation: float
    radius: float = NUCLEAR_RADIUS
    constituent_mass: float = SILICON_NUCLEAR_MASS
    model: str = "nuclear-sphere"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValidationError(f"unknown gravity model {self.model!r}")
        if not self.constituent_mass > 0:
            raise ValidationError("constituent mass must be positive")
        if self.mass < self.constituent_mass:
            raise ValidationError("total mass must be at least the constituent mass")
        if not self.radius > 0 or not self.separation > 0:
            raise ValidationError("radius and separation must be positive")


def delta_E_nuclei(g: GravityModel):
    """Self-energy 2 G m m1 (6/(5a) - 1/dx) of nuclear spheres, in joules.

    Only valid for non-overlapping spheres, dx >= 2a.
    """
    if g.separation < 2.0 * g.radius:
        raise DomainError(
            f"separation {g.separation:.3g} m is below 2a = {2 * g.radius:.3g} m; "
            "the uniform-sphere result needs dx >= 2a"
        )
    return 2.0 * G * g.mass * g.constituent_mass * (6.0 / (5.0 * g.radius) - 1.0 / g.separation)


def delta_E_wavepacket(mass, constituent_mass, x0, kappa):
    """Self-energy with sphere diameter x0 at the maximum separation sqrt(8) kappa x0."""
    if not kappa > 0:
        raise DomainError("kappa must be positive for a displaced superposition")
    energy = G * mass * constituent_mass / x0 * (24.0 / 5.0 - 1.0 / (math.sqrt(2.0) * kappa))
    if energy <= 0:
        raise DomainError(f"kappa = {kappa:.3g} puts the spheres below the contact regime of the model")
    return energy


def collapse_time(delta_e):
    """Collapse timescale hbar / dE in seconds."""
    if not delta_e > 0:
        raise DomainError(f"self-energy must be positive, got {delta_e!r}")
    return HBAR / delta_e


def collapse_report(mass, omega_c, kappa, radius=NUCLEAR_RADIUS, constituent_mass=SILICON_NUCLEAR_MASS):
    """Both models at the maximum separation for one device.

    Returns a list of dicts with the model name, self-energy, collapse
    time and the collapse time in units of the mechanical period.
    """
    x0 = ground_state_size(mass, omega_c)
    period = 2.0 * math.pi / omega_c
    separation = math.sqrt(8.0) * kappa * x0
    rows = []
    nuclear = GravityModel(mass, separation, radius, constituent_mass, "nuclear-sphere")
    for name, energy in (
        ("nuclear-sphere", lambda: delta_E_nuclei(nuclear)),
        ("wavepacket", lambda: delta_E_wavepacket(mass, constituent_mass, x0, kappa)),
    ):
        de = energy()
        tau = collapse_time(de)
        rows.append({"model": name, "delta_E_J": de, "tau_G_s": tau, "tau_over_period": tau / period})
    return rows
