"""Device inputs and the scalar quantities derived from them.

All quantities here are SI. The Wigner module works in dimensionless
phase-space units (hbar = m = omega_c = 1); conversion happens only at
the CLI boundary.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

from .constants import C, HBAR, K_B
from .errors import ConfigurationError, IngestionError, ValidationError

# config-file key -> PhysicalParams attribute
CONFIG_FIELDS = {
    "mass_kg": "mass",
    "omega_c_rad_s": "omega_c",
    "lambda_m": "wavelength",
    "cavity_length_m": "cavity_length",
    "round_trips": "round_trips",
    "finesse": "finesse",
    "q_factor": "q_factor",
    "bath_temp_k": "bath_temp",
    "mode_temp_k": "mode_temp",
}

ROUND_TRIP_RTOL = 1e-6


def _check_positive(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{name} must be a number, got {value!r}")
    if not math.isfinite(value) or value <= 0:
        raise ValidationError(f"{name} must be strictly positive and finite, got {value!r}")


@dataclass(frozen=True)
class PhysicalParams:
    """Raw device and experiment inputs.

    ``mass``, ``omega_c`` and ``wavelength`` are required; at least one
    of ``cavity_length`` and ``round_trips`` must be given. When both are
    given they must satisfy ``N = pi c / (L omega_c)`` to 1e-6.
    """

    mass: float
    omega_c: float
    wavelength: float
    cavity_length: Optional[float] = None
    round_trips: Optional[float] = None
    finesse: Optional[float] = None
    q_factor: Optional[float] = None
    bath_temp: Optional[float] = None
    mode_temp: Optional[float] = None

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if value is not None:
                _check_positive(f.name, value)
        if self.cavity_length is None and self.round_trips is None:
            raise ConfigurationError("one of cavity_length or round_trips is required")
        if self.cavity_length is not None and self.round_trips is not None:
            expected = round_trips_from_length(self.cavity_length, self.omega_c)
            if abs(self.round_trips - expected) > ROUND_TRIP_RTOL * expected:
                raise ConfigurationError(
                    f"round_trips={self.round_trips:.9g} is inconsistent with "
                    f"cavity_length (expects {expected:.9g})"
                )

    @property
    def omega_a(self):
        """Optical angular frequency 2 pi c / lambda."""
        return 2.0 * math.pi * C / self.wavelength

    @property
    def n_round_trips(self):
        if self.round_trips is not None:
            return self.round_trips
        return round_trips_from_length(self.cavity_length, self.omega_c)

    @classmethod
    def from_mapping(cls, data):
        unknown = set(data) - set(CONFIG_FIELDS)
        if unknown:
            raise ConfigurationError(f"unknown config fields: {sorted(unknown)}")
        kwargs = {CONFIG_FIELDS[k]: v for k, v in data.items() if v is not None}
        missing = [k for k, a in CONFIG_FIELDS.items() if a in ("mass", "omega_c", "wavelength") and a not in kwargs]
        if missing:
            raise ConfigurationError(f"missing required config fields: {missing}")
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path):
        text = Path(path).read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise IngestionError(exc.msg, line=exc.lineno) from exc
        if not isinstance(data, dict):
            raise ConfigurationError("config file must hold a JSON object")
        return cls.from_mapping(data)

    def to_mapping(self):
        return {k: getattr(self, a) for k, a in CONFIG_FIELDS.items()}


@dataclass(frozen=True)
class DerivedQuantities:
    x0: float
    kappa: float
    t_eid: Optional[float]
    nbar: Optional[float]
    finesse_required: float


def round_trips_from_length(cavity_length, omega_c):
    """Cavity round trips per mechanical period, pi c / (L omega_c)."""
    return math.pi * C / (cavity_length * omega_c)


def ground_state_size(mass, omega_c):
    """Ground-state wavepacket size x0 = sqrt(hbar / (m omega_c))."""
    _check_positive("mass", mass)
    _check_positive("omega_c", omega_c)
    return math.sqrt(HBAR / (mass * omega_c))


def kappa_from_length(mass, omega_c, wavelength, cavity_length):
    omega_a = 2.0 * math.pi * C / wavelength
    return omega_a / (cavity_length * omega_c) * math.sqrt(HBAR / (2.0 * mass * omega_c))


def kappa_from_round_trips(mass, omega_c, wavelength, round_trips):
    return math.sqrt(2.0) * round_trips * ground_state_size(mass, omega_c) / wavelength


def coupling(params):
    """Dimensionless optomechanical coupling constant of ``params``."""
    if params.round_trips is not None:
        return kappa_from_round_trips(params.mass, params.omega_c, params.wavelength, params.round_trips)
    return kappa_from_length(params.mass, params.omega_c, params.wavelength, params.cavity_length)


def t_eid(omega_c, q_factor):
    """Characteristic decoherence temperature hbar omega_c Q / k_B."""
    _check_positive("omega_c", omega_c)
    _check_positive("q_factor", q_factor)
    return HBAR * omega_c * q_factor / K_B


def mean_phonon(temperature, omega_c):
    """Bose occupation 1 / (exp(hbar omega_c / k_B T) - 1); zero at T = 0."""
    if isinstance(temperature, bool) or not isinstance(temperature, (int, float)):
        raise ValidationError(f"temperature must be a number, got {temperature!r}")
    if temperature < 0 or not math.isfinite(temperature):
        raise ValidationError(f"temperature must be non-negative, got {temperature!r}")
    _check_positive("omega_c", omega_c)
    if temperature == 0:
        return 0.0
    x = HBAR * omega_c / (K_B * temperature)
    if x > 700:
        return 0.0
    return 1.0 / math.expm1(x)


def temperature_for_phonon(nbar, omega_c):
    """Inverse of :func:`mean_phonon`."""
    if nbar < 0:
        raise ValidationError(f"nbar must be non-negative, got {nbar!r}")
    if nbar == 0:
        return 0.0
    return HBAR * omega_c / (K_B * math.log1p(1.0 / nbar))


def finesse_required(wavelength, x0):
    """Finesse at which ring-down matches the needed round trips, lambda / (2 x0)."""
    return wavelength / (2.0 * x0)


def derive_quantities(params):
    x0 = ground_state_size(params.mass, params.omega_c)
    return DerivedQuantities(
        x0=x0,
        kappa=coupling(params),
        t_eid=None if params.q_factor is None else t_eid(params.omega_c, params.q_factor),
        nbar=None if params.mode_temp is None else mean_phonon(params.mode_temp, params.omega_c),
        finesse_required=finesse_required(params.wavelength, x0),
    )
