"""Optomechanical device catalog: ingestion, derived couplings, ranking.

A catalog file is a JSON array of objects. Each object has a unique
``label``, an optional free-text ``provenance`` and any of the SI config
fields (``mass_kg``, ``omega_c_rad_s``, ...). Missing or null fields are
allowed; derived quantities are filled in only when their inputs are
present.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from .constants import KAPPA_THRESHOLD
from .errors import CatwigError, IngestionError
from .params import CONFIG_FIELDS, PhysicalParams, coupling, ground_state_size, t_eid

DEFAULT_WAVELENGTH = 600e-9
RECORD_KEYS = ("label", "provenance", *CONFIG_FIELDS)


@dataclass
class DeviceRecord:
    label: str
    values: dict = field(default_factory=dict)
    provenance: str = ""
    kappa: Optional[float] = None
    t_eid: Optional[float] = None
    line: Optional[int] = None

    def get(self, key):
        return self.values.get(key)

    def params(self, wavelength=None):
        """PhysicalParams for this device, or None if inputs are insufficient.

        ``wavelength`` overrides the record's own ``lambda_m``.
        """
        data = {k: v for k, v in self.values.items() if v is not None}
        if wavelength is not None:
            data["lambda_m"] = wavelength
        required = ("mass_kg", "omega_c_rad_s", "lambda_m")
        if any(k not in data for k in required):
            return None
        if "cavity_length_m" not in data and "round_trips" not in data:
            return None
        return PhysicalParams.from_mapping(data)

    def to_mapping(self):
        out = {"label": self.label, "provenance": self.provenance}
        out.update({k: self.values.get(k) for k in CONFIG_FIELDS})
        return out


def _records_with_lines(text):
    """Yield (object, line) for each element of a top-level JSON array."""
    decoder = json.JSONDecoder()

    def line_of(pos):
        return text.count("\n", 0, pos) + 1

    def skip_ws(pos):
        while pos < len(text) and text[pos] in " \t\r\n":
            pos += 1
        return pos

    try:
        pos = skip_ws(0)
        if pos == len(text):
            return
        if text[pos] != "[":
            raise IngestionError("catalog must be a JSON array of device objects", line_of(pos))
        pos = skip_ws(pos + 1)
        if pos < len(text) and text[pos] == "]":
            return
        while True:
            start = pos
            obj, pos = decoder.raw_decode(text, pos)
            yield obj, line_of(start)
            pos = skip_ws(pos)
            if pos < len(text) and text[pos] == ",":
                pos = skip_ws(pos + 1)
                continue
            if pos < len(text) and text[pos] == "]":
                break
            raise IngestionError("expected ',' or ']' between catalog entries", line_of(pos))
    except json.JSONDecodeError as exc:
        raise IngestionError(exc.msg, exc.lineno) from exc


def _number(value, key, line):
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise IngestionError(f"field {key!r} must be a finite number, got {value!r}", line)
    if value <= 0:
        raise IngestionError(f"field {key!r} must be strictly positive, got {value!r}", line)
    return float(value)


def _derive(record: DeviceRecord, wavelength):
    try:
        params = record.params(None if record.get("lambda_m") is not None else wavelength)
        record.kappa = None if params is None else coupling(params)
    except CatwigError as exc:
        raise IngestionError(f"device {record.label!r}: {exc}", record.line) from exc
    omega, q = record.get("omega_c_rad_s"), record.get("q_factor")
    record.t_eid = None if omega is None or q is None else t_eid(omega, q)


def parse_catalog(text, wavelength=DEFAULT_WAVELENGTH):
    records = []
    seen = {}
    for obj, line in _records_with_lines(text):
        if not isinstance(obj, dict):
            raise IngestionError("catalog entries must be JSON objects", line)
        unknown = set(obj) - set(RECORD_KEYS)
        if unknown:
            raise IngestionError(f"unknown fields {sorted(unknown)}", line)
        label = obj.get("label")
        if not isinstance(label, str) or not label:
            raise IngestionError("each device needs a non-empty string label", line)
        if label in seen:
            raise IngestionError(f"duplicate label {label!r} (first defined on line {seen[label]})", line)
        seen[label] = line
        values = {k: _number(obj.get(k), k, line) for k in CONFIG_FIELDS}
        rec = DeviceRecord(label, values, obj.get("provenance") or "", line=line)
        _derive(rec, wavelength)
        records.append(rec)
    return records


def load_catalog(path=None, wavelength=DEFAULT_WAVELENGTH):
    """Read a catalog file; ``None`` loads the shipped device list.

    ``wavelength`` is used for the coupling of records without their own
    ``lambda_m``.
    """
    if path is None:
        text = resources.files("catwig").joinpath("data/devices.json").read_text()
    else:
        text = Path(path).read_text()
    return parse_catalog(text, wavelength)


def serialize(records):
    return json.dumps([r.to_mapping() for r in records], indent=2) + "\n"


def is_distinguishable(kappa):
    """Whether the single-photon displacement resolves the branches (inclusive threshold)."""
    return None if kappa is None else kappa >= KAPPA_THRESHOLD


def rank_devices(records, wavelength=DEFAULT_WAVELENGTH):
    """Rows sorted by coupling at ``wavelength``, strongest first, unknowns last.

    ``distinguishable`` is ``kappa >= 1/sqrt(2)`` (inclusive) or None when
    the coupling cannot be computed.
    """
    rows = []
    for rec in records:
        params = rec.params(wavelength)
        kappa = None if params is None else coupling(params)
        omega, mass = rec.get("omega_c_rad_s"), rec.get("mass_kg")
        rows.append({
            "label": rec.label,
            "kappa": kappa,
            "distinguishable": is_distinguishable(kappa),
            "t_eid_k": rec.t_eid,
            "x0_m": None if omega is None or mass is None else ground_state_size(mass, omega),
            "finesse": rec.get("finesse"),
        })
    rows.sort(key=lambda r: (r["kappa"] is None, -(r["kappa"] or 0.0)))
    return rows
