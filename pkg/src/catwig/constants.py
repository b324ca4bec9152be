"""Pinned physical constants (SI, CODATA 2018).

Every module reads constants from here so that values cannot drift
between modules. ``constants_hash`` fingerprints the table and is what
``catwig --version`` prints.
"""

import hashlib
import json
import math

CONSTANTS = {
    "hbar": 1.054571818e-34,  # J s
    "k_B": 1.380649000e-23,  # J/K
    "G": 6.674300000e-11,  # m^3 kg^-1 s^-2
    "c": 2.997924580e08,  # m/s
}

HBAR = CONSTANTS["hbar"]
K_B = CONSTANTS["k_B"]
G = CONSTANTS["G"]
C = CONSTANTS["c"]

# nuclear mass of silicon-28, used as the default constituent mass
SILICON_NUCLEAR_MASS = 4.7e-26  # kg

# single-photon distinguishability threshold on the coupling constant
KAPPA_THRESHOLD = 1.0 / math.sqrt(2.0)


def constants_hash():
    """SHA-256 of the canonical JSON form of the constants table."""
    blob = json.dumps(CONSTANTS, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("ascii")).hexdigest()
