"""Monte-Carlo emulator of the two-detector photon-counting experiment.

Each photon leaves the cavity at an exponentially distributed phase
omega_c t (ring-down rate N/F per radian) and clicks one of the two
output detectors with probabilities (1 +/- v cos(theta + phi)) / 2,
where v and the fringe offset phi come from a visibility model.
Photons still in the cavity after two mechanical periods are lost.

Random numbers come from Philox streams keyed by the run seed; chunk
``k`` of ``CHUNK`` photons uses counter block ``k``, so a run is the same
for any number of worker threads.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import visibility_pure, visibility_thermal
from .errors import EstimationError, ValidationError

CHUNK = 1 << 14
MAX_PHASE = 4.0 * math.pi
MIN_RECORDS = 100
PLUS, MINUS, LOST = 1, -1, 0
PORT_NAMES = {PLUS: "plus", MINUS: "minus", LOST: "lost"}


def click_probabilities(v, fringe_phase):
    """Detector probabilities (p_plus, p_minus) for visibility ``v``."""
    v = np.asarray(v, dtype=float)
    if np.any(v < 0) or np.any(v > 1):
        raise ValidationError("visibility must lie in [0, 1]")
    p_plus = 0.5 * (1.0 + v * np.cos(fringe_phase))
    p_minus = 1.0 - p_plus
    if np.ndim(p_plus) == 0:
        return float(p_plus), float(p_minus)
    return p_plus, p_minus


def photon_survival(finesse, round_trips, phase):
    """Fraction of photons still in the cavity at ``phase`` = omega_c t."""
    if not finesse > 0 or not round_trips > 0:
        raise ValidationError("finesse and round_trips must be positive")
    out = np.exp(-(round_trips / finesse) * np.asarray(phase, dtype=float))
    return out.item() if out.ndim == 0 else out


@dataclass(frozen=True)
class VisibilityModel:
    """Source of v(phase) and the fringe offset for the emulator.

    ``kind`` is ``pure``, ``thermal`` or ``decohered``. For ``decohered``,
    ``omega_tau_dec`` is the decoherence time in units of 1/omega_c.
    """

    kind: str
    kappa: float
    nbar: float = 0.0
    omega_tau_dec: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("pure", "thermal", "decohered", "none"):
            raise ValidationError(f"unknown visibility model {self.kind!r}")
        if self.kappa < 0 or self.nbar < 0:
            raise ValidationError("kappa and nbar must be non-negative")
        if self.kind == "decohered" and not (self.omega_tau_dec and self.omega_tau_dec > 0):
            raise ValidationError("decohered model needs a positive omega_tau_dec")

    @classmethod
    def from_decoherence(cls, kappa, nbar, params):
        from .decoherence import tau_dec

        tau = tau_dec(params)
        return cls("decohered", kappa, nbar, math.inf if tau is None else params.omega_c * tau)

    def visibility(self, phase):
        phase = np.asarray(phase, dtype=float)
        if self.kind == "none":
            return np.zeros_like(phase)
        if self.kind == "pure":
            return np.asarray(visibility_pure(self.kappa, phase))
        v = np.asarray(visibility_thermal(self.kappa, self.nbar, phase))
        if self.kind == "decohered":
            v = v * np.exp(-phase / self.omega_tau_dec)
        return v

    def fringe_offset(self, phase):
        phase = np.asarray(phase, dtype=float)
        return self.kappa**2 * (phase - np.sin(phase))


@dataclass(frozen=True)
class TimeBins:
    """Exit-phase bins of width 2 pi / per_period centred on multiples of the width."""

    per_period: int = 32

    @property
    def width(self):
        return 2.0 * math.pi / self.per_period

    def index(self, phase):
        return np.floor(np.asarray(phase) / self.width + 0.5).astype(np.int64)

    def center(self, index):
        return index * self.width

    def at(self, phase):
        """Index of the bin containing ``phase``."""
        return int(self.index(phase))


@dataclass(frozen=True)
class ClickRecord:
    index: int
    seed: int
    exit_phase: float
    theta: float
    port: str
    survival: float


@dataclass
class ClickRecords:
    """Column arrays of one simulated run, in photon-index order."""

    seed: int
    exit_phase: np.ndarray
    theta: np.ndarray
    port: np.ndarray
    survival: np.ndarray
    bins: TimeBins

    def __len__(self):
        return len(self.port)

    def __iter__(self):
        for i in range(len(self)):
            yield ClickRecord(i, self.seed, float(self.exit_phase[i]), float(self.theta[i]), PORT_NAMES[int(self.port[i])], float(self.survival[i]))

    @property
    def bin_index(self):
        return self.bins.index(self.exit_phase)

    @property
    def detected(self):
        return self.port != LOST

    def in_bin(self, index):
        return self.detected & (self.bin_index == index)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "seed", "exit_phase", "bin", "theta", "port", "survival"])
        bins = self.bin_index
        for i in range(len(self)):
            w.writerow([
                i,
                self.seed,
                repr(float(self.exit_phase[i])),
                int(bins[i]),
                repr(float(self.theta[i])),
                PORT_NAMES[int(self.port[i])],
                repr(float(self.survival[i])),
            ])
        return buf.getvalue()


def _chunk_draws(seed, chunk_index, count, scale):
    rng = np.random.Generator(np.random.Philox(key=seed, counter=chunk_index << 192))
    return rng.exponential(scale, count), rng.random(count)


def simulate_run(
    seed,
    photons,
    model: VisibilityModel,
    finesse,
    round_trips,
    theta_points=16,
    bins: Optional[TimeBins] = None,
    workers=1,
):
    """Emulate ``photons`` single-photon shots and return their click records.

    Within each exit-phase bin the projection phase theta steps through
    a uniform grid of ``theta_points`` values in photon order.
    """
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed < 2**64:
        raise ValidationError("seed must be an unsigned 64-bit integer")
    if photons < 1:
        raise ValidationError("photon count must be at least 1")
    if theta_points < 2:
        raise ValidationError("theta grid needs at least two points")
    bins = bins or TimeBins()
    scale = finesse / round_trips
    seed = int(seed)
    n_chunks = -(-photons // CHUNK)
    sizes = [min(CHUNK, photons - k * CHUNK) for k in range(n_chunks)]

    def draw(k):
        return _chunk_draws(seed, k, sizes[k], scale)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(draw, range(n_chunks)))
    else:
        parts = [draw(k) for k in range(n_chunks)]
    exit_phase = np.concatenate([p[0] for p in parts])
    uniforms = np.concatenate([p[1] for p in parts])

    # rank of each photon within its bin, in photon order
    bin_idx = bins.index(exit_phase)
    order = np.argsort(bin_idx, kind="stable")
    sorted_bins = bin_idx[order]
    starts = np.searchsorted(sorted_bins, sorted_bins, side="left")
    rank = np.empty(photons, dtype=np.int64)
    rank[order] = np.arange(photons) - starts
    grid = 2.0 * math.pi * np.arange(theta_points) / theta_points
    theta = grid[rank % theta_points]

    v = model.visibility(exit_phase)
    p_plus, _ = click_probabilities(v, theta + model.fringe_offset(exit_phase))
    port = np.where(uniforms < p_plus, PLUS, MINUS).astype(np.int8)
    lost = exit_phase >= MAX_PHASE
    port[lost] = LOST
    survival = photon_survival(finesse, round_trips, exit_phase)
    return ClickRecords(seed, exit_phase, theta, port, survival, bins)


@dataclass(frozen=True)
class VisibilityEstimate:
    v: float
    stderr: float
    n: float


def fit_visibility(theta, sign, weights=None):
    """Least-squares fit of the port asymmetry to a cos(theta) + b sin(theta).

    ``sign`` is +1 for the plus port and -1 for the minus port. The
    fitted amplitude sqrt(a**2 + b**2), clamped to [0, 1], is the
    visibility; its standard error comes from the fit covariance.
    """
    theta = np.asarray(theta, dtype=float)
    s = np.asarray(sign, dtype=float)
    w = np.ones_like(s) if weights is None else np.asarray(weights, dtype=float)
    n = float(np.sum(w))
    if len(s) < MIN_RECORDS and n < MIN_RECORDS:
        raise EstimationError(f"need at least {MIN_RECORDS} records, got {len(s)}")
    X = np.column_stack([np.cos(theta), np.sin(theta)])
    xtwx = X.T @ (X * w[:, None])
    if np.linalg.cond(xtwx) > 1e8:
        raise EstimationError("theta values do not span a fringe; visibility is not identifiable")
    coef = np.linalg.solve(xtwx, X.T @ (w * s))
    resid = s - X @ coef
    sigma2 = float(np.sum(w * resid**2) / max(n - 2.0, 1.0))
    cov = sigma2 * np.linalg.inv(xtwx)
    amp = float(math.hypot(*coef))
    if amp > 0:
        g = coef / amp
        var = float(g @ cov @ g)
    else:
        var = 0.5 * float(np.trace(cov))
    return VisibilityEstimate(min(max(amp, 0.0), 1.0), math.sqrt(max(var, 0.0)), n)


def estimate_visibility(records: ClickRecords, phase):
    """Visibility estimate from the detected records in the bin holding ``phase``."""
    mask = records.in_bin(records.bins.at(phase))
    return fit_visibility(records.theta[mask], records.port[mask])


def bin_table(records: ClickRecords):
    """Per-bin rows (bin, phase, count, v_hat, stderr, mean survival).

    Bins with too few records for a fit get NaN estimates.
    """
    rows = []
    idx = records.bin_index
    det = records.detected
    for b in np.unique(idx[det]):
        mask = det & (idx == b)
        try:
            est = fit_visibility(records.theta[mask], records.port[mask])
            v, se = est.v, est.stderr
        except EstimationError:
            v, se = math.nan, math.nan
        rows.append((int(b), records.bins.center(int(b)), int(mask.sum()), v, se, float(records.survival[mask].mean())))
    return rows


def bin_survival(records: ClickRecords, phase):
    """Mean survival weight of the detected records in the bin holding ``phase``.

    Survival is exactly one at t = 0, so this is the survival-weighted
    event rate of that bin relative to the t ~ 0 rate.
    """
    here = records.in_bin(records.bins.at(phase))
    if not here.any():
        raise EstimationError("no detected records in the requested bin")
    return float(records.survival[here].mean())


def ringdown_survival(records: ClickRecords, phase):
    """Fraction of photons left in the cavity at ``phase``, from the exit times.

    Maximum-likelihood exponential rate with right-censoring at two
    periods; returns (estimate, standard error).
    """
    t = np.minimum(records.exit_phase, MAX_PHASE)
    events = int(np.sum(records.detected))
    if events == 0:
        raise EstimationError("no photon left the cavity")
    rate = events / float(np.sum(t))
    est = math.exp(-rate * phase)
    return est, est * phase * rate / math.sqrt(events)


def empirical_survival(records: ClickRecords, phase):
    """Fraction of all photons whose exit phase exceeds ``phase``."""
    return float(np.mean(records.exit_phase > phase))
