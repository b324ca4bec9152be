"""Projected cantilever states and their Wigner functions.

Everything in this module uses dimensionless phase-space units with
hbar = m = omega_c = 1. A coherent amplitude alpha sits at
``(x, p) = (sqrt(2) Re alpha, sqrt(2) Im alpha)`` and the vacuum Wigner
function is ``exp(-x**2 - p**2) / pi``.

Grids are stored with the first axis along x and the second along p.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .dynamics import EvolvedAmplitudes, evolve_amplitudes, visibility_thermal
from .errors import GridError, ProjectionError, ResolutionError, ValidationError

SQRT2 = math.sqrt(2.0)
PROJECTION_FLOOR = 1e-12
NORMALIZATION_GATE = 1e-3
DEFAULT_POINTS = 512
DEFAULT_MARGIN = 6.0
SAMPLING_THRESHOLD = 20.0


def coherent_overlap(a, b):
    """<a|b> for coherent states with amplitudes ``a`` and ``b``."""
    return np.exp(-0.5 * abs(a) ** 2 - 0.5 * abs(b) ** 2 + np.conj(a) * b)


@dataclass(frozen=True)
class CatState:
    """Normalized superposition ``w0 |alpha0> + w1 |alpha1>``.

    ``phase`` is the relative phase between the branches before
    normalization, and ``p_proj`` the probability of the photon
    projection that produced the state (1 for states built by hand).
    """

    alpha0: complex
    alpha1: complex
    w0: complex
    w1: complex
    phase: float = 0.0
    p_proj: float = 1.0

    @property
    def trace(self):
        ov = coherent_overlap(self.alpha0, self.alpha1)
        return float(abs(self.w0) ** 2 + abs(self.w1) ** 2 + 2.0 * np.real(np.conj(self.w0) * self.w1 * ov))

    @property
    def max_amplitude(self):
        return max(abs(self.alpha0), abs(self.alpha1))

    @classmethod
    def coherent(cls, alpha):
        return cls(complex(alpha), complex(alpha), 1.0 + 0j, 0j)

    @classmethod
    def superposition(cls, alpha0, alpha1, phase=0.0):
        """Normalized ``|alpha0> + exp(i phase) |alpha1>``."""
        rel = complex(math.cos(phase), math.sin(phase))
        norm = 2.0 + 2.0 * np.real(rel * coherent_overlap(alpha0, alpha1))
        if norm < PROJECTION_FLOOR:
            raise ProjectionError("superposition has (near) zero norm")
        s = 1.0 / math.sqrt(norm)
        return cls(complex(alpha0), complex(alpha1), s + 0j, s * rel, phase)


def projection_probability(ev: EvolvedAmplitudes, theta):
    """Probability that the photon is found in ``|0,1> + e^{i theta}|1,0>``."""
    phase = ev.relative_phase + theta
    rel = complex(math.cos(phase), math.sin(phase))
    return 0.5 * (1.0 + float(np.real(rel * coherent_overlap(ev.phi0, ev.phi1))))


def project_photon(ev: EvolvedAmplitudes, theta=0.0):
    """Cantilever state conditioned on detecting the photon at one output.

    ``theta`` adds to the branch phase. The unnormalized state is
    ``(|phi0> + e^{i phase}|phi1>) / 2`` and its squared norm is the
    projection probability stored on the result.
    """
    phase = ev.relative_phase + theta
    p = projection_probability(ev, theta)
    if p < PROJECTION_FLOOR:
        raise ProjectionError(f"projection probability {p:.3g} is below {PROJECTION_FLOOR}; theta post-selects a null state")
    s = 0.5 / math.sqrt(p)
    rel = complex(math.cos(phase), math.sin(phase))
    return CatState(ev.phi0, ev.phi1, s + 0j, s * rel, phase, p)


def free_evolve(state: CatState, phase):
    """Harmonic evolution by ``omega_c t = phase`` with no photon coupling."""
    rot = complex(math.cos(phase), -math.sin(phase))
    return CatState(state.alpha0 * rot, state.alpha1 * rot, state.w0, state.w1, state.phase, state.p_proj)


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    nx: int
    p_min: float
    p_max: float
    np: int

    @classmethod
    def square(cls, half_width, n=DEFAULT_POINTS):
        return cls(-half_width, half_width, n, -half_width, half_width, n)

    @classmethod
    def for_amplitude(cls, max_amplitude, n=DEFAULT_POINTS, margin=DEFAULT_MARGIN):
        return cls.square(SQRT2 * max_amplitude + margin, n)

    @property
    def x(self):
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def p(self):
        return np.linspace(self.p_min, self.p_max, self.np)

    @property
    def dx(self):
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dp(self):
        return (self.p_max - self.p_min) / (self.np - 1)

    def refined(self, factor=2):
        return GridSpec(self.x_min, self.x_max, factor * (self.nx - 1) + 1, self.p_min, self.p_max, factor * (self.np - 1) + 1)


@dataclass
class WignerGrid:
    x: np.ndarray
    p: np.ndarray
    values: np.ndarray
    dx: float
    dp: float

    def trace(self):
        return float(np.sum(self.values) * self.dx * self.dp)

    def marginal_x(self):
        """Position density, integrating over p."""
        return np.sum(self.values, axis=1) * self.dp

    def marginal_p(self):
        return np.sum(self.values, axis=0) * self.dx

    @property
    def spec(self):
        return GridSpec(self.x[0], self.x[-1], len(self.x), self.p[0], self.p[-1], len(self.p))


def _cross_terms(alpha_j, alpha_k):
    """Parameters of the Wigner transform of ``|alpha_j><alpha_k|``.

    The transform is
    ``exp(-(x-xm)**2 - (p-pm)**2 + i kx x + i kp (p-pm) + i c) / pi``.
    Returns (xm, pm, kx, kp, c) with arrays broadcast over the inputs.
    """
    aj, bj = SQRT2 * np.real(alpha_j), SQRT2 * np.imag(alpha_j)
    ak, bk = SQRT2 * np.real(alpha_k), SQRT2 * np.imag(alpha_k)
    xm = 0.5 * (aj + ak)
    pm = 0.5 * (bj + bk)
    kx = bj - bk
    kp = ak - aj
    c = 0.5 * (ak * bk - aj * bj)
    return xm, pm, kx, kp, c


def coherent_cross_wigner(alpha_j, alpha_k, x, p):
    """Pointwise Wigner transform of ``|alpha_j><alpha_k|`` at broadcast (x, p)."""
    xm, pm, kx, kp, c = _cross_terms(alpha_j, alpha_k)
    return np.exp(-((x - xm) ** 2) - (p - pm) ** 2 + 1j * (kx * x + kp * (p - pm) + c)) / math.pi


def wigner_at(state: CatState, x, p):
    """Closed-form Wigner function of ``state`` at broadcast points."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    w00 = np.real(coherent_cross_wigner(state.alpha0, state.alpha0, x, p))
    w11 = np.real(coherent_cross_wigner(state.alpha1, state.alpha1, x, p))
    w01 = coherent_cross_wigner(state.alpha0, state.alpha1, x, p)
    return abs(state.w0) ** 2 * w00 + abs(state.w1) ** 2 * w11 + 2.0 * np.real(state.w0 * np.conj(state.w1) * w01)


def _separable_factors(alpha_j, alpha_k, x, p):
    """x- and p-factors whose outer product is the cross Wigner transform.

    ``alpha_j``/``alpha_k`` may be 1-d arrays; the factor matrices then
    have one column per entry.
    """
    xm, pm, kx, kp, c = _cross_terms(np.atleast_1d(alpha_j), np.atleast_1d(alpha_k))
    fx = np.exp(-((x[:, None] - xm) ** 2) + 1j * kx * x[:, None])
    gp = np.exp(-((p[:, None] - pm) ** 2) + 1j * kp * (p[:, None] - pm) + 1j * c)
    return fx, gp


def _check_normalization(grid: WignerGrid, half_width_hint):
    tr = grid.trace()
    if abs(tr - 1.0) > NORMALIZATION_GATE:
        raise GridError(f"grid normalization {tr:.6g} deviates from 1 by more than {NORMALIZATION_GATE}", half_width_hint)


def _rows(n, workers):
    bounds = np.linspace(0, n, max(1, min(workers, n)) + 1).astype(int)
    return [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def wigner_cat(state: CatState, grid: Optional[GridSpec] = None, workers=1):
    """Closed-form Wigner grid of a two-component cat state.

    Two Gaussian lobes at the branch amplitudes plus an oscillating
    interference term at their midpoint. Rows are evaluated
    independently, so the result does not depend on ``workers``.

    Raises
    ------
    GridError
        If the grid integral of W differs from 1 by more than 1e-3.
    """
    if grid is None:
        grid = GridSpec.for_amplitude(state.max_amplitude)
    x, p = grid.x, grid.p
    values = np.empty((len(x), len(p)))

    def fill(rows):
        values[rows] = wigner_at(state, x[rows, None], p[None, :])

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(fill, _rows(len(x), workers)))
    else:
        fill(slice(None))
    out = WignerGrid(x, p, values, grid.dx, grid.dp)
    _check_normalization(out, SQRT2 * state.max_amplitude + 5.0 / SQRT2 + 1.0)
    return out


def coherent_wavefunction(alpha):
    """Position wavefunction of ``|alpha>`` with the displacement-operator phase."""
    a = SQRT2 * np.real(alpha)
    b = SQRT2 * np.imag(alpha)

    def psi(x):
        x = np.asarray(x, dtype=float)
        return math.pi**-0.25 * np.exp(-0.5 * (x - a) ** 2 + 1j * b * x - 0.5j * a * b)

    return psi


def cat_wavefunction(state: CatState):
    psi0 = coherent_wavefunction(state.alpha0)
    psi1 = coherent_wavefunction(state.alpha1)
    return lambda x: state.w0 * psi0(x) + state.w1 * psi1(x)


def _wigner_quadrature(psi, x, p, step, reach):
    y = np.arange(-reach, reach + 0.5 * step, step)
    kernel = psi(x[:, None] - y[None, :]) * np.conj(psi(x[:, None] + y[None, :]))
    weights = np.full(len(y), step)
    weights[[0, -1]] *= 0.5
    phases = np.exp(2j * y[:, None] * p[None, :])
    return (kernel * weights) @ phases / math.pi


def wigner_numeric(psi: Callable, grid: GridSpec, step=0.05, reach=None, tol=1e-6):
    """Wigner grid by direct trapezoid quadrature of the defining integral.

    ``W(x, p) = (1/pi) * integral dy psi(x-y) conj(psi(x+y)) exp(2ipy)``
    for a pure state with position wavefunction ``psi``. The y-step is
    halved once and the two results compared as a convergence gate.

    Raises
    ------
    ResolutionError
        If halving the y-step moves any value by more than ``tol``.
    """
    x, p = grid.x, grid.p
    if reach is None:
        reach = grid.x_max - grid.x_min + 6.0
    coarse = _wigner_quadrature(psi, x, p, 2 * step, reach)
    fine = _wigner_quadrature(psi, x, p, step, reach)
    change = np.max(np.abs(fine - coarse))
    if change > tol:
        raise ResolutionError(f"halving the quadrature step changed W by {change:.3g} > {tol}")
    imag = np.max(np.abs(fine.imag))
    if imag > 1e-10:
        raise ResolutionError(f"Wigner quadrature left an imaginary residue of {imag:.3g}")
    return WignerGrid(x, p, np.ascontiguousarray(fine.real), grid.dx, grid.dp)


def default_thermal_grid(kappa, phase, nbar, n=DEFAULT_POINTS):
    ev = evolve_amplitudes(kappa, 0.0, phase)
    half = SQRT2 * max(abs(ev.phi0), abs(ev.phi1)) + DEFAULT_MARGIN * math.sqrt(2.0 * nbar + 1.0)
    return GridSpec.square(half, n)


def default_order(kappa, phase, nbar):
    """Gauss-Hermite order per axis that resolves the thermal integrand.

    The integrand in the scaled variable u = beta / sqrt(nbar) carries
    Gaussians of width ~1/sqrt(2 nbar) and fringes whose wavenumber
    grows with the branch separation.
    """
    sep = abs(kappa * (1 - complex(math.cos(phase), -math.sin(phase))))
    return int(max(16, math.ceil((24.0 + 6.0 * sep) * math.sqrt(nbar) + 4.0 * nbar + 8)))


def _thermal_nodes(nbar, order):
    u, w = np.polynomial.hermite.hermgauss(order)
    ur, ui = np.meshgrid(u, u, indexing="ij")
    weights = np.outer(w, w) / math.pi
    keep = weights > 1e-18 * weights.max()
    beta = math.sqrt(nbar) * (ur[keep] + 1j * ui[keep])
    return beta, weights[keep]


def _sampled_nodes(nbar, samples, seed):
    rng = np.random.Generator(np.random.Philox(key=seed))
    beta = math.sqrt(nbar / 2.0) * (rng.standard_normal(samples) + 1j * rng.standard_normal(samples))
    return beta, np.full(samples, 1.0 / samples)


def _branch_arrays(kappa, beta, phase, theta):
    rot = complex(math.cos(phase), -math.sin(phase))
    phi0 = beta * rot
    phi1 = kappa * (1 - rot) + beta * rot
    kerr = kappa**2 * (phase - math.sin(phase))
    cross = -np.imag(phi0 * np.conj(phi1))
    return phi0, phi1, kerr + cross + theta


def _thermal_sum(kappa, phase, theta, beta, weights, x, p, chunk):
    """Weighted sum of unnormalized projected Wigner functions and their traces."""
    values = np.zeros((len(x), len(p)))
    trace = 0.0
    for start in range(0, len(beta), chunk):
        b = beta[start:start + chunk]
        wt = weights[start:start + chunk]
        phi0, phi1, rel = _branch_arrays(kappa, b, phase, theta)
        # operator (|phi0> + e^{i rel}|phi1>)(h.c.) / 4
        f00, g00 = _separable_factors(phi0, phi0, x, p)
        f11, g11 = _separable_factors(phi1, phi1, x, p)
        f01, g01 = _separable_factors(phi0, phi1, x, p)
        c01 = 2.0 * np.exp(-1j * rel)
        fx = np.concatenate([f00, f11, f01 * c01], axis=1)
        fx *= np.tile(wt / (4.0 * math.pi), 3)
        gp = np.concatenate([g00, g11, g01], axis=1)
        values += np.real(fx @ gp.T)
        ov = coherent_overlap(phi0, phi1)
        trace += float(np.sum(wt * 0.5 * (1.0 + np.real(np.exp(1j * rel) * ov))))
    return values, trace


@dataclass
class ThermalWigner(WignerGrid):
    """Thermally averaged projected Wigner grid.

    ``p_proj`` is the ensemble-averaged projection probability that
    the grid was normalized by; ``order`` is the Gauss-Hermite order
    per axis (0 for the pure case, -1 for sampling).
    """

    p_proj: float = 1.0
    order: int = 0


def wigner_thermal(
    kappa,
    phase,
    theta=0.0,
    nbar=0.0,
    grid: Optional[GridSpec] = None,
    order=None,
    method="auto",
    samples=20000,
    seed=0,
    check_convergence=True,
    tol=1e-6,
):
    """Projected cantilever Wigner function for a thermal initial state.

    The unnormalized projected operators are averaged over the thermal
    coherent-state measure and the sum is normalized once at the end,
    so each initial amplitude is weighted by its projection
    probability, as in a post-selected ensemble.

    ``method`` is ``"quadrature"`` (tensor Gauss-Hermite in Re beta and
    Im beta), ``"sampling"`` (Monte Carlo over beta from a Philox stream
    keyed by ``seed``) or ``"auto"`` (sampling only above nbar = 20).

    Raises
    ------
    ResolutionError
        If raising the quadrature order by half moves W by more than
        ``tol`` on a subsampled grid.
    """
    if nbar < 0:
        raise ValidationError(f"nbar must be non-negative, got {nbar!r}")
    if kappa < 0:
        raise ValidationError(f"kappa must be non-negative, got {kappa!r}")
    if grid is None:
        grid = default_thermal_grid(kappa, phase, nbar)
    x, p = grid.x, grid.p
    chunk = max(1, int(2_000_000 // (3 * max(len(x), len(p)))))

    if nbar == 0:
        beta, weights, used = np.zeros(1, complex), np.ones(1), 0
    else:
        if method == "auto":
            method = "sampling" if nbar > SAMPLING_THRESHOLD else "quadrature"
        if method == "sampling":
            beta, weights = _sampled_nodes(nbar, samples, seed)
            used = -1
        elif method == "quadrature":
            used = order if order is not None else default_order(kappa, phase, nbar)
            if used < 8:
                raise ValidationError("quadrature order must be at least 8 per axis")
            beta, weights = _thermal_nodes(nbar, used)
        else:
            raise ValidationError(f"unknown thermal averaging method {method!r}")

    values, trace = _thermal_sum(kappa, phase, theta, beta, weights, x, p, chunk)
    if trace < PROJECTION_FLOOR:
        raise ProjectionError(f"ensemble projection probability {trace:.3g} is negligible")
    values /= trace

    if check_convergence and used > 0:
        xs, ps = x[:: max(1, len(x) // 64)], p[:: max(1, len(p) // 64)]
        hi_beta, hi_w = _thermal_nodes(nbar, used + used // 2)
        hi_vals, hi_trace = _thermal_sum(kappa, phase, theta, hi_beta, hi_w, xs, ps, chunk)
        lo_vals = values[:: max(1, len(x) // 64), :: max(1, len(p) // 64)]
        change = np.max(np.abs(hi_vals / hi_trace - lo_vals))
        if change > tol:
            raise ResolutionError(f"raising the quadrature order from {used} changed W by {change:.3g} > {tol}")

    out = ThermalWigner(x, p, values, grid.dx, grid.dp, p_proj=trace, order=used)
    _check_normalization(out, float(grid.x_max) * 1.5)
    return out


def thermal_projection_probability(kappa, phase, theta, nbar):
    """Closed-form ensemble projection probability (1 + v cos(kerr + theta)) / 2."""
    kerr = kappa**2 * (phase - math.sin(phase))
    return 0.5 * (1.0 + visibility_thermal(kappa, nbar, phase) * math.cos(kerr + theta))


def negativity_forms(grid: WignerGrid):
    """Both integral forms of the negativity: sum(|W| - W) and sum|W| - 1."""
    cell = grid.dx * grid.dp
    absolute = float(np.sum(np.abs(grid.values)) * cell)
    direct = float(np.sum(np.abs(grid.values) - grid.values) * cell)
    return direct, absolute - 1.0


def negativity(grid: WignerGrid):
    """Integrated magnitude of the negative part of W, as ``sum(|W| - W) dx dp``.

    Raises
    ------
    ValidationError
        If the grid integrates to something further than 1e-3 from 1.
    """
    tr = grid.trace()
    if abs(tr - 1.0) > NORMALIZATION_GATE:
        raise ValidationError(f"grid is not normalized (integral {tr:.6g})")
    return negativity_forms(grid)[0]


def converged_negativity(kappa, phase, theta=0.0, nbar=0.0, n=DEFAULT_POINTS, tol=1e-4, max_points=4097, **thermal_kw):
    """Negativity of the projected state with a grid-resolution gate.

    Starts on the default ``n``-point grid and halves the cell size until
    the change in N is below ``tol``. Returns ``(N, grid_spec)`` for the
    finest grid evaluated.

    Raises
    ------
    ResolutionError
        If the gate is not met before the grid exceeds ``max_points``.
    """
    spec = default_thermal_grid(kappa, phase, nbar, n)
    prev = negativity(wigner_thermal(kappa, phase, theta, nbar, spec, **thermal_kw))
    while True:
        spec = spec.refined()
        if spec.nx > max_points:
            raise ResolutionError(f"negativity not converged to {tol} below {max_points} points per axis")
        cur = negativity(wigner_thermal(kappa, phase, theta, nbar, spec, **thermal_kw))
        if abs(cur - prev) < tol:
            return cur, spec
        prev = cur
