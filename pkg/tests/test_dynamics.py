import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from catwig.constants import HBAR, K_B
from catwig.dynamics import (
    binary_entropy,
    entropy_from_visibility,
    evolve_amplitudes,
    revival_half_width,
    state_separation,
    visibility_classical,
    visibility_pure,
    visibility_thermal,
)
from catwig.errors import ValidationError
from catwig.params import PhysicalParams, coupling, temperature_for_phonon

KAPPA_C = 1 / math.sqrt(2)
DEVICE_J = PhysicalParams(1e-12, 2 * math.pi * 500, 600e-9, round_trips=2e6, finesse=2e6)

kappas = st.floats(0.0, 3.0)
phases = st.floats(-20.0, 20.0)


def test_evolve_examples():
    ev = evolve_amplitudes(1.0, 0.0, math.pi)
    assert abs(ev.phi0) < 1e-15
    assert ev.phi1 == pytest.approx(2.0, abs=1e-15)
    assert ev.kerr_phase == pytest.approx(math.pi, abs=1e-15)

    ev = evolve_amplitudes(1.3, 0.4 - 0.2j, 0.0)
    assert ev.phi0 == ev.phi1 == 0.4 - 0.2j
    assert ev.kerr_phase == 0.0 and ev.cross_phase == 0.0

    ev = evolve_amplitudes(KAPPA_C, 0.0, 2 * math.pi)
    assert abs(ev.phi1 - ev.phi0) < 1e-15
    assert ev.kerr_phase == pytest.approx(math.pi, abs=1e-14)


@given(kappas, st.complex_numbers(max_magnitude=5.0), phases)
def test_evolve_invariants(kappa, beta, phase):
    ev = evolve_amplitudes(kappa, beta, phase)
    assert abs(ev.phi0) == pytest.approx(abs(beta), abs=1e-12)
    expected = kappa * (1 - np.exp(-1j * phase))
    assert abs((ev.phi1 - ev.phi0) - expected) < 1e-12
    assert ev.cross_phase == pytest.approx(-np.imag(ev.phi0 * np.conj(ev.phi1)), abs=1e-12)


def test_visibility_pure_examples():
    assert visibility_pure(1.0, math.pi) == pytest.approx(math.exp(-2), abs=1e-15)
    assert visibility_pure(KAPPA_C, math.pi) == pytest.approx(0.36788, abs=1e-5)
    ev = evolve_amplitudes(KAPPA_C, 0.0, math.pi)
    overlap = math.exp(-0.5 * abs(ev.phi1 - ev.phi0) ** 2)
    assert visibility_pure(KAPPA_C, math.pi) == pytest.approx(overlap, abs=1e-15)
    for kappa in (0.1, 1.0, 5.0):
        assert visibility_pure(kappa, 2 * math.pi) == 1.0


def test_visibility_thermal_examples():
    t = np.linspace(0, 4 * math.pi, 101)
    np.testing.assert_array_equal(visibility_thermal(0.9, 0.0, t), visibility_pure(0.9, t))
    assert visibility_thermal(KAPPA_C, 1.0, math.pi) == pytest.approx(0.049787, abs=1e-6)
    assert visibility_thermal(KAPPA_C, 100.0, 2 * math.pi) == 1.0


def test_visibility_is_array_aware():
    out = visibility_pure(1.0, np.array([0.0, math.pi]))
    assert isinstance(out, np.ndarray) and out.shape == (2,)
    assert isinstance(visibility_pure(1.0, 0.5), float)


@given(kappas, st.floats(0.0, 50.0), phases)
def test_visibility_periodic_and_ordered(kappa, nbar, phase):
    for f in (lambda t: visibility_pure(kappa, t), lambda t: visibility_thermal(kappa, nbar, t)):
        assert f(phase + 2 * math.pi) == pytest.approx(f(phase), rel=1e-9, abs=1e-300)
        assert 0.0 <= f(phase) <= 1.0
    assert visibility_thermal(kappa, nbar, phase) <= visibility_pure(kappa, phase)


def test_classical_visibility():
    for t in (0.3, math.pi, 5.0):
        assert visibility_classical(DEVICE_J, 0.0, t) == 1.0
    # device (j) at 1 mK: exponent ~ 1e5, so the fringe is gone entirely
    assert visibility_classical(DEVICE_J, 1e-3, math.pi) == 0.0
    assert visibility_classical(DEVICE_J, 1e-9, math.pi) == pytest.approx(0.8830744477308218, rel=1e-12)
    assert visibility_classical(DEVICE_J, 1e-9, 2 * math.pi) == 1.0


@pytest.mark.parametrize("nbar", [100.0, 300.0, 1e4])
def test_classical_limit_matches_thermal(nbar):
    kappa = 1e-3
    params = PhysicalParams(1e-12, 2 * math.pi * 500, 600e-9, round_trips=kappa * 600e-9 / (math.sqrt(2) * math.sqrt(HBAR / (1e-12 * 2 * math.pi * 500))))
    assert coupling(params) == pytest.approx(kappa, rel=1e-12)
    temp = temperature_for_phonon(nbar, params.omega_c)
    assert K_B * temp / (HBAR * params.omega_c) - 0.5 == pytest.approx(nbar, rel=1e-3)
    vq = visibility_thermal(kappa, nbar, math.pi)
    vc = visibility_classical(params, temp, math.pi)
    assert abs(vc - vq) / vq < 0.01


def test_entropy_examples():
    assert entropy_from_visibility(1.0) == 0.0
    assert entropy_from_visibility(0.0) == pytest.approx(1.0, abs=1e-15)
    assert entropy_from_visibility(math.exp(-1)) == pytest.approx(0.900, abs=5e-4)
    assert entropy_from_visibility(1e-9) == pytest.approx(1.0, abs=1e-12)


def test_entropy_matches_eigenvalue_form():
    rng = np.random.default_rng(5)
    v = rng.uniform(0, 1, 1000)
    lam = np.stack([(1 + v) / 2, (1 - v) / 2])
    s = -np.sum(lam * np.log2(lam), axis=0)
    np.testing.assert_allclose(entropy_from_visibility(v), s, atol=1e-12)
    np.testing.assert_allclose(entropy_from_visibility(v), binary_entropy((1 + v) / 2), atol=1e-12)


def test_entropy_strictly_decreasing():
    v = np.linspace(1e-6, 1 - 1e-6, 2001)
    assert np.all(np.diff(entropy_from_visibility(v)) < 0)


@pytest.mark.parametrize("v", [-0.01, 1.01, math.nan])
def test_entropy_rejects_out_of_range(v):
    with pytest.raises(ValidationError):
        entropy_from_visibility(v)


def test_state_separation_examples():
    assert state_separation(KAPPA_C, 1.0, math.pi) == pytest.approx(2.0, abs=1e-15)
    assert state_separation(0.8, 3e-13, math.pi) == pytest.approx(math.sqrt(8) * 0.8 * 3e-13, rel=1e-15)
    assert state_separation(KAPPA_C, 1.0, 0.0) == 0.0
    assert state_separation(KAPPA_C, 1.0, 2 * math.pi) < 1e-30


def test_revival_width_scaling():
    ratio = revival_half_width(KAPPA_C, 1000) / revival_half_width(KAPPA_C, 10)
    assert ratio == pytest.approx(math.sqrt(21 / 2001), rel=0.02)
    w = revival_half_width(1.0, 5.0)
    assert visibility_thermal(1.0, 5.0, 2 * math.pi + w) == pytest.approx(0.5, abs=1e-12)


def test_revival_width_requires_drop_below_half():
    with pytest.raises(ValidationError):
        revival_half_width(0.1, 0.0)


def test_negative_kappa_rejected():
    with pytest.raises(ValidationError):
        visibility_pure(-1.0, 1.0)
    with pytest.raises(ValidationError):
        visibility_thermal(1.0, -1.0, 1.0)
