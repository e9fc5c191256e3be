import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kerrswitch.model import make_grid
from kerrswitch.phases import PhasePair, gaussian_phase_pair, window_metrics
from kerrswitch.switch import (SwitchResponse, delay_scan, energy_sweep, io_matrix, io_transform,
                               response_from_phases, theta_center_analytic, transmission_fwhm)

from conftest import XI_PAR_1310, XI_PERP_1310, pump, scenario, smf

E_STAR = 4238.23320188138689
finite = st.floats(-50.0, 50.0, allow_nan=False)


def test_full_cross_state():
    b1, b2 = io_transform(math.pi / 2, 0.3, 0.0, 1.0, 0.0)
    assert abs(b1) < 1e-15
    assert b2 == pytest.approx(1j * np.exp(0.3j))


@given(finite, finite)
def test_bar_state(phi, a2):
    b1, b2 = io_transform(0.0, phi, 0.0, 0.7, a2)
    assert b1 == pytest.approx(np.exp(1j * phi) * 0.7)
    assert b2 == pytest.approx(np.exp(1j * phi) * a2)


def test_fifty_fifty():
    b1, b2 = io_transform(math.pi / 4, 1.0, 0.0, 1.0, 0.0)
    assert abs(b1) ** 2 == pytest.approx(0.5) and abs(b2) ** 2 == pytest.approx(0.5)


@given(finite, finite, st.floats(0, 3))
def test_loss_scaling(theta, phi, loss):
    m = io_matrix(theta, phi, loss)
    np.testing.assert_allclose(m.conj().T @ m, math.exp(-2 * loss) * np.eye(2), atol=1e-12)


def test_unitarity_bulk():
    rng = np.random.default_rng(0)
    th, ph = rng.uniform(-10, 10, (2, 10_000))
    m = io_matrix(th, ph)
    prod = np.einsum("nji,njk->nik", m.conj(), m)
    assert np.abs(prod - np.eye(2)).max() < 1e-12


@given(st.integers(0, 2**32 - 1), st.floats(0, 2))
@settings(max_examples=20)
def test_response_invariants(seed, loss):
    g = make_grid(1024, 10.0)
    th = np.random.default_rng(seed).uniform(-50, 50, 1024)
    pair = PhasePair(g, np.abs(th) * 2 + th, np.abs(th) * 2 - th)
    resp = response_from_phases(pair, loss)
    np.testing.assert_allclose(resp.theta, th, atol=1e-12)
    assert np.abs(resp.transmission + resp.reflection - math.exp(-2 * loss)).max() <= 1e-15
    assert resp.transmission.min() >= 0 and resp.reflection.max() <= 1


def test_zero_theta_response():
    g = make_grid(1024, 10.0)
    resp = response_from_phases(PhasePair(g, np.ones(1024), np.ones(1024)), 0.2)
    assert not resp.transmission.any()
    np.testing.assert_allclose(resp.reflection, math.exp(-0.4))


def test_analytic_window_width_vs_tau_w():
    # the exact half-maximum width of sin^2(theta) sits at L*|beta_plus|, not tau_w
    f = smf()
    p = pump(E_STAR)
    g = make_grid(16384, 512.0)
    resp = response_from_phases(gaussian_phase_pair(f, p, XI_PAR_1310, XI_PERP_1310, g))
    width = transmission_fwhm(resp)
    assert width == pytest.approx(210.0, abs=0.05)
    wm = window_metrics(f, p, XI_PAR_1310, XI_PERP_1310)
    assert width - wm.tau_w == pytest.approx(2 * 3.0028 * 0.8775, abs=0.06)


def test_energy_sweep_analytic_landmarks():
    s = scenario()
    tab = energy_sweep(s, [0.0, E_STAR, 2 * E_STAR])
    assert tab.t_peak[0] == 0.0 and tab.r_peak[0] == 1.0
    assert tab.t_peak[1] == pytest.approx(1.0, abs=1e-6)
    assert tab.t_peak[2] == pytest.approx(0.0, abs=1e-3)
    lossy = energy_sweep(scenario(loss_signal=0.1), [0.0])
    assert lossy.r_peak[0] == pytest.approx(math.exp(-0.2))


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 3 * E_STAR))
def test_energy_sweep_periodic(e):
    s = scenario()
    a, b = energy_sweep(s, [e, e + 2 * E_STAR]).t_peak
    # the counter-propagating phase shifts the period by beta_plus/beta_minus
    assert a == pytest.approx(b, abs=2e-3)


def test_energy_sweep_rejects_bad_energies():
    with pytest.raises(ValueError):
        energy_sweep(scenario(), [2.0, 1.0])
    with pytest.raises(ValueError):
        energy_sweep(scenario(), [-1.0])
    with pytest.raises(ValueError):
        energy_sweep(scenario(), [1.0], mode="exact")


def test_lengths_overlay():
    e = np.linspace(0, 1.5 * E_STAR, 31)
    a = energy_sweep(scenario(length=100.0), e).t_peak
    b = energy_sweep(scenario(length=500.0), e).t_peak
    assert np.abs(a - b).max() < 1e-3


def test_numeric_sweep_matches_analytic_small():
    s = scenario()
    e = [0.0, 2000.0, E_STAR]
    a = energy_sweep(s, e).t_peak
    n = energy_sweep(s, e, mode="numeric").t_peak
    np.testing.assert_allclose(n, a, atol=1e-6)


def _flat_response(value=1.0, n=4096, span=2048.0):
    g = make_grid(n, span)
    th = np.full(n, np.arcsin(math.sqrt(value)))
    return response_from_phases(PhasePair(g, 2 * th, np.zeros(n)))


def test_delay_scan_unit_transmission():
    scan = delay_scan(_flat_response(), 200.0, np.linspace(-300, 300, 13))
    np.testing.assert_allclose(scan.switch_probability, 1.0, rtol=1e-12)


def test_delay_scan_narrow_signal_at_center():
    f = smf()
    g = make_grid(8192, 1024.0)
    resp = response_from_phases(gaussian_phase_pair(f, pump(E_STAR), XI_PAR_1310, XI_PERP_1310, g))
    scan = delay_scan(resp, 1.0, [0.0])
    assert scan.switch_probability[0] == pytest.approx(resp.transmission[4096], abs=1e-6)


def test_delay_scan_masks_off_grid():
    scan = delay_scan(_flat_response(), 200.0, [0.0, 900.0])
    assert np.isfinite(scan.switch_probability[0]) and np.isnan(scan.switch_probability[1])
    with pytest.raises(ValueError):
        delay_scan(_flat_response(), 0.0, [0.0])


def test_delay_scan_200ps_signal():
    f = smf()
    g = make_grid(16384, 2048.0)
    resp = response_from_phases(gaussian_phase_pair(f, pump(E_STAR), XI_PAR_1310, XI_PERP_1310, g))
    d = np.linspace(-400, 400, 401)
    p = delay_scan(resp, 200.0, d).switch_probability
    assert p.max() < 1.0 and p.max() > 0.7
    assert np.all(p <= resp.transmission.max() + 1e-12) and np.all(p >= 0)
    half = d[p >= p.max() / 2]
    width = half[-1] - half[0]
    # convolving a ~210-ps flat top with a 200-ps Gaussian widens the curve modestly
    assert 220 < width < 300


@settings(max_examples=15, deadline=None)
@given(st.floats(10.0, 300.0), st.floats(-300.0, 300.0))
def test_delay_scan_bounds(fwhm, delay):
    f = smf()
    g = make_grid(8192, 2048.0)
    resp = response_from_phases(gaussian_phase_pair(f, pump(3000.0), XI_PAR_1310, XI_PERP_1310, g))
    p = delay_scan(resp, fwhm, [delay]).switch_probability[0]
    assert 0 <= p <= resp.transmission.max() + 1e-12


def test_theta_center_includes_counter_phase():
    s = scenario()
    th = theta_center_analytic(s, E_STAR)
    assert th == pytest.approx(math.pi / 2 * (1 - 2.1 / 9796.8), rel=1e-9)
