import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kerrswitch.model import (ComplexEnvelope, PumpConfig, build_gaussian_pump, make_grid, measure_energy,
                              measure_intensity_fwhm)
from kerrswitch.propagation import (SolverError, SolverSettings, nonlinear_coefficients_pump, propagate_pump,
                                    propagate_pump_analytic)

from conftest import SIGMA_5PS, smf


def _gauss(energy=2500.0, n=2048, span=256.0, sigma=SIGMA_5PS):
    return build_gaussian_pump(PumpConfig(energy=energy, sigma=sigma), make_grid(n, span))


def test_coefficients():
    from dataclasses import replace
    rho, vs = nonlinear_coefficients_pump(smf())
    assert vs / rho == pytest.approx(2 / 3)
    f = replace(smf(), gamma=1.3e-3)
    rho, vs = nonlinear_coefficients_pump(f)
    assert rho == 1.3e-3 and vs == pytest.approx(0.8666666666666667e-3)


def test_all_terms_off_is_identity():
    from dataclasses import replace
    f = replace(smf(), gamma=1e-300)
    env = _gauss()
    rec = propagate_pump(env, f, SolverSettings(step_mode="fixed", dz_fixed=5.0, n_snapshots=3))
    np.testing.assert_allclose(rec.final_envelope.samples_x, env.samples_x, atol=1e-12 * 15.4)
    assert rec.z_positions[0] == 0 and rec.z_positions[-1] == 100.0
    assert np.all(np.diff(rec.z_positions) > 0)


def test_dispersion_only_width():
    from dataclasses import replace
    f = replace(smf(length=500.0, beta2=-0.020), gamma=1e-300)
    env = _gauss(energy=1.0, n=4096, span=256.0)
    rec = propagate_pump(env, f, SolverSettings(step_mode="fixed", dz_fixed=50.0, n_snapshots=6))
    s = SIGMA_5PS
    for z, px, py in zip(rec.z_positions, rec.power_x, rec.power_y):
        expect = 2 * math.sqrt(math.log(2)) * s * math.sqrt(1 + (0.020 * z / s**2) ** 2)
        got = measure_intensity_fwhm(ComplexEnvelope(env.grid, np.sqrt(px), np.sqrt(py)))
        assert got == pytest.approx(expect, rel=5e-3)
    # 500 m of SMF-28 dispersion broadens the 5-ps pulse to about 7.5 ps
    assert expect == pytest.approx(7.5, abs=0.1)


def test_fundamental_soliton_keeps_shape():
    # with the anomalous sign convention a sech pulse at N = 1 propagates unchanged
    g = make_grid(4096, 200.0)
    t0 = 2.0
    b2 = -0.02
    from dataclasses import replace
    f = replace(smf(length=200.0, beta2=b2), gamma=1.0e-3)
    # single polarization, so only rho acts
    p0 = abs(b2) / (f.gamma * t0**2)
    a = math.sqrt(p0) / np.cosh(g.t_axis / t0)
    env = ComplexEnvelope(g, a, np.zeros_like(a))
    rec = propagate_pump(env, f, SolverSettings(max_phase_step=0.01, n_snapshots=2))
    np.testing.assert_allclose(rec.final_envelope.power_x, env.power_x, atol=2e-3 * p0)


@settings(max_examples=8, deadline=None)
@given(st.floats(0.0, 5e-3), st.floats(-0.03, 0.03), st.floats(10.0, 3000.0))
def test_energy_conserved_without_loss(gamma, beta2, energy):
    from dataclasses import replace
    f = replace(smf(length=50.0, beta2=beta2), gamma=max(gamma, 1e-30))
    env = _gauss(energy=energy)
    rec = propagate_pump(env, f, SolverSettings(step_mode="fixed", dz_fixed=0.5, n_snapshots=5))
    e = rec.energies()
    np.testing.assert_allclose(e, e[0], rtol=1e-9)


def test_loss_law():
    from dataclasses import replace
    f = replace(smf(length=1000.0, alpha=2.3e-4), gamma=1e-300)
    env = _gauss(energy=100.0)
    rec = propagate_pump(env, f, SolverSettings(step_mode="fixed", dz_fixed=37.0, n_snapshots=11))
    np.testing.assert_allclose(rec.energies(), 100.0 * np.exp(-2 * 2.3e-4 * rec.z_positions), rtol=1e-9)


def test_step_halving_order():
    from dataclasses import replace
    f = smf(length=20.0, beta2=-0.02)
    env = _gauss(energy=500.0, n=1024, span=128.0)

    def run(dz):
        s = SolverSettings(step_mode="fixed", dz_fixed=dz, n_snapshots=2)
        return propagate_pump(env, f, s).final_envelope.samples_x

    a, b, c = run(1.0), run(0.5), run(0.25)
    order = math.log2(np.linalg.norm(a - b) / np.linalg.norm(b - c))
    assert order >= 1.9


@pytest.mark.parametrize("alpha", [0.0, 2.3e-5])
def test_spm_matches_analytic(alpha):
    f = smf(length=100.0, alpha=alpha)
    env = _gauss()
    rec = propagate_pump(env, f)
    ref = propagate_pump_analytic(env, f, 100.0)
    num = rec.final_envelope
    np.testing.assert_allclose(num.power_x, ref.power_x, rtol=1e-9, atol=1e-9 * ref.power_x.max())
    mask = ref.power_x > 1e-6 * ref.power_x.max()
    dphi = np.angle(num.samples_x[mask] * np.conj(ref.samples_x[mask]))
    assert np.abs(dphi).max() < 1e-6


def test_analytic_lossless_peak_phase():
    f = smf(length=100.0)
    env = _gauss()
    out = propagate_pump_analytic(env, f, 100.0)
    np.testing.assert_allclose(out.power_x, env.power_x, rtol=1e-13)
    rho, vs = nonlinear_coefficients_pump(f)
    p = env.power_x.max()
    assert np.angle(out.samples_x[1024]) == pytest.approx(math.remainder((rho + vs) * p * 100.0, 2 * math.pi))


def test_phase_bounded_steps_respect_bound():
    rec = propagate_pump(_gauss(), smf(length=30.0, beta2=-0.02), SolverSettings(max_phase_step=0.02))
    assert rec.max_nonlinear_phase_per_step < 0.02 * 1.2


def test_snapshot_positions():
    rec = propagate_pump(_gauss(), smf(length=10.0), snapshot_positions=[0.0, 2.5, 10.0])
    np.testing.assert_array_equal(rec.z_positions, [0.0, 2.5, 10.0])
    with pytest.raises(ValueError):
        propagate_pump(_gauss(), smf(length=10.0), snapshot_positions=[0.0, 5.0])


def test_solver_failure_on_tiny_steps():
    env = _gauss(energy=1e9, n=2048, span=256.0)
    with pytest.raises(SolverError):
        propagate_pump(env, smf(length=100.0))


def test_settings_validation():
    with pytest.raises(ValueError):
        SolverSettings(max_phase_step=0.6)
    with pytest.raises(ValueError):
        SolverSettings(step_mode="adaptive")
    with pytest.raises(ValueError):
        SolverSettings(n_snapshots=1000)
