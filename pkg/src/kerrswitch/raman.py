"""Delayed Raman response, Raman-dressed XPM coefficients and spontaneous Raman noise.

Response functions are the damped-oscillator (isotropic) and exponential
(anisotropic) models with time constants in fs.  The response entering the
nonlinear polarization is split as R_a = f_a*h_a and R_b = f_b*h_b, with h_a and
h_b each of unit area, so R~_a(0) + R~_b(0) = 1 and the total Raman-dressed XPM
coefficient reduces to the Kerr value 2*gamma at zero detuning.

Spectra use the transform R~(W) = int R(t) exp(i W t) dt, so the gains
g = 2 Im R~ are positive for W > 0 near the Raman peak.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import constants

FS = 1e-3  # ps


@dataclass(frozen=True)
class RamanModelParams:
    tau1: float = 12.2  # fs
    tau2: float = 32.0  # fs
    tau_b: float = 96.0  # fs
    f_a: float = 0.79
    f_b: float = 0.21

    def __post_init__(self):
        if min(self.tau1, self.tau2, self.tau_b) <= 0:
            raise ValueError("Raman time constants must be positive")
        if self.f_a < 0 or self.f_b < 0 or not math.isclose(self.f_a + self.f_b, 1.0, abs_tol=1e-12):
            raise ValueError("f_a and f_b must be nonnegative and sum to 1")


def h_a(t, model: RamanModelParams = RamanModelParams()):
    """Unit-area isotropic response [1/ps], t in ps."""
    t = np.asarray(t, dtype=float)
    t1, t2 = model.tau1 * FS, model.tau2 * FS
    c = (t1**2 + t2**2) / (t1 * t2**2)
    return np.where(t >= 0, c * np.exp(-np.abs(t) / t2) * np.sin(t / t1), 0.0)


def h_b(t, model: RamanModelParams = RamanModelParams()):
    """Unit-area anisotropic response [1/ps], t in ps."""
    t = np.asarray(t, dtype=float)
    tb = model.tau_b * FS
    return np.where(t >= 0, (2 * tb - t) / tb**2 * np.exp(-np.abs(t) / tb), 0.0)


def h_a_tilde(omega, model: RamanModelParams = RamanModelParams()):
    t1, t2 = model.tau1 * FS, model.tau2 * FS
    c = (t1**2 + t2**2) / (t1 * t2**2)
    a = 1 / t2 - 1j * np.asarray(omega, dtype=float)
    b = 1 / t1
    return c * b / (a**2 + b**2)


def h_b_tilde(omega, model: RamanModelParams = RamanModelParams()):
    tb = model.tau_b * FS
    a = 1 / tb - 1j * np.asarray(omega, dtype=float)
    return (2 * tb / a - 1 / a**2) / tb**2


def xi_coefficients(gamma: float, f_raman: float, ra_tilde, rb_tilde):
    """Complex XPM coefficients (xi_par, xi_perp) for given response spectra."""
    xi_par = 2 * gamma + f_raman * gamma * (ra_tilde + rb_tilde - 1)
    xi_perp = 2 * gamma / 3 + f_raman * gamma * (ra_tilde + rb_tilde / 2 - 2 / 3)
    return xi_par, xi_perp


@dataclass(frozen=True)
class RamanSpectra:
    omega_detuning: float
    R_a_tilde: complex
    R_b_tilde: complex
    g_a: float
    g_b: float
    xi_parallel: complex
    xi_perp: complex

    @property
    def xi_sum_real(self) -> float:
        return float((self.xi_parallel + self.xi_perp).real)


def raman_spectrum(model: RamanModelParams, omega: float, gamma: float = 1.0,
                   f_raman: float = 0.18) -> RamanSpectra:
    """Response spectra, gains and XPM coefficients at detuning ``omega`` [rad/ps].

    The xi coefficients use the signed detuning; gains are taken at |omega|.
    """
    ra = complex(model.f_a * h_a_tilde(omega, model))
    rb = complex(model.f_b * h_b_tilde(omega, model))
    w = abs(omega)
    g_a = float(2 * (model.f_a * h_a_tilde(w, model)).imag)
    g_b = float(2 * (model.f_b * h_b_tilde(w, model)).imag)
    xi_par, xi_perp = xi_coefficients(gamma, f_raman, ra, rb)
    return RamanSpectra(float(omega), ra, rb, g_a, g_b, complex(xi_par), complex(xi_perp))


def thermal_occupancy(omega: float, temperature: float) -> float:
    """Bose-Einstein phonon number at angular detuning ``omega`` [rad/ps]."""
    if omega == 0:
        raise ValueError("thermal occupancy diverges at zero detuning")
    if not temperature > 0:
        raise ValueError("temperature must be > 0")
    x = constants.hbar * abs(omega) * 1e12 / (constants.k * temperature)
    # exp(-x) / (1 - exp(-x)) stays finite for large x
    return float(math.exp(-x) / -math.expm1(-x))


def photon_number(gamma: float, f_raman: float, b_tau_w: float, n_th: float,
                  g_a: float, g_b: float, xi_sum: float) -> float:
    """Closed-form Raman photon number per window at the total-switching energy."""
    if not xi_sum > 0:
        raise ValueError("xi sum must be positive")
    return gamma * f_raman * b_tau_w * n_th * (math.pi / 4) * (2 * g_a + 3 * g_b) / xi_sum


def fidelity(n_r: float) -> float:
    return 1.0 - n_r / 2.0


@dataclass(frozen=True)
class NoiseReport:
    spectra: RamanSpectra
    n_th: float
    t_axis: np.ndarray  # ps, launch-referenced
    flux_IR: np.ndarray  # photons/s at the loop output
    N_R: float
    fidelity: float
    tau_w: float  # ps
    b_tau_w: float
    e_star: float  # pJ


def scenario_spectra(scenario) -> RamanSpectra:
    f = scenario.fiber
    return raman_spectrum(f.raman_model, scenario.detuning, f.gamma, f.f_raman)


def raman_flux(scenario, mu_plus, peak_power: Optional[float] = None, at_output: bool = True):
    """Spontaneous Raman photon flux [photons/s] in the signal band.

    ``mu_plus`` is the co-propagating overlap profile [m]; ``peak_power`` is the
    per-polarization pump peak [W], defaulting to the scenario pump.
    """
    f = scenario.fiber
    spec = scenario_spectra(scenario)
    n_th = thermal_occupancy(scenario.detuning, scenario.temperature)
    p0 = scenario.pump.peak_power_W if peak_power is None else peak_power
    b_hz = scenario.bandwidth_B * 1e9
    flux = f.gamma * f.f_raman * p0 * b_hz * np.asarray(mu_plus) * n_th * (spec.g_a + 1.5 * spec.g_b)
    if at_output:
        flux = flux * math.exp(-2 * scenario.raman_loss)
    return flux


def raman_photon_number(scenario, b_tau_w: Optional[float] = None) -> NoiseReport:
    """Noise report at the total-switching energy.

    ``b_tau_w`` overrides the product of detection bandwidth and window width;
    by default it is computed from the scenario bandwidth and the window width.
    """
    from .phases import mu_gaussian, window_metrics

    f = scenario.fiber
    spec = scenario_spectra(scenario)
    xi_par, xi_perp = spec.xi_parallel.real, spec.xi_perp.real
    wm = window_metrics(f, scenario.pump, xi_par, xi_perp)
    if not wm.walk_through_ok or wm.e_star is None:
        raise ValueError("switching window undefined (walk-through condition fails); see window_metrics")
    n_th = thermal_occupancy(scenario.detuning, scenario.temperature)
    if b_tau_w is None:
        b_tau_w = scenario.bandwidth_B * 1e9 * wm.tau_w * 1e-12
    n_r = photon_number(f.gamma, f.f_raman, b_tau_w, n_th, spec.g_a, spec.g_b, spec.xi_sum_real)

    sigma = scenario.pump.sigma_ps
    t = wm.t_center + scenario.grid.t_axis
    mu = mu_gaussian(f, sigma, t, "co")
    p_star = wm.e_star / (2 * math.sqrt(math.pi) * sigma)
    flux = raman_flux(scenario, mu, peak_power=p_star)
    return NoiseReport(spec, n_th, t, flux, n_r, fidelity(n_r), wm.tau_w, b_tau_w, wm.e_star)
