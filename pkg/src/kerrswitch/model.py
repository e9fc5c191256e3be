"""Grids, field envelopes, fiber/pump/scenario parameters and pulse measurements.

Units used throughout the package:

- time in ps, distance in m, power in W, energy in pJ (1 W*ps = 1 pJ)
- angular frequency in rad/ps
- wavelengths in nm

Envelopes are normalized so that ``|A|**2`` is the instantaneous power in W.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from scipy import constants
from scipy.special import erfc

from .raman import RamanModelParams

C_M_PER_PS = constants.c * 1e-12
N2_SILICA = 2.6e-20  # m^2/W

MIN_SAMPLES = 2**10


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class TemporalGrid:
    """Uniform time axis centered on zero plus its FFT-ordered angular frequencies."""

    n_samples: int
    t_span: float

    def __post_init__(self):
        if not isinstance(self.n_samples, (int, np.integer)) or not _is_power_of_two(int(self.n_samples)):
            raise ValueError(f"n_samples must be a power of two, got {self.n_samples}")
        if self.n_samples < MIN_SAMPLES:
            raise ValueError(f"n_samples must be >= {MIN_SAMPLES}, got {self.n_samples}")
        if not self.t_span > 0:
            raise ValueError(f"t_span must be positive, got {self.t_span}")

    @property
    def dt(self) -> float:
        return self.t_span / self.n_samples

    @cached_property
    def t_axis(self) -> np.ndarray:
        t = (np.arange(self.n_samples) - self.n_samples // 2) * self.dt
        t.setflags(write=False)
        return t

    @cached_property
    def omega_axis(self) -> np.ndarray:
        k = np.fft.fftfreq(self.n_samples, d=1.0 / self.n_samples)
        w = 2 * np.pi * k / self.t_span
        w.setflags(write=False)
        return w


def make_grid(n_samples: int, t_span: float) -> TemporalGrid:
    return TemporalGrid(int(n_samples), float(t_span))


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ComplexEnvelope:
    """Two orthogonally polarized slowly-varying amplitudes in sqrt(W)."""

    grid: TemporalGrid
    samples_x: np.ndarray
    samples_y: np.ndarray
    carrier_wavelength: float = 1550.0

    def __post_init__(self):
        for name in ("samples_x", "samples_y"):
            a = _frozen(getattr(self, name))
            if a.shape != (self.grid.n_samples,):
                raise ValueError(f"{name} has shape {a.shape}, expected ({self.grid.n_samples},)")
            object.__setattr__(self, name, a)

    @property
    def power_x(self) -> np.ndarray:
        return np.abs(self.samples_x) ** 2

    @property
    def power_y(self) -> np.ndarray:
        return np.abs(self.samples_y) ** 2

    @property
    def power(self) -> np.ndarray:
        return self.power_x + self.power_y

    @classmethod
    def zeros(cls, grid: TemporalGrid, carrier_wavelength: float = 1550.0) -> "ComplexEnvelope":
        z = np.zeros(grid.n_samples, dtype=complex)
        return cls(grid, z, z, carrier_wavelength)


@dataclass(frozen=True)
class FiberParams:
    """Fiber of length ``length`` [m] with loss, walk-off, GVD and Kerr/Raman nonlinearity.

    ``alpha`` is the field loss coefficient (power decays as exp(-2*alpha*z)).
    ``beta_plus`` = 1/v_s - 1/v_p and ``beta_minus`` = 1/v_s + 1/v_p, both in ps/m.
    """

    length: float
    beta_plus: float
    beta_minus: float
    gamma: float
    alpha: float = 0.0
    beta2_pump: float = 0.0
    f_raman: float = 0.18
    mode_field_diameter: Optional[float] = None
    raman_model: RamanModelParams = field(default_factory=RamanModelParams)

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0")
        if not 0 <= self.f_raman < 1:
            raise ValueError("f_raman must lie in [0, 1)")
        if not self.length > 0:
            raise ValueError("length must be > 0")
        if not self.beta_minus > abs(self.beta_plus):
            raise ValueError("beta_minus must exceed |beta_plus| (positive, finite group velocities)")

    @property
    def inv_group_velocity_signal(self) -> float:
        return 0.5 * (self.beta_plus + self.beta_minus)

    @property
    def inv_group_velocity_pump(self) -> float:
        return 0.5 * (self.beta_minus - self.beta_plus)

    @property
    def walk_through_length(self) -> float:
        """Minimum length [m] for a signal to walk completely through a pump of unit sigma."""
        return 2.0 / abs(self.beta_plus) if self.beta_plus else math.inf


def gamma_from_mfd(mode_field_diameter_um: float, wavelength_nm: float, n2: float = N2_SILICA) -> float:
    """Nonlinear coefficient 2*pi*n2/(lambda*A_eff) in 1/(W*m) with A_eff = pi*(MFD/2)**2."""
    a_eff = math.pi * (mode_field_diameter_um * 1e-6 / 2) ** 2
    return 2 * math.pi * n2 / (wavelength_nm * 1e-9 * a_eff)


def fwhm_to_sigma(intensity_fwhm: float) -> float:
    return intensity_fwhm / (2 * math.sqrt(math.log(2)))


def sigma_to_fwhm(sigma: float) -> float:
    return 2 * sigma * math.sqrt(math.log(2))


@dataclass(frozen=True)
class PumpConfig:
    """Unpolarized pump: two orthogonal polarizations with identical profiles.

    ``peak_power`` is the peak power carried by *each* polarization, so a
    Gaussian pump holds total energy ``2*sqrt(pi)*sigma*peak_power``.  Give
    exactly one of ``energy``/``peak_power`` and one of ``sigma``/``intensity_fwhm``.
    ``sigma`` is the amplitude width: A(t) = sqrt(P0)*exp(-t**2/(2*sigma**2)).
    """

    shape: str = "gaussian"
    energy: Optional[float] = None
    peak_power: Optional[float] = None
    sigma: Optional[float] = None
    intensity_fwhm: Optional[float] = None
    wavelength: float = 1550.0
    custom_samples: Optional[ComplexEnvelope] = None

    def __post_init__(self):
        if self.shape not in ("gaussian", "sampled"):
            raise ValueError(f"unknown pump shape {self.shape!r}")
        if self.shape == "sampled":
            if self.custom_samples is None:
                raise ValueError("sampled pump requires custom_samples")
            return
        if (self.energy is None) == (self.peak_power is None):
            raise ValueError("give exactly one of energy / peak_power")
        if self.sigma is None and self.intensity_fwhm is None:
            raise ValueError("give sigma or intensity_fwhm")
        if self.sigma is not None and self.intensity_fwhm is not None:
            if not math.isclose(sigma_to_fwhm(self.sigma), self.intensity_fwhm, rel_tol=1e-9):
                raise ValueError("sigma and intensity_fwhm are inconsistent")
        if (self.energy or 0) < 0 or (self.peak_power or 0) < 0:
            raise ValueError("pump energy/power must be >= 0")

    @property
    def sigma_ps(self) -> float:
        if self.shape == "sampled":
            return fwhm_to_sigma(measure_intensity_fwhm(self.custom_samples))
        return self.sigma if self.sigma is not None else fwhm_to_sigma(self.intensity_fwhm)

    @property
    def fwhm_ps(self) -> float:
        return sigma_to_fwhm(self.sigma_ps)

    @property
    def energy_pJ(self) -> float:
        if self.shape == "sampled":
            return measure_energy(self.custom_samples)
        if self.energy is not None:
            return self.energy
        return 2 * math.sqrt(math.pi) * self.sigma_ps * self.peak_power

    @property
    def peak_power_W(self) -> float:
        """Peak power per polarization."""
        if self.shape == "sampled":
            s = self.custom_samples
            return float(max(s.power_x.max(), s.power_y.max()))
        if self.peak_power is not None:
            return self.peak_power
        return self.energy / (2 * math.sqrt(math.pi) * self.sigma_ps)

    def with_energy(self, energy: float) -> "PumpConfig":
        if self.shape == "sampled":
            scale = math.sqrt(energy / self.energy_pJ) if self.energy_pJ > 0 else 0.0
            s = self.custom_samples
            env = ComplexEnvelope(s.grid, s.samples_x * scale, s.samples_y * scale, s.carrier_wavelength)
            return PumpConfig(shape="sampled", wavelength=self.wavelength, custom_samples=env)
        return PumpConfig(shape=self.shape, energy=energy, sigma=self.sigma_ps, wavelength=self.wavelength)


@dataclass(frozen=True)
class SwitchScenario:
    fiber: FiberParams
    pump: PumpConfig
    signal_wavelength: float
    grid: TemporalGrid
    temperature: float = 300.0
    bandwidth_B: float = 1.0  # GHz
    loss_signal: float = 0.0
    loss_raman: Optional[float] = None
    signal_fwhm: Optional[float] = None

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError("temperature must be > 0")
        if not self.bandwidth_B > 0:
            raise ValueError("bandwidth_B must be > 0")
        if self.loss_signal < 0 or (self.loss_raman is not None and self.loss_raman < 0):
            raise ValueError("loss exponents must be >= 0")
        if math.isclose(self.signal_wavelength, self.pump.wavelength):
            raise ValueError("signal and pump wavelengths must differ")

    @property
    def raman_loss(self) -> float:
        return self.loss_signal if self.loss_raman is None else self.loss_raman

    @property
    def detuning(self) -> float:
        """Signal minus pump angular frequency [rad/ps]."""
        return detuning(self.signal_wavelength, self.pump.wavelength)


def detuning(signal_nm: float, pump_nm: float) -> float:
    return 2 * math.pi * C_M_PER_PS * (1 / (signal_nm * 1e-9) - 1 / (pump_nm * 1e-9))


# --- pulse construction ----------------------------------------------------------------

TAIL_TOLERANCE = 1e-6


def build_gaussian_pump(cfg: PumpConfig, grid: TemporalGrid) -> ComplexEnvelope:
    if cfg.shape != "gaussian":
        raise ValueError("build_gaussian_pump needs a gaussian PumpConfig")
    sigma = cfg.sigma_ps
    # fraction of a Gaussian power profile exp(-t^2/sigma^2) lying outside +-t_span/2
    truncated = erfc(grid.t_span / (2 * sigma))
    if grid.t_span < 20 * sigma or truncated > TAIL_TOLERANCE:
        raise ValueError(
            f"grid span {grid.t_span} ps is narrower than 20*sigma = {20 * sigma:.4g} ps"
        )
    amp = math.sqrt(cfg.peak_power_W) * np.exp(-grid.t_axis**2 / (2 * sigma**2))
    return ComplexEnvelope(grid, amp, amp, cfg.wavelength)


def build_sech_pump(grid: TemporalGrid, energy: float, intensity_fwhm: float,
                    wavelength: float = 1550.0) -> ComplexEnvelope:
    """Unpolarized sech^2 pump of given total energy; used for shape-independence checks."""
    t0 = intensity_fwhm / (2 * math.acosh(math.sqrt(2)))
    # energy per polarization = 2*P*t0
    p = energy / (4 * t0)
    amp = math.sqrt(p) / np.cosh(grid.t_axis / t0)
    return ComplexEnvelope(grid, amp, amp, wavelength)


def build_pump(cfg: PumpConfig, grid: TemporalGrid) -> ComplexEnvelope:
    if cfg.shape == "gaussian":
        return build_gaussian_pump(cfg, grid)
    if cfg.custom_samples.grid != grid:
        raise ValueError("custom pump samples live on a different grid")
    return cfg.custom_samples


# --- measurements ----------------------------------------------------------------------

def measure_energy(env: ComplexEnvelope) -> float:
    # the rectangle rule is the Parseval-consistent energy on a periodic grid
    return float(env.power.sum() * env.grid.dt)


def _half_max_crossings(t: np.ndarray, p: np.ndarray) -> np.ndarray:
    half = 0.5 * p.max()
    above = p >= half
    edges = np.flatnonzero(above[1:] != above[:-1])
    # linear interpolation between samples i and i+1
    p0, p1 = p[edges], p[edges + 1]
    return t[edges] + (half - p0) / (p1 - p0) * (t[edges + 1] - t[edges])


def measure_intensity_fwhm(env: ComplexEnvelope, full: bool = False):
    """Full width at half of the maximum total power.

    For multimodal profiles the outermost half-maximum crossings are used.  With
    ``full=True`` returns ``(width, multimodal)``.
    """
    p = env.power
    if not p.max() > 0:
        raise ValueError("envelope has no power maximum")
    x = _half_max_crossings(env.grid.t_axis, p)
    if len(x) < 2:
        raise ValueError("half-maximum is not crossed on both sides inside the grid")
    width = float(x[-1] - x[0])
    return (width, len(x) > 2) if full else width
