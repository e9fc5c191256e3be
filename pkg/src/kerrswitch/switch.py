"""Sagnac loop input-output relation, switching windows, energy sweeps and delay scans."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import SwitchScenario, TemporalGrid, build_pump, fwhm_to_sigma
from .phases import PhasePair, numeric_phase_pair, window_center, xpm_phase_gaussian
from .propagation import SolverSettings, propagate_pump
from .raman import scenario_spectra

log = logging.getLogger(__name__)


def io_matrix(theta, phi, loss_s: float = 0.0) -> np.ndarray:
    """Mean-field transfer matrix, shape (..., 2, 2)."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    c, s = np.cos(theta), 1j * np.sin(theta)
    pref = np.exp(1j * phi - loss_s)
    m = np.empty(theta.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = m[..., 1, 1] = pref * c
    m[..., 0, 1] = m[..., 1, 0] = pref * s
    return m


def io_transform(theta, phi, loss_s, a1, a2):
    m = io_matrix(theta, phi, loss_s)
    b1 = m[..., 0, 0] * a1 + m[..., 0, 1] * a2
    b2 = m[..., 1, 0] * a1 + m[..., 1, 1] * a2
    return b1, b2


@dataclass(frozen=True)
class SwitchResponse:
    grid: TemporalGrid
    transmission: np.ndarray
    reflection: np.ndarray
    theta: np.ndarray
    phi_common: np.ndarray
    loss_signal: float = 0.0
    t_offset: float = 0.0

    @property
    def t_axis(self) -> np.ndarray:
        return self.t_offset + self.grid.t_axis


def response_from_phases(pair: PhasePair, loss_s: float = 0.0) -> SwitchResponse:
    theta = pair.theta
    scale = math.exp(-2 * loss_s)
    sin2 = np.sin(theta) ** 2
    t = scale * sin2
    r = scale * (1 - sin2)
    return SwitchResponse(pair.grid, t, r, theta, pair.phi_common, loss_s, pair.t_offset)


def transmission_fwhm(resp: SwitchResponse) -> float:
    """Width of T(t) between its outermost half-maximum crossings."""
    t, y = resp.t_axis, np.nan_to_num(resp.transmission)
    half = 0.5 * y.max()
    above = np.flatnonzero(y >= half)
    i0, i1 = above[0], above[-1]
    if i0 == 0 or i1 == len(y) - 1:
        raise ValueError("transmission window touches the grid edge")
    left = t[i0 - 1] + (half - y[i0 - 1]) / (y[i0] - y[i0 - 1]) * (t[i0] - t[i0 - 1])
    right = t[i1] + (half - y[i1]) / (y[i1 + 1] - y[i1]) * (t[i1 + 1] - t[i1])
    return float(right - left)


# --- energy sweeps -------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepTable:
    energies: np.ndarray
    t_peak: np.ndarray
    r_peak: np.ndarray


def _xi(scenario: SwitchScenario):
    spec = scenario_spectra(scenario)
    return spec.xi_parallel.real, spec.xi_perp.real


def theta_center_analytic(scenario: SwitchScenario, energy: float) -> float:
    """Switching angle at the window center from the Gaussian closed forms."""
    f = scenario.fiber
    xp, xq = _xi(scenario)
    pump = scenario.pump.with_energy(energy)
    tc = window_center(f)
    pp = xpm_phase_gaussian(f, pump, xp, xq, "co", tc)
    pm = xpm_phase_gaussian(f, pump, xp, xq, "counter", tc)
    return float((pp - pm) / 2)


def theta_center_numeric(scenario: SwitchScenario, energy: float,
                         settings: SolverSettings = SolverSettings()) -> float:
    """Switching angle at the window center from a split-step pump simulation.

    Falls back to the largest |theta| over the grid when the walk-through
    condition fails and no flat window exists.
    """
    f = scenario.fiber
    xp, xq = _xi(scenario)
    pump = scenario.pump.with_energy(energy)
    rec = propagate_pump(build_pump(pump, scenario.grid), f, settings)
    walk = f.beta_plus != 0 and f.length > 2 * pump.sigma_ps / abs(f.beta_plus)
    if walk:
        center = make_point_grid()
        pair = numeric_phase_pair(rec, f, xp, xq, center, window_center(f))
        return float(pair.theta[center.n_samples // 2])
    pair = numeric_phase_pair(rec, f, xp, xq, scenario.grid, window_center(f))
    th = pair.theta[pair.valid]
    return float(th[np.argmax(np.abs(th))])


def make_point_grid() -> TemporalGrid:
    # the smallest admissible grid; only its central sample (t = 0) is used
    return TemporalGrid(1024, 1024.0)


def _theta_numeric_job(args):
    scenario, energy, settings = args
    return theta_center_numeric(scenario, energy, settings)


def energy_sweep(scenario: SwitchScenario, energies, mode: str = "analytic",
                 settings: SolverSettings = SolverSettings(), jobs: int = 1) -> SweepTable:
    e = np.asarray(energies, dtype=float)
    if np.any(e < 0) or np.any(np.diff(e) < 0):
        raise ValueError("energies must be nonnegative and ascending")
    if mode == "analytic":
        theta = np.array([theta_center_analytic(scenario, x) for x in e])
    elif mode == "numeric":
        tasks = [(scenario, float(x), settings) for x in e]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as ex:
                theta = np.array(list(ex.map(_theta_numeric_job, tasks)))
        else:
            theta = np.array([_theta_numeric_job(t) for t in tasks])
    else:
        raise ValueError(f"mode must be 'analytic' or 'numeric', got {mode!r}")
    scale = math.exp(-2 * scenario.loss_signal)
    s2 = np.sin(theta) ** 2
    return SweepTable(e, scale * s2, scale * (1 - s2))


# --- delay scans ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DelayScan:
    delays: np.ndarray
    switch_probability: np.ndarray  # NaN where masked
    signal_fwhm: float


def delay_scan(response: SwitchResponse, signal_fwhm: float, delays,
               center: Optional[float] = None, mass_tol: float = 1e-9) -> DelayScan:
    """Switching probability of a Gaussian signal pulse versus its delay.

    Delay zero puts the signal peak at ``center`` (default: the response grid
    center, i.e. ``t_offset``).  Delays whose signal profile is not contained
    in the grid to within ``mass_tol`` are masked with NaN.
    """
    if not signal_fwhm > 0:
        raise ValueError("signal_fwhm must be positive")
    d = np.asarray(delays, dtype=float)
    t = response.t_axis
    c = response.t_offset if center is None else center
    sig = fwhm_to_sigma(signal_fwhm)
    trans = np.nan_to_num(response.transmission)
    dt = response.grid.dt
    out = np.empty(len(d))
    for i, td in enumerate(d):
        kern = np.exp(-((t - c - td) ** 2) / sig**2)
        mass = kern.sum() * dt / (math.sqrt(math.pi) * sig)
        if abs(mass - 1) > mass_tol:
            out[i] = np.nan
            continue
        out[i] = float(np.dot(trans, kern) / kern.sum())
    return DelayScan(d, out, float(signal_fwhm))
