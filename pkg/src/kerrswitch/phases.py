"""Directional cross-phase shifts, switching angle and window geometry.

Times are launch-referenced: t is the signal exit time measured from the pump
launch, so the co-propagating window is centered at t_c = L*beta_minus/2.  A
``PhasePair`` lives on a ``TemporalGrid`` whose zero is placed at ``t_offset``.

The XPM phase of a signal leaving at time t is

    Phi(t) = int_0^L Q(z, t - L/v_s + z*beta) dz,   Q = xi_par*P_x + xi_perp*P_y

with Q in the pump retarded frame, beta = beta_plus (co) or beta_minus (counter).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import make_interp_spline
from scipy.optimize import brentq
from scipy.special import erf, erfc

from .model import FiberParams, PumpConfig, TemporalGrid
from .propagation import PropagationRecord, effective_length

PHASE_TOL = 1e-9
EDGE_PHASE_TOL = 1e-7  # rad


@dataclass(frozen=True)
class PhasePair:
    grid: TemporalGrid
    phi_plus: np.ndarray
    phi_minus: np.ndarray
    provenance: str = "numeric"
    t_offset: float = 0.0
    valid: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        if self.provenance not in ("numeric", "gaussian_analytic"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        for name in ("phi_plus", "phi_minus"):
            a = np.array(getattr(self, name), dtype=float)
            if a.shape != (self.grid.n_samples,):
                raise ValueError(f"{name} does not match the grid")
            if np.any(a[np.isfinite(a)] < -PHASE_TOL):
                raise ValueError(f"{name} has negative values; check Re(xi) > 0")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        valid = np.isfinite(self.phi_plus) & np.isfinite(self.phi_minus)
        if self.valid is not None:
            valid &= np.asarray(self.valid, dtype=bool)
        valid.setflags(write=False)
        object.__setattr__(self, "valid", valid)

    @property
    def t_axis(self) -> np.ndarray:
        return self.t_offset + self.grid.t_axis

    @property
    def theta(self) -> np.ndarray:
        return (self.phi_plus - self.phi_minus) / 2

    @property
    def phi_common(self) -> np.ndarray:
        return (self.phi_plus + self.phi_minus) / 2


@dataclass(frozen=True)
class WindowMetrics:
    e_star: Optional[float]  # pJ, None when beta_plus = 0
    t_center: float  # ps
    tau_w: float  # ps
    walk_through_ok: bool


def switching_angle(pair: PhasePair):
    return pair.theta, pair.phi_common


def _walk_off(fiber: FiberParams, direction: str) -> float:
    if direction == "co":
        return fiber.beta_plus
    if direction == "counter":
        return fiber.beta_minus
    raise ValueError(f"direction must be 'co' or 'counter', got {direction!r}")


def window_center(fiber: FiberParams) -> float:
    return fiber.length * fiber.beta_minus / 2


# --- closed forms ------------------------------------------------------------------------

def _erf_sum(x, y):
    """erf(x) + erf(y) without cancellation when x + y > 0 is small relative to |x|, |y|."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    return np.where(x < y, erfc(-x) - erfc(y), erfc(-y) - erfc(x))


def mu_gaussian(fiber: FiberParams, sigma: float, t, direction: str):
    """Overlap integral int_0^L exp(-2 alpha z) exp(-(t - L/v_s + z beta)^2 / sigma^2) dz [m]."""
    beta = _walk_off(fiber, direction)
    alpha, length = fiber.alpha, fiber.length
    a = np.asarray(t, dtype=float) - length * fiber.inv_group_velocity_signal
    if beta == 0:
        return effective_length(alpha, length) * np.exp(-(a**2) / sigma**2)
    c = alpha * sigma**2 / beta
    pref = math.sqrt(math.pi) * sigma / (2 * beta) * np.exp(alpha * (c + 2 * a) / beta)
    return pref * _erf_sum((-a - c) / sigma, (a + length * beta + c) / sigma)


def xpm_phase_gaussian(fiber: FiberParams, pump: PumpConfig, xi_parallel: float, xi_perp: float,
                       direction: str, t) -> np.ndarray:
    """Closed-form Phi for a Gaussian pump in undistorted (dispersionless) propagation.

    ``pump.peak_power_W`` is the per-polarization peak, so Phi = P0*(xi_par + xi_perp)*mu.
    """
    if pump.shape != "gaussian":
        raise ValueError("closed-form phases need a gaussian pump")
    mu = mu_gaussian(fiber, pump.sigma_ps, t, direction)
    return pump.peak_power_W * (xi_parallel + xi_perp) * mu


def gaussian_phase_pair(fiber: FiberParams, pump: PumpConfig, xi_parallel: float, xi_perp: float,
                        grid: TemporalGrid, t_offset: Optional[float] = None) -> PhasePair:
    t0 = window_center(fiber) if t_offset is None else t_offset
    t = t0 + grid.t_axis
    pp = xpm_phase_gaussian(fiber, pump, xi_parallel, xi_perp, "co", t)
    pm = xpm_phase_gaussian(fiber, pump, xi_parallel, xi_perp, "counter", t)
    return PhasePair(grid, pp, pm, "gaussian_analytic", t0)


def total_switch_energy(fiber: FiberParams, xi_parallel: float, xi_perp: float) -> float:
    xi_sum = xi_parallel + xi_perp
    if not xi_sum > 0:
        raise ValueError("xi_parallel + xi_perp must be positive")
    return 2 * math.pi * abs(fiber.beta_plus) / xi_sum


def erfinv_bracketed(y: float, tol: float = 1e-12) -> float:
    if not -1 < y < 1:
        raise ValueError("erfinv argument must lie in (-1, 1)")
    if y == 0:
        return 0.0
    hi = 1.0
    while erf(hi) < abs(y):
        hi *= 2
    x = brentq(lambda v: erf(v) - abs(y), 0.0, hi, xtol=tol, rtol=4 * np.finfo(float).eps)
    return math.copysign(x, y)


def window_metrics(fiber: FiberParams, pump: PumpConfig, xi_parallel: float, xi_perp: float) -> WindowMetrics:
    sigma = pump.sigma_ps
    bp = abs(fiber.beta_plus)
    e_star = total_switch_energy(fiber, xi_parallel, xi_perp) if bp > 0 else None
    walk = bp > 0 and fiber.length > 2 * sigma / bp
    tau = fiber.length * bp - 2 * sigma * erfinv_bracketed(math.pi / 4)
    if tau <= 0:
        walk, tau = False, 0.0
    return WindowMetrics(e_star, window_center(fiber), tau if walk else 0.0, walk)


# --- numeric accumulation -------------------------------------------------------------

class _Antiderivatives:
    """Antiderivatives F0 = int Q and F1 = int tau*Q of one pump snapshot.

    ``spectral``: Q is treated as band-limited; the primitives are exact on the
    samples and interpolated with quintic splines.  ``linear``: Q is the
    piecewise-linear interpolant of its samples and the primitives are exact
    piecewise polynomials, so every segment integral is nonnegative.
    """

    def __init__(self, tau: np.ndarray, dt: float, q: np.ndarray, kernel: str):
        self.tau, self.dt, self.kernel = tau, dt, kernel
        self.t_min, self.t_max = tau[0], tau[-1]
        if kernel == "spectral":
            self.f0 = make_interp_spline(tau, self._integrate(tau, dt, q), k=5)
            self.f1 = make_interp_spline(tau, self._integrate(tau, dt, tau * q), k=5)
        else:
            self.q = q
            dq = np.diff(q)
            seg0 = dt * (q[:-1] + dq / 2)
            seg1 = tau[:-1] * seg0 + dt**2 * (q[:-1] / 2 + dq / 3)
            self.c0 = np.concatenate([[0.0], np.cumsum(seg0)])
            self.c1 = np.concatenate([[0.0], np.cumsum(seg1)])

    @staticmethod
    def _integrate(tau, dt, f):
        n = len(f)
        spec = np.fft.rfft(f)
        w = 2 * np.pi * np.fft.rfftfreq(n, d=dt)
        mean = spec[0].real / n
        spec[0] = 0.0
        if n % 2 == 0:
            spec[-1] = 0.0
        spec[1:] /= 1j * w[1:]
        prim = np.fft.irfft(spec, n) + mean * tau
        return prim - prim[0]

    def __call__(self, u):
        uc = np.clip(u, self.t_min, self.t_max)
        if self.kernel == "spectral":
            return self.f0(uc), self.f1(uc)
        i = np.minimum(((uc - self.t_min) / self.dt).astype(int), len(self.tau) - 2)
        r = uc - self.tau[i]
        q0 = self.q[i]
        slope = (self.q[i + 1] - q0) / self.dt
        ti = self.tau[i]
        f0 = self.c0[i] + q0 * r + slope * r**2 / 2
        f1 = self.c1[i] + ti * q0 * r + (ti * slope + q0) * r**2 / 2 + slope * r**3 / 3
        return f0, f1


def is_band_limited(q: np.ndarray, tol: float = 1e-9) -> bool:
    """True when the top quarter of the spectrum of ``q`` is negligible."""
    spec = np.abs(np.fft.rfft(q))
    total = spec.sum()
    if total == 0:
        return True
    return bool(spec[3 * len(spec) // 4:].sum() <= tol * total)


def _edge_value(q: np.ndarray, width: int = 4) -> float:
    return float(max(q[:width].max(), q[-width:].max()))


def xpm_phase_numeric(record: PropagationRecord, fiber: FiberParams, xi_parallel: float, xi_perp: float,
                      direction: str, grid: Optional[TemporalGrid] = None,
                      t_offset: Optional[float] = None, kernel: str = "auto",
                      edge_tol: float = EDGE_PHASE_TOL) -> np.ndarray:
    """Phi(t) from simulated pump snapshots; NaN where the result would need off-grid pump data.

    The pump power is taken as piecewise linear in z between snapshots.  In
    tau it is either band-limited (``kernel="spectral"``) or piecewise linear
    (``"linear"``); ``"auto"`` picks spectral only when every snapshot is
    resolved by the grid.  The integral along each signal trajectory is then
    evaluated exactly for that model.

    Trajectories that leave the pump grid are masked unless the pump power at
    the grid edges could contribute at most ``edge_tol`` rad along the stretch
    of fiber over which a trajectory overlaps the grid.
    """
    if kernel not in ("auto", "spectral", "linear"):
        raise ValueError(f"unknown kernel {kernel!r}")
    beta = _walk_off(fiber, direction)
    pgrid = record.grid
    grid = pgrid if grid is None else grid
    t0 = window_center(fiber) if t_offset is None else t_offset
    s = t0 + grid.t_axis - fiber.length * fiber.inv_group_velocity_signal
    tau = np.asarray(pgrid.t_axis)
    z = record.z_positions

    q = [xi_parallel * record.power_x[j] + xi_perp * record.power_y[j] for j in range(len(z))]
    if kernel == "auto":
        kernel = "spectral" if all(is_band_limited(qj) for qj in q) else "linear"
    phi = np.zeros(grid.n_samples)

    if beta == 0:
        vals = []
        inside = (s >= tau[0]) & (s <= tau[-1])
        for qj in q:
            if kernel == "spectral":
                v = make_interp_spline(tau, qj, k=5)(np.clip(s, tau[0], tau[-1]))
            else:
                v = np.interp(s, tau, qj)
            vals.append(np.where(inside, v, 0.0))
        phi = np.trapezoid(np.array(vals), z, axis=0)
    else:
        prev = _Antiderivatives(tau, pgrid.dt, q[0], kernel)
        for j in range(len(z) - 1):
            nxt = _Antiderivatives(tau, pgrid.dt, q[j + 1], kernel)
            a = s + z[j] * beta
            b = s + z[j + 1] * beta
            ell = (z[j + 1] - z[j]) * beta
            f0a, f1a = prev(a)
            f0b, f1b = prev(b)
            g0a, g1a = nxt(a)
            g0b, g1b = nxt(b)
            d0 = f0b - f0a
            w_prev = ((f1b - f1a) - a * d0) / ell
            w_next = ((g1b - g1a) - a * (g0b - g0a)) / ell
            phi += (d0 - w_prev + w_next) / beta
            prev = nxt

    # mask trajectories that leave the pump grid while the pump reaches its edges;
    # a trajectory overlaps the grid over at most span/|beta| of fiber
    edge = max(_edge_value(qj) for qj in q)
    reach = fiber.length if beta == 0 else min(fiber.length, pgrid.t_span / abs(beta))
    if edge * reach > edge_tol:
        lo = np.minimum(s, s + fiber.length * beta)
        hi = np.maximum(s, s + fiber.length * beta)
        phi = np.where((lo < tau[0]) | (hi > tau[-1]), np.nan, phi)
    return phi


def numeric_phase_pair(record: PropagationRecord, fiber: FiberParams, xi_parallel: float, xi_perp: float,
                       grid: Optional[TemporalGrid] = None, t_offset: Optional[float] = None) -> PhasePair:
    grid = record.grid if grid is None else grid
    t0 = window_center(fiber) if t_offset is None else t_offset
    pp = xpm_phase_numeric(record, fiber, xi_parallel, xi_perp, "co", grid, t0)
    pm = xpm_phase_numeric(record, fiber, xi_parallel, xi_perp, "counter", grid, t0)
    return PhasePair(grid, pp, pm, "numeric", t0)
