"""Study runners: each turns a loaded scenario into a table plus metadata."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .model import ComplexEnvelope, build_pump, measure_intensity_fwhm
from .phases import gaussian_phase_pair, numeric_phase_pair, window_metrics
from .propagation import propagate_pump
from .raman import raman_photon_number, scenario_spectra
from .scenario import STUDY_FIGURES, LoadedScenario, ScenarioError
from .switch import delay_scan, energy_sweep, response_from_phases, transmission_fwhm

log = logging.getLogger(__name__)


@dataclass
class ResultSet:
    kind: str
    columns: list
    rows: np.ndarray
    metadata: dict = field(default_factory=dict)


def _values(block: dict, list_key: str, range_key: str):
    if list_key in block:
        return np.array(block[list_key], dtype=float)
    r = block[range_key]
    return np.linspace(r["start"], r["stop"], r["count"])


def _xi(ls: LoadedScenario):
    spec = scenario_spectra(ls.scenario)
    return spec.xi_parallel.real, spec.xi_perp.real


def _metrics(ls: LoadedScenario):
    s = ls.scenario
    wm = window_metrics(s.fiber, s.pump, *_xi(ls))
    return {"e_star_pJ": wm.e_star, "t_center_ps": wm.t_center, "tau_w_ps": wm.tau_w,
            "walk_through_ok": wm.walk_through_ok}


def run_energy_sweep(ls: LoadedScenario, jobs: int = 1) -> ResultSet:
    mode = ls.study.get("mode", "analytic")
    e = _values(ls.study, "energies_pJ", "energy_range_pJ")
    tab = energy_sweep(ls.scenario, e, mode, ls.solver, jobs)
    rows = np.column_stack([tab.energies, tab.t_peak, tab.r_peak])
    return ResultSet("energy_sweep", ["E_pJ", "T_peak", "R_peak"], rows, {"mode": mode, **_metrics(ls)})


def _pairs(ls: LoadedScenario, modes):
    s = ls.scenario
    xp, xq = _xi(ls)
    out = {}
    if "analytic" in modes:
        out["analytic"] = gaussian_phase_pair(s.fiber, s.pump, xp, xq, s.grid)
    if "numeric" in modes:
        rec = propagate_pump(build_pump(s.pump, s.grid), s.fiber, ls.solver)
        out["numeric"] = numeric_phase_pair(rec, s.fiber, xp, xq, s.grid)
    return out


def run_window_trace(ls: LoadedScenario, jobs: int = 1) -> ResultSet:
    modes = ls.study.get("modes", ["analytic", "numeric"])
    s = ls.scenario
    pairs = _pairs(ls, modes)
    t = next(iter(pairs.values())).t_axis
    cols, meta = [t], {}
    for m in ("analytic", "numeric"):
        if m in pairs:
            resp = response_from_phases(pairs[m], s.loss_signal)
            cols.append(resp.transmission)
            try:
                meta[f"fwhm_{m}_ps"] = transmission_fwhm(resp)
            except ValueError as exc:
                meta[f"fwhm_{m}_ps"] = None
                log.warning("%s window width unavailable: %s", m, exc)
        else:
            cols.append(np.full(len(t), np.nan))
    rows = np.column_stack(cols)
    return ResultSet("window_trace", ["t_ps", "T_analytic", "T_numeric"], rows,
                     {"modes": list(modes), **meta, **_metrics(ls)})


def run_delay_scan(ls: LoadedScenario, jobs: int = 1) -> ResultSet:
    s = ls.scenario
    if s.signal_fwhm is None:
        raise ScenarioError("invalid scenario:\n  signal: delay_scan requires 'fwhm_ps'")
    mode = ls.study.get("mode", "analytic")
    pair = _pairs(ls, [mode])[mode]
    resp = response_from_phases(pair, s.loss_signal)
    d = _values(ls.study, "delays_ps", "delay_range_ps")
    scan = delay_scan(resp, s.signal_fwhm, d)
    rows = np.column_stack([scan.delays, scan.switch_probability])
    return ResultSet("delay_scan", ["delay_ps", "p_switch"], rows,
                     {"mode": mode, "signal_fwhm_ps": s.signal_fwhm, **_metrics(ls)})


def rms_width(t: np.ndarray, p: np.ndarray) -> float:
    """Intensity FWHM of the Gaussian with the same RMS duration."""
    w = p / p.sum()
    mean = np.dot(t, w)
    return float(2 * math.sqrt(2 * math.log(2)) * math.sqrt(np.dot((t - mean) ** 2, w)))


def run_pump_broadening(ls: LoadedScenario, jobs: int = 1) -> ResultSet:
    s = ls.scenario
    dist = sorted(set(float(d) for d in ls.study["distances_m"]))
    fiber = replace(s.fiber, length=dist[-1])
    env = build_pump(s.pump, s.grid)
    rec = propagate_pump(env, fiber, ls.solver, snapshot_positions=[0.0] + dist)
    t = s.grid.t_axis
    cols, names, widths = [t], ["t_ps"], {}
    for z, px, py in zip(rec.z_positions, rec.power_x, rec.power_y):
        p = px + py
        cols.append(p)
        names.append(f"P_{z:g}m_W")
        w, multi = measure_intensity_fwhm(ComplexEnvelope(s.grid, np.sqrt(px), np.sqrt(py)), full=True)
        widths[f"{z:g}"] = {"fwhm_ps": w, "multimodal": bool(multi), "rms_equivalent_fwhm_ps": rms_width(t, p),
                            "peak_power_W": float(p.max())}
    meta = {"widths": widths, "step_count": rec.step_count,
            "max_nonlinear_phase_per_step": rec.max_nonlinear_phase_per_step}
    return ResultSet("pump_broadening", names, np.column_stack(cols), meta)


def run_noise_curve(ls: LoadedScenario, jobs: int = 1) -> ResultSet:
    s = ls.scenario
    wls = [float(w) for w in ls.study["signal_wavelengths_nm"]]
    if "b_tau_w" in ls.study:
        bt = np.array(ls.study["b_tau_w"], dtype=float)
    elif "b_tau_w_range" in ls.study:
        bt = _values(ls.study, "b_tau_w", "b_tau_w_range")
    else:
        bt = np.linspace(1.0, 1000.0, 11)
    rows, e_star = [], {}
    for wl in wls:
        scen = replace(s, signal_wavelength=wl)
        for b in bt:
            rep = raman_photon_number(scen, b_tau_w=float(b))
            rows.append((wl, b, rep.N_R, rep.fidelity))
        e_star[f"{wl:g}"] = rep.e_star
    return ResultSet("noise_curve", ["signal_nm", "B_tau_w", "N_R", "fidelity"], np.array(rows),
                     {"e_star_pJ_by_signal_nm": e_star, "temperature_K": s.temperature})


RUNNERS = {
    "energy_sweep": run_energy_sweep,
    "window_trace": run_window_trace,
    "delay_scan": run_delay_scan,
    "pump_broadening": run_pump_broadening,
    "noise_curve": run_noise_curve,
}


def run_study(ls: LoadedScenario, jobs: int = 1) -> ResultSet:
    res = RUNNERS[ls.kind](ls, jobs)
    res.metadata = {"figure": STUDY_FIGURES[ls.kind], **res.metadata}
    return res
