"""Scenario files: strict JSON schema, loading, and physics preconditions."""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import jsonschema

from .model import (FiberParams, PumpConfig, SwitchScenario, TemporalGrid, gamma_from_mfd)
from .propagation import SolverSettings
from .raman import RamanModelParams

log = logging.getLogger(__name__)

STUDY_KINDS = ("energy_sweep", "window_trace", "delay_scan", "pump_broadening", "noise_curve")
STUDY_FIGURES = {
    "energy_sweep": "2",
    "window_trace": "4a",
    "delay_scan": "4b",
    "pump_broadening": "5",
    "noise_curve": "3",
}


class ScenarioError(ValueError):
    """Schema or physics-precondition failure in a scenario file."""


_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_range = {
    "type": "object",
    "additionalProperties": False,
    "required": ["start", "stop", "count"],
    "properties": {"start": _num, "stop": _num, "count": {"type": "integer", "minimum": 1}},
}


def _one_of_keys(*keys):
    return {"oneOf": [{"required": [k]} for k in keys]}


SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["fiber", "pump", "signal", "environment", "grid", "study"],
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "fiber": {
            "type": "object",
            "additionalProperties": False,
            "required": ["length_m", "beta_plus_ps_per_m", "beta_minus_ps_per_m"],
            "properties": {
                "length_m": _pos,
                "alpha_per_m": _nonneg,
                "beta_plus_ps_per_m": _num,
                "beta_minus_ps_per_m": _pos,
                "beta2_ps2_per_m": _num,
                "gamma_per_W_m": _pos,
                "mode_field_diameter_um": _pos,
                "f_raman": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "raman": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "tau1_fs": _pos, "tau2_fs": _pos, "tau_b_fs": _pos,
                        "f_a": _nonneg, "f_b": _nonneg,
                    },
                },
            },
            "anyOf": [{"required": ["gamma_per_W_m"]}, {"required": ["mode_field_diameter_um"]}],
        },
        "pump": {
            "type": "object",
            "additionalProperties": False,
            "required": ["wavelength_nm"],
            "properties": {
                "shape": {"enum": ["gaussian"]},
                "energy_pJ": _nonneg,
                "peak_power_per_pol_W": _nonneg,
                "at_switch_energy": {"type": "boolean"},
                "sigma_ps": _pos,
                "intensity_fwhm_ps": _pos,
                "wavelength_nm": _pos,
            },
            "allOf": [
                _one_of_keys("energy_pJ", "peak_power_per_pol_W", "at_switch_energy"),
                {"anyOf": [{"required": ["sigma_ps"]}, {"required": ["intensity_fwhm_ps"]}]},
            ],
        },
        "signal": {
            "type": "object",
            "additionalProperties": False,
            "required": ["wavelength_nm"],
            "properties": {
                "wavelength_nm": _pos,
                "fwhm_ps": _pos,
                "loss_exponent": _nonneg,
            },
        },
        "environment": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "temperature_K": _pos,
                "bandwidth_GHz": _pos,
                "raman_loss_exponent": _nonneg,
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n_samples", "t_span_ps"],
            "properties": {"n_samples": {"type": "integer", "minimum": 1024}, "t_span_ps": _pos},
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "step_mode": {"enum": ["fixed", "phase_bounded"]},
                "dz_fixed_m": _pos,
                "max_phase_step_rad": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.5},
                "n_snapshots": {"type": "integer", "minimum": 2, "maximum": 512},
            },
        },
        "study": {
            "type": "object",
            "required": ["kind"],
            "properties": {"kind": {"enum": list(STUDY_KINDS)}},
            "allOf": [
                {
                    "if": {"properties": {"kind": {"const": "energy_sweep"}}},
                    "then": {
                        "additionalProperties": False,
                        "properties": {
                            "kind": {},
                            "mode": {"enum": ["analytic", "numeric"]},
                            "energies_pJ": {"type": "array", "items": _nonneg, "minItems": 1},
                            "energy_range_pJ": _range,
                        },
                        **_one_of_keys("energies_pJ", "energy_range_pJ"),
                    },
                },
                {
                    "if": {"properties": {"kind": {"const": "window_trace"}}},
                    "then": {
                        "additionalProperties": False,
                        "properties": {
                            "kind": {},
                            "modes": {
                                "type": "array", "minItems": 1, "uniqueItems": True,
                                "items": {"enum": ["analytic", "numeric"]},
                            },
                        },
                    },
                },
                {
                    "if": {"properties": {"kind": {"const": "delay_scan"}}},
                    "then": {
                        "additionalProperties": False,
                        "properties": {
                            "kind": {},
                            "mode": {"enum": ["analytic", "numeric"]},
                            "delays_ps": {"type": "array", "items": _num, "minItems": 1},
                            "delay_range_ps": _range,
                        },
                        **_one_of_keys("delays_ps", "delay_range_ps"),
                    },
                },
                {
                    "if": {"properties": {"kind": {"const": "pump_broadening"}}},
                    "then": {
                        "additionalProperties": False,
                        "required": ["distances_m"],
                        "properties": {
                            "kind": {},
                            "distances_m": {"type": "array", "items": _pos, "minItems": 1},
                        },
                    },
                },
                {
                    "if": {"properties": {"kind": {"const": "noise_curve"}}},
                    "then": {
                        "additionalProperties": False,
                        "required": ["signal_wavelengths_nm"],
                        "properties": {
                            "kind": {},
                            "signal_wavelengths_nm": {"type": "array", "items": _pos, "minItems": 1},
                            "b_tau_w": {"type": "array", "items": _pos, "minItems": 1},
                            "b_tau_w_range": _range,
                        },
                    },
                },
            ],
        },
    },
}


def _path(err: jsonschema.ValidationError) -> str:
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


def check_schema(doc: Any) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        # deepest errors are the most specific for oneOf/if-then branches
        lines = []
        for e in errors:
            leaves = [e] if not e.context else sorted(e.context, key=lambda c: -len(c.absolute_path))
            for leaf in leaves[:3]:
                lines.append(f"{_path(leaf)}: {leaf.message}")
        raise ScenarioError("invalid scenario:\n  " + "\n  ".join(dict.fromkeys(lines)))


@dataclass(frozen=True)
class LoadedScenario:
    name: str
    document: dict
    scenario: SwitchScenario
    solver: SolverSettings
    study: dict = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return self.study["kind"]

    @property
    def digest(self) -> str:
        return scenario_hash(self.document)


def scenario_hash(doc: dict) -> str:
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _build(doc: dict, name: str) -> LoadedScenario:
    fd, pd, sd = doc["fiber"], doc["pump"], doc["signal"]
    ed, gd = doc.get("environment", {}), doc["grid"]
    rd = fd.get("raman", {})
    raman = RamanModelParams(
        tau1=rd.get("tau1_fs", 12.2), tau2=rd.get("tau2_fs", 32.0), tau_b=rd.get("tau_b_fs", 96.0),
        f_a=rd.get("f_a", 0.79), f_b=rd.get("f_b", 0.21),
    )
    gamma = fd.get("gamma_per_W_m")
    if gamma is None:
        gamma = gamma_from_mfd(fd["mode_field_diameter_um"], pd["wavelength_nm"])
    fiber = FiberParams(
        length=fd["length_m"], beta_plus=fd["beta_plus_ps_per_m"], beta_minus=fd["beta_minus_ps_per_m"],
        gamma=gamma, alpha=fd.get("alpha_per_m", 0.0), beta2_pump=fd.get("beta2_ps2_per_m", 0.0),
        f_raman=fd.get("f_raman", 0.18), mode_field_diameter=fd.get("mode_field_diameter_um"),
        raman_model=raman,
    )
    grid = TemporalGrid(gd["n_samples"], float(gd["t_span_ps"]))
    pump_kw = dict(
        sigma=pd.get("sigma_ps"), intensity_fwhm=pd.get("intensity_fwhm_ps"), wavelength=pd["wavelength_nm"],
    )
    if pd.get("at_switch_energy"):
        # placeholder energy, replaced below once the XPM coefficients are known
        pump = PumpConfig(energy=0.0, **pump_kw)
    else:
        pump = PumpConfig(energy=pd.get("energy_pJ"), peak_power=pd.get("peak_power_per_pol_W"), **pump_kw)
    scen = SwitchScenario(
        fiber=fiber, pump=pump, signal_wavelength=sd["wavelength_nm"], grid=grid,
        temperature=ed.get("temperature_K", 300.0), bandwidth_B=ed.get("bandwidth_GHz", 1.0),
        loss_signal=sd.get("loss_exponent", 0.0), loss_raman=ed.get("raman_loss_exponent"),
        signal_fwhm=sd.get("fwhm_ps"),
    )
    if pd.get("at_switch_energy"):
        from .phases import total_switch_energy
        from .raman import scenario_spectra

        spec = scenario_spectra(scen)
        e_star = total_switch_energy(fiber, spec.xi_parallel.real, spec.xi_perp.real)
        scen = replace(scen, pump=pump.with_energy(e_star))
    sv = doc.get("solver", {})
    solver = SolverSettings(
        step_mode=sv.get("step_mode", "phase_bounded"), dz_fixed=sv.get("dz_fixed_m", 0.1),
        max_phase_step=sv.get("max_phase_step_rad", 0.05), n_snapshots=sv.get("n_snapshots", 256),
    )
    return LoadedScenario(name, doc, scen, solver, dict(doc["study"]))


def load_document(doc: dict, name: str = "scenario") -> LoadedScenario:
    check_schema(doc)
    try:
        return _build(doc, doc.get("name", name))
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(f"invalid scenario: {exc}") from exc


def bundled_names() -> list[str]:
    base = resources.files("kerrswitch") / "scenarios"
    return sorted(p.name[:-5] for p in base.iterdir() if p.name.endswith(".json"))


def resolve(path_or_name: str) -> Path:
    p = Path(path_or_name)
    if p.exists():
        return p
    base = resources.files("kerrswitch") / "scenarios" / f"{path_or_name}.json"
    if base.is_file():
        return Path(str(base))
    raise ScenarioError(f"scenario file not found: {path_or_name}")


def load_scenario(path_or_name: str) -> LoadedScenario:
    p = resolve(path_or_name)
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{p}: not valid JSON ({exc})") from exc
    return load_document(doc, p.stem)


@dataclass(frozen=True)
class PreconditionReport:
    errors: list
    warnings: list
    derived: dict


def check_preconditions(ls: LoadedScenario) -> PreconditionReport:
    """Physics checks that need no simulation: grid coverage and walk-through."""
    from .phases import window_metrics
    from .raman import scenario_spectra, thermal_occupancy

    s = ls.scenario
    f = s.fiber
    sigma = s.pump.sigma_ps
    spec = scenario_spectra(s)
    wm = window_metrics(f, s.pump, spec.xi_parallel.real, spec.xi_perp.real)
    errors, warnings = [], []
    if ls.kind in ("window_trace", "delay_scan"):
        need = f.length * abs(f.beta_plus) + 20 * sigma
        if s.grid.t_span < need:
            errors.append(
                f"grid_span_vs_walk_off: t_span {s.grid.t_span:g} ps < L*|beta_plus| + 20*sigma = {need:.6g} ps"
            )
    if s.grid.t_span < 20 * sigma:
        errors.append(f"grid_span_vs_pump: t_span {s.grid.t_span:g} ps < 20*sigma = {20 * sigma:.6g} ps")
    if not wm.walk_through_ok:
        warnings.append(
            f"walk_through: L = {f.length:g} m does not exceed 2*sigma/|beta_plus|; switching is partial"
        )
    derived = {
        "sigma_ps": sigma,
        "gamma_per_W_m": f.gamma,
        "xi_parallel_per_W_m": spec.xi_parallel.real,
        "xi_perp_per_W_m": spec.xi_perp.real,
        "e_star_pJ": wm.e_star,
        "t_center_ps": wm.t_center,
        "tau_w_ps": wm.tau_w,
        "n_th": thermal_occupancy(s.detuning, s.temperature),
        "pump_energy_pJ": s.pump.energy_pJ,
        "pump_peak_power_per_pol_W": s.pump.peak_power_W,
    }
    return PreconditionReport(errors, warnings, derived)
