"""JSON scenario configuration: schema, validation and conversion to a Scenario.

A config may name a built-in ``preset`` and override parts of it; anything
left out falls back to the preset (or to the fig3b defaults when no preset is
given). Unknown keys are rejected and every physical quantity must be
positive. The full schema is :data:`SCHEMA` (also ``spdc-purity schema``).
"""

from __future__ import annotations

import copy
import json

import jsonschema
import numpy as np

from .errors import ConfigError, InvalidParameterError
from .hom_interference import NoiseModel
from .presets import (
    CALIBRATION,
    FUNDAMENTAL_NM,
    IDLER_NM,
    PRESET_NAMES,
    PUMP_NM,
    SIGNAL_NM,
    Scenario,
    _PRESET_ARGS,
)
from .spectral_model import FilterSpec, FrequencyGrid, PhaseMatching, PumpEnvelope, bandwidth_nm_to_ghz

_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}

_FILTER = {
    "type": "object",
    "additionalProperties": False,
    "required": ["shape"],
    "properties": {
        "shape": {"enum": ["gaussian", "lorentzian", "supergaussian", "flat"]},
        "fwhm_ghz": _POS,
        "center_ghz": {"type": "number"},
        "order": {"type": "integer", "minimum": 2},
        "peak": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
    },
}
_FILTERS = {"type": "array", "items": _FILTER}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "ScenarioConfig",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
        "preset": {"enum": list(PRESET_NAMES)},
        "description": {"type": "string"},
        "pump": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "filter_nm": _POS,
                "fundamental_nm": _POS,
                "shg_ratio": _POS,
                "fwhm_ghz": _POS,
                "center_nm": _POS,
                "shape": {"enum": ["gaussian", "sech2"]},
            },
        },
        "phase_matching": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "preset": {"enum": ["calibrated"]},
                "model": {"enum": ["angle_model", "taylor_model"]},
                "profile": {"enum": ["sinc", "gaussian"]},
                "theta_deg": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 180},
                "fwhm_ghz": _POS,
                "length_mm": _POS,
                "gd_signal_ps_per_mm": _POS,
                "gd_idler_ps_per_mm": _POS,
                "gvd_ps2_per_mm": _NONNEG,
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "span_ghz": _POS,
                "points": {"type": "integer", "minimum": 8, "maximum": 2048},
                "signal_center_nm": _POS,
                "idler_center_nm": _POS,
            },
        },
        "filters": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "signal": _FILTERS,
                "idler": _FILTERS,
                "detection": _FILTERS,
                "detection_on_wcp": {"type": "boolean"},
            },
        },
        "wcp": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"mu": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}, "filters": _FILTERS},
        },
        "pair_rate": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.1},
        "delays": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"max_ps": _POS, "step_ps": _POS},
        },
        "noise": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "enabled": {"type": "boolean"},
                "efficiency_ratio": _POS,
                "mode_match": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "dark": _NONNEG,
                "wcp_multiphoton": {"type": "boolean"},
                "double_pairs": {"type": "boolean"},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string", "minLength": 1}},
        },
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


def _wdm():
    return {"shape": "supergaussian", "fwhm_ghz": 20.0, "order": 3}


def _fbg():
    return {"shape": "gaussian", "fwhm_ghz": 4.0}


def preset_config(name) -> dict:
    """The fully expanded config of a built-in preset."""
    if name not in _PRESET_ARGS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    pump_nm, fbg, desc = _PRESET_ARGS[name]
    extra = [_fbg()] if fbg else []
    return {
        "name": name,
        "description": desc,
        "pump": {"filter_nm": pump_nm, "fundamental_nm": FUNDAMENTAL_NM,
                 "shg_ratio": CALIBRATION.shg_bandwidth_ratio, "center_nm": PUMP_NM, "shape": "gaussian"},
        "phase_matching": {"preset": "calibrated"},
        "grid": {"span_ghz": 30.0, "points": 256, "signal_center_nm": SIGNAL_NM, "idler_center_nm": IDLER_NM},
        "filters": {"signal": [_wdm()] + extra, "idler": [_wdm()], "detection": list(extra),
                    "detection_on_wcp": True},
        "wcp": {"mu": CALIBRATION.mu, "filters": [_wdm()]},
        "pair_rate": CALIBRATION.pair_rate,
        "delays": {"max_ps": 2000.0, "step_ps": 5.0},
        "noise": {"enabled": True, "efficiency_ratio": CALIBRATION.efficiency_ratio, "mode_match": 1.0,
                  "dark": 0.0, "wcp_multiphoton": True, "double_pairs": True},
    }


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def validate(raw: dict) -> None:
    errors = sorted(_VALIDATOR.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for e in errors:
            where = "/".join(str(p) for p in e.absolute_path) or "<root>"
            lines.append(f"{where}: {e.message}")
        raise ConfigError("invalid config:\n  " + "\n  ".join(lines))


def resolve(raw: dict) -> dict:
    """Validate ``raw`` and expand it over its preset."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    validate(raw)
    base = preset_config(raw.get("preset", "fig3b"))
    if "preset" not in raw:
        base["name"] = "custom"
        base["description"] = ""
    pump = raw.get("pump", {})
    if "fwhm_ghz" in pump and "filter_nm" in pump:
        raise ConfigError("pump: give either filter_nm or fwhm_ghz, not both")
    if "fwhm_ghz" in pump:
        base["pump"].pop("filter_nm")
    pm = raw.get("phase_matching", {})
    if pm and "preset" not in pm:
        base["phase_matching"] = {}
    full = _merge(base, raw)
    full.pop("preset", None)
    return full


def load(path) -> dict:
    """Read and resolve a JSON config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    return resolve(raw)


def _filters(items):
    return tuple(FilterSpec(fwhm=f.get("fwhm_ghz", 20.0), shape=f["shape"], center=f.get("center_ghz", 0.0),
                            order=f.get("order", 3), peak=f.get("peak", 1.0)) for f in items)


def _pump(d):
    if "fwhm_ghz" in d:
        fwhm = d["fwhm_ghz"]
    else:
        fwhm = d.get("shg_ratio", CALIBRATION.shg_bandwidth_ratio) * bandwidth_nm_to_ghz(
            d["filter_nm"], d.get("fundamental_nm", FUNDAMENTAL_NM))
    return PumpEnvelope(fwhm=float(fwhm), center_wavelength=d.get("center_nm", PUMP_NM),
                        shape=d.get("shape", "gaussian"))


def _phase_matching(d):
    if d.get("preset") == "calibrated" or not d:
        base = PhaseMatching(model="angle_model", profile=CALIBRATION.pmf_profile,
                             theta=CALIBRATION.pmf_theta, fwhm=CALIBRATION.pmf_fwhm)
    else:
        base = PhaseMatching()
    keys = {"model": "model", "profile": "profile", "theta_deg": "theta", "fwhm_ghz": "fwhm",
            "length_mm": "length", "gd_signal_ps_per_mm": "gd_signal", "gd_idler_ps_per_mm": "gd_idler",
            "gvd_ps2_per_mm": "gvd"}
    kw = {keys[k]: v for k, v in d.items() if k in keys}
    fields = {f: getattr(base, f) for f in ("model", "profile", "theta", "fwhm", "length",
                                            "gd_signal", "gd_idler", "gvd")}
    fields.update(kw)
    return PhaseMatching(**fields)


def _delays(d):
    step, top = d["step_ps"], d["max_ps"]
    n = int(round(top / step))
    if n < 1:
        raise ConfigError("delays: max_ps must be at least step_ps")
    return np.linspace(-n * step, n * step, 2 * n + 1)


def to_scenario(cfg: dict) -> Scenario:
    """Build a :class:`Scenario` from a resolved config."""
    try:
        g = cfg["grid"]
        grid = FrequencyGrid.uniform(g["signal_center_nm"], g["idler_center_nm"], g["span_ghz"], g["points"])
        noise_cfg = cfg["noise"]
        noise = None
        if noise_cfg.get("enabled", True):
            noise = NoiseModel(noise_cfg["efficiency_ratio"], noise_cfg["mode_match"], noise_cfg["dark"],
                               noise_cfg["wcp_multiphoton"], noise_cfg["double_pairs"])
        f = cfg["filters"]
        return Scenario(
            name=cfg["name"],
            pump=_pump(cfg["pump"]),
            phase_matching=_phase_matching(cfg["phase_matching"]),
            grid=grid,
            signal_filters=_filters(f["signal"]),
            idler_filters=_filters(f["idler"]),
            detection_filters=_filters(f["detection"]),
            wcp_filters=_filters(cfg["wcp"]["filters"]),
            detection_filters_on_wcp=f["detection_on_wcp"],
            mu=cfg["wcp"]["mu"],
            pair_rate=cfg["pair_rate"],
            noise=noise,
            delays=_delays(cfg["delays"]),
            description=cfg.get("description", ""),
        )
    except InvalidParameterError as exc:
        raise ConfigError(f"config {cfg.get('name', '?')}: {exc}") from None


def set_path(cfg: dict, dotted: str, value) -> dict:
    """Copy of ``cfg`` with ``a.b.c`` set to ``value`` (re-validated)."""
    raw = copy.deepcopy(cfg)
    keys = dotted.split(".")
    node = raw
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            raise ConfigError(f"sweep parameter {dotted!r} does not name a config field")
        node = node[k]
    if keys[-1] not in node and dotted != "pump.fwhm_ghz" and dotted != "pump.filter_nm":
        raise ConfigError(f"sweep parameter {dotted!r} does not name a config field")
    node[keys[-1]] = value
    if dotted == "pump.fwhm_ghz":
        node.pop("filter_nm", None)
    elif dotted == "pump.filter_nm":
        node.pop("fwhm_ghz", None)
    validate(raw)
    return raw


def schema_json() -> str:
    return json.dumps(SCHEMA, indent=2, sort_keys=True)
