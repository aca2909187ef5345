"""Scenario configuration: JSON schema, defaults, hashing and presets."""
from __future__ import annotations

import copy
import hashlib
import json
from importlib import resources

import jsonschema

PRESETS = ("uniform_fig2", "bragg_fig3")


class ConfigError(ValueError):
    pass


_POS = {"type": "number", "exclusiveMinimum": 0}
_NUM = {"type": "number"}
_INT = {"type": "integer"}


def _obj(props, required=(), **kw):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False, **kw}


SCHEMA = _obj({
    "name": {"type": "string", "default": "scenario"},
    "geometry": _obj({
        "kind": {"enum": ["uniform", "bragg"]},
        "a_m": _POS,
        "b_m": _POS,
        "n1": {"type": "number", "minimum": 1},
        "n2": {"type": "number", "minimum": 1},
        "period_m": _POS,
        "duty": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "p_smooth": {"type": "integer", "minimum": 2, "default": 10},
    }, required=("kind", "a_m", "b_m", "n1")),
    "electron": _obj({
        "energy_eV": _POS,
        "beta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "delta_E_eV": {"type": "number", "minimum": 0, "default": 0.0},
    }, oneOf=[{"required": ["energy_eV"]}, {"required": ["beta"]}]),
    "bands": _obj({
        "family": {"enum": ["TM", "TE"], "default": "TM"},
        "l": {"type": "integer", "minimum": 0, "default": 0},
        "m_order": {**_INT, "default": 0},
        "q_min_per_m": _NUM,
        "q_max_per_m": _NUM,
        "n_q": {"type": "integer", "minimum": 5, "default": 9},
        "seed_wavelength_m": _POS,
        "wavelength_min_m": _POS,
        "wavelength_max_m": _POS,
        "select": {"enum": ["nearest", "lowest", "highest"], "default": "nearest"},
    }, required=("q_min_per_m", "q_max_per_m", "seed_wavelength_m", "wavelength_min_m",
                 "wavelength_max_m")),
    "pump": _obj({
        "P0_W": _POS,
        "wavelength_m": _POS,
        "tau_s": _POS,
        "q_min_per_m": _POS,
        "q_max_per_m": _POS,
        "convention": {"enum": ["cycle_averaged", "literal"], "default": "cycle_averaged"},
        "n_radial": {"type": "integer", "minimum": 1, "default": 3},
    }, required=("P0_W", "wavelength_m")),
    "run": _obj({
        "L_int_m": {"oneOf": [_POS, {"const": "auto"}], "default": "auto"},
        "loss_dB_per_m": {"type": "number", "minimum": 0},
        "competitors": {"type": "boolean", "default": True},
        "relativistic_kerr_mass": {"type": "boolean", "default": False},
        "competitor_scan": {"type": "integer", "minimum": 11, "default": 201},
        "L_sweep_min_m": {**_POS, "default": 1e-3},
        "L_sweep_max_m": {**_POS, "default": 0.1},
        "L_sweep_points": {"type": "integer", "minimum": 2, "default": 10},
        "abar_min": {**_POS, "default": 3.0},
        "abar_max": {**_POS, "default": 10.0},
        "abar_points": {"type": "integer", "minimum": 2, "default": 15},
    }, default={}),
    "dynamics": _obj({
        "kind": {"enum": ["auto", "ContinuumIntersection", "ContinuumTangency"], "default": "auto"},
        "gQ": _POS,
        "kappaT": {"type": "number", "minimum": 0},
        "M": {"type": "integer", "minimum": 1, "default": 6},
        "N_max": {"oneOf": [{"type": "integer", "minimum": 1}, {"const": "auto"}], "default": 6},
        "n_snapshots": {"type": "integer", "minimum": 2, "default": 101},
        "tolerance": {**_POS, "default": 1e-9},
        "wigner_extent": {**_POS, "default": 2.0},
        "wigner_points": {"type": "integer", "minimum": 2, "default": 41},
    }, default={}),
    "cavity": _obj({
        "m": {"type": "integer", "not": {"const": 0}, "default": -10},
        "n_modes": {"type": "integer", "minimum": 1, "default": 11},
        "ratio": {"type": "number", "default": 1.5},
        "gQ": {**_POS, "default": 3.141592653589793},
        "N_max": {"oneOf": [{"type": "integer", "minimum": 1}, {"const": "auto"}], "default": "auto"},
        "n_snapshots": {"type": "integer", "minimum": 2, "default": 101},
    }, default={}),
    "sweep": _obj({
        "axis": {"type": "string", "pattern": r"^[a-z]+\.[A-Za-z0-9_]+$"},
        "values": {"type": "array", "items": _NUM, "minItems": 1},
        "stage": {"enum": ["trap", "coupling", "dynamics", "cavity"], "default": "coupling"},
    }, required=("axis", "values")),
}, required=())


def _fill_defaults(schema, inst, path, record):
    for key, sub in schema.get("properties", {}).items():
        here = f"{path}.{key}" if path else key
        if key not in inst and "default" in sub:
            inst[key] = copy.deepcopy(sub["default"])
            record.append(here)
        if isinstance(inst.get(key), dict) and sub.get("type") == "object":
            _fill_defaults(sub, inst[key], here, record)


def _error_text(err):
    where = ".".join(str(p) for p in err.absolute_path) or "<root>"
    return f"{where}: {err.message} (constraint: {err.validator})"


def normalize(raw):
    """Validate, fill defaults and return (config, list of defaulted field paths)."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>: configuration must be a JSON object")
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        raise ConfigError("; ".join(_error_text(e) for e in errors))
    cfg = copy.deepcopy(raw)
    defaults = []
    _fill_defaults(SCHEMA, cfg, "", defaults)
    errors = list(validator.iter_errors(cfg))
    if errors:
        raise ConfigError("; ".join(_error_text(e) for e in errors))
    geo = cfg.get("geometry")
    if geo and geo["kind"] == "bragg" and not all(k in geo for k in ("n2", "period_m", "duty")):
        raise ConfigError("geometry: bragg kind needs n2, period_m and duty (constraint: required)")
    if geo and not geo["a_m"] < geo["b_m"]:
        raise ConfigError("geometry.b_m: outer radius must exceed a_m (constraint: ordering)")
    return cfg, defaults


def load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from exc
    return normalize(raw)


def load_preset(name):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    text = resources.files("efiber.presets").joinpath(f"{name}.json").read_text()
    return normalize(json.loads(text))


def canonical(cfg):
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"))


def config_hash(cfg):
    return hashlib.sha256(canonical(cfg).encode()).hexdigest()


def save_config(path, cfg):
    with open(path, "w") as fh:
        json.dump(cfg, fh, indent=2, sort_keys=True)
        fh.write("\n")


def set_field(cfg, dotted, value):
    """Copy of ``cfg`` with ``block.field`` replaced; the field must be numeric."""
    block, key = dotted.split(".", 1)
    out = copy.deepcopy(cfg)
    if block not in out or not isinstance(out[block], dict):
        raise ConfigError(f"sweep.axis: no block {block!r} in config (constraint: exists)")
    cur = out[block].get(key)
    if key not in SCHEMA["properties"].get(block, {}).get("properties", {}):
        raise ConfigError(f"sweep.axis: unknown field {dotted!r} (constraint: exists)")
    if cur is not None and (isinstance(cur, bool) or not isinstance(cur, (int, float))) and cur != "auto":
        raise ConfigError(f"sweep.axis: field {dotted!r} is not numeric (constraint: type)")
    out[block][key] = value
    return out
