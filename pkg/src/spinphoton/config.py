"""Flat key-value configuration files and defaults for the scenarios.

The format is one `section.key = value` assignment per line, with blank
lines and `#` comments ignored.  Values are numbers, comma-separated lists,
`start:stop:count` grids (inclusive endpoints, `count` points), or the word
`auto` for the calibrated quantities.  Every key has a default, so an empty
file is a valid configuration.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .scenarios import ConfigError, ExperimentConfig

# key -> (ExperimentConfig field, kind); kinds: float, float_or_auto, int,
# grid (start:stop:count or comma list), list (comma list)
SCHEMA = {
    "laser.wavelength_nm": ("wavelength_nm", "float"),
    "laser.control_wavelength_nm": ("control_wavelength_nm", "float"),
    "cavity.q_factor": ("q_factor", "float"),
    "cavity.alpha": ("alpha", "float"),
    "cavity.mode_split_uev": ("mode_split_uev", "float"),
    "emitter.cooperativity": ("cooperativity", "float"),
    "emitter.lifetime_ns": ("lifetime_ns", "float"),
    "emitter.detuning_uev": ("emitter_detuning_uev", "float"),
    "target.coherence_ns": ("coherence_ns", "float"),
    "target.phi_max_deg": ("phi_max_deg", "float"),
    "target.photon_to_s": ("photon_to_s", "float_or_auto"),
    "target.photons": ("target_photons", "float"),
    "input.ellipticity": ("ellipticity", "float_or_auto"),
    "input.baseline_phase_deg": ("baseline_phase_deg", "float"),
    "spin.decay_to_driven": ("decay_to_driven", "float"),
    "spin.decay_to_shelf": ("decay_to_shelf", "float"),
    "spin.flip_prefactor": ("flip_prefactor", "float"),
    "spin.zeeman_uev": ("zeeman_uev", "float"),
    "spin.beta": ("beta", "float_or_auto"),
    "spin.dt_ns": ("spin_dt_ns", "float"),
    "field.magnitude_t": ("field_t", "float"),
    "field.ground_g_factor": ("ground_g_factor", "float"),
    "run.temperature_k": ("temperature_k", "float"),
    "pulse.control_ns": ("control_duration_ns", "float"),
    "pulse.target_ns": ("target_duration_ns", "float"),
    "pulse.period_ns": ("rep_period_ns", "float"),
    "pulse.inject_offset_ns": ("inject_offset_ns", "float"),
    "pulse.control_offset_ns": ("control_offset_ns", "float"),
    "pulse.target_offset_ns": ("target_offset_ns", "float"),
    "sweep.detuning_uev": ("detuning_uev", "grid"),
    "sweep.phase_detuning_uev": ("phase_detuning_uev", "grid"),
    "sweep.target_photons": ("target_photon_list", "grid"),
    "sweep.control_photons": ("control_photon_list", "grid"),
    "sweep.temperatures_k": ("temperatures_k", "list"),
    "jitter.sigma_uev": ("jitter_sigma_uev", "float"),
    "fit.noise_fraction": ("fit_noise_fraction", "float"),
    "fit.seed": ("fit_seed", "int"),
    "calibrate.reduction": ("switch_reduction", "float"),
    "calibrate.photons": ("switch_photons", "float"),
    "calibrate.temperature_k": ("switch_temperature_k", "float"),
    "calibrate.anchor_photons": ("anchor_photons", "float"),
    "calibrate.anchor_phase_deg": ("anchor_phase_deg", "float"),
}

_FIELD_TO_KEY = {field: key for key, (field, _) in SCHEMA.items()}

# compact display form for grid defaults in manifests
_DEFAULT_RAW = {
    "sweep.detuning_uev": "-400:400:801",
    "sweep.phase_detuning_uev": "-40:40:321",
    "sweep.target_photons": "1:20:39",
    "sweep.control_photons": "0:940:25",
}


def _parse_value(key, kind, text, where):
    if kind == "float_or_auto" and text == "auto":
        return None
    try:
        if kind in ("float", "float_or_auto"):
            return float(text)
        if kind == "int":
            return int(text)
        if kind in ("grid", "list"):
            if kind == "grid" and ":" in text:
                parts = text.split(":")
                if len(parts) != 3:
                    raise ValueError("grid must be start:stop:count")
                start, stop = float(parts[0]), float(parts[1])
                count = int(parts[2])
                if count < 1:
                    raise ValueError("grid count must be >= 1")
                return tuple(float(v) for v in np.linspace(start, stop, count))
            return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise ConfigError(key, f"{where}: cannot parse value {text!r} ({exc})")
    raise ConfigError(key, f"{where}: unhandled value kind {kind!r}")


def parse_config_text(text, source="<config>"):
    """Parse config text into ({field: value}, {key: raw}, {key: line})."""
    values, raw, lines = {}, {}, {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(
                "syntax", f"{source}:{lineno}: expected 'key = value', got {line!r}"
            )
        key, _, value_text = stripped.partition("=")
        key = key.strip()
        value_text = value_text.strip()
        if key not in SCHEMA:
            raise ConfigError(key, f"{source}:{lineno}: unknown key")
        field, kind = SCHEMA[key]
        values[field] = _parse_value(key, kind, value_text, f"{source}:{lineno}")
        raw[key] = value_text
        lines[key] = lineno
    return values, raw, lines


def load_config(path=None, overrides=None):
    """Build an ExperimentConfig from an optional file plus key=value overrides.

    Returns (config, resolved) where resolved maps every schema key to the
    string it was resolved from (defaults for keys never mentioned).  Range
    violations are reported against the config key, with the line number
    when the value came from the file.
    """
    values, raw, lines = {}, {}, {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as handle:
            values, raw, lines = parse_config_text(handle.read(), source=str(path))
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError("override", f"expected key=value, got {item!r}")
        key, _, value_text = item.partition("=")
        key, value_text = key.strip(), value_text.strip()
        if key not in SCHEMA:
            raise ConfigError(key, "unknown key in override")
        field, kind = SCHEMA[key]
        values[field] = _parse_value(key, kind, value_text, "<override>")
        raw[key] = value_text
        lines.pop(key, None)

    try:
        config = ExperimentConfig(**values)
    except ConfigError as exc:
        key = _FIELD_TO_KEY.get(exc.key, exc.key)
        where = f" (line {lines[key]})" if key in lines else ""
        raise ConfigError(key, f"{exc}{where}") from None

    defaults = ExperimentConfig()
    resolved = {}
    for key, (field, _) in sorted(SCHEMA.items()):
        if key in raw:
            resolved[key] = raw[key]
        elif key in _DEFAULT_RAW:
            resolved[key] = _DEFAULT_RAW[key]
        else:
            value = getattr(defaults, field)
            if value is None:
                resolved[key] = "auto"
            elif isinstance(value, tuple):
                resolved[key] = ",".join(f"{v:g}" for v in value)
            else:
                resolved[key] = f"{value:g}"
    return config, resolved


def file_sha256(path):
    """Hex SHA-256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        digest.update(handle.read())
    return digest.hexdigest()
