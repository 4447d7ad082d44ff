"""Command-line entry point: scenario dispatch, CSV emission, manifests.

Usage:

    spinphoton <scenario> [--config FILE] [--out DIR] [--set key=value ...]
               [--measured CSV] [--gnuplot]

Scenarios: reflectivity, phase-vs-detuning, phase-vs-power, switch, fit,
calibrate.  Exit codes: 0 success, 1 validation error or bad usage,
2 numerical failure (non-convergence), 3 output I/O error.

Every trace is written as one CSV with a single header row naming columns
and units; a manifest.json records the config hash, resolved key values,
and calibration constants.  Reruns with identical configs are byte-identical
(the manifest carries no timestamps).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, fitting, scenarios, spindyn
from .cavity import reflectivity_spectrum
from .config import SCHEMA, file_sha256, load_config
from .scenarios import ConfigError

SCENARIOS = (
    "reflectivity",
    "phase-vs-detuning",
    "phase-vs-power",
    "switch",
    "fit",
    "calibrate",
)

CONFIG_DIR_ENV = "SPINPHOTON_CONFIG_DIR"


def _format(value):
    return f"{value:.12g}"


def write_trace_csv(trace, path):
    """Write a trace as CSV: one header row of 'label (unit)' cells, LF, UTF-8."""
    cells = [
        f"{label} ({unit})" if unit else label
        for label, unit in zip(trace.columns, trace.units)
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(",".join(cells) + "\n")
        for row in trace.rows:
            handle.write(",".join(_format(v) for v in row) + "\n")


def write_gnuplot_script(trace, csv_name, path):
    """Companion gnuplot script plotting every column against the first."""
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set xlabel '{trace.columns[0]}'",
        "plot "
        + ", ".join(
            f"'{csv_name}' using 1:{i + 2} with lines"
            for i in range(len(trace.columns) - 1)
        ),
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _resolve_config_path(arg):
    if arg is None:
        return None
    if os.path.exists(arg):
        return arg
    config_dir = os.environ.get(CONFIG_DIR_ENV)
    if config_dir:
        candidate = os.path.join(config_dir, arg)
        if os.path.exists(candidate):
            return candidate
    raise ConfigError("config", f"config file not found: {arg}")


def _fit_traces(config, measured):
    """Forward-generate per-channel bare-cavity spectra and refit them.

    With a measured series supplied the dip fit runs on it instead.  The
    optional synthetic noise is additive Gaussian with a fixed seed, so
    reruns are byte-identical.
    """
    results = []
    traces = []
    if measured is not None:
        fit = fitting.fit_lorentzian_dip(measured)
        results.append(("measured", fit))
    else:
        det = np.asarray(config.detuning_uev)
        rng = np.random.default_rng(config.fit_seed)
        spectra = []
        for mode in (config.mode_h, config.mode_v):
            spectrum = reflectivity_spectrum(det, mode)
            if config.fit_noise_fraction > 0:
                spectrum = spectrum + config.fit_noise_fraction * rng.standard_normal(
                    det.size
                )
            spectra.append(spectrum)
            fit = fitting.fit_lorentzian_dip(fitting.DataSeries(det, spectrum))
            results.append((mode.label, fit))
        traces.append(
            scenarios.Trace(
                name="fit_input_spectra",
                columns=["detuning", "reflectivity_h", "reflectivity_v"],
                units=["ueV", "", ""],
                rows=np.column_stack([det, spectra[0], spectra[1]]),
                metadata={
                    "config_sha256": config.sha256(),
                    "noise_fraction": config.fit_noise_fraction,
                    "seed": config.fit_seed,
                },
            )
        )

    rows = []
    meta = {"config_sha256": config.sha256(), "channels": []}
    for index, (channel, fit) in enumerate(results):
        p = fit.params
        rows.append(
            [
                float(index),
                p["center"],
                p["kappa"],
                p["alpha"],
                p["background"],
                fit.residual_norm,
                float(fit.iterations),
            ]
        )
        meta["channels"].append({"index": index, "label": channel})
    traces.append(
        scenarios.Trace(
            name="fit_results",
            columns=[
                "channel",
                "center",
                "kappa",
                "alpha",
                "background",
                "residual_norm",
                "iterations",
            ],
            units=["", "ueV", "ueV", "", "", "", ""],
            rows=np.array(rows),
            metadata=meta,
        )
    )
    return traces


def _calibrate_trace(config):
    eps = scenarios.resolved_ellipticity(config)
    beta = scenarios.resolved_beta(config)
    slope, source = scenarios.resolved_photon_to_s(config)
    return scenarios.Trace(
        name="calibration",
        columns=["beta", "ellipticity", "photon_to_s"],
        units=["", "", ""],
        rows=np.array([[beta, eps, slope]]),
        metadata={
            "config_sha256": config.sha256(),
            "beta": beta,
            "ellipticity": eps,
            "photon_to_s": slope,
            "photon_to_s_source": source,
            "reduction_target": config.switch_reduction,
            "reduction_photons": config.switch_photons,
            "reduction_temperature_k": config.switch_temperature_k,
        },
    )


def _run_scenario(name, config, measured):
    if name == "reflectivity":
        return [
            scenarios.run_reflectivity(config, control_on=False),
            scenarios.run_reflectivity(config, control_on=True),
        ]
    if name == "phase-vs-detuning":
        return [scenarios.run_phase_vs_detuning(config)]
    if name == "phase-vs-power":
        return [scenarios.run_phase_vs_target_power(config, measured)]
    if name == "switch":
        return [scenarios.run_switch_vs_control_power(config)]
    if name == "fit":
        return _fit_traces(config, measured)
    if name == "calibrate":
        return [_calibrate_trace(config)]
    raise AssertionError(name)


def _calibration_summary(traces):
    summary = {}
    for trace in traces:
        for key in ("beta", "ellipticity", "photon_to_s"):
            value = trace.metadata.get(key)
            if value is not None:
                summary[key] = float(value)
    return summary


def run(scenario, config, out_dir, resolved=None, config_path=None, overrides=None,
        measured=None, gnuplot=False):
    """Execute one scenario and write its CSVs plus a manifest; returns paths."""
    traces = _run_scenario(scenario, config, measured)
    os.makedirs(out_dir, exist_ok=True)
    outputs = []
    for trace in traces:
        csv_name = f"{trace.name}.csv"
        write_trace_csv(trace, os.path.join(out_dir, csv_name))
        outputs.append(csv_name)
        if gnuplot:
            gp_name = f"{trace.name}.gp"
            write_gnuplot_script(trace, csv_name, os.path.join(out_dir, gp_name))
            outputs.append(gp_name)

    manifest = {
        "scenario": scenario,
        "version": __version__,
        "config_path": config_path,
        "config_sha256": file_sha256(config_path) if config_path else None,
        "resolved_config_sha256": config.sha256(),
        "overrides": list(overrides or []),
        "resolved": resolved or {},
        "calibration": _calibration_summary(traces),
        "outputs": outputs,
        "traces": {t.name: _jsonable(t.metadata) for t in traces},
    }
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return outputs + ["manifest.json"]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spinphoton",
        description="Deterministic spin-photon interface scenarios",
    )
    parser.add_argument("scenario", help="one of: " + ", ".join(SCENARIOS))
    parser.add_argument("--config", help="config file (see config module docs)")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        dest="overrides",
        help="override a config key (repeatable)",
    )
    parser.add_argument("--measured", help="measured CSV for fit/phase-vs-power")
    parser.add_argument(
        "--gnuplot", action="store_true", help="emit companion gnuplot scripts"
    )
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.scenario not in SCENARIOS:
        print(f"unknown scenario {args.scenario!r}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1

    try:
        config_path = _resolve_config_path(args.config)
        config, resolved = load_config(config_path, args.overrides)
        measured = fitting.load_series(args.measured) if args.measured else None
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        outputs = run(
            args.scenario,
            config,
            args.out,
            resolved=resolved,
            config_path=config_path,
            overrides=args.overrides,
            measured=measured,
            gnuplot=args.gnuplot,
        )
    except (
        fitting.CalibrationError,
        fitting.FitConvergenceError,
        spindyn.IntegrationError,
    ) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3

    for name in outputs:
        print(os.path.join(args.out, name))
    return 0


if __name__ == "__main__":
    sys.exit(main())
