"""End-to-end experiment scenarios producing deterministic traces.

Each scenario wires the cavity reflection, polarization transport, spin
pumping, and saturation models together for one sweep and returns a Trace:
a rectangular table of rows plus metadata sufficient to regenerate it
bit-identically (config hash and every resolved calibration constant).

Sweep points are evaluated sequentially in sweep order; all computations are
pure, so identical configs always produce identical traces.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, fields
from functools import lru_cache

import numpy as np

from . import fitting, polarization, saturation, spindyn
from .cavity import CavityMode, EmitterCoupling, g_from_cooperativity, reflection_coefficient
from .units import HBAR_UEV_NS, wavelength_to_energy

# Spectral-jitter convolution width that broadens the default emitter peak in
# the left-circular channel to ~10 ueV FWHM (covers pulse bandwidth as well).
SUGGESTED_JITTER_SIGMA_UEV = 3.4


class ConfigError(ValueError):
    """Configuration invariant violation, naming the offending field."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


def _grid(start, stop, count):
    return tuple(float(v) for v in np.linspace(start, stop, count))


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete parameter set for every scenario.

    `ellipticity`, `beta`, and `photon_to_s` may be None, meaning they are
    calibrated on demand (to the baseline phase, the switching-contrast
    target, and the anchor phase respectively) and recorded in trace
    metadata.
    """

    # optics
    wavelength_nm: float = 934.55
    control_wavelength_nm: float = 934.49
    q_factor: float = 5000.0
    alpha: float = 0.93
    mode_split_uev: float = 6.0
    # emitter
    cooperativity: float = 1.0
    lifetime_ns: float = 0.5
    emitter_detuning_uev: float = 0.0
    # target-pulse saturation
    coherence_ns: float = 1.0
    phi_max_deg: float = 90.0
    photon_to_s: float | None = None
    target_photons: float = 12.0
    # input polarization
    ellipticity: float | None = None
    baseline_phase_deg: float = 78.0
    # spin dynamics
    decay_to_driven: float = 1.2
    decay_to_shelf: float = 1.0
    flip_prefactor: float = 0.6
    zeeman_uev: float = 400.0
    beta: float | None = None
    spin_dt_ns: float = spindyn.DEFAULT_DT_NS
    # sample environment (metadata for the traces)
    field_t: float = 8.0
    ground_g_factor: float = 0.86
    temperature_k: float = 18.0
    # pulse sequence
    control_duration_ns: float = 7.0
    target_duration_ns: float = 0.25
    rep_period_ns: float = 12.5
    inject_offset_ns: float = 0.0
    control_offset_ns: float = 0.5
    target_offset_ns: float = 8.0
    # sweeps
    detuning_uev: tuple = _grid(-400.0, 400.0, 801)
    phase_detuning_uev: tuple = _grid(-40.0, 40.0, 321)
    target_photon_list: tuple = _grid(1.0, 20.0, 39)
    control_photon_list: tuple = _grid(0.0, 940.0, 25)
    temperatures_k: tuple = (0.0, 4.0, 10.0, 18.0, 30.0)
    # spectral jitter
    jitter_sigma_uev: float = 0.0
    # synthetic-spectrum noise for the fit scenario
    fit_noise_fraction: float = 0.0
    fit_seed: int = 1234
    # calibration targets
    switch_reduction: float = 0.46
    switch_photons: float = 940.0
    switch_temperature_k: float = 18.0
    anchor_photons: float = 1.0
    anchor_phase_deg: float = 80.0

    def __post_init__(self):
        require = _require_for(self)
        require("wavelength_nm", self.wavelength_nm > 0, "must be positive")
        require("control_wavelength_nm", self.control_wavelength_nm > 0, "must be positive")
        require("q_factor", self.q_factor > 0, "must be positive")
        require("alpha", 0 < self.alpha <= 1, "must lie in (0, 1]")
        require("cooperativity", self.cooperativity >= 0, "must be non-negative")
        require("lifetime_ns", self.lifetime_ns > 0, "must be positive")
        require(
            "coherence_ns",
            0 < self.coherence_ns <= 2 * self.lifetime_ns,
            "must lie in (0, 2*lifetime]",
        )
        require("phi_max_deg", 0 < self.phi_max_deg <= 180, "must lie in (0, 180]")
        if self.photon_to_s is not None:
            require("photon_to_s", self.photon_to_s > 0, "must be positive")
        require("target_photons", self.target_photons >= 0, "must be non-negative")
        if self.ellipticity is not None:
            require("ellipticity", 0 <= self.ellipticity <= 1, "must lie in [0, 1]")
        require(
            "baseline_phase_deg",
            0 < self.baseline_phase_deg < 180,
            "must lie in (0, 180)",
        )
        for name in ("decay_to_driven", "decay_to_shelf", "flip_prefactor"):
            require(name, getattr(self, name) >= 0, "must be non-negative")
        require("zeeman_uev", self.zeeman_uev > 0, "must be positive")
        if self.beta is not None:
            require("beta", self.beta >= 0, "must be non-negative")
        require("spin_dt_ns", self.spin_dt_ns > 0, "must be positive")
        require("field_t", self.field_t >= 0, "must be non-negative")
        require("temperature_k", self.temperature_k >= 0, "must be non-negative")
        require("control_duration_ns", self.control_duration_ns > 0, "must be positive")
        require("target_duration_ns", self.target_duration_ns > 0, "must be positive")
        require(
            "rep_period_ns",
            self.rep_period_ns
            > self.control_duration_ns + self.target_duration_ns,
            "must exceed the summed pulse windows",
        )
        for name in ("detuning_uev", "phase_detuning_uev"):
            grid = getattr(self, name)
            require(name, len(grid) > 0, "must be non-empty")
            require(
                name,
                all(b > a for a, b in zip(grid, grid[1:])),
                "must be strictly increasing",
            )
        require("target_photon_list", len(self.target_photon_list) > 0, "must be non-empty")
        require(
            "target_photon_list",
            all(v > 0 for v in self.target_photon_list),
            "photon numbers must be positive",
        )
        require("control_photon_list", len(self.control_photon_list) > 0, "must be non-empty")
        require(
            "control_photon_list",
            all(v >= 0 for v in self.control_photon_list),
            "photon numbers must be non-negative",
        )
        require("temperatures_k", len(self.temperatures_k) > 0, "must be non-empty")
        require(
            "temperatures_k",
            all(t >= 0 for t in self.temperatures_k),
            "temperatures must be non-negative",
        )
        require("jitter_sigma_uev", self.jitter_sigma_uev >= 0, "must be non-negative")
        require(
            "fit_noise_fraction", self.fit_noise_fraction >= 0, "must be non-negative"
        )
        require("switch_reduction", 0 < self.switch_reduction < 1, "must lie in (0, 1)")
        require("switch_photons", self.switch_photons > 0, "must be positive")
        require("switch_temperature_k", self.switch_temperature_k >= 0, "must be non-negative")
        require("anchor_photons", self.anchor_photons > 0, "must be positive")
        require(
            "anchor_phase_deg",
            0 < self.anchor_phase_deg < self.phi_max_deg,
            "must lie in (0, phi_max)",
        )

    # derived optical parameters ------------------------------------------

    @property
    def kappa_uev(self):
        return wavelength_to_energy(self.wavelength_nm) / self.q_factor

    @property
    def gamma_uev(self):
        return HBAR_UEV_NS / self.lifetime_ns

    @property
    def mode_v(self):
        kappa = self.kappa_uev
        return CavityMode(0.0, kappa, self.alpha * kappa, label="V")

    @property
    def mode_h(self):
        kappa = self.kappa_uev
        return CavityMode(self.mode_split_uev, kappa, self.alpha * kappa, label="H")

    @property
    def emitter(self):
        g = g_from_cooperativity(self.cooperativity, self.mode_v, self.gamma_uev)
        return EmitterCoupling(g, self.gamma_uev, self.emitter_detuning_uev)

    @property
    def flip_law(self):
        return spindyn.SpinFlipLaw(self.flip_prefactor, self.zeeman_uev)

    def two_level(self, photon_to_s):
        return saturation.TwoLevelParams(self.lifetime_ns, self.coherence_ns, photon_to_s)

    def sha256(self):
        """Stable hash of the full resolved field set."""
        parts = []
        for f in fields(self):
            parts.append(f"{f.name}={getattr(self, f.name)!r}")
        return hashlib.sha256(";".join(parts).encode("utf-8")).hexdigest()


def _require_for(config):
    def require(key, condition, message):
        if not condition:
            raise ConfigError(key, message)

    return require


@dataclass
class Trace:
    """Rectangular sweep output with regeneration metadata."""

    name: str
    columns: list[str]
    units: list[str]
    rows: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=float)
        if self.rows.ndim != 2 or self.rows.shape[1] != len(self.columns):
            raise ValueError("rows must be rectangular with one column per label")
        if len(self.units) != len(self.columns):
            raise ValueError("one unit per column required")

    def column(self, label):
        return self.rows[:, self.columns.index(label)]


# ---------------------------------------------------------------------------
# Elementary scenario building blocks


def _weighted_emitter(config, weight):
    """Emitter with its coupling term scaled by the driven-state occupation.

    The reflected target photon sees the emitter response weighted by the
    probability that the charge occupies the driven ground state; weight 0
    removes the emitter exactly.
    """
    if weight <= 0:
        return None
    em = config.emitter
    return EmitterCoupling(em.g * math.sqrt(weight), em.gamma, em.center)


def reflected_intensities(config, detuning, weight, ellipticity):
    """Circular intensities of the reflected target light at one detuning."""
    r_h = reflection_coefficient(detuning, config.mode_h)
    r_v = reflection_coefficient(detuning, config.mode_v, _weighted_emitter(config, weight))
    state = polarization.reflect_state(polarization.rcp_input(ellipticity), r_h, r_v)
    return polarization.circular_intensities(state)


def reflected_phase(config, detuning, weight, ellipticity):
    """Phase shift of the reflected target light at one detuning, degrees."""
    return polarization.phase_shift(
        reflected_intensities(config, detuning, weight, ellipticity)
    )


def input_phase(ellipticity):
    """Phase of the unreflected input state (the far-detuned limit)."""
    return polarization.phase_shift(
        polarization.circular_intensities(polarization.rcp_input(ellipticity))
    )


def gaussian_convolve(x, y, sigma):
    """Convolve samples y(x) with a normalized Gaussian kernel of width sigma.

    The kernel is renormalized per point over the available window, so edge
    values are local averages instead of decaying toward zero.
    """
    if sigma <= 0:
        return np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    kernel = np.exp(-0.5 * ((x[None, :] - x[:, None]) / sigma) ** 2)
    return (kernel @ np.asarray(y, dtype=float)) / kernel.sum(axis=1)


# ---------------------------------------------------------------------------
# Calibrations


@lru_cache(maxsize=32)
def calibrate_ellipticity(config):
    """Input ellipticity reproducing the baseline phase with the control off.

    Bisects the ellipticity so the reflected phase at the emitter center,
    with equal ground-state occupation (weight 0.5), equals the configured
    baseline phase.  The phase is monotone increasing in the ellipticity.
    """
    target = config.baseline_phase_deg
    center = config.emitter_detuning_uev

    def phase_of(eps):
        return reflected_phase(config, center, 0.5, eps)

    try:
        return fitting.bisect(phase_of, 0.0, 1.0, target, tol=1e-9)
    except fitting.CalibrationError as exc:
        raise fitting.CalibrationError(
            f"baseline phase {target} deg unreachable by ellipticity alone "
            f"(reachable range [{phase_of(0.0):.2f}, {phase_of(1.0):.2f}] deg)"
        ) from exc


def resolved_ellipticity(config):
    if config.ellipticity is not None:
        return config.ellipticity
    return calibrate_ellipticity(config)


@lru_cache(maxsize=32)
def _calibrated_beta(config):
    return fitting.calibrate_beta(
        config.switch_reduction,
        config.switch_photons,
        config.switch_temperature_k,
        decay_to_driven=config.decay_to_driven,
        decay_to_shelf=config.decay_to_shelf,
        flip_law=config.flip_law,
        duration_ns=config.control_duration_ns,
        dt_ns=config.spin_dt_ns,
    )


def resolved_beta(config):
    if config.beta is not None:
        return config.beta
    return _calibrated_beta(config)


def resolved_photon_to_s(config, measured=None):
    """Saturation slope and its provenance ("config", "fit", or "anchor").

    With measured (photons, phase) data the slope is least-squares fitted;
    otherwise it is anchored so the phase at `anchor_photons` equals
    `anchor_phase_deg`, which requires phi_max above the anchor phase.
    """
    if config.photon_to_s is not None:
        return config.photon_to_s, "config"
    if measured is not None:
        anchor = config.phi_max_deg / config.anchor_phase_deg - 1.0
        result = fitting.least_squares(
            lambda n, k: config.phi_max_deg / (1.0 + np.abs(k) * n),
            measured,
            [max(anchor, 1e-3)],
            param_names=["photon_to_s"],
        )
        return abs(result.params["photon_to_s"]), "fit"
    return config.phi_max_deg / config.anchor_phase_deg - 1.0, "anchor"


def pumped_population(config, control_photons, temperature_k, beta):
    """Driven-state occupation after the control window, from (0.5, 0.5, 0)."""
    rates = spindyn.RateParams(
        drive=beta * math.sqrt(control_photons / config.control_duration_ns),
        decay_to_driven=config.decay_to_driven,
        decay_to_shelf=config.decay_to_shelf,
        ground_flip=spindyn.spin_flip_rate(config.flip_law, temperature_k),
    )
    initial = spindyn.Populations(0.5, 0.5, 0.0)
    final = spindyn.integrate(
        initial, rates, config.control_duration_ns, config.spin_dt_ns
    )
    return final.driven


def _base_metadata(config, **extra):
    meta = {
        "config_sha256": config.sha256(),
        "field_t": config.field_t,
        "rep_period_ns": config.rep_period_ns,
    }
    meta.update(extra)
    return meta


# ---------------------------------------------------------------------------
# Scenarios


def run_reflectivity(config, control_on=False):
    """Reflected circular intensities vs detuning, control pulse off or on.

    With the control off the emitter is weighted by the equal-occupation
    value 0.5; with it on, by the pumped driven-state population for the
    configured control photon number and temperature.  An optional Gaussian
    spectral-jitter convolution is applied to the left-circular channel.
    """
    eps = resolved_ellipticity(config)
    if control_on:
        beta = resolved_beta(config)
        weight = pumped_population(
            config, config.switch_photons, config.temperature_k, beta
        )
    else:
        beta = None
        weight = 0.5

    det = np.asarray(config.detuning_uev)
    i_r = np.empty(det.size)
    i_l = np.empty(det.size)
    for i, d in enumerate(det):
        ci = reflected_intensities(config, d, weight, eps)
        i_r[i] = ci.i_r
        i_l[i] = ci.i_l
    if config.jitter_sigma_uev > 0:
        i_l = gaussian_convolve(det, i_l, config.jitter_sigma_uev)

    state = "on" if control_on else "off"
    return Trace(
        name=f"reflectivity_control_{state}",
        columns=["detuning", "intensity_rcp", "intensity_lcp"],
        units=["ueV", "", ""],
        rows=np.column_stack([det, i_r, i_l]),
        metadata=_base_metadata(
            config,
            control_on=control_on,
            emitter_weight=weight,
            ellipticity=eps,
            beta=beta,
            jitter_sigma_uev=config.jitter_sigma_uev,
        ),
    )


def run_phase_vs_detuning(config):
    """Phase shift vs laser detuning at the configured target photon number.

    Saturation scales only the emitter-induced excess over the input phase,
    so the far-detuned limit stays at the ellipticity baseline.  A Gaussian
    fit of the curve is reported in the metadata; its peak estimates the
    maximum achieved phase shift.
    """
    eps = resolved_ellipticity(config)
    slope, source = resolved_photon_to_s(config)
    params = config.two_level(slope)
    ratio = saturation.coherent_fraction(
        slope * config.target_photons, params
    ) / saturation.coherent_fraction(0.0, params)
    floor = input_phase(eps)

    det = np.asarray(config.phase_detuning_uev)
    phase = np.empty(det.size)
    for i, d in enumerate(det):
        phase[i] = floor + (reflected_phase(config, d, 0.5, eps) - floor) * ratio

    fit = fitting.fit_gaussian(fitting.DataSeries(det, phase))
    return Trace(
        name="phase_vs_detuning",
        columns=["detuning", "phase"],
        units=["ueV", "deg"],
        rows=np.column_stack([det, phase]),
        metadata=_base_metadata(
            config,
            target_photons=config.target_photons,
            ellipticity=eps,
            photon_to_s=slope,
            photon_to_s_source=source,
            fitted_peak_deg=fit.extras["peak"],
            fitted_center_uev=fit.params["center"],
            fitted_sigma_uev=fit.params["sigma"],
        ),
    )


def run_phase_vs_target_power(config, measured=None):
    """Maximum phase shift vs mean photons per target pulse."""
    slope, source = resolved_photon_to_s(config, measured)
    params = config.two_level(slope)
    photons = np.asarray(config.target_photon_list)
    phase = np.array(
        [
            saturation.phase_vs_photon_number(n, params, config.phi_max_deg)
            for n in photons
        ]
    )
    return Trace(
        name="phase_vs_target_power",
        columns=["target_photons", "phase"],
        units=["", "deg"],
        rows=np.column_stack([photons, phase]),
        metadata=_base_metadata(
            config,
            phi_max_deg=config.phi_max_deg,
            photon_to_s=slope,
            photon_to_s_source=source,
        ),
    )


def run_switch_vs_control_power(config):
    """Switching contrast and remaining phase vs control photons, per T.

    Emits one (contrast, phase) column block per temperature.  The phase is
    the linear map baseline * (1 - contrast); both observables are reported
    so the contrast can be compared independently of the phase convention.
    """
    beta = resolved_beta(config)
    baseline = config.baseline_phase_deg
    photons = np.asarray(config.control_photon_list)

    columns = ["control_photons"]
    units = [""]
    blocks = [photons]
    series_meta = []
    for temp in config.temperatures_k:
        contrast = np.empty(photons.size)
        for i, n in enumerate(photons):
            final = pumped_population(config, n, temp, beta)
            contrast[i] = spindyn.switching_contrast(0.5, final)
        phase = np.array(
            [spindyn.phase_after_control(c, baseline) for c in contrast]
        )
        tag = f"{temp:g}K"
        columns += [f"contrast_{tag}", f"phase_{tag}"]
        units += ["", "deg"]
        blocks += [contrast, phase]
        series_meta.append(
            {
                "temperature_k": temp,
                "contrast_at_max_photons": float(contrast[-1]),
                "phase_at_max_photons_deg": float(phase[-1]),
            }
        )

    return Trace(
        name="switch_vs_control_power",
        columns=columns,
        units=units,
        rows=np.column_stack(blocks),
        metadata=_base_metadata(
            config,
            beta=beta,
            baseline_phase_deg=baseline,
            series=series_meta,
        ),
    )
