"""Rate-equation dynamics of the driven lambda system.

Three populations evolve under the control drive: the driven ground state
(pumped out by the drive), the shelf ground state (the dark state the charge
is pumped into), and the shared excited state.  With drive rate W, excited
decays G1 (to driven) and G2 (to shelf), and ground-state interconversion
rate x, the equations are

    d(driven)/dt  = G1*excited - W*driven - x*driven + x*shelf
    d(shelf)/dt   = G2*excited - x*shelf + x*driven
    d(excited)/dt = W*driven - (G1 + G2)*excited

All rates are plain rates in 1/ns; the population sum is conserved exactly.
Integration is fixed-step classical fourth-order Runge-Kutta, chosen for
bit-level reproducibility over adaptive efficiency (the system is not stiff
at these rates).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .units import KB_UEV_PER_K

DEFAULT_DT_NS = 0.001

_POP_TOL = 1e-9


class IntegrationError(RuntimeError):
    """Raised when step-size preconditions or population invariants fail."""


@dataclass(frozen=True)
class Populations:
    """Normalized occupations of the lambda system; sum must be ~1."""

    driven: float
    shelf: float
    excited: float

    def __post_init__(self):
        for name in ("driven", "shelf", "excited"):
            value = getattr(self, name)
            if not -_POP_TOL <= value <= 1.0 + _POP_TOL:
                raise ValueError(f"population '{name}' out of [0, 1]: {value}")
        total = self.driven + self.shelf + self.excited
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"populations must sum to 1, got {total}")


@dataclass(frozen=True)
class RateParams:
    """Rates driving the lambda system, all in 1/ns and non-negative.

    drive:           pump rate out of the driven ground state
    decay_to_driven: excited -> driven ground relaxation
    decay_to_shelf:  excited -> shelf ground relaxation
    ground_flip:     driven <-> shelf interconversion
    """

    drive: float
    decay_to_driven: float
    decay_to_shelf: float
    ground_flip: float

    def __post_init__(self):
        for name in ("drive", "decay_to_driven", "decay_to_shelf", "ground_flip"):
            if getattr(self, name) < 0:
                raise ValueError(f"rate '{name}' must be non-negative")


@dataclass(frozen=True)
class SpinFlipLaw:
    """Thermally activated ground-state flip rate A * exp(-Ez / (kB*T)).

    prefactor: high-temperature limit A (1/ns), >= 0
    zeeman:    activation energy Ez (ueV), > 0
    """

    prefactor: float
    zeeman: float

    def __post_init__(self):
        if self.prefactor < 0:
            raise ValueError(f"prefactor must be non-negative, got {self.prefactor}")
        if not self.zeeman > 0:
            raise ValueError(f"zeeman splitting must be positive, got {self.zeeman}")


def derivatives(p, r):
    """Time derivatives (d_driven, d_shelf, d_excited) in 1/ns; they sum to 0."""
    d_driven = (
        r.decay_to_driven * p.excited
        - r.drive * p.driven
        - r.ground_flip * p.driven
        + r.ground_flip * p.shelf
    )
    d_shelf = (
        r.decay_to_shelf * p.excited
        - r.ground_flip * p.shelf
        + r.ground_flip * p.driven
    )
    d_excited = r.drive * p.driven - (r.decay_to_driven + r.decay_to_shelf) * p.excited
    return d_driven, d_shelf, d_excited


def integrate(p0, r, duration, dt=DEFAULT_DT_NS):
    """Propagate populations over `duration` ns with fixed-step RK4.

    duration 0 returns p0 unchanged.  Raises IntegrationError for invalid
    step sizes or if the final populations violate positivity or sum
    conservation beyond 1e-9.
    """
    if duration < 0:
        raise IntegrationError(f"duration must be non-negative, got {duration}")
    if duration == 0:
        return p0
    if not 0 < dt <= duration:
        raise IntegrationError(f"dt must lie in (0, duration], got dt={dt}")

    a, b, c = p0.driven, p0.shelf, p0.excited
    g1, g2 = r.decay_to_driven, r.decay_to_shelf
    w, x = r.drive, r.ground_flip
    gt = g1 + g2

    def deriv(da, db, dc):
        return (
            g1 * dc - w * da - x * da + x * db,
            g2 * dc - x * db + x * da,
            w * da - gt * dc,
        )

    n_steps = int(math.floor(duration / dt + 1e-12))
    remainder = duration - n_steps * dt
    steps = [dt] * n_steps
    if remainder > 1e-12 * duration:
        steps.append(remainder)

    for h in steps:
        k1 = deriv(a, b, c)
        k2 = deriv(a + 0.5 * h * k1[0], b + 0.5 * h * k1[1], c + 0.5 * h * k1[2])
        k3 = deriv(a + 0.5 * h * k2[0], b + 0.5 * h * k2[1], c + 0.5 * h * k2[2])
        k4 = deriv(a + h * k3[0], b + h * k3[1], c + h * k3[2])
        a += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        b += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        c += h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        if a < -_POP_TOL or b < -_POP_TOL or c < -_POP_TOL:
            raise IntegrationError(
                f"population became negative during integration: "
                f"driven={a}, shelf={b}, excited={c}"
            )

    total = a + b + c
    if abs(total - (p0.driven + p0.shelf + p0.excited)) > _POP_TOL:
        raise IntegrationError(f"population sum drifted to {total}")
    return Populations(a, b, c)


def spin_flip_rate(law, temperature_k):
    """Ground-state flip rate at temperature T (K); 0 at T = 0."""
    if temperature_k < 0:
        raise ValueError(f"temperature must be non-negative, got {temperature_k} K")
    if temperature_k == 0:
        return 0.0
    return law.prefactor * math.exp(-law.zeeman / (KB_UEV_PER_K * temperature_k))


def switching_contrast(driven_before, driven_after):
    """Normalized population asymmetry (before - after) / (before + after)."""
    if driven_before < 0 or driven_after < 0:
        raise ValueError("populations must be non-negative")
    total = driven_before + driven_after
    if total <= 0.0:
        raise ValueError("switching contrast undefined: both populations are zero")
    return (driven_before - driven_after) / total


def phase_after_control(contrast, baseline_phase_deg):
    """Remaining phase after the control pulse, baseline * (1 - contrast).

    The linear map is the simplest monotone function with the right
    endpoints: contrast 0 keeps the baseline, contrast 1 removes the
    phase entirely.
    """
    if not 0.0 <= contrast <= 1.0:
        raise ValueError(f"contrast must lie in [0, 1], got {contrast}")
    if not 0.0 < baseline_phase_deg < 180.0:
        raise ValueError(
            f"baseline phase must lie in (0, 180) degrees, got {baseline_phase_deg}"
        )
    return baseline_phase_deg * (1.0 - contrast)
