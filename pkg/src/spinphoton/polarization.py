"""Jones-vector polarization states and circular-intensity observables.

States live in the H/V linear basis.  The circular decomposition uses a fixed
handedness convention anchored by the right-circular state (1, i)/sqrt(2),
which yields i_r = 1: only the R/L intensity contrast matters downstream, not
which lab-frame handedness is called "right".
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class PolarizationState:
    """Two-component complex Jones vector (a_h, a_v)."""

    a_h: complex
    a_v: complex

    def norm(self):
        """Total intensity |a_h|^2 + |a_v|^2."""
        return abs(self.a_h) ** 2 + abs(self.a_v) ** 2


@dataclass(frozen=True)
class CircularIntensities:
    """Intensities of the right- and left-circular components."""

    i_r: float
    i_l: float


def rcp_input(ellipticity=0.0):
    """Normalized right-circular input with an imperfection knob.

    ellipticity 0 gives the ideal state (1, i)/sqrt(2); a value eps in [0, 1]
    places amplitude eps on the orthogonal circular component, keeping the
    state normalized:  sqrt(1 - eps^2) * RCP + eps * LCP.  eps = 1 is a full
    swap to the orthogonal circular state.
    """
    if not 0.0 <= ellipticity <= 1.0:
        raise ValueError(f"ellipticity must lie in [0, 1], got {ellipticity}")
    major = math.sqrt(1.0 - ellipticity**2)
    a_h = (major + ellipticity) / _SQRT2
    a_v = 1j * (major - ellipticity) / _SQRT2
    return PolarizationState(a_h, a_v)


def reflect_state(state, r_h, r_v):
    """Apply per-polarization reflection amplitudes; not renormalized."""
    return PolarizationState(state.a_h * r_h, state.a_v * r_v)


def circular_intensities(state):
    """Decompose a state into right/left circular intensities.

    i_r = |(a_h - i a_v)/sqrt(2)|^2,  i_l = |(a_h + i a_v)/sqrt(2)|^2;
    their sum equals the state norm.
    """
    i_r = abs((state.a_h - 1j * state.a_v) / _SQRT2) ** 2
    i_l = abs((state.a_h + 1j * state.a_v) / _SQRT2) ** 2
    return CircularIntensities(i_r, i_l)


def polarization_contrast(intensities):
    """Contrast P = (i_r - i_l) / (i_r + i_l)."""
    total = intensities.i_r + intensities.i_l
    if total <= 0.0:
        raise ValueError("polarization contrast undefined: total intensity is zero")
    return (intensities.i_r - intensities.i_l) / total


def phase_shift(intensities):
    """Phase shift arccos(P) in degrees, in [0, 180]."""
    p = polarization_contrast(intensities)
    p = min(1.0, max(-1.0, p))
    return math.degrees(math.acos(p))
