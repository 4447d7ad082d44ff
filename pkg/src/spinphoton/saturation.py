"""Saturation of the coherently scattered fraction of a driven two-level line.

The elastically (phase-preserving) scattered fraction of the total scattered
intensity is F(s) = (T2 / 2*T1) / (1 + s) with saturation parameter s.  Only
this coherent part carries the dot-induced polarization rotation, so the
observed phase shift rolls off with incident power as F(s)/F(0) = 1/(1 + s).
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class TwoLevelParams:
    """Two-level transition times and the photon-number calibration slope.

    t1:          lifetime (ns), > 0
    t2:          coherence time (ns), in (0, 2*t1]
    photon_to_s: saturation parameter per mean photon per pulse, > 0.  This
                 slope absorbs the unknown in-coupling efficiency between
                 photons at the input and photons driving the transition.
    """

    t1: float
    t2: float
    photon_to_s: float

    def __post_init__(self):
        if not self.t1 > 0:
            raise ValueError(f"t1 must be positive, got {self.t1}")
        if not 0 < self.t2 <= 2 * self.t1:
            raise ValueError(f"t2 must lie in (0, 2*t1], got {self.t2}")
        if not self.photon_to_s > 0:
            raise ValueError(f"photon_to_s must be positive, got {self.photon_to_s}")


def coherent_fraction(s, params):
    """Coherent fraction (t2 / 2*t1) / (1 + s), in [0, 1]."""
    if s < 0:
        raise ValueError(f"saturation parameter must be non-negative, got {s}")
    return (params.t2 / (2.0 * params.t1)) / (1.0 + s)


def phase_vs_photon_number(photons, params, phi_max_deg):
    """Phase shift at a mean photon number per pulse, in degrees.

    The zero-power phase phi_max is scaled by the normalized coherent
    fraction: phi(n) = phi_max * F(s)/F(0) with s = photon_to_s * n, which is
    strictly decreasing in n and tends to phi_max as n -> 0.
    """
    if photons < 0:
        raise ValueError(f"photon number must be non-negative, got {photons}")
    s = params.photon_to_s * photons
    return phi_max_deg * coherent_fraction(s, params) / coherent_fraction(0.0, params)
