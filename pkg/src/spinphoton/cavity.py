"""Reflection off a single-sided micropillar cavity with an optional emitter.

The complex reflection amplitude follows the standard input-output form for a
single-sided cavity probed through its coupling mirror,

    r(w) = 1 - kappa_ex / [ i(w_c - w) + kappa/2 + g^2 / (i(w_e - w) + gamma) ]

with every symbol an energy in ueV and the g^2 term dropped when no emitter is
attached.  On bare-cavity resonance this reduces to r = 1 - 2*alpha with
alpha = kappa_ex/kappa; with the emitter on joint resonance it becomes
r = 1 - 2*alpha / (1 + C) for cooperativity C = 2 g^2 / (kappa * gamma), so
the on-resonance real part changes sign exactly where C crosses 2*alpha - 1.

The emitter denominator uses the full linewidth gamma (not gamma/2) so that
the sign-change condition above holds with this cooperativity convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CavityMode:
    """One polarization-resolved cavity mode.

    center:   mode center energy (ueV, relative to any common reference)
    kappa:    total energy decay rate == Lorentzian FWHM of the dip (ueV)
    kappa_ex: decay into the collected reflected mode (ueV), 0 < kappa_ex <= kappa
    label:    polarization tag, e.g. "H" or "V"
    """

    center: float
    kappa: float
    kappa_ex: float
    label: str = ""

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if not 0 < self.kappa_ex <= self.kappa:
            raise ValueError(
                f"kappa_ex must lie in (0, kappa], got kappa_ex={self.kappa_ex}, "
                f"kappa={self.kappa}"
            )

    def alpha(self):
        """Interference contrast kappa_ex / kappa, in (0, 1]."""
        return self.kappa_ex / self.kappa


@dataclass(frozen=True)
class EmitterCoupling:
    """Dipole transition coupled to a cavity mode.

    g:      coupling strength (ueV), >= 0
    gamma:  total transition linewidth (ueV), > 0
    center: transition center energy (ueV, same reference as the mode)
    """

    g: float
    gamma: float
    center: float = 0.0

    def __post_init__(self):
        if self.g < 0:
            raise ValueError(f"coupling g must be non-negative, got {self.g}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    def cooperativity(self, mode: CavityMode):
        """Cooperativity 2 g^2 / (kappa * gamma) against the given mode."""
        return 2.0 * self.g**2 / (mode.kappa * self.gamma)


def reflection_coefficient(laser, mode, emitter=None):
    """Complex reflection amplitude at laser energy `laser` (ueV).

    Accepts a scalar or numpy array for `laser`.  |r| <= 1 holds for any
    valid mode (kappa_ex <= kappa) and emitter.
    """
    denom = 1j * (mode.center - laser) + mode.kappa / 2.0
    if emitter is not None and emitter.g > 0:
        denom = denom + emitter.g**2 / (1j * (emitter.center - laser) + emitter.gamma)
    return 1.0 - mode.kappa_ex / denom


def reflectivity_spectrum(grid, mode, emitter=None):
    """|r|^2 sampled on a strictly increasing detuning grid (ueV).

    Returns a numpy array with one value per grid point.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("detuning grid must be non-empty")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise ValueError("detuning grid must be strictly increasing")
    r = reflection_coefficient(grid, mode, emitter)
    return np.abs(r) ** 2


def g_from_cooperativity(cooperativity, mode, gamma):
    """Coupling strength g = sqrt(C * kappa * gamma / 2) in ueV."""
    if cooperativity < 0:
        raise ValueError(f"cooperativity must be non-negative, got {cooperativity}")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return math.sqrt(cooperativity * mode.kappa * gamma / 2.0)
