"""Unit conventions and physical constants.

Conventions used throughout the package:

* energies in microelectronvolts (ueV)
* times in nanoseconds; rates are plain (non-angular) rates in 1/ns,
  so 1 GHz == 1 ns^-1
* angular frequencies in rad/ns, produced only by energy_to_angular_rate
* magnetic fields in tesla, temperatures in kelvin

Wavelengths (nm) and eV appear only at I/O boundaries.
"""

HBAR_UEV_NS = 0.6582119569    # reduced Planck constant, ueV*ns
KB_UEV_PER_K = 86.17333       # Boltzmann constant, ueV/K
MU_B_UEV_PER_T = 57.88382     # Bohr magneton, ueV/T
HC_EV_NM = 1239.84198         # h*c, eV*nm

UEV_PER_EV = 1e6


def wavelength_to_energy(wavelength_nm):
    """Photon energy in ueV for a vacuum wavelength in nm."""
    if not wavelength_nm > 0:
        raise ValueError(f"wavelength must be positive, got {wavelength_nm} nm")
    return HC_EV_NM / wavelength_nm * UEV_PER_EV


def energy_to_wavelength(energy_uev):
    """Vacuum wavelength in nm for a photon energy in ueV (inverse of above)."""
    if not energy_uev > 0:
        raise ValueError(f"energy must be positive, got {energy_uev} ueV")
    return HC_EV_NM * UEV_PER_EV / energy_uev


def zeeman_splitting(g_factor, field_t):
    """Zeeman splitting |g| * mu_B * B in ueV."""
    if field_t < 0:
        raise ValueError(f"magnetic field must be non-negative, got {field_t} T")
    return abs(g_factor) * MU_B_UEV_PER_T * field_t


def energy_to_angular_rate(energy_uev):
    """Angular frequency E/hbar in rad/ns."""
    return energy_uev / HBAR_UEV_NS
