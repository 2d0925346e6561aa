"""Physical constants and the unit conventions used across the package.

Internally every frequency is an angular frequency in rad/s, lengths are in
meters, temperatures in kelvin and energies per area in J/m^2.  Material
parameters may be given in eV at the config/CLI boundary; they are converted
once, here.
"""

import math

from scipy.constants import Boltzmann as KB
from scipy.constants import c as C
from scipy.constants import hbar as HBAR

# 1 eV / hbar in rad/s
EV_TO_RAD_S = 1.519267e15

__all__ = ["KB", "C", "HBAR", "EV_TO_RAD_S", "ev", "thermal_rate", "matsubara_step"]


def ev(value):
    """Convert an energy in eV to an angular frequency in rad/s."""
    return value * EV_TO_RAD_S


def thermal_rate(T):
    """k_B T / hbar in rad/s."""
    return KB * T / HBAR


def matsubara_step(T):
    """Spacing 2 pi k_B T / hbar of the Matsubara frequencies, rad/s."""
    return 2.0 * math.pi * KB * T / HBAR
