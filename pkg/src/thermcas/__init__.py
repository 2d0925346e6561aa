"""Lifshitz-theory Casimir energies and pressures with damped thermal statistics."""

from .dielectric import DielectricModel, DrudeTerm, Oscillator, eval_imag, eval_real
from .errors import ConfigError, ConvergenceError, DomainError, InvalidModelError, SingularInterfaceError
from .lifshitz import (EnergyBreakdown, PressureBreakdown, Settings, ThermalSpec, damped_bose,
                       energy, energy_matsubara, energy_real_axis, energy_saturated, energy_zero_t,
                       matsubara_term, pressure)
from .materials import load_materials
from .modes import LayerStack, Polarization, dispersion_solve, fresnel_te, fresnel_tm, gamma, mode_condition

__all__ = [
    "DielectricModel", "DrudeTerm", "Oscillator", "eval_imag", "eval_real",
    "ConfigError", "ConvergenceError", "DomainError", "InvalidModelError", "SingularInterfaceError",
    "EnergyBreakdown", "PressureBreakdown", "Settings", "ThermalSpec", "damped_bose", "energy",
    "energy_matsubara", "energy_real_axis", "energy_saturated", "energy_zero_t", "matsubara_term",
    "pressure", "load_materials", "LayerStack", "Polarization", "dispersion_solve", "fresnel_te",
    "fresnel_tm", "gamma", "mode_condition",
]
