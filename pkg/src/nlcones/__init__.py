"""Numerical laboratory for nonlocal minimal cones in R^3."""
__version__ = "0.1.0"

from .specfun import DomainError, FracOrder, gamma, frac_lap_constant, hardy_constant
from .curves import (CurveError, SphericalCurve, ConeTrace, CylinderBand, make_circle,
                     make_perturbed_circle, make_double_loop, cylinder_crossing_measure)
from .kernels import KernelParams, kernel_ks, ks_lower_bound_ratio, ring_kernel_integral, curve_pair_kernel_integral
from .seminorms import SampledFunction, hs_seminorm, poincare_ratio, flatness_fit
from .hardy import RadialProfile, hardy_ratio, I_functional, J_functional, corollary_check, near_optimizer
from .stability import (StabilitySettings, c2_profile, A_total, crucial_ratio, radial_stability_gap,
                        assemble_form, min_rayleigh, stability_report)
from .perimeter import GridSet, interaction, fractional_perimeter, classical_perimeter, bbm_scaling_scan

__all__ = [
    "DomainError", "FracOrder", "gamma", "frac_lap_constant", "hardy_constant",
    "CurveError", "SphericalCurve", "ConeTrace", "CylinderBand", "make_circle", "make_perturbed_circle",
    "make_double_loop", "cylinder_crossing_measure",
    "KernelParams", "kernel_ks", "ks_lower_bound_ratio", "ring_kernel_integral", "curve_pair_kernel_integral",
    "SampledFunction", "hs_seminorm", "poincare_ratio", "flatness_fit",
    "RadialProfile", "hardy_ratio", "I_functional", "J_functional", "corollary_check", "near_optimizer",
    "StabilitySettings", "c2_profile", "A_total", "crucial_ratio", "radial_stability_gap", "assemble_form",
    "min_rayleigh", "stability_report",
    "GridSet", "interaction", "fractional_perimeter", "classical_perimeter", "bbm_scaling_scan",
]
