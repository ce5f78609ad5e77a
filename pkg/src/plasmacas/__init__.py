"""Casimir interaction of a spherical and a planar plasma sheet.

Exact mode-summation energy (round-trip determinant over imaginary
frequency), the proximity force approximation, and the small-separation
asymptotic expansion with its next-to-leading correction.
"""

from .errors import NumericsError, SpectralAnomalyError
from .scattering import (PERFECT_CONDUCTOR, PlaneSheet, Polarization, SphereSheet,
                         plane_r, sphere_t)
from .roundtrip import AngularKernel, RoundTripBlock, assemble_block, m_element
from .energy_exact import EnergyResult, NumericsSpec, casimir_energy, logdet_one_minus
from .pfa import PfaParams, lifshitz_plane_plane, pfa_energy
from .asymptotics import NtlCoefficients, e0, e1, ntl_coefficients, ntl_integrand, theta

__all__ = [
    "AngularKernel",
    "EnergyResult",
    "NtlCoefficients",
    "NumericsError",
    "NumericsSpec",
    "PERFECT_CONDUCTOR",
    "PfaParams",
    "PlaneSheet",
    "Polarization",
    "RoundTripBlock",
    "SphereSheet",
    "SpectralAnomalyError",
    "assemble_block",
    "casimir_energy",
    "e0",
    "e1",
    "lifshitz_plane_plane",
    "logdet_one_minus",
    "m_element",
    "ntl_coefficients",
    "ntl_integrand",
    "pfa_energy",
    "plane_r",
    "sphere_t",
    "theta",
]

__version__ = "0.1.0"
