"""Vacuum entanglement between two point-like detectors coupled to a massless Dirac field."""

from .entanglement import (EntanglementReport, PTMatrix, assemble_pt, entanglement_report,
                           leading_order_negativity, peres_test)
from .kernels import (AmplitudeSet, DetectorSpec, FieldModel, GeometrySpec, Tolerances,
                      compute_amplitudes, condition_margin, cross_emission, detector_pair,
                      emission_norm2, exchange_amplitude)
from .quadrature import IntegrationSpec, QuadratureResult, integrate_1d, integrate_2d
from .windows import (WindowProfile, gaussian_window, superosc_window, synthesize_superosc,
                      window_from_dict)

__version__ = "0.1.0"

__all__ = [
    "EntanglementReport", "PTMatrix", "assemble_pt", "entanglement_report",
    "leading_order_negativity", "peres_test", "AmplitudeSet", "DetectorSpec", "FieldModel",
    "GeometrySpec", "Tolerances", "compute_amplitudes", "condition_margin", "cross_emission",
    "detector_pair", "emission_norm2", "exchange_amplitude", "IntegrationSpec",
    "QuadratureResult", "integrate_1d", "integrate_2d", "WindowProfile", "gaussian_window",
    "superosc_window", "synthesize_superosc", "window_from_dict",
]
