"""Numerical toolkit for space-like and time-like surfaces with flat
normal connection in 4-dimensional space forms of any signature.

The package verifies the Gauss/Codazzi/Ricci structure equations for
frame-coefficient data, constructs explicit coefficient families,
solves the over-determined quadratic angle system, detects parallel
normal vector fields, and integrates the moving frame into an actual
immersion.
"""

__version__ = "0.1.0"

from .frames import CoefficientSet, assemble_connection, compatibility_defect
from .gcr import (
    dependence_report,
    detect_parallel_normal,
    gamma_potential,
    gauss_residual,
    gcr_residuals,
    normal_flatness_defect,
    ricci_residual,
)
from .grid import FieldGrid, GridSpec, diff_u, diff_v, field_map, load_fields, save_fields
from .integrator import integrate_frame, reconstruct_coefficients
from .riccati import build_forms, obstruction_verdict, solve_riccati
from .spaceform import CaseSpec, ambient_inner, ambient_signature, quadric_defect

__all__ = [
    "__version__",
    "GridSpec", "FieldGrid", "diff_u", "diff_v", "field_map",
    "save_fields", "load_fields",
    "CaseSpec", "ambient_signature", "ambient_inner", "quadric_defect",
    "CoefficientSet", "assemble_connection", "compatibility_defect",
    "gauss_residual", "ricci_residual", "gcr_residuals",
    "normal_flatness_defect", "gamma_potential",
    "dependence_report", "detect_parallel_normal",
    "build_forms", "solve_riccati", "obstruction_verdict",
    "integrate_frame", "reconstruct_coefficients",
]
