"""Convex energy-density constitutive laws for soft-magnetic materials."""

from .analysis import (
    IsoContour,
    Plane,
    ValidationReport,
    check_gradient,
    check_hessian,
    check_path_independence,
    contour_normal_error,
    extract_contour,
    path_energy,
    validate_law,
)
from .bhcurve import (
    BHCurve,
    BHSample,
    ExtrapolationMode,
    ExtrapolationSpec,
    b_of_w,
    extrapolate,
    h_of_b,
    load_curve,
    parse_curve_csv,
    read_curve_csv,
    w_of_b,
)
from .errors import *  # noqa: F403
from .fieldcore import MU0, NU0, FieldStrength, FluxDensity, SymTensor3
from .golaw import GrainOrientedLaw, go_energy, go_field, solve_axes
from .lamination import LaminatedLaw, LaminationMode, lam_energy, lam_energy_star, lam_field, solve_insulation_flux
from .laws import IsotropicLaw, LinearAnisotropicLaw, MaterialLaw, VacuumLaw
from .lawspec import build_law, load_law_spec

__version__ = "0.1.0"
