"""Constant curvature 1 wave fronts in the unit sphere.

Developable tubes over spherical curves, their caustics, parallels and duals,
and finite-difference certification of the identities they satisfy.
"""
__version__ = "0.1.0"

from .ambient import AmbientVector, OrthoFrame, Signature, align_rigid, inner, orthonormalize, wedge
from .config import DEFAULT_TOLERANCES, SessionConfig, Tolerances
from .curves import (
    PeriodInfo,
    PeriodKind,
    SphericalCurve,
    bishop,
    classify_period,
    frenet,
    great_circle,
    helix_from_kappa_tau,
    make_helix,
    reparametrize_arclength,
)
from .fronts import (
    FrontGrid,
    PrincipalCurvatureValue,
    TubeFront,
    evaluate,
    parallel_front,
    singular_curve,
    tube_from_curve,
    umbilic_scan,
)
from .transforms import (
    caustic,
    dual,
    example_frontal_fE,
    example_frontal_fH,
    inverse_caustic,
    lift_klein,
    project_central,
    project_stereographic,
    self_dual_test,
)
from .verification import (
    VerificationReport,
    congruence_check,
    front_criterion,
    gauss_equation_residual,
    rank_dnu_check,
)

__all__ = [
    "AmbientVector", "OrthoFrame", "Signature", "align_rigid", "inner", "orthonormalize", "wedge",
    "DEFAULT_TOLERANCES", "SessionConfig", "Tolerances",
    "PeriodInfo", "PeriodKind", "SphericalCurve", "bishop", "classify_period", "frenet", "great_circle",
    "helix_from_kappa_tau", "make_helix", "reparametrize_arclength",
    "FrontGrid", "PrincipalCurvatureValue", "TubeFront", "evaluate", "parallel_front", "singular_curve",
    "tube_from_curve", "umbilic_scan",
    "caustic", "dual", "example_frontal_fE", "example_frontal_fH", "inverse_caustic", "lift_klein",
    "project_central", "project_stereographic", "self_dual_test",
    "VerificationReport", "congruence_check", "front_criterion", "gauss_equation_residual",
    "rank_dnu_check",
]
