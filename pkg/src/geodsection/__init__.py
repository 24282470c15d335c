"""Global hypersurfaces of section for geodesic flows on convex implicit hypersurfaces."""

from .closedform import (
    RevolutionProfile,
    billiard_g0,
    billiard_second_iterate,
    clairaut_g,
    closed_form_return_map,
    elliptic_f,
    elliptic_pi,
    ellipsoid_g,
    predicted_return,
)
from .errors import GeodSectionError
from .expr import jet_eval, parse_expression
from .flow import FlowState, IntegratorConfig, flow_to_time, geodesic_vector_field, integrate, step
from .section import (
    ReturnRecord,
    a_value,
    boundary_return_extrapolation,
    estimate_epsilon,
    normal_hessian,
    page_angle,
    page_point,
    random_binding_points,
    random_page_points,
    return_map,
    symplecticity_defect,
    theta_of_field,
)
from .surface import (
    Ellipsoid,
    ExpressionSurface,
    PhasePoint,
    Revolution,
    Sphere,
    audit_surface,
    project_to_surface,
    sectional_curvature,
    surface_from_config,
)

__version__ = "0.1.0"

__all__ = [
    "Ellipsoid",
    "ExpressionSurface",
    "FlowState",
    "GeodSectionError",
    "IntegratorConfig",
    "PhasePoint",
    "ReturnRecord",
    "Revolution",
    "RevolutionProfile",
    "Sphere",
    "a_value",
    "audit_surface",
    "billiard_g0",
    "billiard_second_iterate",
    "boundary_return_extrapolation",
    "clairaut_g",
    "closed_form_return_map",
    "elliptic_f",
    "elliptic_pi",
    "ellipsoid_g",
    "estimate_epsilon",
    "flow_to_time",
    "geodesic_vector_field",
    "integrate",
    "jet_eval",
    "normal_hessian",
    "page_angle",
    "page_point",
    "parse_expression",
    "predicted_return",
    "project_to_surface",
    "random_binding_points",
    "random_page_points",
    "return_map",
    "sectional_curvature",
    "step",
    "surface_from_config",
    "symplecticity_defect",
    "theta_of_field",
]
