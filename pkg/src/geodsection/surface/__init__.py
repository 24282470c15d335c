"""The hypersurface M = f^{-1}(0): families, phases, curvature and audits."""

from .audit import (
    AuditReport,
    DefinitenessFinding,
    SymmetryFinding,
    audit_definiteness,
    audit_surface,
    audit_symmetry,
)
from .families import (
    REGULARITY_FLOOR,
    DefiningSurface,
    Ellipsoid,
    ExpressionSurface,
    Revolution,
    Sphere,
    surface_from_config,
)
from .geometry import sectional_curvature, shape_operator, tangent_bases, tangent_hessian_eigenvalues
from .phase import (
    CONSTRAINT_TOLERANCE,
    PhasePoint,
    newton_to_surface,
    project_to_surface,
    tangent_unit,
)
from .sampling import sample_phases, sample_strip, sample_surface, shoot_rays, sphere_directions

__all__ = [
    "AuditReport",
    "CONSTRAINT_TOLERANCE",
    "DefiningSurface",
    "DefinitenessFinding",
    "Ellipsoid",
    "ExpressionSurface",
    "PhasePoint",
    "REGULARITY_FLOOR",
    "Revolution",
    "Sphere",
    "SymmetryFinding",
    "audit_definiteness",
    "audit_surface",
    "audit_symmetry",
    "newton_to_surface",
    "project_to_surface",
    "sample_phases",
    "sample_strip",
    "sample_surface",
    "sectional_curvature",
    "shape_operator",
    "shoot_rays",
    "sphere_directions",
    "surface_from_config",
    "tangent_bases",
    "tangent_hessian_eigenvalues",
    "tangent_unit",
]
