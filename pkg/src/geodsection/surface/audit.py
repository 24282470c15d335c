"""Sampling-based certificates for the hypotheses on f.

* symmetry: f(x0, x) = f(-x0, x) on a strip |x0| <= w, hence f_0(0, x) = 0;
* definiteness: Hess f restricted to T_x M is definite at every sample;
* curvature range: extremes of the sectional curvature over eigen-planes;
* epsilon: sampled lower bound of the angular function A (see ``section``).

Every result is "passed at N samples", never a proof.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import IndefiniteError, NonPositiveEpsilon, RegularityError
from .families import REGULARITY_FLOOR, DefiningSurface
from .geometry import tangent_hessian_eigenvalues
from .sampling import sample_strip, sample_surface

DEFAULT_SAMPLES = 4096
SYMMETRY_TOLERANCE = 1e-10


def _function_scale(surface: DefiningSurface, X: np.ndarray) -> float:
    _, g, _ = surface.jets(X)
    return max(1.0, float(np.max(np.linalg.norm(g, axis=1) * np.linalg.norm(X, axis=1))))


def _check_regular(surface: DefiningSurface, X: np.ndarray):
    _, g, _ = surface.jets(X)
    norms = np.linalg.norm(g, axis=1)
    bad = np.flatnonzero(norms <= REGULARITY_FLOOR)
    if bad.size:
        i = bad[0]
        raise RegularityError(f"|grad f| = {norms[i]:.3e} below floor at sampled point {X[i].tolist()}")


def diameter(surface: DefiningSurface, samples: int = 1024, seed: int = 0) -> float:
    X = sample_surface(surface, samples, seed)
    if len(X) == 0:
        raise RegularityError("no ray from the origin meets M; is the origin enclosed?")
    return 2.0 * float(np.max(np.linalg.norm(X, axis=1)))


@dataclass
class SymmetryFinding:
    ok: bool
    max_violation: float
    max_reflection_defect: float
    max_normal_derivative: float
    strip_halfwidth: float
    tolerance: float
    sample_count: int
    witness: list[float] | None = None


def audit_symmetry(
    surface: DefiningSurface, strip_halfwidth: float | None = None, samples: int = DEFAULT_SAMPLES, seed: int = 0
) -> SymmetryFinding:
    """Check f(x0, x) = f(-x0, x) and f_0(0, x) = 0 on sampled strip points."""
    if strip_halfwidth is None:
        strip_halfwidth = 0.2 * diameter(surface, seed=seed)
    if not strip_halfwidth > 0:
        raise ValueError("strip_halfwidth must be positive")
    X = sample_strip(surface, samples, strip_halfwidth, seed)
    if len(X) == 0:
        raise RegularityError("no strip sample reached M")
    _check_regular(surface, X)
    mirrored = X.copy()
    mirrored[:, 0] *= -1
    reflect = np.abs(surface.values(X) - surface.values(mirrored))
    on_equator = X.copy()
    on_equator[:, 0] = 0.0
    _, g0, _ = surface.jets(on_equator)
    normal = np.abs(g0[:, 0])
    tol = SYMMETRY_TOLERANCE * _function_scale(surface, X)
    worst = np.maximum(reflect, normal)
    i = int(np.argmax(worst))
    ok = bool(worst[i] < tol)
    return SymmetryFinding(
        ok=ok,
        max_violation=float(worst[i]),
        max_reflection_defect=float(reflect.max()),
        max_normal_derivative=float(normal.max()),
        strip_halfwidth=float(strip_halfwidth),
        tolerance=tol,
        sample_count=len(X),
        witness=None if ok else X[i].tolist(),
    )


@dataclass
class DefinitenessFinding:
    classification: str  # "positive" | "negative" | "indefinite"
    min_eigenvalue: float
    max_eigenvalue: float
    sample_count: int
    curvature_range: tuple[float, float]
    witness_point: list[float] | None = None
    witness_eigenvalue: float | None = None
    witness_eigenvector: list[float] | None = None

    @property
    def ok(self) -> bool:
        return self.classification != "indefinite"


def _curvature_range(vals: np.ndarray, gg: np.ndarray) -> tuple[float, float]:
    m = vals.shape[1]
    iu = np.triu_indices(m, 1)
    products = (vals[:, :, None] * vals[:, None, :])[:, iu[0], iu[1]] / gg[:, None]
    return float(products.min()), float(products.max())


def audit_definiteness(
    surface: DefiningSurface, samples: int = DEFAULT_SAMPLES, seed: int = 0, raise_on_indefinite: bool = False
) -> tuple[DefinitenessFinding, DefiningSurface]:
    """Classify Hess f on tangent spaces over sampled points of M.

    A negative-definite surface is returned sign-normalized (f -> -f), which
    leaves M and the geodesic field unchanged. With ``raise_on_indefinite`` an
    :class:`IndefiniteError` carrying the witness is raised instead of returned.
    """
    X = sample_surface(surface, samples, seed)
    if len(X) == 0:
        raise RegularityError("no ray from the origin meets M; is the origin enclosed?")
    _check_regular(surface, X)
    _, g, h = surface.jets(X)
    vals, vecs = tangent_hessian_eigenvalues(g, h)
    gg = np.einsum("bi,bi->b", g, g)
    scale = np.max(np.abs(vals))
    tol = 1e-12 * max(scale, 1e-300)
    lo, hi = vals[:, 0], vals[:, -1]
    all_pos = bool(np.all(lo > tol))
    all_neg = bool(np.all(hi < -tol))
    krange = _curvature_range(vals, gg)
    if all_pos or all_neg:
        kind = "positive" if all_pos else "negative"
        finding = DefinitenessFinding(kind, float(lo.min()), float(hi.max()), len(X), krange)
        if all_neg:
            surface = surface.negated()
            finding.min_eigenvalue, finding.max_eigenvalue = -finding.max_eigenvalue, -finding.min_eigenvalue
        return finding, surface
    # witness: the most strongly indefinite point; if every point is definite
    # but the sign flips across M, the point with the smallest eigenvalue
    mixed = np.flatnonzero((lo <= tol) & (hi >= -tol))
    i = int(mixed[np.argmin(lo[mixed] * hi[mixed])]) if mixed.size else int(np.argmin(lo))
    j = 0
    finding = DefinitenessFinding(
        "indefinite",
        float(lo.min()),
        float(hi.max()),
        len(X),
        krange,
        witness_point=X[i].tolist(),
        witness_eigenvalue=float(vals[i, j]),
        witness_eigenvector=vecs[i, :, j].tolist(),
    )
    if raise_on_indefinite:
        raise IndefiniteError(
            f"tangent Hessian is indefinite at {finding.witness_point} (eigenvalue {finding.witness_eigenvalue:.6g})",
            point=finding.witness_point,
            eigenvalue=finding.witness_eigenvalue,
            eigenvector=finding.witness_eigenvector,
        )
    return finding, surface


@dataclass
class AuditReport:
    surface: dict
    sign_normalized: bool
    symmetry: SymmetryFinding
    definiteness: DefinitenessFinding
    curvature_range: tuple[float, float]
    epsilon_estimate: float
    epsilon_witness: dict | None
    sample_count: int
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.symmetry.ok and self.definiteness.ok and self.epsilon_estimate > 0

    def to_dict(self) -> dict:
        out = asdict(self)
        out["symmetry_ok"] = self.symmetry.ok
        out["definiteness_class"] = self.definiteness.classification
        out["passed"] = self.passed
        return out


def audit_surface(
    surface: DefiningSurface,
    samples: int = DEFAULT_SAMPLES,
    strip_halfwidth: float | None = None,
    seed: int = 0,
) -> tuple[AuditReport, DefiningSurface]:
    """Run every audit; returns the report and the (possibly sign-normalized) surface."""
    from ..section import estimate_epsilon

    sym = audit_symmetry(surface, strip_halfwidth, samples, seed)
    definite, normalized = audit_definiteness(surface, samples, seed)
    notes = [f"certificates hold at the sampled points only ({samples} requested samples)"]
    eps, witness = 0.0, None
    if definite.ok:
        try:
            eps, wit = estimate_epsilon(normalized, samples, seed, return_witness=True)
            witness = {"x": wit.x.tolist(), "y": wit.y.tolist()}
        except NonPositiveEpsilon as exc:
            notes.append(str(exc))
            eps = 0.0
    else:
        notes.append("epsilon not estimated: tangent Hessian is indefinite")
    report = AuditReport(
        surface=surface.describe(),
        sign_normalized=normalized.sign_normalized,
        symmetry=sym,
        definiteness=definite,
        curvature_range=definite.curvature_range,
        epsilon_estimate=float(eps),
        epsilon_witness=witness,
        sample_count=definite.sample_count,
        notes=notes,
    )
    return report, normalized
