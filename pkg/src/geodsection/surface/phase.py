"""Points of the unit cotangent bundle and projection onto it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ProjectionDiverged, RegularityError, ZeroCovector
from .families import REGULARITY_FLOOR, DefiningSurface

CONSTRAINT_TOLERANCE = 1e-10
NEWTON_TOLERANCE = 1e-12
MAX_NEWTON_STEPS = 50


@dataclass(frozen=True, eq=False)
class PhasePoint:
    """A unit covector on M stored as the ambient pair ``(x, y)``.

    ``y`` is identified with a tangent vector through the induced metric.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))

    @property
    def dim(self) -> int:
        return self.x.size

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])

    def residuals(self, surface: DefiningSurface) -> tuple[float, float, float]:
        """``(|f(x)|, |y . grad f|, | |y| - 1 |)``."""
        f, g, _ = surface.jet(self.x)
        return abs(f), abs(float(self.y @ g)), abs(float(np.linalg.norm(self.y)) - 1.0)

    def is_valid(self, surface: DefiningSurface, tol: float = CONSTRAINT_TOLERANCE) -> bool:
        return max(self.residuals(surface)) < tol

    def __repr__(self) -> str:
        return f"PhasePoint(x={self.x.tolist()}, y={self.y.tolist()})"


def _checked_gradient(g: np.ndarray, x: np.ndarray) -> float:
    gg = float(g @ g)
    if not gg > REGULARITY_FLOOR**2:
        raise RegularityError(f"|grad f| = {gg**0.5:.3e} below regularity floor at x = {x.tolist()}")
    return gg


def newton_to_surface(surface: DefiningSurface, x_raw, tol: float = NEWTON_TOLERANCE) -> np.ndarray:
    """Move ``x_raw`` along grad f until |f| < tol.

    Steps are damped so |f| never increases; an iterate that cannot reach
    ``tol`` because of rounding is accepted once it is below the constraint
    tolerance and Newton updates have stalled at machine precision.
    """
    x = np.array(x_raw, dtype=float)
    f, g, _ = surface.jet(x)
    for _ in range(MAX_NEWTON_STEPS):
        if abs(f) < tol:
            return x
        gg = _checked_gradient(g, x)
        delta = (f / gg) * g
        if np.linalg.norm(delta) <= 4e-16 * max(1.0, float(np.linalg.norm(x))):
            if abs(f) < CONSTRAINT_TOLERANCE:
                return x
        lam = 1.0
        for _ in range(30):
            x_new = x - lam * delta
            f_new, g_new, _ = surface.jet(x_new)
            if abs(f_new) <= abs(f):
                break
            lam *= 0.5
        else:
            raise ProjectionDiverged(f"Newton projection cannot decrease |f| = {abs(f):.3e} at {x.tolist()}")
        x, f, g = x_new, f_new, g_new
    if abs(f) < tol:
        return x
    raise ProjectionDiverged(f"Newton projection did not reach |f| < {tol} in {MAX_NEWTON_STEPS} steps")


def tangent_unit(surface: DefiningSurface, x: np.ndarray, y_raw) -> np.ndarray:
    """Orthogonal projection of ``y_raw`` onto T_x M, normalized."""
    _, g, _ = surface.jet(x)
    gg = _checked_gradient(g, x)
    y = np.array(y_raw, dtype=float)
    y = y - (float(y @ g) / gg) * g
    ny = float(np.linalg.norm(y))
    if ny < 1e-8:
        raise ZeroCovector(f"projected covector has norm {ny:.3e}")
    return y / ny


def project_to_surface(surface: DefiningSurface, x_raw, y_raw) -> PhasePoint:
    """Newton-project ``x_raw`` onto M, then project and normalize ``y_raw``."""
    x = newton_to_surface(surface, x_raw)
    return PhasePoint(x, tangent_unit(surface, x, y_raw))
