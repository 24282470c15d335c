"""Defining functions f with exact value, gradient and Hessian.

Ambient points live in R^{n+1}; ``ambient_dim`` is n+1. All evaluations are
batched over rows. ``sign`` is -1 after a negative-definite surface has been
normalized (f replaced by -f); the level set is unchanged.
"""

from __future__ import annotations

import math
import copy

import numpy as np
from numpy.polynomial import Chebyshev

from ..closedform import RevolutionProfile
from ..errors import ConfigError
from ..expr import evaluate, jet_eval_batch, parse_expression

REGULARITY_FLOOR = 1e-8


class DefiningSurface:
    """Base class; subclasses provide ``_jets`` (and optionally a faster ``_values``).

    Instances are treated as immutable and are safe to share.
    """

    def __init__(self, ambient_dim: int, sign: float = 1.0):
        if ambient_dim < 3:
            raise ConfigError(f"ambient dimension must be >= 3 (n >= 2), got {ambient_dim}")
        self.ambient_dim = int(ambient_dim)
        self.sign = float(sign)

    @property
    def n(self) -> int:
        """Dimension of the hypersurface M."""
        return self.ambient_dim - 1

    @property
    def sign_normalized(self) -> bool:
        return self.sign < 0

    @property
    def scale(self) -> float:
        """Characteristic length, used to make tolerances relative."""
        return 1.0

    def negated(self) -> "DefiningSurface":
        other = copy.copy(self)
        other.sign = -self.sign
        return other

    def __repr__(self) -> str:
        flip = ", sign=-1" if self.sign < 0 else ""
        return f"{type(self).__name__}({self.describe()}{flip})"

    def _jets(self, X: np.ndarray):
        raise NotImplementedError

    def _values(self, X: np.ndarray) -> np.ndarray:
        return self._jets(X)[0]

    def jets(self, X) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(f, grad f, Hess f)`` for each row of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        f, g, h = self._jets(X)
        if self.sign < 0:
            return -f, -g, -h
        return f, g, h

    def values(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self.sign * self._values(X)

    def jet(self, x) -> tuple[float, np.ndarray, np.ndarray]:
        f, g, h = self.jets(np.asarray(x, dtype=float).reshape(1, -1))
        return float(f[0]), g[0], h[0]

    def value(self, x) -> float:
        return float(self.values(np.asarray(x, dtype=float).reshape(1, -1))[0])

    def gradient(self, x) -> np.ndarray:
        return self.jet(x)[1]

    def hessian(self, x) -> np.ndarray:
        return self.jet(x)[2]

    def describe(self) -> dict:
        raise NotImplementedError


class Sphere(DefiningSurface):
    """f = |x|^2 - r^2."""

    def __init__(self, radius: float = 1.0, ambient_dim: int = 3, *, sign: float = 1.0):
        if not radius > 0:
            raise ConfigError(f"sphere radius must be positive, got {radius}")
        super().__init__(ambient_dim, sign)
        self.radius = float(radius)

    @property
    def scale(self) -> float:
        return self.radius

    def _values(self, X):
        return np.einsum("bi,bi->b", X, X) - self.radius**2

    def _jets(self, X):
        B, d = X.shape
        h = np.broadcast_to(2.0 * np.eye(d), (B, d, d)).copy()
        return self._values(X), 2.0 * X, h

    def jet(self, x):
        x = np.asarray(x, dtype=float)
        d = x.size
        s = self.sign
        return s * (float(x @ x) - self.radius**2), s * 2.0 * x, s * 2.0 * np.eye(d)

    def describe(self) -> dict:
        return {"family": "sphere", "radius": self.radius, "dimension": self.ambient_dim}


class Ellipsoid(DefiningSurface):
    """f = sum_i x_i^2 / a_i^2 - 1."""

    def __init__(self, semiaxes, *, sign: float = 1.0):
        axes = tuple(float(a) for a in semiaxes)
        if not all(a > 0 for a in axes):
            raise ConfigError(f"semiaxes must be positive, got {axes}")
        super().__init__(len(axes), sign)
        self.semiaxes = axes
        self._inv2 = np.array([1.0 / a**2 for a in axes])

    @property
    def scale(self) -> float:
        return max(self.semiaxes)

    @property
    def is_revolution(self) -> bool:
        """True when the ellipsoid is a0-stretched along x0 only (all other axes 1)."""
        return all(a == 1.0 for a in self.semiaxes[1:])

    def _values(self, X):
        return X * X @ self._inv2 - 1.0

    def _jets(self, X):
        B, d = X.shape
        h = np.broadcast_to(np.diag(2.0 * self._inv2), (B, d, d)).copy()
        return self._values(X), 2.0 * X * self._inv2, h

    def jet(self, x):
        x = np.asarray(x, dtype=float)
        s = self.sign
        return (
            s * (float(x * x @ self._inv2) - 1.0),
            s * 2.0 * x * self._inv2,
            s * np.diag(2.0 * self._inv2),
        )

    def describe(self) -> dict:
        return {"family": "ellipsoid", "semiaxes": list(self.semiaxes)}


class Revolution(DefiningSurface):
    """Hypersurface of revolution about the x0 axis with meridian (a(phi), cos(phi)).

    With u = 1 - |x_vec|^2 = sin^2(phi) the surface is x0^2 = Q(u) where
    Q(u) = a(arcsin sqrt(u))^2.  Q is replaced by its Chebyshev interpolant on
    [0, 1], which extends smoothly to u slightly below 0 (needed by Newton
    projection near the equator) and is exact for a = c sin(phi).
    """

    def __init__(self, profile, ambient_dim: int = 3, degree: int = 48, *, sign: float = 1.0):
        if isinstance(profile, str):
            profile = RevolutionProfile.parse(profile)
        super().__init__(ambient_dim, sign)
        self.profile = profile
        self.degree = int(degree)
        if abs(float(profile(0.0))) > 1e-12:
            raise ConfigError("profile must satisfy a(0) = 0 so the meridian meets the equator")
        mids = np.linspace(0.05, math.pi - 0.05, 19)
        if np.any(profile(mids) <= 0):
            raise ConfigError("profile must be positive on (0, pi)")

        def q(u):
            return profile(np.arcsin(np.sqrt(np.clip(u, 0.0, 1.0)))) ** 2

        self._q = Chebyshev.interpolate(q, self.degree, domain=[0.0, 1.0])
        self._dq = self._q.deriv()
        self._ddq = self._q.deriv(2)

    @property
    def scale(self) -> float:
        return max(1.0, float(np.max(self.profile(np.linspace(0, math.pi, 33)))))

    def _values(self, X):
        u = 1.0 - np.einsum("bi,bi->b", X[:, 1:], X[:, 1:])
        return X[:, 0] ** 2 - self._q(u)

    def _jets(self, X):
        B, d = X.shape
        xv = X[:, 1:]
        u = 1.0 - np.einsum("bi,bi->b", xv, xv)
        q1, q2 = self._dq(u), self._ddq(u)
        f = X[:, 0] ** 2 - self._q(u)
        g = np.empty_like(X)
        g[:, 0] = 2.0 * X[:, 0]
        g[:, 1:] = 2.0 * q1[:, None] * xv
        h = np.zeros((B, d, d))
        h[:, 0, 0] = 2.0
        h[:, 1:, 1:] = 2.0 * q1[:, None, None] * np.eye(d - 1) - 4.0 * q2[:, None, None] * (
            xv[:, :, None] * xv[:, None, :]
        )
        return f, g, h

    def describe(self) -> dict:
        return {"family": "revolution", "profile": self.profile.text, "dimension": self.ambient_dim}


class ExpressionSurface(DefiningSurface):
    """Level set of a parsed expression in x0 .. xn."""

    def __init__(self, ast, dimension: int | None = None, *, sign: float = 1.0):
        if isinstance(ast, str):
            if dimension is None:
                raise ConfigError("an expression surface needs its dimension")
            ast = parse_expression(ast, dimension)
        super().__init__(ast.dimension, sign)
        self.ast = ast

    def _values(self, X):
        return evaluate(self.ast, X)

    def _jets(self, X):
        return jet_eval_batch(self.ast, X)

    def describe(self) -> dict:
        return {"expression": self.ast.text or str(self.ast), "dimension": self.ambient_dim}


def surface_from_config(block: dict) -> DefiningSurface:
    """Build a surface from a config block such as ``{"family": "ellipsoid", "semiaxes": [2, 1, 1]}``."""
    block = dict(block)
    sign = -1.0 if block.pop("sign_normalized", False) else 1.0
    if "expression" in block:
        dim = block.get("dimension")
        if dim is None:
            raise ConfigError("surface.dimension is required with surface.expression")
        surf = ExpressionSurface(block["expression"], int(dim))
    else:
        family = block.get("family")
        if family == "sphere":
            surf = Sphere(block.get("radius", 1.0), int(block.get("dimension", 3)))
        elif family == "ellipsoid":
            surf = Ellipsoid(block["semiaxes"])
        elif family == "revolution":
            surf = Revolution(block["profile"], int(block.get("dimension", 3)))
        else:
            raise ConfigError(f"unknown surface family {family!r}")
    return surf.negated() if sign < 0 else surf
