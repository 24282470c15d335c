"""Closed-form return maps: ellipsoids, surfaces of revolution, billiard limit.

Conventions for elliptic integrals follow the parameter form::

    F(phi | m)      = int_0^phi dt / sqrt(1 - m sin^2 t)
    Pi(n; phi | m)  = int_0^phi dt / ((1 - n sin^2 t) sqrt(1 - m sin^2 t))
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, NormalChord, PolePoint, QuadratureFailure
from .expr import ExpressionAst, evaluate, jet_eval_batch, parse_expression

TWO_PI = 2.0 * math.pi
QUAD_TOL = 1e-13
QUAD_ACCEPT = 1e-9
CLAIRAUT_T_MIN = 1e-3


def _quad(func, a: float, b: float, what: str) -> float:
    value, err = integrate.quad(func, a, b, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=400)
    if not err <= QUAD_ACCEPT:
        raise QuadratureFailure(f"{what} did not converge on [{a}, {b}]", err)
    return value


def _check_positive(coef: float, phi: float, name: str):
    # 1 - coef*sin^2 must stay positive on [0, |phi|]
    reach = 1.0 if abs(phi) >= math.pi / 2 else math.sin(phi) ** 2
    if coef * reach >= 1.0:
        raise DomainError(f"1 - {name} sin^2 vanishes on the integration range ({name}={coef}, phi={phi})")


def _reduced(integrand, phi: float, what: str) -> float:
    """Integrate an even, pi-periodic integrand from 0 to ``phi`` using quarter periods."""
    j = round(phi / math.pi)
    rest = phi - j * math.pi
    total = 0.0
    if j:
        total = 2 * j * _quad(integrand, 0.0, math.pi / 2, what)
    if rest:
        total += math.copysign(_quad(integrand, 0.0, abs(rest), what), rest)
    return total


def elliptic_f(phi: float, m: float) -> float:
    """Incomplete elliptic integral of the first kind F(phi | m)."""
    _check_positive(m, phi, "m")
    return _reduced(lambda t: 1.0 / math.sqrt(1.0 - m * math.sin(t) ** 2), phi, "F")


def elliptic_pi(n: float, phi: float, m: float) -> float:
    """Incomplete elliptic integral of the third kind Pi(n; phi | m)."""
    _check_positive(m, phi, "m")
    _check_positive(n, phi, "n")

    def integrand(t):
        s2 = math.sin(t) ** 2
        return 1.0 / ((1.0 - n * s2) * math.sqrt(1.0 - m * s2))

    return _reduced(integrand, phi, "Pi")


def ellipsoid_g(t: float, a0: float) -> float:
    """Rotation angle of the return map on the ellipsoid x0^2/a0^2 + |x|^2 = 1.

    ``t`` is the length of the equatorial part of the covector at the page.
    """
    if not 0.0 < t <= 1.0:
        raise DomainError(f"t must lie in (0, 1], got {t}")
    if not a0 > 0.0:
        raise DomainError(f"a0 must be positive, got {a0}")
    m = -(1.0 - a0 * a0) * (1.0 - t * t) / (a0 * a0)
    first = elliptic_f(TWO_PI, m)
    third = elliptic_pi(1.0 - t * t, TWO_PI, m)
    return -(t * (1.0 - a0 * a0) / a0) * first + (t / a0) * third


@dataclass(frozen=True)
class RevolutionProfile:
    """Meridian profile ``a(phi)``: the meridian is ``(a(phi), cos(phi))``, phi in [0, pi]."""

    ast: ExpressionAst

    @classmethod
    def parse(cls, text: str) -> "RevolutionProfile":
        return cls(parse_expression(text, 1, variables=("phi",)))

    @classmethod
    def sine(cls, c: float) -> "RevolutionProfile":
        """The ellipsoidal profile ``c sin(phi)``."""
        return cls.parse(f"{float(c)!r}*sin(phi)")

    @property
    def text(self) -> str:
        return self.ast.text or str(self.ast)

    def __call__(self, phi):
        phi = np.asarray(phi, dtype=float)
        return evaluate(self.ast, phi.reshape(-1, 1)).reshape(phi.shape)

    def derivative(self, phi):
        phi = np.asarray(phi, dtype=float)
        _, g, _ = jet_eval_batch(self.ast, phi.reshape(-1, 1))
        return g[:, 0].reshape(phi.shape)


def clairaut_g(t: float, profile: RevolutionProfile) -> float:
    """Rotation angle of the return map on a hypersurface of revolution.

    The integrand over [0, 2 pi] depends on sigma only through |sin sigma|, so
    one quarter period is integrated adaptively; the endpoints of that quarter
    are exactly where the integrand may have kinks (profile ``a = 0``).
    """
    if not CLAIRAUT_T_MIN <= t <= 1.0:
        raise DomainError(f"t must lie in [{CLAIRAUT_T_MIN}, 1], got {t}")
    k = 1.0 - t * t
    sk = math.sqrt(k)

    def integrand(sigma):
        s = math.sin(sigma)
        ap = float(profile.derivative(math.asin(min(1.0, sk * abs(s)))))
        return math.sqrt(k * s * s + ap * ap) / (1.0 - k * s * s)

    quarter = _quad(integrand, 0.0, math.pi / 2, "Clairaut integral")
    return t * 4.0 * quarter


def billiard_g0(t: float) -> float:
    """Rotation angle of the second billiard iterate; G0(0) = 2 pi by continuity."""
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    return 4.0 * math.acos(t)


def _rotate(xhat: np.ndarray, yvec: np.ndarray, g: float) -> tuple[np.ndarray, np.ndarray]:
    ny = float(np.linalg.norm(yvec))
    c, s = math.cos(g), math.sin(g)
    return xhat * c + (yvec / ny) * s, yvec * c - ny * xhat * s


def closed_form_return_map(xhat, y0: float, yvec, g_value: float):
    """Rotate ``(xhat, yvec)`` by ``g_value`` in the plane spanned by them; ``y0`` is kept.

    Returns ``(xhat', y0, yvec')``.
    """
    xhat = np.asarray(xhat, dtype=float)
    yvec = np.asarray(yvec, dtype=float)
    if np.linalg.norm(yvec) < 1e-14:
        raise PolePoint("yvec = 0: the meridian start has no rotation plane")
    x_new, y_new = _rotate(xhat, yvec, g_value)
    return x_new, float(y0), y_new


def billiard_second_iterate(xhat, yvec_t):
    """Second iterate of the billiard map in the unit ball, as a rotation by G0(|y_T|).

    ``yvec_t`` is the component of the unit direction tangent to the sphere at
    ``xhat``. Returns ``(xhat', yvec_t')``.
    """
    xhat = np.asarray(xhat, dtype=float)
    yvec_t = np.asarray(yvec_t, dtype=float)
    t = float(np.linalg.norm(yvec_t))
    if t == 0.0:
        raise NormalChord("|y_T| = 0: the orbit runs along a diameter")
    if t > 1.0 + 1e-12:
        raise DomainError(f"|y_T| must not exceed 1, got {t}")
    return _rotate(xhat, yvec_t, billiard_g0(min(t, 1.0)))


def return_angle_function(surface):
    """``t -> G(t)`` for families whose page return map is a rotation."""
    from .errors import UnsupportedSurface
    from .surface.families import Ellipsoid, Revolution, Sphere

    if isinstance(surface, Sphere):
        return lambda t: TWO_PI
    if isinstance(surface, Ellipsoid) and surface.is_revolution:
        a0 = surface.semiaxes[0]
        return lambda t: ellipsoid_g(t, a0)
    if isinstance(surface, Revolution):
        return lambda t: clairaut_g(t, surface.profile)
    raise UnsupportedSurface(
        "closed-form return maps exist for spheres, ellipsoids (a0, 1, ..., 1) and revolution profiles only"
    )


def predicted_return(surface, x, y) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form image of the page point ``(x, y)``; meridian starts (yvec = 0) are fixed."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    g_of = return_angle_function(surface)
    t = min(float(np.linalg.norm(y[1:])), 1.0)
    if t < 1e-14:
        return x.copy(), y.copy()
    xv, y0, yv = closed_form_return_map(x[1:], y[0], y[1:], g_of(t))
    return np.concatenate([[0.0], xv]), np.concatenate([[y0], yv])
