"""Open book, angular bound and first-return maps to the page.

The open book is pi(x, y) = (x0 + i y0) / |x0 + i y0| with binding
B = {x0 = y0 = 0} and page P = {x0 = 0, y0 >= 0} (argument pi/2).  Along
the geodesic flow the argument of x0 + i y0 turns clockwise at rate

    Theta(X_H) = (A x0^2 + y0^2) / (x0^2 + y0^2),
    A(x, y)    = Hess f(y, y) / |grad f|^2 * f_0(x) / x0,

so the accumulated clockwise angle (``FlowState.unwrapped_angle``) grows
monotonically and each full turn is one return to P.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import brentq

from .errors import (
    GeodSectionError,
    MaxStepsExceeded,
    NonConvergent,
    NonPositiveEpsilon,
    NotOnBinding,
    NotOnPage,
    OnBindingError,
    RegularityError,
)
from .flow import IntegratorConfig, _advance, _Node, _try_step
from .surface import DefiningSurface, PhasePoint, newton_to_surface, shoot_rays, tangent_unit
from .surface.sampling import halton_gaussian, sample_phases, tangent_project

TWO_PI = 2.0 * math.pi
BINDING_RADIUS2 = 1e-20
REFUSAL_RADIUS2 = 1e-12
PAGE_TOLERANCE = 1e-9
ANGLE_TOLERANCE = 1e-12
A_SWITCH = 1e-4
NOISE_FLOOR = 1e-9


def page_angle(phase: PhasePoint) -> float:
    """Argument of x0 + i y0 in [0, 2pi); the page sits at pi/2."""
    x0, y0 = float(phase.x[0]), float(phase.y[0])
    if x0 * x0 + y0 * y0 < BINDING_RADIUS2:
        raise OnBindingError(f"(x0, y0) = ({x0:.3e}, {y0:.3e}) is on the binding")
    ang = math.atan2(y0, x0) % TWO_PI
    return 0.0 if ang >= TWO_PI else ang


def a_values(surface: DefiningSurface, X, Y) -> np.ndarray:
    """Batched A(x, y); rows with |x0| <= 1e-4 * scale use f_00(0, x) for f_0 / x0."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    _, g, h = surface.jets(X)
    gg = np.einsum("bi,bi->b", g, g)
    if np.any(gg <= 1e-16):
        raise RegularityError("gradient below regularity floor while evaluating A")
    k = np.einsum("bi,bij,bj->b", Y, h, Y) / gg
    near = np.abs(X[:, 0]) <= A_SWITCH * surface.scale
    ratio = np.empty(len(X))
    far = ~near
    ratio[far] = g[far, 0] / X[far, 0]
    if near.any():
        X_eq = X[near].copy()
        X_eq[:, 0] = 0.0
        _, _, h_eq = surface.jets(X_eq)
        ratio[near] = h_eq[:, 0, 0]
    return k * ratio


def a_value(surface: DefiningSurface, phase: PhasePoint) -> float:
    return float(a_values(surface, phase.x, phase.y)[0])


@dataclass(frozen=True)
class AngularRate:
    theta: float
    Theta: float | None


def theta_of_field(surface: DefiningSurface, phase: PhasePoint, allow_binding: bool = False) -> AngularRate:
    """theta(X_H) = A x0^2 + y0^2 and its normalization Theta = theta / (x0^2 + y0^2).

    On the binding theta vanishes and Theta is undefined: an ``OnBindingError``
    is raised unless ``allow_binding``, in which case ``Theta`` is None.
    """
    x, y = phase.x, phase.y
    _, g, h = surface.jet(x)
    gg = float(g @ g)
    theta = float(y @ h @ y) / gg * float(g[0]) * float(x[0]) + float(y[0]) ** 2
    r2 = float(x[0]) ** 2 + float(y[0]) ** 2
    if r2 < BINDING_RADIUS2:
        if allow_binding:
            return AngularRate(theta, None)
        raise OnBindingError("Theta(X_H) is undefined on the binding")
    return AngularRate(theta, theta / r2)


def angular_rates(surface: DefiningSurface, X, Y) -> np.ndarray:
    """Batched Theta(X_H); rows on the binding give NaN."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    _, g, h = surface.jets(X)
    gg = np.einsum("bi,bi->b", g, g)
    k = np.einsum("bi,bij,bj->b", Y, h, Y) / gg
    theta = k * g[:, 0] * X[:, 0] + Y[:, 0] ** 2
    r2 = X[:, 0] ** 2 + Y[:, 0] ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(r2 < BINDING_RADIUS2, np.nan, theta / r2)


# ---------------------------------------------------------------- sampling


def equator_points(surface: DefiningSurface, directions: np.ndarray) -> np.ndarray:
    """Points of N = M cap {x0 = 0} along the given x-vec directions."""
    dirs = np.array(directions, dtype=float)
    dirs[:, 0] = 0.0
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pts, hit = shoot_rays(surface, dirs)
    if not hit.all():
        raise RegularityError("a ray inside {x0 = 0} does not meet M")
    pts[:, 0] = 0.0
    return pts


def _equator_phases(surface: DefiningSurface, count: int, seed: int):
    d = surface.ambient_dim
    z = halton_gaussian(count, 2 * d, seed + 104729)
    X = equator_points(surface, z[:, :d])
    return X, tangent_project(surface, X, z[:, d:])


def to_page(surface: DefiningSurface, x_raw, y_raw) -> PhasePoint:
    """Project onto P: x0 := 0, Newton back to M, tangent unit y."""
    x = np.array(x_raw, dtype=float)
    x[0] = 0.0
    x = newton_to_surface(surface, x)
    y = tangent_unit(surface, x, y_raw)
    return PhasePoint(x, y)


def page_point(surface: DefiningSurface, xvec, y0: float, yvec) -> PhasePoint:
    """The page point over the equator direction ``xvec`` with upward component ``y0``.

    ``yvec`` is made tangent to N and scaled so that |y| = 1.
    """
    if not 0.0 <= y0 <= 1.0:
        raise NotOnPage(f"y0 must lie in [0, 1], got {y0}")
    xvec = np.asarray(xvec, dtype=float)
    x = equator_points(surface, np.concatenate([[0.0], xvec])[None])[0]
    _, g, _ = surface.jet(x)
    w = np.concatenate([[0.0], np.asarray(yvec, dtype=float)])
    w = w - (float(w @ g) / float(g @ g)) * g
    nw = float(np.linalg.norm(w))
    if y0 < 1.0 and nw < 1e-14:
        raise NotOnPage("yvec has no component tangent to the equator")
    y = np.zeros_like(x)
    y[0] = y0
    if y0 < 1.0:
        y += math.sqrt(1.0 - y0 * y0) * w / nw
    return PhasePoint(x, y)


def random_page_points(surface: DefiningSurface, count: int, seed: int = 0, min_y0: float = 1e-3) -> list[PhasePoint]:
    """Page points with x uniform-ish on N and y uniform on the unit tangent sphere, folded to y0 >= min_y0."""
    rng = np.random.default_rng(seed)
    d = surface.ambient_dim
    out: list[PhasePoint] = []
    while len(out) < count:
        X = equator_points(surface, rng.standard_normal((count, d)))
        Y = tangent_project(surface, X, rng.standard_normal((count, d)))
        Y[:, 0] = np.abs(Y[:, 0])
        for x, y in zip(X, Y):
            if y[0] >= min_y0 and len(out) < count:
                out.append(PhasePoint(x, y))
    return out


def random_binding_points(surface: DefiningSurface, count: int, seed: int = 0) -> list[PhasePoint]:
    """Unit covectors over N tangent to N (x0 = y0 = 0)."""
    rng = np.random.default_rng(seed)
    d = surface.ambient_dim
    X = equator_points(surface, rng.standard_normal((count, d)))
    Z = rng.standard_normal((count, d))
    Z[:, 0] = 0.0
    Y = tangent_project(surface, X, Z)
    Y[:, 0] = 0.0
    Y /= np.linalg.norm(Y, axis=1, keepdims=True)
    return [PhasePoint(x, y) for x, y in zip(X, Y)]


# ---------------------------------------------------------------- epsilon


def _perturbed(surface, x, y, i, s):
    d = x.size
    if i < d:
        x2 = x.copy()
        x2[i] += s
        x2 = newton_to_surface(surface, x2)
        return x2, tangent_unit(surface, x2, y)
    y2 = y.copy()
    y2[i - d] += s
    return x, tangent_unit(surface, x, y2)


def _descend(surface, x, y, a, scale):
    """Coordinate pattern search on (x, y), reprojecting after every move."""
    d = x.size
    for s in scale * np.array([1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]):
        for _ in range(20):
            moved = False
            for i in range(2 * d):
                for sign in (1.0, -1.0):
                    try:
                        x2, y2 = _perturbed(surface, x, y, i, sign * s)
                    except GeodSectionError:
                        continue
                    a2 = float(a_values(surface, x2, y2)[0])
                    if a2 < a:
                        x, y, a, moved = x2, y2, a2, True
            if not moved:
                break
    return x, y, a


def estimate_epsilon(
    surface: DefiningSurface, samples: int = 4096, seed: int = 0, refine: int = 10, return_witness: bool = False
):
    """Sampled lower bound for Theta(X_H), i.e. min(min A, 1).

    A is minimized over quasi-random phases of M together with phases over
    the equator (where the f_00 branch applies); the ``refine`` smallest are
    polished by coordinate descent.  Theta equals 1 on the page, which is
    why the bound is capped at 1.
    """
    X, Y = sample_phases(surface, samples, seed)
    Xe, Ye = _equator_phases(surface, max(samples // 4, 16), seed)
    X = np.vstack([X, Xe])
    Y = np.vstack([Y, Ye])
    a = a_values(surface, X, Y)
    order = np.argsort(a)[: max(refine, 1)]
    best = (float(a[order[0]]), X[order[0]], Y[order[0]])
    # a non-positive sample already decides the outcome
    for j in order[:refine] if best[0] > 0 else ():
        xr, yr, ar = _descend(surface, X[j], Y[j], float(a[j]), surface.scale)
        if ar < best[0]:
            best = (ar, xr, yr)
    a_min, xw, yw = best
    witness = PhasePoint(xw, yw)
    if not a_min > 0:
        raise NonPositiveEpsilon(f"A reaches {a_min:.6g} <= 0 at {witness}")
    eps = min(a_min, 1.0)
    return (eps, witness) if return_witness else eps


# ---------------------------------------------------------------- return map


@dataclass
class ReturnRecord:
    start: PhasePoint
    end: PhasePoint
    tau: float
    steps: int
    max_drift: float
    angle_total: float

    def row(self) -> list[float]:
        return [*self.start.x, *self.start.y, *self.end.x, *self.end.y, self.tau, self.angle_total, self.max_drift]


def _check_page(start: PhasePoint):
    x0, y0 = float(start.x[0]), float(start.y[0])
    if x0 * x0 + y0 * y0 < REFUSAL_RADIUS2:
        raise OnBindingError("return_map refuses starts with x0^2 + y0^2 < 1e-12; use boundary_return_extrapolation")
    if abs(x0) > PAGE_TOLERANCE or y0 < -PAGE_TOLERANCE:
        raise NotOnPage(f"start is not on the page (x0 = {x0:.3e}, y0 = {y0:.3e})")


def return_map(
    surface: DefiningSurface, start: PhasePoint, config: IntegratorConfig | None = None, revolutions: int = 1
) -> ReturnRecord:
    """First (or ``revolutions``-th) return of ``start`` to the page P."""
    config = config or IntegratorConfig()
    _check_page(start)
    target = TWO_PI * revolutions
    node = _Node.at(surface, start.x, start.y)
    steps, max_drift = 0, 0.0
    while True:
        if steps >= config.max_steps:
            raise MaxStepsExceeded(
                f"no return after {steps} steps (angle {node.angle:.6g} of {target:.6g}); epsilon too small or step too coarse"
            )
        nxt, used, drift = _advance(surface, node, config.base_step, 1.0, config)
        steps += 1
        max_drift = max(max_drift, drift)
        if nxt.angle >= target:
            break
        node = nxt
    if nxt.angle > target:

        def miss(s):
            return _try_step(surface, node, s, 1.0)[0].angle - target if s > 0 else node.angle - target

        s = brentq(miss, 0.0, used, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        nxt, _, drift = _try_step(surface, node, s, 1.0)
        max_drift = max(max_drift, drift)
        if abs(nxt.angle - target) > ANGLE_TOLERANCE * max(1.0, revolutions):
            # brentq stops on the time bracket; finish with a secant update
            rate = (nxt.angle - node.angle) / s if s > 0 else 1.0
            s -= (nxt.angle - target) / rate
            nxt, _, _ = _try_step(surface, node, s, 1.0)
    end = to_page(surface, nxt.x, nxt.y)
    return ReturnRecord(start, end, nxt.time, steps, max_drift, nxt.angle)


# ---------------------------------------------------------------- symplecticity


def page_tangent_basis(surface: DefiningSurface, p: PhasePoint) -> np.ndarray:
    """Orthonormal basis (columns, ambient (dx, dy) coordinates) of T_p P, 2n-2 of them."""
    d = p.x.size
    _, g, h = surface.jet(p.x)
    C = np.zeros((4, 2 * d))
    C[0, 0] = 1.0
    C[1, :d] = g
    C[2, :d] = h @ p.y
    C[2, d:] = g
    C[3, d:] = p.y
    return null_space(C)


def _omega(u: np.ndarray, v: np.ndarray, d: int) -> float:
    return float(u[:d] @ v[d:] - u[d:] @ v[:d])


@dataclass
class SymplecticityReport:
    symplectic_defect: float
    exactness_defect: float
    basis_size: int


def symplecticity_defect(
    surface: DefiningSurface, start: PhasePoint, h: float = 1e-4, config: IntegratorConfig | None = None
) -> SymplecticityReport:
    """Finite-difference check that Psi preserves d(alpha) on P and Psi*alpha - alpha = d tau."""
    _check_page(start)
    if float(start.y[0]) <= 10 * h:
        raise OnBindingError(f"start is within 10h of the binding (y0 = {float(start.y[0]):.3e})")
    config = config or IntegratorConfig()
    d = start.x.size
    E = page_tangent_basis(surface, start)
    base = return_map(surface, start, config)
    p = start.as_vector()
    images, dtau = [], []
    for k in range(E.shape[1]):
        recs = []
        for sign in (1.0, -1.0):
            q = p + sign * h * E[:, k]
            recs.append(return_map(surface, to_page(surface, q[:d], q[d:]), config))
        images.append((recs[0].end.as_vector() - recs[1].end.as_vector()) / (2 * h))
        dtau.append((recs[0].tau - recs[1].tau) / (2 * h))
    m = E.shape[1]
    sym = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            sym = max(sym, abs(_omega(images[i], images[j], d) - _omega(E[:, i], E[:, j], d)))
    y_end = base.end.y
    exact = max(
        abs(float(y_end @ images[k][:d]) - float(start.y @ E[:d, k]) - dtau[k]) for k in range(m)
    )
    return SymplecticityReport(sym, exact, m)


# ---------------------------------------------------------------- binding


@dataclass(frozen=True)
class NormalHessianSample:
    binding_point: PhasePoint
    s00: float
    s11: float = 1.0

    @property
    def positive_definite(self) -> bool:
        return self.s00 > 0

    @property
    def matrix(self) -> np.ndarray:
        return np.diag([self.s00, self.s11])


def _check_binding(phase: PhasePoint, tol: float = 1e-8):
    if abs(float(phase.x[0])) > tol or abs(float(phase.y[0])) > tol:
        raise NotOnBinding(f"(x0, y0) = ({float(phase.x[0]):.3e}, {float(phase.y[0]):.3e}) is not on the binding")


def normal_hessian(surface: DefiningSurface, binding_point: PhasePoint) -> NormalHessianSample:
    """S_N = diag(Hess f(y, y) f_00 / |grad f|^2, 1) at a binding point."""
    _check_binding(binding_point)
    x, y = binding_point.x, binding_point.y
    _, g, h = surface.jet(x)
    s00 = float(y @ h @ y) * float(h[0, 0]) / float(g @ g)
    return NormalHessianSample(binding_point, s00, 1.0)


@dataclass
class BoundaryExtrapolation:
    limit: PhasePoint
    offsets: tuple[float, ...]
    estimates: list[np.ndarray] = field(default_factory=list)
    ratio: float = math.inf
    converged_to_noise: bool = False


def _neville_at_zero(hs, values):
    """Polynomial interpolation through (h_i, v_i) evaluated at h = 0."""
    p = [np.asarray(v, dtype=float) for v in values]
    n = len(hs)
    for level in range(1, n):
        p = [
            (hs[i + level] * p[i] - hs[i] * p[i + 1]) / (hs[i + level] - hs[i])
            for i in range(n - level)
        ]
    return p[0]


def boundary_return_extrapolation(
    surface: DefiningSurface,
    binding_point: PhasePoint,
    offsets=(1e-2, 1e-3, 1e-4),
    config: IntegratorConfig | None = None,
) -> BoundaryExtrapolation:
    """Limit of Psi at a binding point, from return maps of starts lifted to y0 = offset.

    The polynomial extrapolant in the offset is evaluated at 0.  The
    convergence ratio |E1 - E2| / |E2 - E3| of the last three estimates must
    exceed 1 unless the differences are already below the noise floor.
    """
    _check_binding(binding_point)
    offsets = tuple(float(o) for o in offsets)
    if len(offsets) < 2 or any(o <= 0 for o in offsets) or any(a <= b for a, b in zip(offsets, offsets[1:])):
        raise ValueError("offsets must be decreasing positive reals (at least two)")
    config = config or IntegratorConfig()
    x, y = binding_point.x, binding_point.y
    ests = []
    for delta in offsets:
        ylift = np.array(y, dtype=float) * math.sqrt(1.0 - delta * delta)
        ylift[0] = delta
        start = to_page(surface, x, ylift)
        ests.append(return_map(surface, start, config).end.as_vector())
    d = x.size
    out = BoundaryExtrapolation(binding_point, offsets, ests)
    if len(ests) >= 3:
        a = float(np.linalg.norm(ests[-3] - ests[-2]))
        b = float(np.linalg.norm(ests[-2] - ests[-1]))
        if b < NOISE_FLOOR:
            out.converged_to_noise = True
            out.ratio = math.inf if b == 0 else a / b
        else:
            out.ratio = a / b
            if out.ratio <= 1.0:
                raise NonConvergent(f"boundary estimates do not contract (ratio {out.ratio:.3g})")
    lim = _neville_at_zero(offsets, ests)
    xl, yl = lim[:d].copy(), lim[d:].copy()
    xl[0] = 0.0
    yl[0] = 0.0
    xl = newton_to_surface(surface, xl)
    yl = tangent_unit(surface, xl, yl)
    yl[0] = 0.0
    out.limit = PhasePoint(xl, yl / np.linalg.norm(yl))
    return out
