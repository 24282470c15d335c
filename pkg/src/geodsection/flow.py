"""Geodesic flow on the unit cotangent bundle of M = f^{-1}(0).

The vector field is

    x' = y,    y' = -(Hess f_x(y, y) / |grad f(x)|^2) grad f(x),

integrated with classical RK4 followed by projection back onto the
constraints f = 0, y . grad f = 0, |y| = 1.  Steps are shrunk until the open
book angle (the clockwise angle of x0 + i y0) advances by at most
``max_angle_per_step``, which keeps angle unwrapping unambiguous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, MaxStepsExceeded, RegularityError, StepSizeUnderflow
from .surface import REGULARITY_FLOOR, DefiningSurface, PhasePoint
from .surface.phase import NEWTON_TOLERANCE, newton_to_surface

BINDING_RADIUS2 = 1e-20


@dataclass(frozen=True)
class IntegratorConfig:
    base_step: float = 2 * math.pi * 1e-3
    max_angle_per_step: float = math.pi / 8
    constraint_tolerance: float = 1e-10
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not self.base_step > 0:
            raise ConfigError(f"base_step must be positive, got {self.base_step}")
        if not 0 < self.max_angle_per_step < math.pi / 2:
            raise ConfigError(f"max_angle_per_step must lie in (0, pi/2), got {self.max_angle_per_step}")
        if not self.constraint_tolerance > 0:
            raise ConfigError("constraint_tolerance must be positive")
        if not self.max_steps >= 1:
            raise ConfigError("max_steps must be >= 1")

    @property
    def min_step(self) -> float:
        return self.base_step * 1e-12


@dataclass(frozen=True)
class FlowState:
    phase: PhasePoint
    time: float = 0.0
    unwrapped_angle: float = 0.0


def _field(surface: DefiningSurface, x: np.ndarray, y: np.ndarray):
    _, g, h = surface.jet(x)
    gg = float(g @ g)
    if not gg > REGULARITY_FLOOR**2:
        raise RegularityError(f"|grad f| = {math.sqrt(gg):.3e} below regularity floor at {x.tolist()}")
    k = float(y @ h @ y) / gg
    return y, -k * g


def geodesic_vector_field(surface: DefiningSurface, phase: PhasePoint) -> tuple[np.ndarray, np.ndarray]:
    """``(x', y')`` of the geodesic Hamiltonian field at ``phase``."""
    xd, yd = _field(surface, phase.x, phase.y)
    return xd.copy(), yd


def _angular_rate(x: np.ndarray, y: np.ndarray, xd: np.ndarray, yd: np.ndarray) -> float:
    """(y0 dx0 - x0 dy0)(X) / (x0^2 + y0^2); 0 on the binding."""
    r2 = x[0] * x[0] + y[0] * y[0]
    if r2 < BINDING_RADIUS2:
        return 0.0
    return (y[0] * xd[0] - x[0] * yd[0]) / r2


def angle_increment(x_a, y_a, x_b, y_b) -> float:
    """Clockwise angle from ``x0 + i y0`` at a to b, in (-pi, pi]; 0 if either is on B."""
    if x_a[0] ** 2 + y_a[0] ** 2 < BINDING_RADIUS2 or x_b[0] ** 2 + y_b[0] ** 2 < BINDING_RADIUS2:
        return 0.0
    return math.atan2(y_a[0] * x_b[0] - x_a[0] * y_b[0], x_a[0] * x_b[0] + y_a[0] * y_b[0])


@dataclass
class _Node:
    """Integrator state with the field cached at that state."""

    x: np.ndarray
    y: np.ndarray
    xd: np.ndarray
    yd: np.ndarray
    time: float
    angle: float

    @classmethod
    def at(cls, surface, x, y, time=0.0, angle=0.0, direction=1.0):
        xd, yd = _field(surface, x, y)
        return cls(x, y, direction * xd, direction * yd, time, angle)

    def state(self) -> FlowState:
        return FlowState(PhasePoint(self.x, self.y), self.time, self.angle)


def _project(surface: DefiningSurface, x: np.ndarray, y: np.ndarray):
    """Constraint projection; also returns the raw drift before projection."""
    f, g, _ = surface.jet(x)
    drift = max(abs(f), abs(float(y @ g)), abs(float(np.linalg.norm(y)) - 1.0))
    if abs(f) >= NEWTON_TOLERANCE:
        x = newton_to_surface(surface, x)
        _, g, _ = surface.jet(x)
    y = y - (float(y @ g) / float(g @ g)) * g
    return x, y / np.linalg.norm(y), drift


def _rk4(surface, node: _Node, h: float, direction: float):
    x, y = node.x, node.y
    k1x, k1y = node.xd, node.yd
    a, b = _field(surface, x + 0.5 * h * k1x, y + 0.5 * h * k1y)
    k2x, k2y = direction * a, direction * b
    a, b = _field(surface, x + 0.5 * h * k2x, y + 0.5 * h * k2y)
    k3x, k3y = direction * a, direction * b
    a, b = _field(surface, x + h * k3x, y + h * k3y)
    k4x, k4y = direction * a, direction * b
    return (
        x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        y + (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
    )


def _try_step(surface, node: _Node, h: float, direction: float):
    x1, y1 = _rk4(surface, node, h, direction)
    x1, y1, drift = _project(surface, x1, y1)
    nxt = _Node.at(surface, x1, y1, node.time + direction * h, 0.0, direction)
    dphi = angle_increment(node.x, node.y, x1, y1)
    nxt.angle = node.angle + dphi
    return nxt, dphi, drift


def _advance(surface, node: _Node, h: float, direction: float, config: IntegratorConfig):
    """One accepted step of size <= h; returns (next node, step used, raw drift)."""
    limit = config.max_angle_per_step
    while True:
        nxt, dphi, drift = _try_step(surface, node, h, direction)
        # trapezoidal quadrature of the angular form settles the branch of atan2
        quad = 0.5 * h * (
            _angular_rate(node.x, node.y, node.xd, node.yd) + _angular_rate(nxt.x, nxt.y, nxt.xd, nxt.yd)
        )
        if abs(dphi) <= limit and abs(dphi - quad) <= 0.25 * limit:
            return nxt, h, drift
        h *= 0.5
        if h < config.min_step:
            raise StepSizeUnderflow(f"step shrank below {config.min_step:.3e} at t = {node.time}")


def step(
    surface: DefiningSurface, state: FlowState, config: IntegratorConfig | None = None, direction: float = 1.0
) -> FlowState:
    """One RK4 step of at most ``config.base_step`` followed by projection."""
    config = config or IntegratorConfig()
    node = _Node.at(surface, state.phase.x, state.phase.y, state.time, state.unwrapped_angle, direction)
    nxt, _, _ = _advance(surface, node, config.base_step, direction, config)
    return nxt.state()


@dataclass
class Trajectory:
    states: list[FlowState] = field(default_factory=list)
    drifts: list[float] = field(default_factory=list)

    @property
    def final(self) -> FlowState:
        return self.states[-1]

    @property
    def max_drift(self) -> float:
        return max(self.drifts, default=0.0)


def integrate(
    surface: DefiningSurface,
    phase: PhasePoint,
    t: float,
    config: IntegratorConfig | None = None,
    record: bool = False,
) -> Trajectory:
    """Flow ``phase`` for time ``t`` (negative t integrates the negated field)."""
    config = config or IntegratorConfig()
    direction = 1.0 if t >= 0 else -1.0
    total = abs(float(t))
    node = _Node.at(surface, phase.x, phase.y, 0.0, 0.0, direction)
    traj = Trajectory([node.state()], [0.0])
    elapsed = 0.0
    steps = 0
    while elapsed < total:
        if steps >= config.max_steps:
            raise MaxStepsExceeded(f"{config.max_steps} steps reached at t = {node.time}")
        h = min(config.base_step, total - elapsed)
        node, used, drift = _advance(surface, node, h, direction, config)
        elapsed = total if used == total - elapsed else elapsed + used
        if elapsed == total:
            node.time = float(t)
        steps += 1
        if record:
            traj.states.append(node.state())
            traj.drifts.append(drift)
        else:
            traj.drifts[0] = max(traj.drifts[0], drift)
    if not record:
        traj.states = [node.state()]
    return traj


def flow_to_time(surface: DefiningSurface, phase: PhasePoint, t: float, config: IntegratorConfig | None = None) -> PhasePoint:
    """The time-``t`` flow of ``phase``."""
    if t == 0:
        return PhasePoint(phase.x.copy(), phase.y.copy())
    return integrate(surface, phase, t, config).final.phase


def trajectory_rows(surface: DefiningSurface, traj: Trajectory) -> list[list[float]]:
    """Rows of the trajectory dump: t, x.., y.., |f|, |y.grad f|, |y|-1, angle."""
    rows = []
    for st in traj.states:
        x, y = st.phase.x, st.phase.y
        f, g, _ = surface.jet(x)
        rows.append(
            [st.time, *x.tolist(), *y.tolist(), abs(f), abs(float(y @ g)), float(np.linalg.norm(y)) - 1.0, st.unwrapped_angle]
        )
    return rows
