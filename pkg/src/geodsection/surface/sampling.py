"""Quasi-random sampling of M and of its unit cotangent bundle.

Points of M are found by shooting rays from an interior origin along
low-discrepancy directions (scrambled Halton mapped through the normal
inverse CDF, then normalized), i.e. by inverting x -> x/|x| on convex M.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .families import REGULARITY_FLOOR, DefiningSurface

_GROWTH = np.sqrt(2.0)
_S_MIN, _S_MAX = 1e-3, 1e4


def halton_gaussian(count: int, dim: int, seed: int = 0) -> np.ndarray:
    """``count`` low-discrepancy standard-normal vectors in R^dim."""
    u = qmc.Halton(d=dim, scramble=True, seed=seed).random(count)
    return ndtri(np.clip(u, 1e-12, 1.0 - 1e-12))


def sphere_directions(count: int, dim: int, seed: int = 0) -> np.ndarray:
    z = halton_gaussian(count, dim, seed)
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def shoot_rays(surface: DefiningSurface, directions: np.ndarray, origins: np.ndarray | None = None):
    """First crossing of M along ``origin + s * direction``, s > 0.

    Returns ``(points, hit)`` where rays without a sign change of f inside
    [1e-3, 1e4] have ``hit = False`` (their rows in ``points`` are NaN).
    """
    directions = np.atleast_2d(directions)
    B, d = directions.shape
    origins = np.zeros((B, d)) if origins is None else np.broadcast_to(origins, (B, d))
    f0 = surface.values(origins)
    lo = np.zeros(B)
    hi = np.full(B, np.nan)
    s = _S_MIN
    open_ = np.ones(B, dtype=bool)
    while s <= _S_MAX and open_.any():
        idx = np.flatnonzero(open_)
        fs = surface.values(origins[idx] + s * directions[idx])
        crossed = np.sign(fs) != np.sign(f0[idx])
        hi[idx[crossed]] = s
        open_[idx[crossed]] = False
        lo[idx[~crossed]] = s
        s *= _GROWTH
    hit = ~np.isnan(hi)
    idx = np.flatnonzero(hit)
    a, b = lo[idx], hi[idx]
    sa = np.sign(f0[idx])
    for _ in range(60):
        mid = 0.5 * (a + b)
        fm = surface.values(origins[idx] + mid[:, None] * directions[idx])
        same = np.sign(fm) == sa
        a = np.where(same, mid, a)
        b = np.where(same, b, mid)
    s_root = 0.5 * (a + b)
    points = np.full((B, d), np.nan)
    pts = origins[idx] + s_root[:, None] * directions[idx]
    points[idx] = polish(surface, pts)
    return points, hit


def polish(surface: DefiningSurface, X: np.ndarray, iterations: int = 4) -> np.ndarray:
    """A few batched Newton steps along grad f (points already close to M)."""
    X = np.array(X, dtype=float)
    for _ in range(iterations):
        f, g, _ = surface.jets(X)
        gg = np.einsum("bi,bi->b", g, g)
        ok = gg > REGULARITY_FLOOR**2
        step = np.zeros_like(X)
        step[ok] = (f[ok] / gg[ok])[:, None] * g[ok]
        X -= step
    return X


def sample_surface(surface: DefiningSurface, count: int, seed: int = 0) -> np.ndarray:
    """Points of M hit by ``count`` quasi-random rays from the origin (misses dropped)."""
    pts, hit = shoot_rays(surface, sphere_directions(count, surface.ambient_dim, seed))
    return pts[hit]


def sample_strip(surface: DefiningSurface, count: int, halfwidth: float, seed: int = 0) -> np.ndarray:
    """Points of M with |x0| <= halfwidth.

    Rays start at (c, 0, ..., 0) for quasi-random c in [-halfwidth, halfwidth]
    and run inside the hyperplane x0 = c.
    """
    d = surface.ambient_dim
    u = qmc.Halton(d=d, scramble=True, seed=seed + 7919).random(count)
    c = (2.0 * u[:, 0] - 1.0) * halfwidth
    z = ndtri(np.clip(u[:, 1:], 1e-12, 1.0 - 1e-12))
    dirs = np.zeros((count, d))
    dirs[:, 1:] = z / np.linalg.norm(z, axis=1, keepdims=True)
    origins = np.zeros((count, d))
    origins[:, 0] = c
    pts, hit = shoot_rays(surface, dirs, origins)
    pts = pts[hit]
    # keep x0 fixed: polish moved points slightly along grad f
    return pts[np.abs(pts[:, 0]) <= halfwidth * (1 + 1e-9)]


def tangent_project(surface: DefiningSurface, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    _, g, _ = surface.jets(X)
    gg = np.einsum("bi,bi->b", g, g)
    Y = Y - (np.einsum("bi,bi->b", Y, g) / gg)[:, None] * g
    return Y / np.linalg.norm(Y, axis=1, keepdims=True)


def sample_phases(surface: DefiningSurface, count: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Quasi-random phases ``(X, Y)`` on the unit cotangent bundle."""
    d = surface.ambient_dim
    z = halton_gaussian(count, 2 * d, seed)
    dirs = z[:, :d] / np.linalg.norm(z[:, :d], axis=1, keepdims=True)
    pts, hit = shoot_rays(surface, dirs)
    X = pts[hit]
    Y = tangent_project(surface, X, z[hit, d:])
    return X, Y
