"""Extrinsic curvature of M = f^{-1}(0): shape operator, sectional curvature."""

from __future__ import annotations

import numpy as np

from ..errors import DegeneratePlaneError
from .families import DefiningSurface
from .phase import _checked_gradient

TANGENCY_TOLERANCE = 1e-8


def tangent_bases(normals: np.ndarray) -> np.ndarray:
    """Orthonormal bases of the tangent spaces, shape ``(B, d, d-1)``.

    Built from the Householder reflection that sends each unit normal to a
    signed coordinate axis; the remaining columns span the orthogonal complement.
    """
    normals = np.atleast_2d(normals)
    B, d = normals.shape
    nhat = normals / np.linalg.norm(normals, axis=1, keepdims=True)
    k = np.argmax(np.abs(nhat), axis=1)
    rows = np.arange(B)
    w = nhat.copy()
    w[rows, k] += np.sign(nhat[rows, k])
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    house = np.eye(d)[None] - 2.0 * w[:, :, None] * w[:, None, :]
    keep = np.ones((B, d), dtype=bool)
    keep[rows, k] = False
    return house.transpose(0, 2, 1)[keep].reshape(B, d - 1, d).transpose(0, 2, 1)


def tangent_hessian_eigenvalues(g: np.ndarray, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors (ambient) of Hess f restricted to T_x M."""
    basis = tangent_bases(g)
    th = np.einsum("bia,bij,bjc->bac", basis, h, basis)
    th = 0.5 * (th + np.swapaxes(th, 1, 2))
    vals, vecs = np.linalg.eigh(th)
    return vals, np.einsum("bia,bac->bic", basis, vecs)


def _require_tangent(g: np.ndarray, v: np.ndarray, name: str):
    scale = float(np.linalg.norm(g) * np.linalg.norm(v))
    if abs(float(v @ g)) > TANGENCY_TOLERANCE * max(scale, 1e-300):
        raise ValueError(f"{name} is not tangent to M (v . grad f = {float(v @ g):.3e})")


def sectional_curvature(surface: DefiningSurface, x, v, w) -> float:
    """Sectional curvature of the plane spanned by tangent vectors ``v`` and ``w``.

    Uses (H(v,v) H(w,w) - H(v,w)^2) / (|grad f|^2 |v ^ w|^2), which equals the
    orthonormal-pair formula for the Gram-Schmidt basis of the plane and is
    symmetric in (v, w) bit for bit.
    """
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    _, g, h = surface.jet(x)
    gg = _checked_gradient(g, np.asarray(x))
    _require_tangent(g, v, "v")
    _require_tangent(g, w, "w")
    vv, ww, vw = float(v @ v), float(w @ w), float(v @ w)
    gram = vv * ww - vw * vw
    if not vv > 0 or not ww > 0 or gram < 1e-20 * vv * ww:
        raise DegeneratePlaneError("v and w do not span a plane (|v ^ w| < 1e-10)")
    hvv = float(v @ h @ v)
    hww = float(w @ h @ w)
    hvw = 0.5 * (float(v @ h @ w) + float(w @ h @ v))
    return (hvv * hww - hvw * hvw) / (gram * gg)


def shape_operator(surface: DefiningSurface, x, v) -> np.ndarray:
    """S(v): the tangent vector with <S(v), w> = Hess f(v, w) / |grad f| for tangent w."""
    v = np.asarray(v, dtype=float)
    _, g, h = surface.jet(x)
    gg = _checked_gradient(g, np.asarray(x))
    _require_tangent(g, v, "v")
    hv = h @ v
    return (hv - (float(hv @ g) / gg) * g) / np.sqrt(gg)
