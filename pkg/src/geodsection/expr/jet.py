"""Second-order forward-mode evaluation of expression trees.

Jets are propagated over a batch of points at once: values have shape
``(B,)``, gradients ``(B, d)`` and Hessians ``(B, d, d)``.  Every update rule
adds symmetric terms only (``u'' g g^T``, ``ga gb^T + gb ga^T``), so the
Hessian is exactly symmetric in floating point without any symmetrization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from .nodes import Const, ExpressionAst, Node, Pow, Unary, Var, to_text


@dataclass(frozen=True)
class JetValue:
    """Value, gradient and Hessian of a function at one point."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray


@dataclass
class _Jet:
    v: np.ndarray
    g: np.ndarray
    h: np.ndarray


def _outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[:, :, None] * b[:, None, :]


def _fail(node: Node, ast_vars, reason: str):
    raise DomainError(f"{reason} in subexpression '{to_text(node, ast_vars)}'")


def _unary_derivs(node: Unary, u: np.ndarray, names, need_d2: bool):
    op = node.op
    if op == "sin":
        return np.sin(u), np.cos(u), -np.sin(u)
    if op == "cos":
        return np.cos(u), -np.sin(u), -np.cos(u)
    if op == "exp":
        e = np.exp(u)
        return e, e, e
    if op == "log":
        if np.any(u <= 0):
            _fail(node, names, "log of non-positive value")
        return np.log(u), 1.0 / u, -1.0 / (u * u)
    if op == "sqrt":
        if np.any(u < 0) or (need_d2 and np.any(u == 0)):
            _fail(node, names, "sqrt of negative value" if np.any(u < 0) else "sqrt derivative at 0")
        s = np.sqrt(u)
        return s, 0.5 / s, -0.25 / (s * u)
    raise ValueError(f"unknown unary op {op!r}")


def _pow_derivs(node: Pow, u: np.ndarray, names, need_d: bool):
    p = node.exponent
    integral = float(p).is_integer()
    if not integral and np.any(u < 0):
        _fail(node, names, "negative base with non-integer exponent")
    if p < 0 and np.any(u == 0):
        _fail(node, names, "division by zero")
    if p == 0:
        one = np.ones_like(u)
        return one, np.zeros_like(u), np.zeros_like(u)
    if need_d and not integral and p < 2 and np.any(u == 0):
        _fail(node, names, "derivative of fractional power at 0")
    value = np.power(u, p)
    d1 = p * np.power(u, p - 1) if p != 1 else np.ones_like(u)
    d2 = p * (p - 1) * np.power(u, p - 2) if p not in (1.0, 2.0) else np.full_like(u, p * (p - 1))
    return value, d1, d2


def _compose(j: _Jet, f0, f1, f2) -> _Jet:
    g = f1[:, None] * j.g
    h = f1[:, None, None] * j.h + f2[:, None, None] * _outer(j.g, j.g)
    return _Jet(f0, g, h)


def _jet(node: Node, X: np.ndarray, names) -> _Jet:
    B, d = X.shape
    if isinstance(node, Const):
        return _Jet(np.full(B, node.value), np.zeros((B, d)), np.zeros((B, d, d)))
    if isinstance(node, Var):
        g = np.zeros((B, d))
        g[:, node.index] = 1.0
        return _Jet(X[:, node.index].copy(), g, np.zeros((B, d, d)))
    if isinstance(node, Unary):
        a = _jet(node.arg, X, names)
        if node.op == "neg":
            return _Jet(-a.v, -a.g, -a.h)
        return _compose(a, *_unary_derivs(node, a.v, names, True))
    if isinstance(node, Pow):
        a = _jet(node.base, X, names)
        return _compose(a, *_pow_derivs(node, a.v, names, True))
    a = _jet(node.left, X, names)
    b = _jet(node.right, X, names)
    if node.op == "+":
        return _Jet(a.v + b.v, a.g + b.g, a.h + b.h)
    if node.op == "-":
        return _Jet(a.v - b.v, a.g - b.g, a.h - b.h)
    if node.op == "/":
        if np.any(b.v == 0):
            _fail(node, names, "division by zero")
        inv = 1.0 / b.v
        b = _compose(b, inv, -inv * inv, 2.0 * inv * inv * inv)
    cross = _outer(a.g, b.g)
    return _Jet(
        a.v * b.v,
        a.v[:, None] * b.g + b.v[:, None] * a.g,
        a.v[:, None, None] * b.h + b.v[:, None, None] * a.h + (cross + np.swapaxes(cross, 1, 2)),
    )


def _value(node: Node, X: np.ndarray, names) -> np.ndarray:
    if isinstance(node, Const):
        return np.full(X.shape[0], node.value)
    if isinstance(node, Var):
        return X[:, node.index]
    if isinstance(node, Unary):
        a = _value(node.arg, X, names)
        if node.op == "neg":
            return -a
        if node.op == "sqrt":
            if np.any(a < 0):
                _fail(node, names, "sqrt of negative value")
            return np.sqrt(a)
        return _unary_derivs(node, a, names, False)[0]
    if isinstance(node, Pow):
        return _pow_derivs(node, _value(node.base, X, names), names, False)[0]
    a = _value(node.left, X, names)
    b = _value(node.right, X, names)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if np.any(b == 0):
        _fail(node, names, "division by zero")
    return a / b


def _as_batch(ast: ExpressionAst, X) -> tuple[np.ndarray, bool]:
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != ast.dimension:
        raise ValueError(f"point has {X.shape[1]} coordinates, expression expects {ast.dimension}")
    if not np.all(np.isfinite(X)):
        raise DomainError("non-finite evaluation point")
    return X, single


def jet_eval_batch(ast: ExpressionAst, X) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Values ``(B,)``, gradients ``(B, d)`` and Hessians ``(B, d, d)`` at rows of ``X``."""
    X, _ = _as_batch(ast, X)
    with np.errstate(all="ignore"):
        j = _jet(ast.root, X, ast.variables)
    return j.v, j.g, j.h


def jet_eval(ast: ExpressionAst, x) -> JetValue:
    """Exact value, gradient and Hessian of ``ast`` at the single point ``x``."""
    v, g, h = jet_eval_batch(ast, np.asarray(x, dtype=float).reshape(1, -1))
    return JetValue(float(v[0]), g[0], h[0])


def evaluate(ast: ExpressionAst, X) -> np.ndarray | float:
    """Plain function values (no derivatives); accepts one point or a batch."""
    X, single = _as_batch(ast, X)
    with np.errstate(all="ignore"):
        v = _value(ast.root, X, ast.variables)
    return float(v[0]) if single else np.array(v, dtype=float)


def evaluate_constant(node: Node) -> float:
    return float(_value(node, np.zeros((1, 0)), ())[0])
