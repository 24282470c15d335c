"""Acceptance suite: twelve end-to-end criteria, each reported as one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or directly with ``python tests/test_acceptance.py``.
"""

import math
from functools import lru_cache

import numpy as np
import pytest

from geodsection.closedform import (
    RevolutionProfile,
    billiard_second_iterate,
    clairaut_g,
    ellipsoid_g,
    predicted_return,
)
from geodsection.expr import evaluate, jet_eval_batch, parse_expression
from geodsection.flow import IntegratorConfig, flow_to_time, integrate
from geodsection.section import (
    angular_rates,
    estimate_epsilon,
    normal_hessian,
    random_binding_points,
    random_page_points,
    return_map,
    symplecticity_defect,
)
from geodsection.surface import (
    Ellipsoid,
    ExpressionSurface,
    PhasePoint,
    Revolution,
    Sphere,
    audit_surface,
    sample_phases,
    sectional_curvature,
)

TWO_PI = 2 * math.pi
RESULTS: dict[int, str] = {}


def report(number: int, ok: bool, detail: str) -> bool:
    RESULTS[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(RESULTS[number])
    return ok


# ------------------------------------------------------------------ shared return-map runs


@lru_cache(maxsize=None)
def sphere_runs(dim: int):
    surf = Sphere(ambient_dim=dim)
    out = []
    for p in random_page_points(surf, 100, seed=100 + dim):
        out.append((p, return_map(surf, p)))
    return surf, out


@lru_cache(maxsize=None)
def ellipsoid_runs(a0: float, dim: int):
    surf = Ellipsoid([a0] + [1.0] * (dim - 1))
    out = []
    for p in random_page_points(surf, 20, seed=200 + dim):
        out.append((p, return_map(surf, p)))
    return surf, out


@lru_cache(maxsize=None)
def epsilon_of(kind: str, a0: float, dim: int) -> float:
    surf = Sphere(ambient_dim=dim) if kind == "sphere" else Ellipsoid([a0] + [1.0] * (dim - 1))
    return estimate_epsilon(surf)


# ------------------------------------------------------------------ criteria


def check_sphere_identity() -> bool:
    worst_x, worst_tau = 0.0, 0.0
    for dim in (3, 4):
        _, runs = sphere_runs(dim)
        for p, rec in runs:
            worst_x = max(worst_x, float(np.linalg.norm(rec.end.as_vector() - p.as_vector())))
            worst_tau = max(worst_tau, abs(rec.tau - TWO_PI))
    ok = worst_x < 1e-8 and worst_tau < 1e-8
    return report(1, ok, f"sphere n=2,3, 200 starts: max |end-start| = {worst_x:.2e}, max |tau-2pi| = {worst_tau:.2e}  (< 1e-8)")


def check_ellipsoid_closed_form() -> bool:
    worst = 0.0
    for a0 in (0.5, 2.0):
        for dim in (3, 4):
            surf, runs = ellipsoid_runs(a0, dim)
            for p, rec in runs:
                xe, ye = predicted_return(surf, p.x, p.y)
                worst = max(worst, float(np.max(np.abs(np.concatenate([rec.end.x - xe, rec.end.y - ye])))))
    return report(2, worst < 1e-6, f"ellipsoid a0 in {{0.5,2}} x n in {{2,3}}, 80 starts: max coordinate error = {worst:.2e}  (< 1e-6)")


def check_return_time_bound() -> bool:
    # on the sphere tau = 2pi/epsilon exactly, so the strict bound only holds up to rounding
    margin, ok = math.inf, True
    groups = [(("sphere", 1.0, d), sphere_runs(d)[1]) for d in (3, 4)]
    groups += [(("ellipsoid", a0, d), ellipsoid_runs(a0, d)[1]) for a0 in (0.5, 2.0) for d in (3, 4)]
    for key, runs in groups:
        bound = TWO_PI / epsilon_of(*key)
        for _, rec in runs:
            margin = min(margin, bound - rec.tau)
            ok &= rec.tau < bound * (1 + 1e-6)
    return report(3, ok, f"tau < 2pi/epsilon (1e-6 relative slack) over all 280 runs: smallest margin = {margin:.3g}")


def check_angular_positivity() -> bool:
    surfaces = {
        "sphere": Sphere(),
        "ellipsoid(2,1,1)": Ellipsoid([2.0, 1.0, 1.0]),
        "ellipsoid(0.5,1,1,1)": Ellipsoid([0.5, 1.0, 1.0, 1.0]),
        "revolution 0.5 sin": Revolution("0.5*sin(phi)"),
    }
    mins = {}
    sphere_dev = 0.0
    for name, surf in surfaces.items():
        X, Y = sample_phases(surf, 100_000, seed=7)
        theta = angular_rates(surf, X, Y)
        theta = theta[np.isfinite(theta)]
        mins[name] = float(np.min(theta))
        if name == "sphere":
            sphere_dev = float(np.max(np.abs(theta - 1.0)))
    ok = all(v > 0 for v in mins.values()) and sphere_dev < 1e-10
    shown = ", ".join(f"{k}: {v:.3g}" for k, v in mins.items())
    return report(4, ok, f"min Theta over 1e5 phases: {shown}; sphere |Theta-1| = {sphere_dev:.1e}")


def check_binding_invariance() -> bool:
    worst = 0.0
    for surf in (Ellipsoid([2.0, 1.0, 1.0]), Ellipsoid([0.5, 1.0, 1.0, 1.0])):
        for b in random_binding_points(surf, 5, seed=5):
            for state in integrate(surf, b, 4 * math.pi, record=True).states:
                worst = max(worst, abs(float(state.phase.x[0])), abs(float(state.phase.y[0])))
    return report(5, worst < 1e-8, f"binding trajectories over [0, 4pi]: max(|x0|,|y0|) = {worst:.1e}  (< 1e-8)")


def check_symplecticity() -> bool:
    surf = Ellipsoid([2.0, 1.0, 1.0])
    sym, exact = 0.0, 0.0
    for p in random_page_points(surf, 10, seed=66, min_y0=0.05):
        rep = symplecticity_defect(surf, p, h=1e-4)
        sym, exact = max(sym, rep.symplectic_defect), max(exact, rep.exactness_defect)
    ok = sym < 1e-5 and exact < 1e-4
    return report(6, ok, f"ellipsoid(2,1,1), 10 points, h=1e-4: symplectic defect = {sym:.2e} (< 1e-5), exactness = {exact:.2e} (< 1e-4)")


def check_normal_hessian() -> bool:
    surfaces = [
        Sphere(),
        Ellipsoid([2.0, 1.0, 1.0]),
        Ellipsoid([0.5, 1.0, 1.0, 1.0]),
        Ellipsoid([2.0, 1.5, 1.0]),
        Revolution("0.5*sin(phi) + 0.1*sin(phi)^3"),
        ExpressionSurface("x0^2/4 + x1^2 + x2^2 + 0.2*x1^2*x2^2 - 1", 3),
    ]
    smallest, audited, sphere_dev = math.inf, True, 0.0
    for surf in surfaces:
        rep, surf = audit_surface(surf, samples=1024)
        audited &= rep.passed
        for b in random_binding_points(surf, 100, seed=71):
            s = normal_hessian(surf, b)
            smallest = min(smallest, s.s00)
            if isinstance(surf, Sphere):
                sphere_dev = max(sphere_dev, float(np.max(np.abs(s.matrix - np.eye(2)))))
    ok = audited and smallest > 0 and sphere_dev < 1e-12
    return report(7, ok, f"6 audited surfaces x 100 binding points: min s00 = {smallest:.4g}; sphere |S_N - I| = {sphere_dev:.1e}")


def check_curvature() -> bool:
    worst = 0.0
    rng = np.random.default_rng(8)
    for r in (0.5, 1.0, 3.0):
        s = Sphere(r)
        for _ in range(10):
            x = rng.normal(size=3)
            x *= r / np.linalg.norm(x)
            v = np.cross(x, rng.normal(size=3))
            w = np.cross(x, v)
            worst = max(worst, abs(sectional_curvature(s, x, v, w) - 1 / r**2))
    k = sectional_curvature(Ellipsoid([2.0, 1.0, 1.0]), [0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0])
    ok = worst < 1e-10 and abs(k - 0.25) < 1e-10
    return report(8, ok, f"sphere(r) max |K - 1/r^2| = {worst:.1e}; ellipsoid(2,1,1) K = {k!r}")


def check_clairaut() -> bool:
    worst, round_dev = 0.0, 0.0
    for a0 in (0.5, 1.0, 2.0):
        prof = RevolutionProfile.sine(a0)
        for k in range(1, 10):
            t = k / 10
            g_e, g_c = ellipsoid_g(t, a0), clairaut_g(t, prof)
            worst = max(worst, abs(g_e - g_c))
            if a0 == 1.0:
                round_dev = max(round_dev, abs(g_e - TWO_PI), abs(g_c - TWO_PI))
    ok = worst < 1e-8 and round_dev < 1e-8
    return report(9, ok, f"|G_ellipsoid - G_clairaut| on 27-point grid = {worst:.1e}; a0=1 |G - 2pi| = {round_dev:.1e}")


def _two_bounce_oracle(xhat, y_t):
    t = np.linalg.norm(y_t)
    p, d = xhat.copy(), y_t - math.sqrt(1 - t * t) * xhat
    for _ in range(2):
        p = p - 2 * (p @ d) * d
        p /= np.linalg.norm(p)
        d = d - 2 * (d @ p) * p
    return p, d - (d @ p) * p


def check_billiard_limit() -> bool:
    ts = np.linspace(0.1, 0.9, 81)
    sups = []
    for c in (0.5, 0.2, 0.1, 0.05):
        prof = RevolutionProfile.sine(c)
        sups.append(max(abs(clairaut_g(float(t), prof) - 4 * math.acos(t)) for t in ts))
    monotone = all(a > b for a, b in zip(sups, sups[1:]))
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(1000):
        dim = int(rng.integers(2, 5))
        x = rng.normal(size=dim)
        x /= np.linalg.norm(x)
        y = rng.normal(size=dim)
        y -= (y @ x) * x
        y *= rng.uniform(0.01, 1.0) / np.linalg.norm(y)
        xr, yr = billiard_second_iterate(x, y)
        xo, yo = _two_bounce_oracle(x, y)
        worst = max(worst, float(np.max(np.abs(np.concatenate([xr - xo, yr - yo])))))
    ok = monotone and worst < 1e-10
    shown = ", ".join(f"{s:.3g}" for s in sups)
    return report(10, ok, f"sup|G_c - 4 arccos| for c=0.5,0.2,0.1,0.05: {shown}; billiard vs oracle = {worst:.1e}")


def check_integrator_order() -> bool:
    surf = Sphere()
    start = PhasePoint([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
    base = IntegratorConfig().base_step
    errs = []
    for h in (base, base / 2):
        end = flow_to_time(surf, start, TWO_PI, IntegratorConfig(base_step=h))
        errs.append(float(np.linalg.norm(end.as_vector() - start.as_vector())))
    ratio = errs[0] / errs[1]
    return report(11, 12 <= ratio <= 20, f"great-circle error {errs[0]:.2e} -> {errs[1]:.2e} on halving the step: ratio = {ratio:.2f}  (in [12, 20])")


JET_EXPRESSIONS = [
    ("x0^2 + x1^2 + x2^2 - 1", 3),
    ("x0^2/4 + x1^2/2.25 + x2^2 - 1", 3),
    ("exp(x0*x1) - cos(x2)", 3),
    ("sin(x0)*cos(x1) + x2^3", 3),
    ("sqrt(1 + x0^2 + x1^2) * log(2 + x2^2)", 3),
    ("(x0^2 + x1^2 + x2^2 + 3)^2 - 16*(x1^2 + x2^2)", 3),
    ("x0^4 + x1^4 + x2^4 + x3^4 - 1", 4),
    ("exp(-(x0 + 2*x1)^2) * sin(x2) + x3*cos(x0)", 4),
    ("1/(2 + sin(x0*x1)) + log(x2 + 3)", 3),
    ("(1.5 + cos(x0))^-0.5 * x1 - x0*x1*x2*x3*x4", 5),
]


def _fd_gradient(ast, X, h):
    n = X.shape[1]
    G = np.empty_like(X)
    for i in range(n):
        E = np.zeros(n)
        E[i] = h
        G[:, i] = (evaluate(ast, X + E) - evaluate(ast, X - E)) / (2 * h)
    return G


def _fd_hessian(ast, X, h):
    n = X.shape[1]
    H = np.empty((X.shape[0], n, n))
    for i in range(n):
        E = np.zeros(n)
        E[i] = h
        H[:, :, i] = (jet_eval_batch(ast, X + E)[1] - jet_eval_batch(ast, X - E)[1]) / (2 * h)
    return H


def check_autodiff() -> bool:
    rng = np.random.default_rng(12)
    h = np.finfo(float).eps ** (1 / 3)
    worst = 0.0
    for text, dim in JET_EXPRESSIONS:
        ast = parse_expression(text, dim)
        X = rng.uniform(-0.8, 0.8, size=(100, dim))
        _, g, H = jet_eval_batch(ast, X)
        g_err = np.abs(g - _fd_gradient(ast, X, h)) / np.maximum(1.0, np.abs(g))
        H_err = np.abs(H - _fd_hessian(ast, X, h)) / np.maximum(1.0, np.abs(H))
        worst = max(worst, float(g_err.max()), float(H_err.max()))
    return report(12, worst < 1e-6, f"10 expressions x 100 points: max relative jet error vs central differences = {worst:.1e}  (< 1e-6)")


CRITERIA = [
    check_sphere_identity,
    check_ellipsoid_closed_form,
    check_return_time_bound,
    check_angular_positivity,
    check_binding_invariance,
    check_symplecticity,
    check_normal_hessian,
    check_curvature,
    check_clairaut,
    check_billiard_limit,
    check_integrator_order,
    check_autodiff,
]


@pytest.mark.parametrize("check", CRITERIA, ids=[f"criterion_{i:02d}_{c.__name__[6:]}" for i, c in enumerate(CRITERIA, 1)])
def test_criterion(check):
    assert check()


if __name__ == "__main__":
    passed = sum(bool(c()) for c in CRITERIA)
    print(f"{passed}/{len(CRITERIA)} criteria passed")
