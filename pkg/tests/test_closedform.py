import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad, solve_ivp

from geodsection.closedform import (
    RevolutionProfile,
    billiard_g0,
    billiard_second_iterate,
    clairaut_g,
    closed_form_return_map,
    elliptic_f,
    elliptic_pi,
    ellipsoid_g,
    predicted_return,
    return_angle_function,
)
from geodsection.errors import DomainError, NormalChord, PolePoint, UnsupportedSurface
from geodsection.surface import Ellipsoid, ExpressionSurface, Revolution, Sphere

TWO_PI = 2 * math.pi


# ------------------------------------------------------------------ elliptic integrals


def test_trivial_parameters():
    for phi in (0.3, 1.2, TWO_PI, 7.5):
        assert elliptic_f(phi, 0.0) == pytest.approx(phi, abs=1e-14)
        assert elliptic_pi(0.0, phi, 0.0) == pytest.approx(phi, abs=1e-14)


@pytest.mark.parametrize("m", [-1.0, -0.5, 0.5])
def test_full_turn_is_four_quarters(m):
    assert elliptic_f(TWO_PI, m) == pytest.approx(4 * elliptic_f(math.pi / 2, m), abs=1e-12)
    direct, _ = quad(lambda s: 1 / math.sqrt(1 - m * math.sin(s) ** 2), 0, TWO_PI, epsabs=1e-13, limit=200)
    assert elliptic_f(TWO_PI, m) == pytest.approx(direct, abs=1e-9)


@pytest.mark.parametrize("t", [0.25, 0.5, 0.9])
def test_third_kind_closed_antiderivative(t):
    assert elliptic_pi(1 - t * t, TWO_PI, 0.0) == pytest.approx(TWO_PI / t, abs=1e-9)


@pytest.mark.parametrize("phi", [0.4, 1.3, 2.9, TWO_PI])
@pytest.mark.parametrize("m", [-3.0, -0.4, 0.0, 0.6, 0.95])
@pytest.mark.parametrize("n", [-2.0, 0.0, 0.5, 0.9])
def test_against_mpmath(phi, m, n):
    assert elliptic_f(phi, m) == pytest.approx(float(mpmath.ellipf(phi, m)), abs=1e-9)
    assert elliptic_pi(n, phi, m) == pytest.approx(float(mpmath.ellippi(n, phi, m)), abs=1e-9)


def test_domain_errors():
    with pytest.raises(DomainError):
        elliptic_f(math.pi / 2, 1.5)
    with pytest.raises(DomainError):
        elliptic_pi(1.2, math.pi / 2, 0.0)
    with pytest.raises(DomainError):
        ellipsoid_g(0.0, 2.0)
    with pytest.raises(DomainError):
        ellipsoid_g(0.5, -1.0)


# ------------------------------------------------------------------ G(t)


@pytest.mark.parametrize("t", [0.1, 0.5, 0.9, 1.0])
def test_round_sphere_gives_full_turn(t):
    assert ellipsoid_g(t, 1.0) == pytest.approx(TWO_PI, abs=1e-12)


@pytest.mark.parametrize("a0", [0.5, 1.0, 2.0, 3.3])
def test_tangential_limit(a0):
    assert ellipsoid_g(1.0, a0) == pytest.approx(TWO_PI * a0, abs=1e-12)
    # at t = 1 the Clairaut integrand collapses to the constant |a'(0)|
    prof = RevolutionProfile.sine(a0)
    direct, _ = quad(lambda s: abs(prof.derivative(0.0)), 0, TWO_PI)
    assert clairaut_g(1.0, prof) == pytest.approx(direct, abs=1e-9)


def test_ellipsoid_equals_clairaut():
    assert ellipsoid_g(0.5, 2.0) == pytest.approx(clairaut_g(0.5, RevolutionProfile.parse("2*sin(phi)")), abs=1e-8)


def _ode_return_angle(t, a0):
    """Rotation of the first page return, from an independent stiff-free ODE solve."""
    inv2 = np.array([1 / a0**2, 1.0, 1.0])

    def rhs(_, z):
        x, y = z[:3], z[3:]
        g = 2 * x * inv2
        return np.concatenate([y, -(y * y @ (2 * inv2)) / (g @ g) * g])

    def crossing(_, z):
        return z[0]

    crossing.direction = 1.0
    y0 = math.sqrt(1 - t * t)
    z0 = np.array([0.0, 1.0, 0.0, y0, 0.0, t])
    sol = solve_ivp(rhs, (0, 500), z0, method="DOP853", rtol=1e-12, atol=1e-13, events=crossing)
    times = [s for s in sol.t_events[0] if s > 1e-6]
    z = sol.sol(times[0]) if sol.sol is not None else None
    if z is None:
        sol = solve_ivp(rhs, (0, times[0]), z0, method="DOP853", rtol=1e-12, atol=1e-13)
        z = sol.y[:, -1]
    return math.atan2(z[2], z[1]) % TWO_PI


@pytest.mark.parametrize("t", [0.3, 0.7])
def test_g_matches_independent_ode(t):
    g = ellipsoid_g(t, 2.0)
    assert _ode_return_angle(t, 2.0) == pytest.approx(g % TWO_PI, abs=1e-7)


def test_clairaut_zero_profile_is_billiard():
    zero = RevolutionProfile.parse("0*sin(phi)")
    for t in (0.1, 0.5, 0.9):
        assert clairaut_g(t, zero) == pytest.approx(4 * math.acos(t), abs=1e-9)


def test_clairaut_rejects_tiny_t():
    with pytest.raises(DomainError):
        clairaut_g(1e-4, RevolutionProfile.sine(1.0))


def test_sine_degenerates_monotonically_to_billiard():
    ts = np.linspace(0.1, 0.9, 9)
    sups = [max(abs(clairaut_g(t, RevolutionProfile.sine(c)) - 4 * math.acos(t)) for t in ts) for c in (0.5, 0.2, 0.1, 0.05)]
    assert all(a > b for a, b in zip(sups, sups[1:]))


def test_profile_derivative():
    prof = RevolutionProfile.parse("0.3*sin(phi) + 0.1*sin(phi)^3")
    for phi in (0.2, 1.0, 2.5):
        expected = 0.3 * math.cos(phi) + 0.3 * math.sin(phi) ** 2 * math.cos(phi)
        assert prof.derivative(phi) == pytest.approx(expected, rel=1e-12)


# ------------------------------------------------------------------ rotation maps


def test_rotation_special_angles():
    x = np.array([1.0, 0.0, 0.0])
    y = np.array([0.0, 0.6, 0.0])
    xr, y0, yr = closed_form_return_map(x, 0.8, y, TWO_PI)
    np.testing.assert_allclose(xr, x, atol=1e-15)
    np.testing.assert_allclose(yr, y, atol=1e-15)
    xr, y0, yr = closed_form_return_map(x, 0.8, y, math.pi)
    np.testing.assert_allclose(xr, -x, atol=1e-15)
    np.testing.assert_allclose(yr, -y, atol=1e-15)
    assert y0 == 0.8
    with pytest.raises(PolePoint):
        closed_form_return_map(x, 1.0, np.zeros(3), 1.0)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(-1, 1), min_size=4, max_size=4),
    st.lists(st.floats(-1, 1), min_size=4, max_size=4),
    st.floats(0.05, 0.95),
    st.floats(-20, 20),
)
def test_rotation_is_isometry(xs, ys, y0, g):
    x = np.array(xs)
    if np.linalg.norm(x) < 1e-2:
        return
    x /= np.linalg.norm(x)
    y = np.array(ys) - (np.array(ys) @ x) * x
    if np.linalg.norm(y) < 1e-2:
        return
    y *= math.sqrt(1 - y0**2) / np.linalg.norm(y)
    xr, y0r, yr = closed_form_return_map(x, y0, y, g)
    assert abs(np.linalg.norm(xr) - 1) < 1e-14
    assert abs(xr @ yr) < 1e-14
    assert abs(y0r**2 + yr @ yr - 1) < 1e-14


def _two_bounces(p, d):
    """Brute-force billiard in the unit ball: chord to the sphere, then reflect."""
    for _ in range(2):
        s = -2 * (p @ d)
        p = p + s * d
        p /= np.linalg.norm(p)
        d = d - 2 * (d @ p) * p
    return p, d


def _billiard_oracle(xhat, y_t):
    t = np.linalg.norm(y_t)
    d = y_t - math.sqrt(1 - t * t) * xhat
    p, d = _two_bounces(xhat.copy(), d)
    return p, d - (d @ p) * p


def test_billiard_special_cases():
    x = np.array([1.0, 0.0, 0.0])
    xr, yr = billiard_second_iterate(x, np.array([0.0, 1.0, 0.0]))
    np.testing.assert_allclose(xr, x, atol=1e-15)
    y = np.array([0.0, math.sqrt(0.5), 0.0])
    xr, yr = billiard_second_iterate(x, y)
    np.testing.assert_allclose(xr, -x, atol=1e-12)
    xo, _ = _billiard_oracle(x, y)
    np.testing.assert_allclose(xo, -x, atol=1e-12)
    with pytest.raises(NormalChord):
        billiard_second_iterate(x, np.zeros(3))
    assert billiard_g0(0.0) == pytest.approx(TWO_PI)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(-1, 1), min_size=3, max_size=3),
    st.lists(st.floats(-1, 1), min_size=3, max_size=3),
    st.floats(0.01, 1.0),
)
def test_billiard_matches_geometric_oracle(xs, ys, t):
    x = np.array(xs)
    if np.linalg.norm(x) < 1e-2:
        return
    x /= np.linalg.norm(x)
    y = np.array(ys) - (np.array(ys) @ x) * x
    if np.linalg.norm(y) < 1e-2:
        return
    y *= t / np.linalg.norm(y)
    xr, yr = billiard_second_iterate(x, y)
    xo, yo = _billiard_oracle(x, y)
    np.testing.assert_allclose(xr, xo, atol=1e-10)
    np.testing.assert_allclose(yr, yo, atol=1e-10)


# ------------------------------------------------------------------ dispatch


def test_return_angle_dispatch():
    assert return_angle_function(Sphere())(0.4) == TWO_PI
    assert return_angle_function(Ellipsoid([2, 1, 1]))(0.5) == ellipsoid_g(0.5, 2.0)
    rev = Revolution("0.5*sin(phi)")
    assert return_angle_function(rev)(0.5) == pytest.approx(ellipsoid_g(0.5, 0.5), abs=1e-8)
    with pytest.raises(UnsupportedSurface):
        return_angle_function(Ellipsoid([2, 1.5, 1]))
    with pytest.raises(UnsupportedSurface):
        return_angle_function(ExpressionSurface("x0^2+x1^2+x2^2-1", 3))


def test_meridian_prediction_is_identity():
    x, y = predicted_return(Ellipsoid([2, 1, 1]), [0, 1, 0], [1, 0, 0])
    np.testing.assert_array_equal(x, [0, 1, 0])
    np.testing.assert_array_equal(y, [1, 0, 0])
