import numpy as np
import pytest

from geodsection.surface import Ellipsoid, Sphere


@pytest.fixture
def sphere():
    return Sphere()


@pytest.fixture
def ellipsoid2():
    return Ellipsoid([2.0, 1.0, 1.0])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def central_gradient(func, x, h):
    """Central-difference gradient of a scalar function of a vector."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (func(x + e) - func(x - e)) / (2 * h)
    return g


def central_hessian(grad, x, h):
    """Symmetrized central-difference Jacobian of a gradient map."""
    x = np.asarray(x, dtype=float)
    n = x.size
    H = np.empty((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        H[:, i] = (grad(x + e) - grad(x - e)) / (2 * h)
    return 0.5 * (H + H.T)


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[number])
