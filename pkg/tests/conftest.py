import numpy as np
import pytest

from stablem0.params import StableParams
from stablem0.quadrature import QuadratureConfig


@pytest.fixture(scope="session")
def cfg():
    return QuadratureConfig()


@pytest.fixture(scope="session")
def cauchy():
    return StableParams(0.0, 1.0, 1.0, 0.0)


def central_fd(f, x, h):
    """Central finite difference of a scalar function."""
    return (f(x + h) - f(x - h)) / (2.0 * h)


def fd_in_param(fn, p, index, h):
    """Central FD of fn(StableParams) in one coordinate of theta."""
    theta = p.as_array()
    up = theta.copy()
    dn = theta.copy()
    up[index] += h
    dn[index] -= h
    return (fn(StableParams.from_array(up)) - fn(StableParams.from_array(dn))) / (2.0 * h)


def assert_close(actual, expected, tol, label=""):
    actual = np.asarray(actual)
    expected = np.asarray(expected)
    err = np.max(np.abs(actual - expected))
    assert err <= tol, f"{label}: |{actual} - {expected}| = {err} > {tol}"
