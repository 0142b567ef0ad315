import math

import numpy as np
import pytest

from stablem0 import density
from stablem0.quadrature import (GK_NODES, GK_WEIGHTS, G_WEIGHTS,
                                 QuadratureConfig, _gk_panels, _wynn_limit,
                                 fourier_integral)


def test_gk15_exactness_on_polynomials():
    # the Kronrod rule integrates polynomials up to degree 22 exactly,
    # the embedded Gauss rule up to degree 13
    for deg in (0, 3, 8, 13, 19, 22):
        exact = 2.0 / (deg + 1) if deg % 2 == 0 else 0.0
        kron = float(np.sum(GK_WEIGHTS * GK_NODES ** deg))
        assert kron == pytest.approx(exact, abs=1e-13), deg
    for deg in (0, 5, 13):
        exact = 2.0 / (deg + 1) if deg % 2 == 0 else 0.0
        gauss = float(np.sum(G_WEIGHTS * GK_NODES ** deg))
        assert gauss == pytest.approx(exact, abs=1e-13), deg


def test_gk_panel_values_and_errors():
    k, e = _gk_panels(lambda u: np.exp(-u)[None, :], np.array([0.0, 1.0]),
                      np.array([1.0, 3.0]), 0.0)
    assert k[0, 0].real == pytest.approx(1 - math.exp(-1), rel=1e-14)
    assert k[0, 1].real == pytest.approx(math.exp(-1) - math.exp(-3), rel=1e-14)
    assert np.all(e >= 0)


def test_wynn_on_alternating_series():
    # partial sums of log(2) = sum (-1)^(k+1)/k
    k = np.arange(1, 31)
    sums = np.cumsum((-1.0) ** (k + 1) / k).astype(complex)[:, None]
    est, err = _wynn_limit(sums)
    assert abs(est[0] - math.log(2)) < 1e-12
    assert err[0] < 1e-10
    assert abs(est[0] - math.log(2)) <= 10 * err[0] + 1e-13


@pytest.mark.parametrize("y", [0.0, 0.7, 5.0, 40.0, 1000.0, 1e5])
def test_exponential_fourier_closed_form(y):
    # integral_0^inf e^(-iuy) e^(-u) du = 1/(1 + iy)
    vals, errs = fourier_integral(lambda u: np.exp(-u)[None, :], y,
                                  QuadratureConfig(), 1.0, env_pow=0.5)
    exact = 1.0 / (1.0 + 1j * y)
    assert abs(vals[0] - exact) < 5e-11
    assert abs(vals[0] - exact) <= max(10 * errs[0], 1e-13)


def test_gaussian_fourier_closed_form():
    # integral_0^inf e^(-iuy) e^(-u^2) du, real part = sqrt(pi)/2 e^(-y^2/4)
    for y in (0.0, 2.0, 11.0):
        vals, _ = fourier_integral(lambda u: np.exp(-u * u)[None, :], y,
                                   QuadratureConfig(), 2.0, env_pow=0.5)
        assert vals[0].real == pytest.approx(
            math.sqrt(math.pi) / 2 * math.exp(-y * y / 4), abs=1e-11)


def test_batch_matches_scalar_path():
    alpha, beta = 1.2, 0.4
    names = ("f", "f_alpha")
    ys = np.array([-80.0, -3.2, 0.0, 1.7, 12.0, 55.0, 400.0])
    batch, _ = density.invert_channels_batch(ys, alpha, beta, names,
                                             QuadratureConfig())
    for i, y in enumerate(ys):
        single, _ = density.invert_channels(float(y), alpha, beta, names,
                                            QuadratureConfig())
        assert np.max(np.abs(batch[i] - single)) < 2e-9, y


def test_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(abs_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureConfig(max_panels=4)


def test_accel_off_agrees_with_accel_on():
    cfg_on = QuadratureConfig()
    cfg_off = QuadratureConfig(oscillation_accel=False, max_panels=200000)
    for (a, b, y) in [(1.0, 0.0, 37.0), (0.6, 0.5, 11.0), (1.7, -0.8, 250.0)]:
        fn = lambda u: density._weight_rows(u, a, b, ("f",))
        freq = (lambda u: density._c1_scalar(u, a, b)) if b else None
        v1, _ = fourier_integral(fn, y, cfg_on, a, env_pow=0.5, freq_fn=freq)
        v2, _ = fourier_integral(fn, y, cfg_off, a, env_pow=0.5, freq_fn=freq)
        assert abs(v1[0] - v2[0]) < 3e-11, (a, b, y)
