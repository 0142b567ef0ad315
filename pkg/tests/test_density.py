import math

import numpy as np
import pytest

from stablem0.density import (GRAD_CHANNELS, bundle, pdf,
                              pdf_grad, pdf_grad_x, pdf_hess, pdf_many,
                              pdf_x_deriv, tail_slope)
from stablem0.fisher import integrate_real_line
from stablem0.params import ParamIndex, StableParams
from stablem0.quadrature import QuadratureConfig

MU, SIGMA, ALPHA, BETA = ParamIndex


def cauchy_pdf(x):
    return 1.0 / (math.pi * (1.0 + x * x))


# ----------------------------------------------------------- closed forms

def test_cauchy_pointwise(cfg, cauchy):
    assert pdf(0.0, cauchy, cfg) == pytest.approx(1 / math.pi, abs=1e-11)
    for x in (-20.0, -3.3, 0.4, 7.0, 45.0):
        assert pdf(x, cauchy, cfg) == pytest.approx(cauchy_pdf(x), abs=1e-11)


def test_gaussian_alpha2(cfg):
    # M0 at alpha=2 is Normal(mu, 2 sigma^2); beta has no effect
    p = StableParams(0.0, 1.0, 2.0, 0.0)
    assert pdf(0.0, p, cfg) == pytest.approx(1 / (2 * math.sqrt(math.pi)), abs=1e-9)
    for x in (-6.0, -1.0, 2.5, 10.0):
        assert pdf(x, p, cfg) == pytest.approx(
            math.exp(-x * x / 4) / (2 * math.sqrt(math.pi)), abs=1e-9)
    p2 = StableParams(1.0, 2.0, 2.0, 0.77)
    assert pdf(1.5, p2, cfg) == pytest.approx(
        math.exp(-0.25 / 16) / (4 * math.sqrt(math.pi)), abs=1e-9)


def test_reflection_symmetry(cfg):
    for (a, b) in [(1.3, 0.5), (0.7, -0.8), (1.0, 0.3)]:
        for x in (0.4, 2.0, 11.0):
            lhs = pdf(x, StableParams(0, 1, a, b), cfg)
            rhs = pdf(-x, StableParams(0, 1, a, -b), cfg)
            assert lhs == pytest.approx(rhs, abs=1e-10)


def test_location_scale_identity(cfg):
    for (mu, s) in [(2.0, 3.0), (-1.0, 0.25)]:
        p = StableParams(mu, s, 1.3, 0.5)
        p0 = StableParams(0.0, 1.0, 1.3, 0.5)
        for x in (-3.0, 0.5, 7.0):
            lhs = pdf(x, p, cfg)
            rhs = pdf((x - mu) / s, p0, cfg) / s
            assert lhs == pytest.approx(rhs, rel=1e-8)


def test_pdf_many_matches_scalar(cfg):
    p = StableParams(0.3, 1.4, 1.1, -0.4)
    xs = np.array([-40.0, -2.0, 0.0, 1.0, 9.0, 120.0])
    cols = pdf_many(xs, p, cfg, names=("f", "f_alpha"))
    for i, x in enumerate(xs):
        assert cols["f"][i] == pytest.approx(pdf(float(x), p, cfg), abs=1e-9)
        b = bundle(float(x), p, cfg, names=("f_alpha",))
        assert cols["f_alpha"][i] == pytest.approx(b.grad[ALPHA], abs=1e-9)


# ------------------------------------------------------------ x-derivatives

def test_cauchy_x_derivatives(cfg, cauchy):
    fx, fxx = pdf_x_deriv(1.0, cauchy, cfg)
    assert fx == pytest.approx(-1 / (2 * math.pi), abs=1e-10)
    fx0, fxx0 = pdf_x_deriv(0.0, cauchy, cfg)
    assert abs(fx0) < 1e-9
    assert fxx0 == pytest.approx(-2 / math.pi, abs=1e-9)


def test_fprime_antisymmetry(cfg):
    p = StableParams(0, 1, 1.6, 0.0)
    for x in (0.5, 2.0):
        assert pdf_x_deriv(x, p, cfg)[0] == pytest.approx(
            -pdf_x_deriv(-x, p, cfg)[0], abs=1e-10)


# -------------------------------------------------------- parameter grads

def test_f_mu_equals_minus_fprime(cfg):
    for p in (StableParams(0, 1, 1.0, 0.0), StableParams(0.5, 2.0, 1.4, 0.6)):
        for x in (-4.0, 0.3, 2.0, 15.0):
            g = pdf_grad(x, p, cfg)
            fx, _ = pdf_x_deriv(x, p, cfg)
            assert g[MU] == pytest.approx(-fx, abs=1e-8)


def test_f_beta_odd_at_symmetric_point(cfg):
    p = StableParams(0, 1, 1.5, 0.0)
    for x in (0.7, 3.0):
        gp = pdf_grad(x, p, cfg)[BETA]
        gm = pdf_grad(-x, p, cfg)[BETA]
        assert gp == pytest.approx(-gm, abs=1e-10)
    assert abs(pdf_grad(0.0, p, cfg)[BETA]) < 1e-10


def test_zero_mean_gradient(cfg):
    # differentiate the normalization: integral of f_theta_i over x is zero
    p = StableParams(0, 1, 1.3, 0.3)

    def rows(xs):
        cols = pdf_many(xs, p, cfg, names=GRAD_CHANNELS)
        return np.stack([cols[n] for n in GRAD_CHANNELS])

    vals, _ = integrate_real_line(rows, 1e-6)
    assert np.max(np.abs(vals)) < 1e-5


FD_POINTS = [StableParams(0.0, 1.0, 1.35, 0.4),
             StableParams(0.2, 1.5, 0.8, -0.6),
             StableParams(0.0, 1.0, 1.0, 0.5)]

TIGHT = QuadratureConfig(abs_tol=1e-12, rel_tol=1e-10)


@pytest.mark.parametrize("p", FD_POINTS)
def test_pdf_grad_matches_fd(p):
    for x in (-1.5, 0.4, 3.0):
        g = pdf_grad(x, p, TIGHT)
        for i in ParamIndex:
            h = 1e-6 * max(1.0, abs(p.as_array()[int(i)]))
            up, dn = p.as_array(), p.as_array()
            up[int(i)] += h
            dn[int(i)] -= h
            fd = (pdf(x, StableParams.from_array(up), TIGHT)
                  - pdf(x, StableParams.from_array(dn), TIGHT)) / (2 * h)
            assert g[i] == pytest.approx(fd, rel=1e-4, abs=1e-8), (i, x)


@pytest.mark.parametrize("p", FD_POINTS)
def test_pdf_grad_x_matches_fd_in_x(p):
    for x in (-1.0, 0.7, 2.5):
        gx = pdf_grad_x(x, p, TIGHT)
        h = 1e-5
        gu = pdf_grad(x + h, p, TIGHT)
        gd = pdf_grad(x - h, p, TIGHT)
        for i in ParamIndex:
            fd = (gu[i] - gd[i]) / (2 * h)
            assert gx[i] == pytest.approx(fd, rel=1e-5, abs=1e-7), (i, x)


def test_fprime_mu_equals_minus_fxx(cfg):
    p = StableParams(0, 1, 1.2, 0.4)
    for x in (0.5, -2.0):
        gx = pdf_grad_x(x, p, cfg)
        _, fxx = pdf_x_deriv(x, p, cfg)
        assert gx[MU] == pytest.approx(-fxx, abs=1e-8)


def test_fsigma_prime_odd_at_symmetric_point(cfg):
    p = StableParams(0, 1, 1.5, 0.0)
    for x in (0.8, 2.2):
        a = pdf_grad_x(x, p, cfg)[SIGMA]
        b = pdf_grad_x(-x, p, cfg)[SIGMA]
        assert a == pytest.approx(-b, abs=1e-9)


# --------------------------------------------------------------- Hessians

@pytest.mark.parametrize("p", [StableParams(0, 1, 1.1, 0.2),
                               StableParams(0, 1, 1.0, 0.5)])
def test_pdf_hess_matches_fd_of_grad(p):
    hess = pdf_hess(0.7, p, TIGHT)
    for (i, j), v in hess.items():
        h = 1e-5 * max(1.0, abs(p.as_array()[int(j)]))
        up, dn = p.as_array(), p.as_array()
        up[int(j)] += h
        dn[int(j)] -= h
        fd = (pdf_grad(0.7, StableParams.from_array(up), TIGHT)[i]
              - pdf_grad(0.7, StableParams.from_array(dn), TIGHT)[i]) / (2 * h)
        assert v == pytest.approx(fd, rel=1e-4, abs=1e-6), (i, j)


def test_f_mumu_equals_fxx(cfg):
    p = StableParams(0, 1, 1.3, 0.3)
    for x in (0.0, 1.2, -3.0):
        hess = pdf_hess(x, p, cfg)
        _, fxx = pdf_x_deriv(x, p, cfg)
        assert hess[(MU, MU)] == pytest.approx(fxx, abs=1e-8)


# ---------------------------------------------------------- normalization

@pytest.mark.parametrize("a", [0.5, 1.0, 1.3, 1.7])
@pytest.mark.parametrize("b", [0.0, 0.5, -0.5])
def test_normalization(a, b, cfg):
    p = StableParams(0, 1, a, b)

    def rows(xs):
        return pdf_many(xs, p, cfg, names=("f",))["f"][None, :]

    vals, errs = integrate_real_line(rows, 2e-7)
    assert vals[0] == pytest.approx(1.0, abs=1e-6), (a, b, vals[0], errs[0])


# -------------------------------------------------- continuity at alpha=1

def test_joint_continuity_near_alpha_one(cfg):
    h = 1e-5
    for b in (0.3, 0.7):
        for x in (-2.0, 0.1, 5.0):
            f0 = pdf(x, StableParams(0, 1, 1.0, b), cfg)
            for a in (1.0 - h, 1.0 + h):
                fa = pdf(x, StableParams(0, 1, a, b), cfg)
                assert abs(fa - f0) < 50.0 * h, (b, x, a)


# ------------------------------------------------------------ tail slopes

def test_tail_slope_examples():
    cfg_tail = QuadratureConfig(abs_tol=1e-15, rel_tol=1e-8)
    p = StableParams(0, 1, 1.5, 0.3)
    s_f = tail_slope(p, "f", 50.0, 5000.0, cfg_tail)
    assert s_f == pytest.approx(-(1 + 1.5), abs=0.05)
    s_mu = tail_slope(p, "f_mu", 50.0, 5000.0, cfg_tail)
    assert s_mu == pytest.approx(-(2 + 1.5), abs=0.05)
    # Cauchy density tail is exactly -2
    s_c = tail_slope(StableParams(0, 1, 1.0, 0.0), "f", 50.0, 5000.0, cfg_tail)
    assert s_c == pytest.approx(-2.0, abs=0.02)


def test_tail_slope_log_factor_channel():
    # f_alpha carries a growing log|x| factor, which lifts the measured
    # log-log slope above -(1+alpha) by roughly 1/log x on this grid
    cfg_tail = QuadratureConfig(abs_tol=1e-15, rel_tol=1e-8)
    p = StableParams(0, 1, 1.5, 0.3)
    s = tail_slope(p, "f_alpha", 50.0, 5000.0, cfg_tail)
    assert -(1 + 1.5) - 0.02 <= s <= -(1 + 1.5) + 0.18


def test_tail_slope_second_derivatives_alpha1():
    # at alpha=1 the sigma-sigma and beta-beta density Hessians decay like
    # |x|^-3 log|x|; the unknown constants leave only a wide-band check
    cfg_tail = QuadratureConfig(abs_tol=1e-15, rel_tol=1e-7)
    p = StableParams(0, 1, 1.0, 0.3)
    for ch in ("h_sigma_sigma", "h_beta_beta"):
        s = tail_slope(p, ch, 50.0, 5000.0, cfg_tail)
        assert -3.4 <= s <= -2.6, (ch, s)


def test_tail_slope_validation(cauchy, cfg):
    with pytest.raises(ValueError):
        tail_slope(cauchy, "f", -1.0, 10.0, cfg)


# ----------------------------------------------------------------- errors

def test_negative_scale_rejected(cfg):
    with pytest.raises(ValueError):
        pdf(0.0, StableParams(0, -1, 1.5, 0.0), cfg)


def test_interior_required_for_grads(cfg):
    with pytest.raises(ValueError):
        pdf_grad(0.0, StableParams(0, 1, 2.0, 0.0), cfg)
