import math

import numpy as np
import pytest

from stablem0 import chf as cf
from stablem0.params import ParamIndex, StableParams

MU, SIGMA, ALPHA, BETA = ParamIndex


def grad_vec(g):
    return np.array([g.mu, g.sigma, g.alpha, g.beta])


# ---------------------------------------------------------------- cumulant

def test_cumulant_cauchy():
    p = StableParams(0, 1, 1.0, 0.0)
    for t in (-3.0, -0.5, 0.2, 2.0):
        assert cf.cumulant(t, p) == pytest.approx(-abs(t), abs=1e-15)


def test_cumulant_alpha1_with_location():
    assert cf.cumulant(2.0, StableParams(3, 1, 1.0, 0.0)) == pytest.approx(-2 + 6j, abs=1e-14)


def test_cumulant_unit_frequency_real():
    # at |sigma t| = 1 the skew factor vanishes, psi = -1 exactly
    assert cf.cumulant(1.0, StableParams(0, 1, 1.5, 0.5)) == pytest.approx(-1.0 + 0j, abs=1e-14)


def test_cumulant_zero_and_modulus():
    for p in (StableParams(0.3, 2.0, 1.2, 0.5), StableParams(0, 1, 0.6, -0.9)):
        assert cf.cumulant(0.0, p) == 0.0
        for t in (0.4, 1.7, 9.0):
            assert cf.cumulant(t, p).real == pytest.approx(-abs(p.sigma * t) ** p.alpha, rel=1e-13)


def test_chf_examples():
    assert cf.chf(0.0, StableParams(1, 2, 0.7, 0.9)) == 1.0
    assert cf.chf(1.0, StableParams(0, 1, 2.0, 0.0)) == pytest.approx(math.exp(-1), rel=1e-13)
    assert cf.chf(-2.5, StableParams(0, 1, 1.0, 0.0)) == pytest.approx(math.exp(-2.5), rel=1e-13)


@pytest.mark.parametrize("p", [
    StableParams(0.0, 1.0, 1.0, 0.0),
    StableParams(-1.0, 0.5, 1.3, 0.6),
    StableParams(2.0, 3.0, 0.7, -0.8),
    StableParams(0.0, 1.0, 1.0, 0.4),
    StableParams(0.0, 1.0, 1.999, 0.9),
])
def test_hermitian_symmetry(p):
    for t in (0.3, 1.0, 4.2):
        assert abs(cf.cumulant(-t, p) - cf.cumulant(t, p).conjugate()) < 1e-13
        gp = grad_vec(cf.cumulant_grad(t, p))
        gm = grad_vec(cf.cumulant_grad(-t, p))
        assert np.max(np.abs(gm - gp.conjugate())) < 1e-13
        hp = cf.cumulant_hess(t, p).matrix
        hm = cf.cumulant_hess(-t, p).matrix
        assert np.max(np.abs(hm - hp.conjugate())) < 1e-13


# ------------------------------------------------------------- derivatives

def test_grad_mu_exact():
    for t in (2.0, -0.7, 0.0):
        for p in (StableParams(0, 1, 1.4, 0.2), StableParams(1, 2, 1.0, 0.9)):
            assert cf.cumulant_grad(t, p).mu == 1j * t


def test_grad_closed_values():
    # psi_beta vanishes at |t| = 1 for alpha = 1 (log 1 = 0)
    g = cf.cumulant_grad(1.0, StableParams(0, 1, 1.0, 0.7))
    assert abs(g.beta) < 1e-15
    # psi_sigma = -alpha |t|^alpha at beta = 0, t = 1
    g = cf.cumulant_grad(1.0, StableParams(0, 1, 1.5, 0.0))
    assert g.sigma == pytest.approx(-1.5, abs=1e-14)
    # psi_alpha at t = e, alpha = 1, beta = 0: -|t| log|t| = -e
    g = cf.cumulant_grad(math.e, StableParams(0, 1, 1.0, 0.0))
    assert g.alpha == pytest.approx(-math.e, abs=1e-13)
    # psi_beta for alpha = 1: -i (2/pi) t log|t|
    g = cf.cumulant_grad(2.0, StableParams(0, 1, 1.0, 0.5))
    assert g.beta == pytest.approx(-1j * (2 / math.pi) * 2.0 * math.log(2.0), abs=1e-14)


def test_hess_exact_zeros_bit_exact():
    for p in (StableParams(0, 1, 1.2, 0.5), StableParams(0.4, 2.2, 1.0, -0.7),
              StableParams(0, 1, 0.5, 0.99)):
        for t in (0.0, 0.8, -13.0):
            h = cf.cumulant_hess(t, p).matrix
            assert h[0, 0] == 0.0 and h[0, 1] == 0.0 and h[0, 2] == 0.0
            assert h[0, 3] == 0.0 and h[3, 3] == 0.0
            assert np.array_equal(h, h.T)


def test_hess_alpha1_closed_forms():
    # sigma-sigma: -i (2 beta / pi) t
    h = cf.cumulant_hess(1.0, StableParams(0, 1, 1.0, 0.5))
    assert h[SIGMA, SIGMA] == pytest.approx(-1j / math.pi, abs=1e-14)
    # sigma-beta at alpha=1 is -i(2/pi) t (1 + log|t|); the 2/pi constant is
    # forced by differentiating the alpha=1 cumulant branch directly
    assert h[SIGMA, BETA] == pytest.approx(-2j / math.pi, abs=1e-14)
    h2 = cf.cumulant_hess(math.e, StableParams(0, 1, 1.0, 0.0))
    assert h2[SIGMA, BETA] == pytest.approx(-1j * (2 / math.pi) * math.e * 2.0, abs=1e-13)
    # alpha-beta: -i (t/pi) log^2 t
    assert h2[ALPHA, BETA] == pytest.approx(-1j * math.e / math.pi, abs=1e-13)
    # alpha-alpha keeps its real part -|t| log^2 |t| in the alpha -> 1 limit
    assert h2[ALPHA, ALPHA].real == pytest.approx(-math.e, abs=1e-12)


# --------------------------------------------------- alpha = 1 continuity

ALPHA_STEPS = (1e-3, 1e-4, 1e-5)


@pytest.mark.parametrize("beta", [-0.8, -0.3, 0.3, 0.8])
def test_alpha_continuity_of_grad_and_hess(beta):
    ts = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)
    for t in ts:
        g0 = grad_vec(cf.cumulant_grad(t, StableParams(0, 1, 1.0, beta)))
        h0 = cf.cumulant_hess(t, StableParams(0, 1, 1.0, beta)).matrix
        for h in ALPHA_STEPS:
            for a in (1.0 - h, 1.0 + h):
                g = grad_vec(cf.cumulant_grad(t, StableParams(0, 1, a, beta)))
                hm = cf.cumulant_hess(t, StableParams(0, 1, a, beta)).matrix
                c_g = np.max(np.abs(g - g0)) / h
                c_h = np.max(np.abs(hm - h0)) / h
                # difference shrinks linearly in |alpha - 1| with a stable constant
                assert c_g < 60.0, (t, a, c_g)
                assert c_h < 400.0, (t, a, c_h)


def test_series_vs_closed_form_seam():
    # the z*cot(z) / phi' helpers switch between series and closed forms
    # at |z| = 0.35 resp. 1.0; just inside the series region the series must
    # match the closed form to near roundoff
    from stablem0.chf import _dzcot, _phi2, _phi3, _zcot, _d2zcot
    for z in (0.3499, -0.3499, 0.2, -0.11):
        s = math.sin(z)
        c = math.cos(z)
        assert _zcot(z) == pytest.approx(z * c / s, abs=1e-14)
        assert _dzcot(z) == pytest.approx(c / s - z / s ** 2, abs=1e-13)
        assert _d2zcot(z) == pytest.approx(-2 * (1 - z * c / s) / s ** 2, abs=1e-13)
    for z in (0.999, -0.999, 0.5, -0.25):
        za = np.array([z])
        exact2 = (math.exp(z) * (z - 1) + 1) / z ** 2
        exact3 = (math.exp(z) * (z * z - 2 * z + 2) - 2) / z ** 3
        assert _phi2(za)[0] == pytest.approx(exact2, rel=1e-12)
        assert _phi3(za)[0] == pytest.approx(exact3, rel=1e-11)


# ----------------------------------------------------- FD cross-validation

FD_POINTS = [StableParams(0.0, 1.0, 1.35, 0.4),
             StableParams(0.5, 2.0, 0.8, -0.6),
             StableParams(0.0, 1.0, 1.0, 0.5)]


@pytest.mark.parametrize("p", FD_POINTS)
def test_grad_matches_fd_of_cumulant(p):
    for t in (0.3, 1.1, 4.0):
        g = grad_vec(cf.cumulant_grad(t, p))
        for i in range(4):
            h = 1e-6 * max(1.0, abs(p.as_array()[i]))
            up = p.as_array()
            dn = p.as_array()
            up[i] += h
            dn[i] -= h
            fd = (cf.cumulant(t, StableParams.from_array(up))
                  - cf.cumulant(t, StableParams.from_array(dn))) / (2 * h)
            scale = max(1.0, abs(g[i]))
            assert abs(g[i] - fd) / scale < 1e-5, (i, t, g[i], fd)


@pytest.mark.parametrize("p", FD_POINTS)
def test_hess_matches_fd_of_grad(p):
    for t in (0.7, 2.3):
        hm = cf.cumulant_hess(t, p).matrix
        for i in range(4):
            for j in range(4):
                h = 1e-6 * max(1.0, abs(p.as_array()[j]))
                up = p.as_array()
                dn = p.as_array()
                up[j] += h
                dn[j] -= h
                fd = (grad_vec(cf.cumulant_grad(t, StableParams.from_array(up)))[i]
                      - grad_vec(cf.cumulant_grad(t, StableParams.from_array(dn)))[i]) / (2 * h)
                scale = max(1.0, abs(hm[i, j]))
                assert abs(hm[i, j] - fd) / scale < 1e-5, (i, j, t)


# ------------------------------------------------------------ chf algebra

def test_chf_grad_identity():
    p = StableParams(0, 1, 1.0, 0.0)
    g = cf.chf_grad(1.0, p)
    assert g.mu == pytest.approx(1j * math.exp(-1), rel=1e-13)
    p2 = StableParams(0.7, 1.8, 1.4, -0.5)
    assert abs(cf.chf_grad(0.0, p2).sigma) == 0.0
    for t in (0.9, -2.2):
        gp = grad_vec(cf.chf_grad(t, p2))
        gm = grad_vec(cf.chf_grad(-t, p2))
        assert np.max(np.abs(gm - gp.conjugate())) < 1e-13


def test_chf_hess_identity():
    p = StableParams(0, 1, 1.0, 0.0)
    hm = cf.chf_hess(1.0, p).matrix
    assert hm[0, 0] == pytest.approx(-math.exp(-1), rel=1e-13)
    p2 = StableParams(0.2, 1.5, 1.6, 0.3)
    for t in (0.5, 3.0):
        m = cf.chf_hess(t, p2).matrix
        assert np.array_equal(m, m.T)
        # phi_mumu = -t^2 phi
        assert m[0, 0] == pytest.approx(-t * t * cf.chf(t, p2), rel=1e-12)


# ------------------------------------------------------------- t-derivative

@pytest.mark.parametrize("p", FD_POINTS + [StableParams(0, 1, 1.0, 0.0)])
def test_tderiv_matches_fd(p):
    for t in (0.1, 0.5, 1.0, 2.0, 5.0):
        d = grad_vec(cf.chf_grad_tderiv(t, p))
        h = 1e-6
        fd = (grad_vec(cf.chf_grad(t + h, p)) - grad_vec(cf.chf_grad(t - h, p))) / (2 * h)
        for i in range(4):
            scale = max(1e-3, abs(d[i]))
            assert abs(d[i] - fd[i]) / scale < 1e-6, (i, t, d[i], fd[i])


def test_tderiv_mu_at_cauchy():
    # d/dt [it e^{-|t|}] = (i - it sign t) e^{-|t|} -> 0 at t = 1
    d = cf.chf_grad_tderiv(1.0, StableParams(0, 1, 1.0, 0.0))
    assert abs(d.mu) < 1e-14


def test_tderiv_flagged_at_zero():
    d = cf.chf_grad_tderiv(0.0, StableParams(0, 1, 1.0, 0.5))
    assert d.mu == 1j
    assert math.isnan(d.sigma.real) and math.isnan(d.alpha.real) and math.isnan(d.beta.real)
