"""Characteristic function of the M0 stable family, its cumulant
psi = log(chf), and all first/second parameter derivatives, evaluated so
that alpha = 1 is an ordinary point of a single code path.

The alpha != 1 derivative formulas contain products like
tan(pi*alpha/2) * (|t|^(alpha-1) - 1) that are individually singular at
alpha = 1 but have finite limits.  Every such product is factored here into

    [z*cot(z) and its z-derivatives](z = pi*(alpha-1)/2)
  x [(e^z - 1)/z and its z-derivatives](z = (alpha-1)*log|t|),

all well-conditioned scalar/entire functions, so no branch switch or
truncated two-variable series is needed and alpha = 1 evaluates exactly.

All formulas live at the standard point (mu, sigma) = (0, 1) as functions
of u; general parameters enter through u = sigma*t, an additive i*mu*t in
the cumulant, and a factor sigma^(-1) per sigma- or mu-derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .params import ParamIndex, StableParams

_TWO_OVER_PI = 2.0 / math.pi

# z*cot(z) and derivatives: series on |z| < 0.35, closed form elsewhere.
_ZCOT_SER = np.array(
    [1.0, 0.0, -1.0 / 3.0, 0.0, -1.0 / 45.0, 0.0, -2.0 / 945.0, 0.0,
     -1.0 / 4725.0, 0.0, -2.0 / 93555.0, 0.0, -1382.0 / 638512875.0, 0.0,
     -4.0 / 18243225.0, 0.0, -3617.0 / 162820783125.0, 0.0,
     -87734.0 / 38979295480125.0])
_DZCOT_SER = np.polynomial.polynomial.polyder(_ZCOT_SER)
_D2ZCOT_SER = np.polynomial.polynomial.polyder(_ZCOT_SER, 2)

# (e^z - 1)/z derivatives: phi2 = sum (m+1) z^m / (m+2)!, phi3 = sum (m+2)(m+1) z^m / (m+3)!
_PHI2_SER = np.array([(m + 1) / math.factorial(m + 2) for m in range(20)])
_PHI3_SER = np.array([(m + 2) * (m + 1) / math.factorial(m + 3) for m in range(20)])


def _polyval(coefs: np.ndarray, z):
    return np.polynomial.polynomial.polyval(z, coefs)


def _zcot(z: float) -> float:
    if abs(z) < 0.35:
        return float(_polyval(_ZCOT_SER, z))
    return z * math.cos(z) / math.sin(z)


def _dzcot(z: float) -> float:
    if abs(z) < 0.35:
        return float(_polyval(_DZCOT_SER, z))
    s = math.sin(z)
    return math.cos(z) / s - z / (s * s)


def _d2zcot(z: float) -> float:
    if abs(z) < 0.35:
        return float(_polyval(_D2ZCOT_SER, z))
    s = math.sin(z)
    return -2.0 * (1.0 - z * math.cos(z) / s) / (s * s)


def _phi1(z: np.ndarray) -> np.ndarray:
    """(e^z - 1)/z, continuous value 1 at z = 0."""
    z = np.asarray(z, dtype=float)
    out = np.ones_like(z)
    nz = z != 0.0
    out[nz] = np.expm1(z[nz]) / z[nz]
    return out


def _phi2(z: np.ndarray) -> np.ndarray:
    """d/dz (e^z - 1)/z = (e^z (z - 1) + 1) / z^2, series near 0."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1.0
    out = np.empty_like(z)
    out[small] = _polyval(_PHI2_SER, z[small])
    zb = z[~small]
    out[~small] = (np.exp(zb) * (zb - 1.0) + 1.0) / (zb * zb)
    return out


def _phi3(z: np.ndarray) -> np.ndarray:
    """d2/dz2 (e^z - 1)/z = (e^z (z^2 - 2z + 2) - 2) / z^3, series near 0."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1.0
    out = np.empty_like(z)
    out[small] = _polyval(_PHI3_SER, z[small])
    zb = z[~small]
    out[~small] = (np.exp(zb) * (zb * zb - 2.0 * zb + 2.0) - 2.0) / (zb ** 3)
    return out


class StdCumulant:
    """Cumulant of the standard (mu=0, sigma=1) M0 law and its parameter
    derivatives, vectorized over the transform variable u.

    Attributes are numpy arrays over u.  Entries at u = 0 carry the
    (zero) limits of every formula.  `s`, `a`, `b` are the sigma-, alpha-,
    beta-derivatives; `d*` prefixes are u-derivatives, defined for u != 0.
    """

    __slots__ = ("u", "alpha", "beta", "psi", "mu", "s", "a", "b",
                 "ss", "sa", "sb", "aa", "ab",
                 "dpsi", "dmu", "ds", "da", "db", "C1")

    def __init__(self, u, alpha: float, beta: float,
                 hess: bool = False, tderiv: bool = False):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        self.u, self.alpha, self.beta = u, alpha, beta
        h = alpha - 1.0
        zcot = _zcot(0.5 * math.pi * h)
        dzcot = _dzcot(0.5 * math.pi * h)

        au = np.abs(u)
        nz = au > 0.0
        L = np.zeros_like(u)
        L[nz] = np.log(au[nz])
        ehl = np.exp(h * L)          # |u|^(alpha-1), exactly 1 at u=0 slot (unused there)
        ua = au * ehl                # |u|^alpha
        zl = h * L
        p1 = _phi1(zl)
        p2 = _phi2(zl)

        C1 = -_TWO_OVER_PI * zcot * (L * p1 + ehl)
        C2 = -_TWO_OVER_PI * zcot * L * p1
        C3 = -_TWO_OVER_PI * L * (0.5 * math.pi * dzcot * p1 + L * zcot * p2)
        self.C1 = C1

        iu = 1j * u
        self.psi = -ua + 1j * (beta * u) * C2
        self.mu = iu
        self.s = -alpha * ua + 1j * (beta * u) * C1
        self.a = -ua * L + 1j * (beta * u) * C3
        self.b = iu * C2

        if hess:
            d2zcot = _d2zcot(0.5 * math.pi * h)
            p3 = _phi3(zl)
            C5 = -_TWO_OVER_PI * (0.5 * math.pi * dzcot * (L * p1 + ehl)
                                  + zcot * (L * L * p2 + L * ehl))
            C8 = -_TWO_OVER_PI * L * (0.25 * math.pi ** 2 * d2zcot * p1
                                      + math.pi * dzcot * L * p2
                                      + zcot * L * L * p3)
            self.ss = -alpha * h * ua - 1j * (beta * _TWO_OVER_PI * alpha * zcot) * (u * ehl)
            self.sa = -ua * (1.0 + alpha * L) + 1j * (beta * u) * C5
            self.sb = iu * C1
            self.aa = -ua * L * L + 1j * (beta * u) * C8
            self.ab = iu * C3

        if tderiv:
            su = np.sign(u)
            dC1 = -_TWO_OVER_PI * alpha * zcot * ehl        # u * dC1/du = dC1/dL
            dC3 = -_TWO_OVER_PI * ehl * (0.5 * math.pi * dzcot + L * zcot)
            self.dpsi = -alpha * ehl * su + 1j * beta * C1
            self.dmu = np.full_like(u, 1j, dtype=complex)
            self.ds = -alpha * alpha * ehl * su + 1j * beta * (C1 + dC1)
            self.da = -ehl * su * (alpha * L + 1.0) + 1j * beta * (C3 + dC3)
            self.db = 1j * C1

        # zero-frequency limits: every psi-derivative vanishes at u = 0
        if not np.all(nz):
            z = ~nz
            for name in ("psi", "s", "a", "b"):
                getattr(self, name)[z] = 0.0
            if hess:
                for name in ("ss", "sa", "sb", "aa", "ab"):
                    getattr(self, name)[z] = 0.0


def std_chf(u, alpha: float, beta: float) -> np.ndarray:
    """chf of the standard M0 law: exp(psi_std(u)), with underflow to 0."""
    psi = StdCumulant(u, alpha, beta).psi
    alive = psi.real > -745.0
    out = np.zeros_like(psi)
    out[alive] = np.exp(psi[alive])
    return out


@dataclass(frozen=True)
class CumulantGradient:
    """The four first parameter derivatives of psi at one (t, theta)."""

    mu: complex
    sigma: complex
    alpha: complex
    beta: complex

    def __getitem__(self, i: ParamIndex) -> complex:
        return (self.mu, self.sigma, self.alpha, self.beta)[int(i)]

    @property
    def by_param(self) -> Dict[ParamIndex, complex]:
        return {i: self[i] for i in ParamIndex}


@dataclass(frozen=True)
class CumulantHessian:
    """Symmetric 4x4 matrix of second parameter derivatives of psi."""

    matrix: np.ndarray

    def __getitem__(self, ij: Tuple[ParamIndex, ParamIndex]) -> complex:
        i, j = ij
        return complex(self.matrix[int(i), int(j)])

    @property
    def by_pair(self) -> Dict[Tuple[ParamIndex, ParamIndex], complex]:
        return {(i, j): self[i, j] for i in ParamIndex for j in ParamIndex if i <= j}


def cumulant(t: float, p: StableParams) -> complex:
    """psi(t) = log chf(t) at theta; Re psi = -|sigma t|^alpha."""
    p.require_valid()
    sc = StdCumulant(np.array([p.sigma * t]), p.alpha, p.beta)
    return complex(sc.psi[0] + 1j * p.mu * t)


def chf(t: float, p: StableParams) -> complex:
    """Characteristic function at theta."""
    psi = cumulant(t, p)
    if psi.real < -745.0:
        return 0.0 + 0.0j
    return complex(np.exp(psi))


def cumulant_grad(t: float, p: StableParams) -> CumulantGradient:
    """First derivatives psi_theta_i(t); psi_mu = i*t exactly."""
    p.require_valid()
    sc = StdCumulant(np.array([p.sigma * t]), p.alpha, p.beta)
    return CumulantGradient(
        mu=1j * t,
        sigma=complex(sc.s[0]) / p.sigma,
        alpha=complex(sc.a[0]),
        beta=complex(sc.b[0]),
    )


def cumulant_hess(t: float, p: StableParams) -> CumulantHessian:
    """Second derivatives psi_theta_i_theta_j(t); the mu row and the
    (beta, beta) entry are identically zero."""
    p.require_valid()
    sc = StdCumulant(np.array([p.sigma * t]), p.alpha, p.beta, hess=True)
    m = np.zeros((4, 4), dtype=complex)
    s2 = p.sigma * p.sigma
    m[1, 1] = sc.ss[0] / s2
    m[1, 2] = m[2, 1] = sc.sa[0] / p.sigma
    m[1, 3] = m[3, 1] = sc.sb[0] / p.sigma
    m[2, 2] = sc.aa[0]
    m[2, 3] = m[3, 2] = sc.ab[0]
    return CumulantHessian(m)


def chf_grad(t: float, p: StableParams) -> CumulantGradient:
    """phi_theta_i(t) = psi_theta_i(t) * phi(t)."""
    g = cumulant_grad(t, p)
    f = chf(t, p)
    return CumulantGradient(g.mu * f, g.sigma * f, g.alpha * f, g.beta * f)


def chf_hess(t: float, p: StableParams) -> CumulantHessian:
    """phi_theta_i_theta_j = (psi_theta_i_theta_j + psi_theta_i psi_theta_j) phi."""
    g = cumulant_grad(t, p)
    hm = cumulant_hess(t, p).matrix.copy()
    f = chf(t, p)
    gv = np.array([g.mu, g.sigma, g.alpha, g.beta])
    return CumulantHessian((hm + np.outer(gv, gv)) * f)


def chf_grad_tderiv(t: float, p: StableParams) -> CumulantGradient:
    """d/dt of phi_theta_i.  At t = 0 the sigma/alpha/beta components are
    singular (log/power terms); they are flagged as NaN and the mu
    component keeps its finite value i*phi(0) = i."""
    p.require_valid()
    if t == 0.0:
        return CumulantGradient(1j, complex(np.nan), complex(np.nan), complex(np.nan))
    u = np.array([p.sigma * t])
    sc = StdCumulant(u, p.alpha, p.beta, tderiv=True)
    f = chf(t, p)
    dpsi_t = p.sigma * complex(sc.dpsi[0]) + 1j * p.mu    # d psi/dt at theta
    gmu = 1j * t
    gs = complex(sc.s[0]) / p.sigma
    ga = complex(sc.a[0])
    gb = complex(sc.b[0])
    return CumulantGradient(
        mu=(1j + gmu * dpsi_t) * f,
        sigma=(complex(sc.ds[0]) + gs * dpsi_t) * f,
        alpha=(p.sigma * complex(sc.da[0]) + ga * dpsi_t) * f,
        beta=(p.sigma * complex(sc.db[0]) + gb * dpsi_t) * f,
    )
