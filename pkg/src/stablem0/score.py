"""Log-likelihood, score vector, and score derivatives of the M0 density.

Everything is an exact algebraic combination of one DensityBundle:
l = log f, l_i = f_i/f, l_i' = (f_i' f - f_i f')/f^2,
l_ij = (f_ij f - f_i f_j)/f^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from . import density
from .density import ALL_CHANNELS, bundle
from .params import ParamIndex, StableParams
from .quadrature import DEFAULT_CONFIG, QuadratureConfig

DENSITY_FLOOR = 1e-300


class DensityFloorError(RuntimeError):
    """f(x; theta) underflowed the log domain; not a quadrature failure."""


@dataclass
class ScoreBundle:
    """Log-density value and its first/second derivatives at one (x, theta)."""

    loglik: float
    score: Dict[ParamIndex, float]
    score_x: Dict[ParamIndex, float]
    score_jac: Dict[Tuple[ParamIndex, ParamIndex], float]

    def score_vector(self) -> np.ndarray:
        return np.array([self.score[i] for i in ParamIndex])

    def jac_matrix(self) -> np.ndarray:
        m = np.zeros((4, 4))
        for (i, j), v in self.score_jac.items():
            m[int(i), int(j)] = m[int(j), int(i)] = v
        return m


def score_at(x: float, p: StableParams,
             cfg: QuadratureConfig = DEFAULT_CONFIG) -> ScoreBundle:
    """Full score bundle at x; one shared quadrature pass for all pieces."""
    p.require_interior()
    b = bundle(x, p, cfg, names=ALL_CHANNELS)
    return from_bundle(b)


def from_bundle(b: density.DensityBundle) -> ScoreBundle:
    f = b.f
    if not (f > DENSITY_FLOOR):
        raise DensityFloorError(f"density {f} below the log-domain floor")
    inv = 1.0 / f
    inv2 = inv * inv
    score = {i: b.grad[i] * inv for i in b.grad}
    score_x = {i: (b.grad_x[i] * f - b.grad[i] * b.f_x) * inv2 for i in b.grad_x}
    jac = {k: (b.hess[k] * f - b.grad[k[0]] * b.grad[k[1]]) * inv2 for k in b.hess}
    return ScoreBundle(loglik=math.log(f), score=score, score_x=score_x,
                       score_jac=jac)


_PROBE_STATS = ("mu", "sigma", "alpha", "alpha_alpha")


def score_tail_probe(p: StableParams, which: str, x_grid,
                     cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Growth probe for the score tail bounds.

    which selects the normalized statistic that the tail theory says is
    bounded: "mu" -> l_mu(x)*x, "sigma" -> l_sigma(x), "alpha" ->
    l_alpha(x)/log x, "alpha_alpha" -> l_alpha_alpha(x)/log^2 x.
    Returns the least-squares slope of log|stat| against log x; a bounded
    statistic shows a slope near zero.
    """
    if which not in _PROBE_STATS:
        raise ValueError(f"unknown probe {which!r}; use one of {_PROBE_STATS}")
    xs = np.asarray(x_grid, dtype=float)
    if np.any(xs <= 1.0):
        raise ValueError("probe grid must satisfy x > 1")
    stats = []
    names = ("f", "f_mu", "f_sigma", "f_alpha", "h_alpha_alpha")
    for x in xs:
        vals = {n: density._single_channel(float(x), p, cfg, n) for n in names}
        f = vals["f"]
        if not (f > DENSITY_FLOOR):
            raise DensityFloorError(f"density underflow at probe point {x}")
        lx = math.log(x)
        if which == "mu":
            stats.append(vals["f_mu"] / f * x)
        elif which == "sigma":
            stats.append(vals["f_sigma"] / f)
        elif which == "alpha":
            stats.append(vals["f_alpha"] / f / lx)
        else:
            l_aa = (vals["h_alpha_alpha"] * f - vals["f_alpha"] ** 2) / f ** 2
            stats.append(l_aa / lx ** 2)
    mags = np.abs(np.array(stats))
    if np.any(mags < 1e-290):
        raise DensityFloorError("probe statistic underflowed")
    slope = np.polyfit(np.log(xs), np.log(mags), 1)[0]
    return float(slope)
