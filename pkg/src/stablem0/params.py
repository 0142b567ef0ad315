"""Parameter vector for the continuous (M0) stable family, domain checks,
and conversions to Zolotarev's (B) parameterization.

The parameter order is frozen as theta = (mu, sigma, alpha, beta): location,
scale, stability index, skewness.  The full space Theta_M is
sigma > 0, 0 < alpha <= 2, -1 <= beta <= 1; its interior Theta_M_int
additionally requires alpha < 2 and |beta| < 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import NamedTuple

import numpy as np


class ParamIndex(IntEnum):
    """Index of a coordinate in the theta vector (mu, sigma, alpha, beta)."""

    MU = 0
    SIGMA = 1
    ALPHA = 2
    BETA = 3


PARAM_NAMES = ("mu", "sigma", "alpha", "beta")


@dataclass(frozen=True)
class StableParams:
    """A point theta = (mu, sigma, alpha, beta) of the M0 family."""

    mu: float
    sigma: float
    alpha: float
    beta: float

    @property
    def is_valid(self) -> bool:
        return (
            math.isfinite(self.mu)
            and math.isfinite(self.sigma)
            and self.sigma > 0.0
            and 0.0 < self.alpha <= 2.0
            and -1.0 <= self.beta <= 1.0
        )

    @property
    def is_interior(self) -> bool:
        return self.is_valid and self.alpha < 2.0 and -1.0 < self.beta < 1.0

    def as_array(self) -> np.ndarray:
        return np.array([self.mu, self.sigma, self.alpha, self.beta], dtype=float)

    @staticmethod
    def from_array(theta) -> "StableParams":
        mu, sigma, alpha, beta = (float(v) for v in theta)
        return StableParams(mu, sigma, alpha, beta)

    def require_valid(self) -> "StableParams":
        if not self.is_valid:
            raise ValueError(f"invalid stable parameters: {self}")
        return self

    def require_interior(self) -> "StableParams":
        if not self.is_interior:
            raise ValueError(f"parameters not in the open parameter space: {self}")
        return self


class Validity(NamedTuple):
    valid: bool
    interior: bool


def validate(p: StableParams) -> Validity:
    """Check p against the full parameter space; also report interiority."""
    return Validity(p.is_valid, p.is_interior)


def tan_half_pi(alpha: float) -> float:
    """tan(pi*alpha/2), computed as -1/tan(pi*(alpha-1)/2) near the alpha=1
    pole where the direct tangent loses digits."""
    h = alpha - 1.0
    if abs(h) < 0.25:
        return -1.0 / math.tan(0.5 * math.pi * h)
    return math.tan(0.5 * math.pi * alpha)


def _require_alpha_ne_one(alpha: float) -> None:
    if alpha == 1.0:
        raise ValueError("the (B)-form conversion is undefined at alpha=1")


def k_alpha(alpha: float) -> float:
    """Exponent adjustment K(alpha) = alpha - 1 + sign(1 - alpha) of the (B)
    form; equals alpha for alpha<1 and alpha-2 for alpha>1."""
    _require_alpha_ne_one(alpha)
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"alpha={alpha} outside (0, 2]")
    return alpha - 1.0 + math.copysign(1.0, 1.0 - alpha)


def beta_to_betaB(alpha: float, beta: float) -> float:
    """Map M0 skewness beta to the (B)-form skewness
    beta_B = arctan(beta*tan(pi*alpha/2)) / (pi*K(alpha)/2)."""
    _require_alpha_ne_one(alpha)
    return math.atan(beta * tan_half_pi(alpha)) / (0.5 * math.pi * k_alpha(alpha))


def scale_gamma(alpha: float, beta: float) -> float:
    """Scale factor gamma_{alpha,beta} = (1 + beta^2 tan^2(pi*alpha/2))^(-1/(2*alpha))
    of the M0 -> (B) change of variables; equals 1 at beta=0."""
    _require_alpha_ne_one(alpha)
    if beta == 0.0:
        return 1.0
    t = beta * tan_half_pi(alpha)
    # log1p keeps precision when beta*tan is tiny
    return math.exp(-math.log1p(t * t) / (2.0 * alpha))


def x_star(x: float, p: StableParams) -> float:
    """Argument transform x* = (gamma/sigma) * (x - mu + sigma*beta*tan(pi*alpha/2))
    carrying an M0 density evaluation point to the standard (B) density."""
    _require_alpha_ne_one(p.alpha)
    g = scale_gamma(p.alpha, p.beta)
    return (g / p.sigma) * (x - p.mu + p.sigma * p.beta * tan_half_pi(p.alpha))
