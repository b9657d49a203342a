"""Adaptive pulling: deviation vector, saturation, base gain, lateral stiffness."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..geometry import frame_express


@dataclass(frozen=True)
class PullingParams:
    d_stop: float = 0.5
    eta: float = 1000.0
    zeta_l: float = 0.0
    gamma: float = 0.15
    kappa: float = 40.0

    def __post_init__(self):
        if not self.eta > self.zeta_l >= 0.0:
            raise ValueError("need eta > zeta_l >= 0")
        if self.gamma <= 0.0 or self.kappa <= 0.0:
            raise ValueError("gamma and kappa must be positive")
        if not 0.0 < self.d_stop <= 1.0:
            raise ValueError("d_stop must lie in (0, 1]")


@dataclass(frozen=True)
class PullingState:
    p: np.ndarray
    p_sat: np.ndarray
    alpha_B: float
    y_adaptive: float
    k_y_hat: float


def pulling_vector(X_H_des, X_H) -> np.ndarray:
    """Negated offset of the actual human frame seen from the desired one.

    x points along the motion, y laterally; a positive x means the human
    lags behind and needs a forward pull.
    """
    return -frame_express(X_H, X_H_des)


def saturate(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    n = float(np.hypot(p[0], p[1]))
    return p / n if n > 1.0 else p.copy()


def base_gain(p_sat_x: float, d_stop: float) -> float:
    """Base torque gain: 1 with no lag, falling linearly to 0 at ``d_stop``."""
    raw = 1.0 - p_sat_x / d_stop
    return min(max(raw, 0.0), 1.0)


def lateral_stiffness(y_adaptive: float, params: PullingParams) -> float:
    """Logistic lateral stiffness, compliant near the path and stiff away from it."""
    expo = (params.gamma - abs(y_adaptive)) * params.kappa
    # e^expo overflows beyond ~709; the fraction is zero well before that
    if expo > 700.0:
        return params.zeta_l
    return params.zeta_l + (params.eta - params.zeta_l) / (1.0 + math.exp(expo))
