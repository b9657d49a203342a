"""Discrete admittance law turning planar torques into base velocity commands."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AdmittanceParams:
    """Diagonal virtual inertia/damping for (x, y, yaw) and the sample time."""

    M: tuple = (10.0, 10.0, 5.0)
    D: tuple = (80.0, 80.0, 40.0)
    t_s: float = 0.01
    limits: tuple | None = (1.2, 1.2, 1.0)

    def __post_init__(self):
        if len(self.M) != 3 or len(self.D) != 3:
            raise ValueError("M and D need three diagonal entries")
        if min(self.M) <= 0.0 or min(self.D) <= 0.0:
            raise ValueError("inertia and damping must be positive")
        if self.t_s <= 0.0:
            raise ValueError("t_s must be positive")
        if self.limits is not None and min(self.limits) <= 0.0:
            raise ValueError("velocity limits must be positive")


@dataclass(frozen=True)
class BaseTorque:
    f_x: float = 0.0
    f_y: float = 0.0
    mu_z: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.f_x, self.f_y, self.mu_z])


@dataclass(frozen=True)
class BaseCommand:
    v_x: float = 0.0
    v_y: float = 0.0
    omega: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.v_x, self.v_y, self.omega])


def admittance_step(params: AdmittanceParams, prev: BaseCommand,
                    tau_vir: BaseTorque, tau_ext: BaseTorque,
                    clamp: bool = True) -> BaseCommand:
    """One backward-difference step of ``M qdd + D qd = tau_vir + tau_ext``."""
    out = []
    tv, te, pv = tau_vir.as_array(), tau_ext.as_array(), prev.as_array()
    for i in range(3):
        m_ts = params.M[i] / params.t_s
        v = (tv[i] + te[i] + m_ts * pv[i]) / (m_ts + params.D[i])
        if clamp and params.limits is not None:
            lim = params.limits[i]
            v = min(max(v, -lim), lim)
        out.append(float(v))
    return BaseCommand(*out)
