"""Self-tuning Cartesian impedance.

The translational stiffness ellipsoid is aligned with the direction in which
the desired end-effector position moves: one axis along the motion, one
horizontal and perpendicular to it, one completing the right-handed frame.
Each axis gets its own stiffness, and damping follows ``d = 2 zeta sqrt(k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import wrap_angle


@dataclass(frozen=True)
class StiffnessBasis:
    """Orthonormal basis ``U`` whose columns are the ellipsoid axes."""

    U: np.ndarray = field(default_factory=lambda: np.eye(3))

    @property
    def ax(self) -> np.ndarray:
        return self.U[:, 0]

    @property
    def ay(self) -> np.ndarray:
        return self.U[:, 1]

    @property
    def az(self) -> np.ndarray:
        return self.U[:, 2]


@dataclass(frozen=True)
class AxisGains:
    k_x: float
    k_y: float
    k_z: float
    damping_ratio: float = 0.7

    def __post_init__(self):
        if min(self.k_x, self.k_y, self.k_z) < 0.0:
            raise ValueError("stiffness values must be non-negative")
        if not 0.0 < self.damping_ratio <= 1.0:
            raise ValueError("damping ratio must lie in (0, 1]")

    def damping(self) -> np.ndarray:
        k = np.array([self.k_x, self.k_y, self.k_z])
        return 2.0 * self.damping_ratio * np.sqrt(k)


@dataclass(frozen=True)
class CartesianImpedance:
    K_t: np.ndarray
    D_t: np.ndarray
    k_yaw: float = 30.0
    d_yaw: float = 2.0 * 0.7 * math.sqrt(30.0)


@dataclass(frozen=True)
class Wrench:
    force: np.ndarray
    yaw_torque: float


def motion_basis(x_prev, x_curr, prev: StiffnessBasis | None = None,
                 eps_motion: float = 1e-6) -> StiffnessBasis:
    """Basis aligned with the step ``x_curr - x_prev``.

    Falls back to ``prev`` (identity if None) when the step is shorter than
    ``eps_motion`` or purely vertical, where the lateral axis is undefined.
    """
    if eps_motion <= 0.0:
        raise ValueError("eps_motion must be positive")
    prev = prev if prev is not None else StiffnessBasis()
    a_x = np.asarray(x_curr, dtype=float) - np.asarray(x_prev, dtype=float)
    if np.linalg.norm(a_x) < eps_motion or math.hypot(a_x[0], a_x[1]) < eps_motion:
        return prev
    a_y = np.array([-a_x[1], a_x[0], 0.0])
    a_z = np.cross(a_x, a_y)
    U = np.column_stack([a_x / np.linalg.norm(a_x),
                         a_y / np.linalg.norm(a_y),
                         a_z / np.linalg.norm(a_z)])
    return StiffnessBasis(U)


def compose_matrices(basis: StiffnessBasis, gains: AxisGains,
                     k_yaw: float = 30.0, d_yaw: float | None = None) -> CartesianImpedance:
    """``K = U diag(k) U^T`` and ``D = U diag(d) U^T``."""
    U = basis.U
    k = np.array([gains.k_x, gains.k_y, gains.k_z])
    d = gains.damping()
    K = (U * k) @ U.T
    D = (U * d) @ U.T
    # enforce exact symmetry against round-off
    K = 0.5 * (K + K.T)
    D = 0.5 * (D + D.T)
    if d_yaw is None:
        d_yaw = 2.0 * gains.damping_ratio * math.sqrt(k_yaw)
    return CartesianImpedance(K, D, k_yaw, d_yaw)


def impedance_wrench(X_d, X, V_d, V, imp: CartesianImpedance) -> Wrench:
    """Restoring wrench of the spring-damper between desired and actual pose.

    ``V_d`` and ``V`` are 4-vectors ``(vx, vy, vz, yaw_rate)``.
    """
    V_d = np.asarray(V_d, dtype=float)
    V = np.asarray(V, dtype=float)
    e = X_d.position - X.position
    force = imp.K_t @ e + imp.D_t @ (V_d[:3] - V[:3])
    torque = imp.k_yaw * wrap_angle(X_d.yaw - X.yaw) + imp.d_yaw * (V_d[3] - V[3])
    return Wrench(force, float(torque))
