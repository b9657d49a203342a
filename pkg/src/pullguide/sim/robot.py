"""Quasi-static end-effector balance between the impedance spring and the human arm."""

from __future__ import annotations

import math

import numpy as np

from ..geometry import TaskPose
from ..impedance import CartesianImpedance


def ee_step(X_d: TaskPose, imp: CartesianImpedance, anchor, K_arm: float,
            max_displacement: float = 0.4, base_xy=None, reach: float = 1.0) -> TaskPose:
    """Solve ``K_t (X_d - X) = K_arm (X - anchor)`` for the actual EE position.

    Along an axis with zero robot stiffness the EE simply follows the anchor.
    The deflection ``|X_d - X|`` is capped at ``max_displacement`` and, when
    ``base_xy`` is given, the horizontal distance to the base at ``reach``.
    """
    xd = X_d.position
    if K_arm <= 0.0:
        x = xd.copy()
    else:
        A = imp.K_t + K_arm * np.eye(3)
        x = np.linalg.solve(A, imp.K_t @ xd + K_arm * np.asarray(anchor, dtype=float))
    dev = x - xd
    n = float(np.linalg.norm(dev))
    if n > max_displacement:
        x = xd + dev * (max_displacement / n)
    if base_xy is not None:
        dx, dy = x[0] - base_xy[0], x[1] - base_xy[1]
        r = math.hypot(dx, dy)
        if r > reach:
            x[0] = base_xy[0] + dx * reach / r
            x[1] = base_xy[1] + dy * reach / r
    return TaskPose(float(x[0]), float(x[1]), max(float(x[2]), 0.0), X_d.yaw)
