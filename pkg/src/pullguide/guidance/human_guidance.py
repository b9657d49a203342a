"""Selection of base target, end-effector and human desired poses, and the
virtual torques that drive the base toward its target."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..admittance import BaseTorque
from ..geometry import (HistoryTooShort, PlanarPose, PoseHistory, TaskPose,
                        frame_express, lookback)
from .planner import EmptyPlan, WaypointPlan


@dataclass(frozen=True)
class GuidanceDistances:
    D1: float = 0.6
    D2: float = 0.8
    D3: float = 0.6
    hand_height: float = 1.0
    laser_height: float = 0.2

    def __post_init__(self):
        if min(self.D1, self.D2, self.D3, self.hand_height, self.laser_height) <= 0.0:
            raise ValueError("guidance distances and heights must be positive")

    @property
    def max_lookback(self) -> float:
        return self.D2 + self.D3 + 1.0


@dataclass(frozen=True)
class GuidanceOutput:
    X_B_target: PlanarPose
    X_EE_des: TaskPose
    X_EE_des_hat: TaskPose
    X_H_des: PlanarPose
    target_index: int
    warmup: bool = False


def select_target(plan: WaypointPlan, X_B, D1: float, start_index: int = 0):
    """First waypoint at or after ``start_index`` lying at least ``D1`` away.

    Returns ``(pose, index)``; index ``len(plan)`` stands for the goal once
    every remaining waypoint is closer than ``D1``.
    """
    wps = plan.waypoints
    for i in range(max(start_index, 0), len(wps)):
        w = wps[i]
        if math.hypot(w.x - X_B.x, w.y - X_B.y) >= D1:
            return w, i
    return plan.goal, len(wps)


def _extrapolate(start: PlanarPose, ax: float, ay: float, d: float):
    """Point on the ray behind ``start`` at distance ``d`` from the anchor."""
    ux, uy = math.cos(start.theta), math.sin(start.theta)
    fx, fy = start.x - ax, start.y - ay
    uf = ux * fx + uy * fy
    disc = uf * uf - (fx * fx + fy * fy) + d * d
    s = uf + math.sqrt(max(disc, 0.0))
    s = max(s, 0.0)
    return start.x - s * ux, start.y - s * uy


def _lookback_or_extrapolate(hist, ax, ay, d, start, anchor_yaw):
    try:
        x, y, _, _, direction = lookback(hist, ax, ay, d, anchor_yaw)
        return x, y, direction, False
    except HistoryTooShort:
        x, y = _extrapolate(start, ax, ay, d)
        return x, y, start.theta, True


def guidance_step(plan: WaypointPlan, X_B: PlanarPose, base_hist: PoseHistory,
                  ee_des_hist: PoseHistory, y_adaptive: float,
                  dist: GuidanceDistances, start: PlanarPose | None = None,
                  progress: int = 0) -> GuidanceOutput:
    """One pass of the human guidance planner.

    The end-effector desired pose trails the base by ``D2`` along the base's
    own past path, and the human desired pose trails that by ``D3`` along the
    end-effector's past desired poses. Until a history is long enough the
    missing part is continued straight back from ``start`` (oldest base
    history entry by default).
    """
    if plan is None or len(plan.waypoints) == 0:
        raise EmptyPlan("no waypoints to follow")
    if start is None:
        start = base_hist[0][1].planar() if len(base_hist) else X_B
    target, idx = select_target(plan, X_B, dist.D1, progress)

    ex, ey, e_dir, warm_a = _lookback_or_extrapolate(
        base_hist, X_B.x, X_B.y, dist.D2, start, X_B.theta)
    X_EE_des = TaskPose(ex, ey, dist.hand_height, e_dir)
    X_EE_hat = X_EE_des.translate_local(0.0, y_adaptive, 0.0)

    hx, hy, h_dir, warm_b = _lookback_or_extrapolate(
        ee_des_hist, ex, ey, dist.D3, start, e_dir)
    X_H_des = PlanarPose(hx, hy, h_dir)
    return GuidanceOutput(target, X_EE_des, X_EE_hat, X_H_des, idx, warm_a or warm_b)


def virtual_torques(X_B: PlanarPose, X_B_target: PlanarPose, F_des=(80.0, 80.0, 40.0),
                    alpha_B: float = 1.0, negate_yaw: bool = False) -> BaseTorque:
    """Planar torques pointing the base at its target, scaled by ``alpha_B``.

    The yaw channel is ``atan2(-w_y, w_x)``, which turns away from a target on
    the left under a counter-clockwise-positive yaw; ``negate_yaw`` flips it.
    """
    wx, wy = frame_express(X_B_target, X_B)
    norm = math.hypot(wx, wy)
    if norm < 1e-6:
        return BaseTorque(0.0, 0.0, 0.0)
    wx, wy = wx / norm, wy / norm
    w_th = math.atan2(-wy, wx)
    if negate_yaw:
        w_th = -w_th
    return BaseTorque(wx * F_des[0] * alpha_B, wy * F_des[1] * alpha_B,
                      w_th * F_des[2] * alpha_B)
