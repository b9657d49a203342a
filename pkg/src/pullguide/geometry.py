"""Planar and task-space pose algebra plus distance-indexed pose histories."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


class HistoryTooShort(Exception):
    """No history entry lies far enough from the anchor."""


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    a = math.remainder(a, TWO_PI)
    if a <= -math.pi:
        a += TWO_PI
    return a


def blend_angle(a: float, b: float, s: float) -> float:
    """Shortest-arc interpolation from ``a`` (s=0) to ``b`` (s=1)."""
    return wrap_angle(a + s * wrap_angle(b - a))


def rot2(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class PlanarPose:
    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def to_task(self, z: float = 0.0) -> "TaskPose":
        return TaskPose(self.x, self.y, z, self.theta)


@dataclass(frozen=True)
class TaskPose:
    """3D position plus yaw. Full orientation is not modelled."""

    x: float
    y: float
    z: float = 0.0
    yaw: float = 0.0

    def __post_init__(self):
        if self.z < 0.0:
            raise ValueError(f"z must be non-negative, got {self.z}")
        object.__setattr__(self, "yaw", wrap_angle(float(self.yaw)))

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def planar(self) -> PlanarPose:
        return PlanarPose(self.x, self.y, self.yaw)

    def with_z(self, z: float) -> "TaskPose":
        return TaskPose(self.x, self.y, z, self.yaw)

    def translate_local(self, dx: float, dy: float, dz: float = 0.0) -> "TaskPose":
        """Translate along this pose's own (yaw-rotated) axes."""
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        return TaskPose(self.x + c * dx - s * dy, self.y + s * dx + c * dy,
                        self.z + dz, self.yaw)


def frame_express(target, reference) -> np.ndarray:
    """Translation of ``target``'s origin expressed in ``reference``'s frame.

    Both arguments need ``x``, ``y`` and a heading (``theta`` or ``yaw``).
    """
    th = _heading(reference)
    dx = target.x - reference.x
    dy = target.y - reference.y
    c, s = math.cos(th), math.sin(th)
    return np.array([c * dx + s * dy, -s * dx + c * dy])


def _heading(pose) -> float:
    return pose.theta if hasattr(pose, "theta") else pose.yaw


def planar_distance(a, b) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


@dataclass
class PoseHistory:
    """Append-only, bounded pose log with oldest-first eviction.

    Entries closer than ``min_spacing`` (XY) to the newest one are skipped, so
    a stationary robot does not flush useful history out of the buffer.
    """

    capacity: int = 10_000
    min_spacing: float = 0.0
    _t: deque = field(init=False, repr=False)
    _x: deque = field(init=False, repr=False)
    _y: deque = field(init=False, repr=False)
    _z: deque = field(init=False, repr=False)
    _yaw: deque = field(init=False, repr=False)

    def __post_init__(self):
        if self.capacity < 2:
            raise ValueError("capacity must be at least 2")
        for name in ("_t", "_x", "_y", "_z", "_yaw"):
            setattr(self, name, deque(maxlen=self.capacity))

    def __len__(self) -> int:
        return len(self._t)

    def append(self, t: float, pose: TaskPose) -> bool:
        """Add a sample; returns False when it was skipped by the spacing rule."""
        if self._t:
            if t <= self._t[-1]:
                raise ValueError(f"timestamps must increase ({t} <= {self._t[-1]})")
            if self.min_spacing > 0.0 and math.hypot(
                    pose.x - self._x[-1], pose.y - self._y[-1]) < self.min_spacing:
                return False
        self._t.append(float(t))
        self._x.append(pose.x)
        self._y.append(pose.y)
        self._z.append(pose.z)
        self._yaw.append(pose.yaw)
        return True

    def __getitem__(self, i: int) -> tuple[float, TaskPose]:
        return self._t[i], TaskPose(self._x[i], self._y[i], self._z[i], self._yaw[i])

    @property
    def newest(self) -> TaskPose:
        return self[-1][1]

    def times(self) -> list[float]:
        return list(self._t)

    def path_length(self) -> float:
        xs, ys = np.asarray(self._x), np.asarray(self._y)
        return float(np.hypot(np.diff(xs), np.diff(ys)).sum())

    @staticmethod
    def required_capacity(max_lookback: float, min_step: float) -> int:
        return math.ceil(max_lookback / min_step)

    def check_capacity(self, max_lookback: float, min_step: float | None = None) -> None:
        """Raise if eviction could drop entries inside ``max_lookback``."""
        step = self.min_spacing if min_step is None else min_step
        if step <= 0.0:
            raise ValueError("a positive minimum step is needed to bound the lookback")
        need = self.required_capacity(max_lookback, step)
        if self.capacity < need:
            raise ValueError(f"history capacity {self.capacity} < {need} required "
                             f"for {max_lookback} m lookback at {step} m spacing")


def lookback(history: PoseHistory, ax: float, ay: float, d: float,
             anchor_yaw: float = 0.0, anchor_z: float = 0.0):
    """Core of :func:`lookback_by_distance`.

    Returns ``(x, y, z, yaw, direction)`` where ``direction`` is the heading
    of the history segment the result lies on, pointing forward in time.
    The anchor itself acts as the newest virtual entry so that a straddling
    pair always exists once any entry reaches ``d``.
    """
    if d <= 0.0:
        raise ValueError("lookback distance must be positive")
    n = len(history)
    if n == 0:
        raise HistoryTooShort("empty history")
    xs, ys, zs, yaws = history._x, history._y, history._z, history._yaw
    px, py, pz, pyaw = ax, ay, anchor_z, anchor_yaw
    d2 = d * d
    for i in range(n - 1, -1, -1):
        qx, qy = xs[i], ys[i]
        ex, ey = qx - ax, qy - ay
        dist2 = ex * ex + ey * ey
        if dist2 >= d2:
            # point on P->Q at distance d from the anchor: |P - A + s(Q - P)| = d
            ux, uy = qx - px, qy - py
            fx, fy = px - ax, py - ay
            a = ux * ux + uy * uy
            b = 2.0 * (fx * ux + fy * uy)
            c = fx * fx + fy * fy - d2
            if a == 0.0:
                s = 1.0
            else:
                disc = max(b * b - 4.0 * a * c, 0.0)
                s = (-b + math.sqrt(disc)) / (2.0 * a)
                s = min(max(s, 0.0), 1.0)
            x = px + s * ux
            y = py + s * uy
            z = pz + s * (zs[i] - pz)
            yaw = blend_angle(pyaw, yaws[i], s)
            direction = math.atan2(-uy, -ux) if a > 0.0 else yaws[i]
            return x, y, z, yaw, direction
        px, py, pz, pyaw = qx, qy, zs[i], yaws[i]
    raise HistoryTooShort(f"no entry reaches {d} m from the anchor")


def lookback_by_distance(history: PoseHistory, anchor, d: float) -> TaskPose:
    """Pose ``d`` metres (XY, Euclidean) back along ``history`` from ``anchor``.

    Walks from the newest entry backward and stops at the first entry at or
    beyond ``d``; position, height and yaw are interpolated on the straddling
    segment so the returned pose sits exactly at distance ``d``.

    Raises
    ------
    HistoryTooShort
        If no entry is at least ``d`` away.
    """
    x, y, z, yaw, _ = lookback(history, anchor.x, anchor.y, d,
                               _heading(anchor), getattr(anchor, "z", 0.0))
    return TaskPose(x, y, max(z, 0.0), yaw)
