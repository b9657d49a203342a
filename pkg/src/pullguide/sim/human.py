"""Scripted kinematic stand-in for a blindfolded person holding the robot hand.

The person grips the end-effector rigidly. Their arm is a linear spring whose
rest position is a fixed offset ahead of the body; the body walks so as to
relax that spring, capped at a preferred speed, while a drift script adds a
lateral velocity bias that the person cannot perceive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

DRIFT_KINDS = ("none", "constant", "sinusoidal", "random_walk")


@dataclass
class DriftScript:
    """Lateral velocity bias (m/s, positive to the walker's left)."""

    kind: str = "none"
    magnitude: float = 0.0
    frequency: float = 0.05
    phase: float = 0.0
    sigma: float = 0.1
    reversion: float = 0.2
    seed: int = 0
    step: float = 0.01
    _walk: list = field(default_factory=list, repr=False, compare=False)
    _rng: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in DRIFT_KINDS:
            raise ValueError(f"unknown drift kind {self.kind!r}")

    def bias(self, t: float) -> float:
        if self.kind == "none":
            return 0.0
        if self.kind == "constant":
            return self.magnitude
        if self.kind == "sinusoidal":
            return self.magnitude * math.sin(2.0 * math.pi * self.frequency * t + self.phase)
        return self._random_walk(t)

    def _random_walk(self, t: float) -> float:
        # Mean-reverting walk sampled on a fixed grid so bias(t) is a pure
        # function of t for a given seed.
        k = max(int(math.floor(t / self.step + 1e-9)), 0)
        if self._rng is None:
            self._rng = np.random.default_rng([self.seed, 0xD21F7])
            self._walk = [self.phase]
        cap = abs(self.magnitude)
        while len(self._walk) <= k:
            b = self._walk[-1]
            b += -self.reversion * b * self.step \
                + self.sigma * math.sqrt(self.step) * float(self._rng.standard_normal())
            self._walk.append(min(max(b, -cap), cap))
        return self._walk[k]


def subject_profile(seed: int) -> DriftScript:
    """Drift script of one of twelve synthetic subjects.

    Seeds 1-4 walk with a constant bias, 5-8 with a sinusoidal one and 9-12
    with a mean-reverting random walk; larger seeds wrap around the family
    with fresh magnitudes.
    """
    rng = np.random.default_rng([int(seed), 0x5EED])
    slot = (int(seed) - 1) % 12
    sign = 1.0 if rng.random() < 0.5 else -1.0
    if slot < 4:
        return DriftScript("constant", sign * rng.uniform(0.06, 0.12), seed=seed)
    if slot < 8:
        return DriftScript("sinusoidal", rng.uniform(0.12, 0.2),
                           frequency=rng.uniform(0.04, 0.08),
                           phase=rng.uniform(0.0, 2.0 * math.pi), seed=seed)
    return DriftScript("random_walk", rng.uniform(0.12, 0.18), sigma=rng.uniform(0.1, 0.16),
                       reversion=0.1, phase=sign * 0.05, seed=seed)


@dataclass
class HumanModel:
    body: np.ndarray
    hand: np.ndarray
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(2))
    hand_height: float = 1.0
    # rest position of the hand relative to the body, split at the shoulder
    shoulder_offset: tuple = (0.1, -0.2)
    hand_offset: tuple = (0.5, 0.2)
    K_arm: float = 200.0
    preferred_speed: float = 1.2
    pursuit_gain: float = 4.0
    velocity_tau: float = 0.15
    max_speed: float = 1.6
    stance_half_width: float = 0.12
    gait_amplitude: float = 0.12
    stride_length: float = 1.2
    gait_phase: float = 0.0
    drift: DriftScript = field(default_factory=DriftScript)
    t: float = 0.0
    arm_force: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.body = np.asarray(self.body, dtype=float)
        self.hand = np.asarray(self.hand, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)
        if self.K_arm <= 0.0:
            raise ValueError("K_arm must be positive")
        if self.preferred_speed < 0.0:
            raise ValueError("preferred speed must be non-negative")

    @property
    def rest_offset(self) -> np.ndarray:
        return np.add(self.shoulder_offset, self.hand_offset)

    @property
    def heading(self) -> float:
        """Facing direction: toward the held hand, corrected for the rest offset."""
        off = self.rest_offset
        d = self.hand[:2] - self.body
        return math.atan2(d[1], d[0]) - math.atan2(off[1], off[0])

    def anchor(self) -> np.ndarray:
        """Where the hand would rest with a relaxed arm (3D, at hand height)."""
        th = self.heading
        c, s = math.cos(th), math.sin(th)
        off = self.rest_offset
        return np.array([self.body[0] + c * off[0] - s * off[1],
                         self.body[1] + s * off[0] + c * off[1], self.hand_height])

    def legs(self) -> np.ndarray:
        """Two leg centres (2x2): stance across the heading, stride along it."""
        th = self.heading
        fwd = np.array([math.cos(th), math.sin(th)])
        lat = np.array([-fwd[1], fwd[0]])
        speed = float(np.hypot(*self.velocity))
        amp = self.gait_amplitude * min(1.0, speed / 0.5)
        swing = amp * math.sin(self.gait_phase)
        return np.array([self.body + self.stance_half_width * lat + swing * fwd,
                         self.body - self.stance_half_width * lat - swing * fwd])

    @classmethod
    def at_rest(cls, hand, heading: float, **kw) -> "HumanModel":
        """Place the body so the arm is relaxed with the hand at ``hand``."""
        hand = np.asarray(hand, dtype=float)
        proto = cls(np.zeros(2), hand, **kw)
        off = proto.rest_offset
        c, s = math.cos(heading), math.sin(heading)
        body = hand[:2] - np.array([c * off[0] - s * off[1], s * off[0] + c * off[1]])
        return replace(proto, body=body)


def human_step(human: HumanModel, ee_actual, dt: float) -> HumanModel:
    """Advance the walker by ``dt`` with the hand locked to ``ee_actual``.

    The returned model carries ``arm_force``: the force the arm spring exerts
    on the end-effector, ``K_arm (anchor - hand)``.
    """
    hand = np.array([ee_actual.x, ee_actual.y, human.hand_height])
    h = replace(human, hand=hand)
    anchor = h.anchor()
    arm_force = h.K_arm * (anchor - hand)
    arm_force[2] = 0.0

    # body walks to relax the arm spring: target - body = hand - anchor
    err = hand[:2] - anchor[:2]
    dist = float(np.hypot(*err))
    speed = min(h.pursuit_gain * dist, h.preferred_speed)
    cmd = err / dist * speed if dist > 0.0 else np.zeros(2)
    th = h.heading
    bias = h.drift.bias(h.t)
    cmd = cmd + bias * np.array([-math.sin(th), math.cos(th)])
    n = float(np.hypot(*cmd))
    if n > h.max_speed:
        cmd *= h.max_speed / n

    blend = 1.0 - math.exp(-dt / h.velocity_tau) if h.velocity_tau > 0.0 else 1.0
    vel = h.velocity + blend * (cmd - h.velocity)
    body = h.body + vel * dt
    phase = h.gait_phase + 2.0 * math.pi * float(np.hypot(*vel)) * dt / h.stride_length
    return replace(h, body=body, velocity=vel, gait_phase=math.fmod(phase, 2.0 * math.pi),
                   t=h.t + dt, arm_force=arm_force)
