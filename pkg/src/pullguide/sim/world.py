"""Static/moving obstacle geometry, grid rasterisation and laser ray casting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..geometry import PlanarPose
from ..guidance.planner import OccupancyGrid
from ..perception import LaserScan


@dataclass(frozen=True)
class MovingDisc:
    start: tuple
    velocity: tuple
    radius: float
    t_start: float = 0.0
    t_end: float = math.inf

    def center(self, t: float) -> tuple:
        tau = min(max(t, self.t_start), self.t_end) - self.t_start
        return (self.start[0] + self.velocity[0] * tau,
                self.start[1] + self.velocity[1] * tau)


@dataclass
class World:
    """Line-segment walls, static discs and scripted moving discs.

    ``bounds`` is ``(xmin, ymin, xmax, ymax)`` and fixes the grid extent.
    """

    bounds: tuple
    segments: np.ndarray = field(default_factory=lambda: np.zeros((0, 4)))
    discs: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    moving: list = field(default_factory=list)
    resolution: float = 0.05
    # grid the world was built from; its occupied cells are solid, not just walls
    source: OccupancyGrid | None = None

    def __post_init__(self):
        self.segments = np.asarray(self.segments, dtype=float).reshape(-1, 4)
        self.discs = np.asarray(self.discs, dtype=float).reshape(-1, 3)
        if not (self.bounds[2] > self.bounds[0] and self.bounds[3] > self.bounds[1]):
            raise ValueError("world bounds are empty")
        if self.resolution <= 0.0:
            raise ValueError("grid resolution must be positive")

    @property
    def dynamic(self) -> bool:
        return bool(self.moving)

    def discs_at(self, t: float) -> np.ndarray:
        if not self.moving:
            return self.discs
        mv = np.array([[*m.center(t), m.radius] for m in self.moving])
        return np.vstack([self.discs, mv])

    def occupancy_grid(self, t: float = 0.0) -> OccupancyGrid:
        """Cells whose square touches an obstacle (centre within half a diagonal)."""
        x0, y0, x1, y1 = self.bounds
        res = self.resolution
        w = int(math.ceil((x1 - x0) / res - 1e-9))
        h = int(math.ceil((y1 - y0) / res - 1e-9))
        cx = x0 + (np.arange(w) + 0.5) * res
        cy = y0 + (np.arange(h) + 0.5) * res
        X, Y = np.meshgrid(cx, cy)
        half_diag = res * math.sqrt(0.5)
        occ = np.zeros((h, w), dtype=bool)
        for x_a, y_a, x_b, y_b in self.segments:
            dx, dy = x_b - x_a, y_b - y_a
            L2 = dx * dx + dy * dy
            if L2 == 0.0:
                s = np.zeros_like(X)
            else:
                s = np.clip(((X - x_a) * dx + (Y - y_a) * dy) / L2, 0.0, 1.0)
            occ |= np.hypot(X - (x_a + s * dx), Y - (y_a + s * dy)) <= half_diag
        for x, y, r in self.discs_at(t):
            occ |= np.hypot(X - x, Y - y) <= r + half_diag
        if self.source is not None:
            src = self.source
            rows = np.floor((cy - src.origin[1]) / src.resolution).astype(int)
            cols = np.floor((cx - src.origin[0]) / src.resolution).astype(int)
            ok_r = (rows >= 0) & (rows < src.height)
            ok_c = (cols >= 0) & (cols < src.width)
            sub = np.zeros((h, w), dtype=bool)
            sub[np.ix_(ok_r, ok_c)] = src.occupied[np.ix_(rows[ok_r], cols[ok_c])]
            occ |= sub
        return OccupancyGrid(occ, res, (x0, y0))

    @classmethod
    def from_grid(cls, grid: OccupancyGrid) -> "World":
        """Walls along every boundary between occupied and free cells."""
        occ = np.pad(grid.occupied, 1, constant_values=False)
        res = grid.resolution
        ox, oy = grid.origin
        segs = []
        h, w = grid.occupied.shape
        # horizontal edges: between row r-1 and r (padded indices)
        for r in range(1, h + 2):
            edge = occ[r - 1, 1:-1] != occ[r, 1:-1]
            segs += _runs(edge, lambda a, b, r=r: (ox + a * res, oy + (r - 1) * res,
                                                   ox + b * res, oy + (r - 1) * res))
        for c in range(1, w + 2):
            edge = occ[1:-1, c - 1] != occ[1:-1, c]
            segs += _runs(edge, lambda a, b, c=c: (ox + (c - 1) * res, oy + a * res,
                                                   ox + (c - 1) * res, oy + b * res))
        bounds = (ox, oy, ox + w * res, oy + h * res)
        return cls(bounds, np.array(segs).reshape(-1, 4), resolution=res, source=grid)


def _runs(mask, make):
    out = []
    i, n = 0, len(mask)
    while i < n:
        if mask[i]:
            j = i
            while j < n and mask[j]:
                j += 1
            out.append(make(i, j))
            i = j
        else:
            i += 1
    return out


@dataclass(frozen=True)
class BeamConfig:
    angle_min: float = -math.pi / 2
    angle_max: float = math.pi / 2
    n_beams: int = 720
    max_range: float = 8.0

    def __post_init__(self):
        if self.n_beams < 2 or not self.angle_max > self.angle_min or self.max_range <= 0:
            raise ValueError("invalid beam configuration")

    def angles(self) -> np.ndarray:
        return np.linspace(self.angle_min, self.angle_max, self.n_beams)


def cast_ranges(origin, directions: np.ndarray, segments: np.ndarray,
                discs: np.ndarray, max_range: float) -> np.ndarray:
    """Nearest hit distance per unit direction, ``inf`` when nothing is hit."""
    ox, oy = origin
    dx, dy = directions[:, 0:1], directions[:, 1:2]
    best = np.full(len(directions), np.inf)
    if len(segments):
        ax, ay = segments[:, 0], segments[:, 1]
        ex, ey = segments[:, 2] - ax, segments[:, 3] - ay
        denom = dx * ey - dy * ex
        wx, wy = ax - ox, ay - oy
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (wx * ey - wy * ex) / denom
            u = (wx * dy - wy * dx) / denom
        hit = (np.abs(denom) > 1e-12) & (t >= 0.0) & (u >= 0.0) & (u <= 1.0)
        t = np.where(hit, t, np.inf)
        best = np.minimum(best, t.min(axis=1))
    if len(discs):
        cx, cy, r = discs[:, 0] - ox, discs[:, 1] - oy, discs[:, 2]
        b = dx * cx + dy * cy
        c = cx * cx + cy * cy - r * r
        disc = b * b - c
        with np.errstate(invalid="ignore"):
            sq = np.sqrt(disc)
        t0 = b - sq
        t1 = b + sq
        # origin inside the circle hits its far side
        t = np.where(t0 >= 0.0, t0, t1)
        t = np.where((disc >= 0.0) & (t >= 0.0), t, np.inf)
        best = np.minimum(best, t.min(axis=1))
    best[best > max_range] = np.inf
    return best


def raycast(world: World, sensor_pose: PlanarPose, beams: BeamConfig,
            noise_sigma: float = 0.0, rng=None, extra_discs=None, t: float = 0.0,
            mount: PlanarPose | None = None) -> LaserScan:
    """Synthesize a scan: nearest obstacle or leg per beam plus Gaussian noise.

    ``rng`` is a numpy Generator or an integer seed; beams with no return read
    ``max_range``.
    """
    angles = beams.angles() + sensor_pose.theta
    dirs = np.column_stack([np.cos(angles), np.sin(angles)])
    discs = world.discs_at(t)
    if extra_discs is not None and len(extra_discs):
        discs = np.vstack([discs, np.asarray(extra_discs, dtype=float).reshape(-1, 3)])
    r = cast_ranges((sensor_pose.x, sensor_pose.y), dirs, world.segments, discs,
                    beams.max_range)
    hit = np.isfinite(r)
    if noise_sigma > 0.0:
        if rng is None or isinstance(rng, (int, np.integer)):
            rng = np.random.default_rng(rng)
        noise = rng.standard_normal(len(r)) * noise_sigma
        r = np.where(hit, np.maximum(r + noise, 0.01), r)
        r = np.where(r >= beams.max_range, np.inf, r)
        hit = np.isfinite(r)
    ranges = np.where(hit, r, beams.max_range)
    return LaserScan(sensor_pose, beams.angle_min, beams.angle_max, ranges,
                     beams.max_range, t,
                     mount if mount is not None else PlanarPose(0.0, 0.0, 0.0))
