"""Occupancy-grid waypoint planner: A*, line-of-sight shortcutting, resampling."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from ..geometry import PlanarPose

SQRT2 = math.sqrt(2.0)


class NoPath(Exception):
    pass


class EmptyPlan(Exception):
    pass


@dataclass
class OccupancyGrid:
    """Boolean occupancy, ``occupied[row, col]`` with row 0 at ``origin[1]``."""

    occupied: np.ndarray
    resolution: float
    origin: tuple = (0.0, 0.0)

    @property
    def shape(self):
        return self.occupied.shape

    @property
    def width(self) -> int:
        return self.occupied.shape[1]

    @property
    def height(self) -> int:
        return self.occupied.shape[0]

    def world_to_cell(self, x: float, y: float) -> tuple[int, int]:
        col = int(math.floor((x - self.origin[0]) / self.resolution))
        row = int(math.floor((y - self.origin[1]) / self.resolution))
        return row, col

    def cell_center(self, row: int, col: int) -> tuple[float, float]:
        return (self.origin[0] + (col + 0.5) * self.resolution,
                self.origin[1] + (row + 0.5) * self.resolution)

    def in_bounds(self, row: int, col: int) -> bool:
        return 0 <= row < self.height and 0 <= col < self.width

    def is_free_world(self, x: float, y: float) -> bool:
        row, col = self.world_to_cell(x, y)
        return self.in_bounds(row, col) and not self.occupied[row, col]

    def inflate(self, radius: float) -> "OccupancyGrid":
        """Mark every cell whose centre lies within ``radius + resolution`` of
        an occupied cell centre.

        The extra cell width guarantees any point inside a free cell is at
        least ``radius`` away from every occupied cell centre.
        """
        if radius <= 0.0 or not self.occupied.any():
            return OccupancyGrid(self.occupied.copy(), self.resolution, self.origin)
        dist = ndimage.distance_transform_edt(~self.occupied) * self.resolution
        return OccupancyGrid(dist <= radius + self.resolution, self.resolution, self.origin)

    def occupied_centers(self) -> np.ndarray:
        rows, cols = np.nonzero(self.occupied)
        return np.column_stack([self.origin[0] + (cols + 0.5) * self.resolution,
                                self.origin[1] + (rows + 0.5) * self.resolution])

    @classmethod
    def from_text(cls, text: str, origin=(0.0, 0.0)) -> "OccupancyGrid":
        """Parse the plain-text grid format.

        First line ``W H resolution_m``, then ``H`` rows of ``W`` characters,
        ``#`` occupied and ``.`` free. The first row is the top (highest y).
        """
        lines = [ln.rstrip("\r") for ln in text.splitlines()]
        lines = [ln for ln in lines if ln.strip()]
        if not lines:
            raise ValueError("empty grid file")
        try:
            w, h, res = lines[0].split()
            w, h, res = int(w), int(h), float(res)
        except ValueError as exc:
            raise ValueError(f"bad grid header {lines[0]!r}") from exc
        if w <= 0 or h <= 0 or res <= 0.0:
            raise ValueError("grid dimensions and resolution must be positive")
        rows = lines[1:]
        if len(rows) != h:
            raise ValueError(f"expected {h} grid rows, got {len(rows)}")
        occ = np.zeros((h, w), dtype=bool)
        for i, row in enumerate(rows):
            if len(row) != w or set(row) - {"#", "."}:
                raise ValueError(f"grid row {i} must be {w} characters of '#' or '.'")
            occ[h - 1 - i] = np.frombuffer(row.encode(), dtype=np.uint8) == ord("#")
        return cls(occ, res, tuple(origin))

    @classmethod
    def load(cls, path, origin=(0.0, 0.0)) -> "OccupancyGrid":
        return cls.from_text(Path(path).read_text(), origin)

    def to_text(self) -> str:
        lines = [f"{self.width} {self.height} {self.resolution!r}"]
        for r in range(self.height - 1, -1, -1):
            lines.append("".join("#" if v else "." for v in self.occupied[r]))
        return "\n".join(lines) + "\n"


@dataclass
class WaypointPlan:
    waypoints: list
    goal: PlanarPose

    def __post_init__(self):
        if not self.waypoints:
            raise EmptyPlan("plan has no waypoints")

    def __len__(self):
        return len(self.waypoints)

    def as_array(self) -> np.ndarray:
        return np.array([[w.x, w.y] for w in self.waypoints])


_MOVES = [(1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
          (1, 1, SQRT2), (1, -1, SQRT2), (-1, 1, SQRT2), (-1, -1, SQRT2)]


def astar(occupied: np.ndarray, start: tuple, goal: tuple):
    """8-connected A* on a boolean grid; diagonal moves may not clip corners.

    Returns the cell path and its cost in cell units.
    """
    h, w = occupied.shape
    for r, c in (start, goal):
        if not (0 <= r < h and 0 <= c < w) or occupied[r, c]:
            raise NoPath(f"cell {(r, c)} is blocked or outside the grid")

    def heur(r, c):
        dr, dc = abs(r - goal[0]), abs(c - goal[1])
        return (dr + dc) + (SQRT2 - 2.0) * min(dr, dc)

    g = {start: 0.0}
    parent = {start: None}
    counter = 0
    heap = [(heur(*start), counter, start)]
    closed = set()
    while heap:
        _, _, cur = heapq.heappop(heap)
        if cur in closed:
            continue
        if cur == goal:
            break
        closed.add(cur)
        r, c = cur
        for dr, dc, cost in _MOVES:
            nr, nc = r + dr, c + dc
            if not (0 <= nr < h and 0 <= nc < w) or occupied[nr, nc]:
                continue
            if dr and dc and (occupied[r + dr, c] or occupied[r, c + dc]):
                continue
            ng = g[cur] + cost
            if ng < g.get((nr, nc), math.inf) - 1e-12:
                g[(nr, nc)] = ng
                parent[(nr, nc)] = cur
                counter += 1
                heapq.heappush(heap, (ng + heur(nr, nc), counter, (nr, nc)))
    else:
        raise NoPath("goal unreachable")
    path = [goal]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return path[::-1], g[goal]


def line_of_sight(grid: OccupancyGrid, p, q) -> bool:
    """True when every sample along the segment falls in a free cell."""
    length = math.hypot(q[0] - p[0], q[1] - p[1])
    n = max(2, int(math.ceil(length / (grid.resolution / 8.0))) + 1)
    xs = np.linspace(p[0], q[0], n)
    ys = np.linspace(p[1], q[1], n)
    cols = np.floor((xs - grid.origin[0]) / grid.resolution).astype(int)
    rows = np.floor((ys - grid.origin[1]) / grid.resolution).astype(int)
    if (rows < 0).any() or (cols < 0).any() or (rows >= grid.height).any() \
            or (cols >= grid.width).any():
        return False
    return not grid.occupied[rows, cols].any()


def shortcut(grid: OccupancyGrid, points: list) -> list:
    """Greedy line-of-sight pruning: jump to the farthest visible point."""
    out = [points[0]]
    i = 0
    while i < len(points) - 1:
        j = len(points) - 1
        while j > i + 1 and not line_of_sight(grid, points[i], points[j]):
            j -= 1
        out.append(points[j])
        i = j
    return out


def resample_polyline(points, spacing: float = 0.3, goal_theta: float | None = None) -> list:
    """Densify a polyline so consecutive poses are at most ``spacing`` apart.

    Each pose faces the next one; the last keeps the final segment heading
    unless ``goal_theta`` is given.
    """
    pts = [tuple(map(float, p)) for p in points]
    dense = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        seg = math.hypot(b[0] - a[0], b[1] - a[1])
        if seg == 0.0:
            continue
        n = int(math.ceil(seg / spacing - 1e-9))
        for k in range(1, n + 1):
            s = k / n
            dense.append((a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])))
    poses = []
    for i, p in enumerate(dense):
        if i + 1 < len(dense):
            th = math.atan2(dense[i + 1][1] - p[1], dense[i + 1][0] - p[0])
        elif goal_theta is not None:
            th = goal_theta
        elif i > 0:
            th = math.atan2(p[1] - dense[i - 1][1], p[0] - dense[i - 1][0])
        else:
            th = 0.0
        poses.append(PlanarPose(p[0], p[1], th))
    return poses


def plan_from_points(points, goal: PlanarPose | None = None, spacing: float = 0.3) -> WaypointPlan:
    """Plan from an explicit polyline (no obstacle avoidance)."""
    if len(points) == 0:
        raise EmptyPlan("no waypoints given")
    poses = resample_polyline(points, spacing, None if goal is None else goal.theta)
    if goal is None:
        goal = poses[-1]
    return WaypointPlan(poses, goal)


def plan_waypoints(grid: OccupancyGrid, start: PlanarPose, goal: PlanarPose,
                   inflation: float, spacing: float = 0.3) -> WaypointPlan:
    """Collision-free waypoints from ``start`` to ``goal``.

    Raises
    ------
    NoPath
        If start or goal is blocked after inflation, or no route exists.
    """
    inflated = grid.inflate(inflation)
    s_cell = inflated.world_to_cell(start.x, start.y)
    g_cell = inflated.world_to_cell(goal.x, goal.y)
    cells, _ = astar(inflated.occupied, s_cell, g_cell)
    pts = [inflated.cell_center(r, c) for r, c in cells]
    pts[0] = (start.x, start.y)
    pts[-1] = (goal.x, goal.y)
    pts = shortcut(inflated, pts)
    return WaypointPlan(resample_polyline(pts, spacing, goal.theta), goal)
