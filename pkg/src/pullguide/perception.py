"""Leg tracking from planar laser scans.

Pipeline per scan: passthrough gating on beam angle and range, DBSCAN
clustering, leg-sized cluster selection, proximity association with a
coherence gate, and averaging of the two leg tracks into a human position.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np
from scipy.spatial import cKDTree

from .geometry import PlanarPose


@dataclass
class LaserScan:
    sensor_pose: PlanarPose
    angle_min: float
    angle_max: float
    ranges: np.ndarray
    max_range: float = 8.0
    timestamp: float = 0.0
    # sensor pose in the robot frame
    mount: PlanarPose = field(default_factory=lambda: PlanarPose(0.0, 0.0, 0.0))

    def __post_init__(self):
        self.ranges = np.asarray(self.ranges, dtype=float)
        if self.ranges.ndim != 1 or self.ranges.size < 2:
            raise ValueError("a scan needs at least two beams")
        if not self.angle_max > self.angle_min:
            raise ValueError("angle_max must exceed angle_min")

    @property
    def angles(self) -> np.ndarray:
        return np.linspace(self.angle_min, self.angle_max, self.ranges.size)


@dataclass(frozen=True)
class PassthroughConfig:
    angle_window: tuple = (-math.radians(70.0), math.radians(70.0))
    distance_window: tuple = (0.2, 2.5)

    def __post_init__(self):
        if not self.angle_window[0] < self.angle_window[1]:
            raise ValueError("empty angle window")
        if not self.distance_window[0] < self.distance_window[1]:
            raise ValueError("empty distance window")


@dataclass(frozen=True)
class ClusterParams:
    eps: float = 0.08
    min_pts: int = 3

    def __post_init__(self):
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")
        if self.min_pts < 2:
            raise ValueError("min_pts must be at least 2")


@dataclass
class TrackedCentroid:
    id: int
    position: np.ndarray
    last_seen: float
    age: int = 1


@dataclass
class HumanEstimate:
    pose: PlanarPose | None
    valid: bool
    leg_ids: tuple = ()


def passthrough_filter(scan: LaserScan, cfg: PassthroughConfig) -> np.ndarray:
    """Cartesian points (robot frame) of the beams inside both windows.

    Max-range beams carry no return and are always dropped.
    """
    r = scan.ranges
    a = scan.angles
    keep = ((r < scan.max_range)
            & (a >= cfg.angle_window[0]) & (a <= cfg.angle_window[1])
            & (r >= cfg.distance_window[0]) & (r <= cfg.distance_window[1]))
    r, a = r[keep], a[keep]
    m = scan.mount
    ang = a + m.theta
    return np.column_stack([m.x + r * np.cos(ang), m.y + r * np.sin(ang)])


def dbscan(points, params: ClusterParams):
    """Density-based clustering.

    A point is core when at least ``min_pts`` points (itself included) lie
    within ``eps``. Clusters are seeded in index order; a border point goes to
    the first cluster that reaches it.

    Returns
    -------
    clusters : list of ndarray
        Sorted point indices per cluster, in creation order.
    noise : ndarray
        Indices belonging to no cluster.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n == 0:
        return [], np.zeros(0, dtype=int)
    pairs = cKDTree(pts).query_pairs(params.eps, output_type="ndarray")
    i, j = pairs[:, 0], pairs[:, 1]
    degree = np.bincount(np.concatenate([i, j]), minlength=n) + 1
    core = degree >= params.min_pts

    labels = np.full(n, -1, dtype=int)
    core_idx = np.flatnonzero(core)
    if core_idx.size:
        both = core[i] & core[j]
        root = _components(n, i[both], j[both])[core_idx]
        # clusters are created in order of their lowest core index; core_idx is
        # sorted, so first occurrences of each root give that order
        _, first, comp = np.unique(root, return_index=True, return_inverse=True)
        rank = np.empty(first.size, dtype=int)
        rank[np.argsort(first, kind="stable")] = np.arange(first.size)
        labels[core_idx] = rank[comp]
        # a border point belongs to the earliest cluster among its core neighbours
        border_lab = np.full(n, n, dtype=int)
        for a, b in ((i, j), (j, i)):
            sel = ~core[a] & core[b]
            np.minimum.at(border_lab, a[sel], labels[b[sel]])
        is_border = border_lab < n
        labels[is_border] = border_lab[is_border]
        order = np.argsort(labels, kind="stable")
        bounds = np.searchsorted(labels[order], np.arange(first.size + 1))
        clusters = [order[bounds[c]:bounds[c + 1]] for c in range(first.size)]
    else:
        clusters = []
    return clusters, np.flatnonzero(labels == -1)


def _components(n: int, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Connected-component representative per node (union-find by hooking the
    larger root onto the smaller, with pointer jumping)."""
    parent = np.arange(n)
    while True:
        pu, pv = parent[u], parent[v]
        diff = pu != pv
        if not diff.any():
            return parent
        lo, hi = np.minimum(pu[diff], pv[diff]), np.maximum(pu[diff], pv[diff])
        np.minimum.at(parent, hi, lo)
        while True:
            jumped = parent[parent]
            if np.array_equal(jumped, parent):
                break
            parent = jumped


def leg_centroids(points: np.ndarray, clusters, max_width: float = 0.3) -> list[np.ndarray]:
    """Centroids of clusters small enough to be a leg."""
    out = []
    for idx in clusters:
        p = points[idx]
        extent = np.linalg.norm(p.max(axis=0) - p.min(axis=0))
        if extent <= max_width:
            out.append(p.mean(axis=0))
    return out


def associate(tracks: list[TrackedCentroid], centroids, coherence: float = 0.2,
              now: float = 0.0, stale_after: float = 0.5, max_tracks: int = 2,
              leg_gap: tuple = (0.05, 0.7), next_id: int | None = None):
    """Match new centroids to existing tracks, spawn and expire tracks.

    Matching is greedy on the globally nearest remaining pair; a pair farther
    apart than ``coherence`` is never matched. New tracks are only spawned
    while fewer than ``max_tracks`` exist: next to a lone surviving track when
    the gap is leg-like, or as the leg-like pair nearest to the sensor when
    there are none.

    Returns the updated track list (sorted by id) and the ids matched on this
    call.
    """
    if coherence <= 0.0:
        raise ValueError("coherence must be positive")
    cents = [np.asarray(c, dtype=float) for c in centroids]
    tracks = [replace(t) for t in tracks if now - t.last_seen <= stale_after]
    if next_id is None:
        next_id = max((t.id for t in tracks), default=-1) + 1

    pairs = []
    for ti, t in enumerate(tracks):
        for ci, c in enumerate(cents):
            d = float(np.hypot(*(c - t.position)))
            if d <= coherence:
                pairs.append((d, ti, ci))
    pairs.sort()
    used_t, used_c, matched = set(), set(), []
    for d, ti, ci in pairs:
        if ti in used_t or ci in used_c:
            continue
        used_t.add(ti)
        used_c.add(ci)
        t = tracks[ti]
        t.position = cents[ci].copy()
        t.last_seen = now
        t.age += 1
        matched.append(t.id)

    free = [ci for ci in range(len(cents)) if ci not in used_c]
    if len(tracks) == 1 and free:
        anchor = tracks[0].position
        gaps = [(float(np.hypot(*(cents[ci] - anchor))), ci) for ci in free]
        gaps = [g for g in gaps if leg_gap[0] <= g[0] <= leg_gap[1]]
        if gaps:
            ci = min(gaps)[1]
            tracks.append(TrackedCentroid(next_id, cents[ci].copy(), now))
            next_id += 1
    elif not tracks and len(free) >= 2:
        best = None
        for a, b in combinations(free, 2):
            gap = float(np.hypot(*(cents[a] - cents[b])))
            if not leg_gap[0] <= gap <= leg_gap[1]:
                continue
            rng = float(np.hypot(*((cents[a] + cents[b]) / 2.0)))
            if best is None or rng < best[0]:
                best = (rng, a, b)
        if best is not None:
            for ci in best[1:]:
                tracks.append(TrackedCentroid(next_id, cents[ci].copy(), now))
                next_id += 1
    del tracks[max_tracks:]
    tracks.sort(key=lambda t: t.id)
    return tracks, matched


def human_pose_estimate(tracks: list[TrackedCentroid], theta: float = 0.0,
                        leg_gap: tuple = (0.05, 0.7)) -> HumanEstimate:
    """Midpoint of the two leg tracks, or an invalid estimate."""
    if len(tracks) != 2:
        return HumanEstimate(None, False)
    a, b = tracks
    gap = float(np.hypot(*(a.position - b.position)))
    if not leg_gap[0] <= gap <= leg_gap[1]:
        return HumanEstimate(None, False)
    mid = (a.position + b.position) / 2.0
    return HumanEstimate(PlanarPose(float(mid[0]), float(mid[1]), theta), True, (a.id, b.id))


@dataclass
class LegTracker:
    """Stateful legs tracker; one instance per simulated robot."""

    passthrough: PassthroughConfig = field(default_factory=PassthroughConfig)
    cluster: ClusterParams = field(default_factory=ClusterParams)
    coherence: float = 0.2
    stale_after: float = 0.5
    max_leg_width: float = 0.3
    leg_gap: tuple = (0.05, 0.7)
    tracks: list = field(default_factory=list)
    _next_id: int = 0

    def update(self, scan: LaserScan):
        """Process one scan; returns (estimate in robot frame, point count, cluster count)."""
        pts = passthrough_filter(scan, self.passthrough)
        clusters, _ = dbscan(pts, self.cluster)
        cents = leg_centroids(pts, clusters, self.max_leg_width)
        self.tracks, _ = associate(self.tracks, cents, self.coherence, scan.timestamp,
                                   self.stale_after, 2, self.leg_gap, self._next_id)
        if self.tracks:
            self._next_id = max(self._next_id, max(t.id for t in self.tracks) + 1)
        est = human_pose_estimate(self.tracks, 0.0, self.leg_gap)
        return est, len(pts), len(clusters)


def write_scan_csv(scans, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "index", "angle", "range"])
        for scan in scans:
            for i, (a, r) in enumerate(zip(scan.angles, scan.ranges)):
                w.writerow([repr(float(scan.timestamp)), i, repr(float(a)), repr(float(r))])


def read_scan_csv(path, max_range: float = 8.0) -> list[LaserScan]:
    """Rebuild scans from a beam log; sensor pose and mount default to identity."""
    rows: dict[float, list] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.setdefault(float(row["time"]), []).append(
                (int(row["index"]), float(row["angle"]), float(row["range"])))
    scans = []
    for t in sorted(rows):
        beams = sorted(rows[t])
        scans.append(LaserScan(PlanarPose(0.0, 0.0, 0.0), beams[0][1], beams[-1][1],
                               np.array([b[2] for b in beams]), max_range, t))
    return scans
