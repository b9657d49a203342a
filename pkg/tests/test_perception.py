import math
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pullguide.geometry import PlanarPose
from pullguide.perception import (ClusterParams, LaserScan, LegTracker, PassthroughConfig,
                                  TrackedCentroid, associate, dbscan, human_pose_estimate,
                                  leg_centroids, passthrough_filter, read_scan_csv,
                                  write_scan_csv)
from pullguide.sim.world import BeamConfig, World, raycast


def textbook_dbscan(points, eps, min_pts):
    """Sequential DBSCAN straight from the definition: visit points in index
    order, grow each new cluster from an unvisited core point by breadth-first
    expansion over core points; a border point keeps the first cluster that
    reaches it."""
    pts = np.asarray(points, float)
    n = len(pts)
    nbrs = [[j for j in range(n) if math.dist(pts[i], pts[j]) <= eps] for i in range(n)]
    core = [len(nb) >= min_pts for nb in nbrs]
    labels = [None] * n
    cid = -1
    for i in range(n):
        if labels[i] is not None or not core[i]:
            continue
        cid += 1
        labels[i] = cid
        queue = [i]
        while queue:
            p = queue.pop(0)
            for q in nbrs[p]:
                if labels[q] is None:
                    labels[q] = cid
                    if core[q]:
                        queue.append(q)
    return [-1 if lab is None else lab for lab in labels]


def labels_of(clusters, noise, n):
    lab = np.full(n, -2)
    for c, idx in enumerate(clusters):
        lab[idx] = c
    lab[noise] = -1
    assert not (lab == -2).any()
    return lab


def partition(labels):
    groups = {}
    for i, lab in enumerate(labels):
        if lab >= 0:
            groups.setdefault(lab, set()).add(i)
    return sorted(frozenset(g) for g in groups.values()), {i for i, l in enumerate(labels) if l < 0}


def scan_from(ranges, angles):
    ranges = np.asarray(ranges, float)
    return LaserScan(PlanarPose(0, 0, 0), angles[0], angles[-1], ranges)


class TestPassthrough:
    def test_no_returns(self):
        scan = LaserScan(PlanarPose(0, 0), -1.0, 1.0, np.full(11, 8.0))
        assert passthrough_filter(scan, PassthroughConfig()).shape == (0, 2)

    def test_single_return(self):
        r = np.full(3, 8.0)
        r[1] = 1.0
        scan = LaserScan(PlanarPose(0, 0), -0.1, 0.1, r)
        np.testing.assert_allclose(passthrough_filter(scan, PassthroughConfig()), [[1.0, 0.0]],
                                   atol=1e-15)

    def test_angle_gate(self):
        scan = LaserScan(PlanarPose(0, 0), math.radians(-170), math.radians(170), [1.0, 1.0])
        cfg = PassthroughConfig((-math.pi / 2, math.pi / 2), (0.2, 2.5))
        assert len(passthrough_filter(scan, cfg)) == 0

    def test_mount_transform(self):
        scan = LaserScan(PlanarPose(0, 0), -0.1, 0.1, [8.0, 1.0, 8.0],
                         mount=PlanarPose(-0.3, 0.0, math.pi))
        np.testing.assert_allclose(passthrough_filter(scan, PassthroughConfig()),
                                   [[-1.3, 0.0]], atol=1e-12)

    @given(st.lists(st.floats(0.01, 8.0), min_size=2, max_size=200))
    def test_outputs_inside_windows(self, ranges):
        scan = LaserScan(PlanarPose(0, 0), -math.pi, math.pi, ranges)
        cfg = PassthroughConfig()
        pts = passthrough_filter(scan, cfg)
        assert len(pts) <= len(ranges)
        r = np.hypot(pts[:, 0], pts[:, 1])
        a = np.arctan2(pts[:, 1], pts[:, 0])
        assert np.all((r >= cfg.distance_window[0] - 1e-12) & (r <= cfg.distance_window[1] + 1e-12))
        assert np.all((a >= cfg.angle_window[0] - 1e-12) & (a <= cfg.angle_window[1] + 1e-12))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            PassthroughConfig((1, -1), (0.2, 2.5))
        with pytest.raises(ValueError):
            ClusterParams(0.0, 3)
        with pytest.raises(ValueError):
            ClusterParams(0.1, 1)


class TestDbscan:
    def test_two_clumps(self):
        a = np.array([[0, 0], [0.05, 0], [0, 0.05], [0.05, 0.05]])
        pts = np.vstack([a, a + [1.0, 0]])
        clusters, noise = dbscan(pts, ClusterParams(0.1, 3))
        assert [list(c) for c in clusters] == [[0, 1, 2, 3], [4, 5, 6, 7]]
        assert len(noise) == 0
        assert textbook_dbscan(pts, 0.1, 3) == [0] * 4 + [1] * 4

    def test_isolated_point_is_noise(self):
        clusters, noise = dbscan([[0.0, 0.0]], ClusterParams(0.1, 3))
        assert clusters == [] and list(noise) == [0]

    def test_empty(self):
        clusters, noise = dbscan(np.zeros((0, 2)), ClusterParams())
        assert clusters == [] and len(noise) == 0

    def test_eps_is_inclusive(self):
        pts = [[0, 0], [1, 0], [2, 0]]
        clusters, _ = dbscan(pts, ClusterParams(1.0, 3))
        assert [list(c) for c in clusters] == [[0, 1, 2]]

    def test_border_goes_to_first_cluster(self):
        # point 3 (x=1) is a border point of both cores 0 (x=2) and 4 (x=0)
        pts = [[2, 0], [2.3, 0], [2.6, 0], [1, 0], [0, 0], [-0.3, 0], [-0.6, 0]]
        clusters, noise = dbscan(pts, ClusterParams(1.0, 4))
        lab = labels_of(clusters, noise, 7)
        assert list(lab) == textbook_dbscan(pts, 1.0, 4) == [0, 0, 0, 0, 1, 1, 1]

    @settings(max_examples=200)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_matches_textbook_exactly(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(0, 31))
        pts = rng.uniform(0, 1, (n, 2))
        eps, m = float(rng.uniform(0.02, 0.4)), int(rng.integers(2, 7))
        clusters, noise = dbscan(pts, ClusterParams(eps, m))
        assert list(labels_of(clusters, noise, n)) == textbook_dbscan(pts, eps, m)

    @settings(max_examples=100)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_lattice_ties(self, seed):
        # integer coordinates put many pairs at exactly eps
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 31))
        pts = rng.integers(0, 6, (n, 2)).astype(float)
        eps, m = float(rng.integers(1, 3)), int(rng.integers(2, 6))
        clusters, noise = dbscan(pts, ClusterParams(eps, m))
        assert list(labels_of(clusters, noise, n)) == textbook_dbscan(pts, eps, m)

    @settings(max_examples=50)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_core_partition_matches_sklearn(self, seed):
        sk = pytest.importorskip("sklearn.cluster")
        rng = np.random.default_rng(seed)
        pts = rng.uniform(0, 1, (int(rng.integers(1, 31)), 2))
        eps, m = float(rng.uniform(0.02, 0.4)), int(rng.integers(2, 7))
        model = sk.DBSCAN(eps=eps, min_samples=m).fit(pts)
        core = set(model.core_sample_indices_.tolist())
        clusters, noise = dbscan(pts, ClusterParams(eps, m))
        ours = labels_of(clusters, noise, len(pts))
        assert set(np.flatnonzero(model.labels_ == -1)) == set(noise.tolist())
        mine = partition([ours[i] if i in core else -1 for i in range(len(pts))])
        theirs = partition([model.labels_[i] if i in core else -1 for i in range(len(pts))])
        assert mine == theirs

    @settings(max_examples=60)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_order_invariance(self, seed):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(0, 1, (int(rng.integers(1, 31)), 2))
        eps, m = float(rng.uniform(0.05, 0.3)), int(rng.integers(2, 5))
        perm = rng.permutation(len(pts))
        c1, n1 = dbscan(pts, ClusterParams(eps, m))
        c2, n2 = dbscan(pts[perm], ClusterParams(eps, m))
        # core-connected components cannot depend on order; compare by core members
        nb = np.hypot(*(pts[:, None] - pts[None]).transpose(2, 0, 1)) <= eps
        core = nb.sum(1) >= m
        a = {frozenset(i for i in c if core[i]) for c in c1}
        b = {frozenset(int(perm[i]) for i in c if core[perm[i]]) for c in c2}
        assert a == b
        assert set(n1.tolist()) == {int(perm[i]) for i in n2}


class TestAssociate:
    def track(self, i, x, y, t=0.0):
        return TrackedCentroid(i, np.array([x, y]), t)

    def test_within_gate(self):
        tracks, matched = associate([self.track(0, 1, 0)], [(1.05, 0)], now=0.1)
        assert matched == [0]
        np.testing.assert_allclose(tracks[0].position, [1.05, 0])

    def test_outside_gate(self):
        tracks, matched = associate([self.track(0, 1, 0)], [(1.3, 0)], now=0.1)
        assert matched == []
        np.testing.assert_allclose(tracks[0].position, [1.0, 0.0])

    def test_crossed_pair_is_globally_minimal(self):
        tracks = [self.track(0, 1.0, 0.1), self.track(1, 1.0, -0.1)]
        cents = [np.array([1.02, -0.06]), np.array([0.97, 0.08])]
        out, matched = associate(tracks, cents, now=0.1)
        best = min(permutations(range(2)),
                   key=lambda p: sum(np.hypot(*(cents[p[k]] - tracks[k].position)) for k in range(2)))
        for k in range(2):
            np.testing.assert_allclose(out[k].position, cents[best[k]])
        assert sorted(matched) == [0, 1]

    @settings(max_examples=100)
    @given(st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), max_size=2),
           st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), max_size=5))
    def test_no_match_beyond_gate(self, tr, cents):
        tracks = [self.track(i, *p) for i, p in enumerate(tr)]
        before = {t.id: t.position.copy() for t in tracks}
        out, matched = associate(tracks, cents, coherence=0.2, now=0.1)
        for t in out:
            if t.id in matched:
                assert np.hypot(*(t.position - before[t.id])) <= 0.2
        assert len(out) <= 2

    def test_stale_tracks_dropped(self):
        tracks, _ = associate([self.track(0, 1, 0, t=0.0)], [], now=0.6)
        assert tracks == []

    def test_spawn_pair_from_empty(self):
        cents = [(1.0, 0.12), (1.0, -0.12), (2.0, 1.0)]
        tracks, _ = associate([], cents, now=0.0)
        assert len(tracks) == 2
        np.testing.assert_allclose(sorted(t.position[1] for t in tracks), [-0.12, 0.12])

    def test_no_spawn_when_two_exist(self):
        tracks = [self.track(0, 1, 0.1), self.track(1, 1, -0.1)]
        out, _ = associate(tracks, [(1, 0.1), (1, -0.1), (1.2, 0.3)], now=0.1)
        assert [t.id for t in out] == [0, 1]

    def test_respawn_next_to_lone_track(self):
        out, _ = associate([self.track(0, 1, 0.1)], [(1, 0.1), (1.0, -0.15), (3.0, 0)], now=0.1,
                           next_id=5)
        assert [t.id for t in out] == [0, 5]
        np.testing.assert_allclose(out[1].position, [1.0, -0.15])


class TestHumanEstimate:
    def test_midpoint(self):
        e = human_pose_estimate([TrackedCentroid(0, np.array([1, 0.2]), 0),
                                 TrackedCentroid(1, np.array([1, -0.2]), 0)])
        assert e.valid and (e.pose.x, e.pose.y) == (1.0, 0.0)
        e = human_pose_estimate([TrackedCentroid(0, np.array([0.9, 0.15]), 0),
                                 TrackedCentroid(1, np.array([1.1, -0.15]), 0)])
        assert (e.pose.x, e.pose.y) == pytest.approx((1.0, 0.0))

    def test_invalid(self):
        assert not human_pose_estimate([TrackedCentroid(0, np.array([1, 0]), 0)]).valid
        far = [TrackedCentroid(0, np.array([1, 1]), 0), TrackedCentroid(1, np.array([1, -1]), 0)]
        assert not human_pose_estimate(far).valid


class TestLegTracker:
    def scan(self, legs, t=0.0):
        world = World((-5, -5, 5, 5))
        discs = [(x, y, 0.06) for x, y in legs]
        return raycast(world, PlanarPose(0, 0, 0), BeamConfig(), 0.0, extra_discs=discs, t=t)

    def test_tracks_two_legs(self):
        tracker = LegTracker()
        est, n_pts, n_cl = tracker.update(self.scan([(1.0, 0.12), (1.0, -0.12)]))
        assert est.valid and n_cl == 2 and n_pts > 10
        # centroid of the visible arc sits slightly in front of each disc centre
        assert est.pose.y == pytest.approx(0.0, abs=1e-9)
        assert 0.93 < est.pose.x < 1.0

    def test_follows_motion_and_rejects_wide_clusters(self):
        tracker = LegTracker()
        tracker.update(self.scan([(1.0, 0.12), (1.0, -0.12)], 0.0))
        est, _, _ = tracker.update(self.scan([(1.1, 0.12), (1.1, -0.12)], 0.05))
        assert est.valid and est.pose.x > 1.0
        assert [t.age for t in tracker.tracks] == [2, 2]
        pts = np.column_stack([np.linspace(0.5, 1.5, 40), np.zeros(40)])
        assert leg_centroids(pts, [np.arange(40)]) == []

    def test_csv_roundtrip(self, tmp_path):
        scans = [self.scan([(1.0, 0.12), (1.0, -0.12)], t) for t in (0.0, 0.05)]
        write_scan_csv(scans, tmp_path / "scan.csv")
        back = read_scan_csv(tmp_path / "scan.csv")
        assert len(back) == 2
        for a, b in zip(scans, back):
            assert a.timestamp == b.timestamp
            np.testing.assert_array_equal(a.ranges, b.ranges)
            np.testing.assert_array_equal(a.angles, b.angles)
