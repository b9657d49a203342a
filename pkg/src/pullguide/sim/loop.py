"""Closed-loop tick: perception, adaptive pulling, guidance, impedance,
base admittance, end-effector balance and human motion."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..admittance import AdmittanceParams, BaseCommand, BaseTorque, admittance_step
from ..geometry import PlanarPose, PoseHistory, TaskPose
from ..guidance import (GuidanceDistances, GuidanceOutput, NoPath, OccupancyGrid,
                        PullingParams, WaypointPlan, base_gain, guidance_step,
                        lateral_stiffness, plan_from_points, plan_waypoints,
                        pulling_vector, saturate, virtual_torques)
from ..impedance import (AxisGains, CartesianImpedance, StiffnessBasis, compose_matrices,
                         impedance_wrench, motion_basis)
from ..perception import ClusterParams, LegTracker, PassthroughConfig
from .config import Scenario
from .human import DriftScript, HumanModel, human_step, subject_profile
from .metrics import Metrics, metrics
from .robot import ee_step
from .trace import Trace
from .world import BeamConfig, MovingDisc, World, raycast


@dataclass
class SimContext:
    """Everything fixed for the duration of a run."""

    scenario: Scenario
    world: World
    collision_grid: OccupancyGrid
    dist: GuidanceDistances
    pulling: PullingParams
    admittance: AdmittanceParams
    beams: BeamConfig
    mount: PlanarPose
    start: PlanarPose
    goal: PlanarPose
    planner_inflation: float


@dataclass
class SimState:
    tick: int
    base: PlanarPose
    cmd: BaseCommand
    plan: WaypointPlan
    progress: int
    base_hist: PoseHistory
    ee_hist: PoseHistory
    tracker: LegTracker
    human: HumanModel
    guidance: GuidanceOutput
    X_d: TaskPose
    ee: TaskPose
    basis: StiffnessBasis
    imp: CartesianImpedance
    laser_rng: np.random.Generator
    y_adaptive: float = 0.0
    X_H: PlanarPose | None = None
    last_valid_t: float = -math.inf
    h_valid: bool = False
    scan_points: int = 0
    scan_clusters: int = 0
    last_replan_t: float = 0.0
    done: bool = False
    trace: Trace = field(default_factory=Trace)

    @property
    def t(self) -> float:
        return self.tick * self.ctx_dt

    ctx_dt: float = 0.01


def build_world(sc: Scenario) -> World:
    w = sc.world
    if w.grid_file is not None:
        grid = OccupancyGrid.load(Path(sc.base_dir) / w.grid_file)
        world = World.from_grid(grid)
        world.resolution = w.resolution if w.resolution else grid.resolution
        return world
    moving = [MovingDisc(tuple(m["start"]), tuple(m["velocity"]), m["radius"],
                         m.get("t_start", 0.0), m.get("t_end", math.inf))
              for m in w.moving_discs]
    return World(tuple(w.bounds), np.array(w.segments, dtype=float).reshape(-1, 4),
                 np.array(w.discs, dtype=float).reshape(-1, 3), moving, w.resolution)


def make_drift(sc: Scenario) -> DriftScript:
    drift = dict(sc.human.drift)
    kind = drift.pop("kind", "none")
    if kind == "profile":
        return subject_profile(sc.sim.seed)
    return DriftScript(kind, seed=sc.sim.seed, **drift)


def initialize(sc: Scenario) -> tuple[SimContext, SimState]:
    """Set up world, plan and initial poses with the human at rest behind the robot."""
    world = build_world(sc)
    s = sc.sim
    start = PlanarPose(*sc.start)
    goal = PlanarPose(*sc.goal)
    static_grid = world.occupancy_grid(0.0)
    collision_grid = static_grid.inflate(s.collision_inflation)
    planner_inflation = s.collision_inflation + s.planner_margin
    g = sc.guidance
    if sc.path is not None:
        pts = [tuple(p) for p in sc.path]
        if math.hypot(pts[0][0] - start.x, pts[0][1] - start.y) > 1e-9:
            pts.insert(0, (start.x, start.y))
        plan = plan_from_points(pts, goal, g.waypoint_spacing)
    else:
        plan = plan_waypoints(static_grid, start, goal, planner_inflation, g.waypoint_spacing)

    dist = GuidanceDistances(g.D1, g.D2, g.D3, g.hand_height, g.laser_height)
    pulling = PullingParams(sc.pulling.d_stop, sc.pulling.eta, sc.pulling.zeta_l,
                            sc.pulling.gamma, sc.pulling.kappa)
    adm = AdmittanceParams(tuple(sc.admittance.M), tuple(sc.admittance.D), s.dt,
                           tuple(sc.admittance.limits))
    L = sc.laser
    beams = BeamConfig(L.angle_min, L.angle_max, L.n_beams, L.max_range)
    ctx = SimContext(sc, world, collision_grid, dist, pulling, adm, beams,
                     PlanarPose(*L.mount), start, goal, planner_inflation)

    base_hist = PoseHistory(s.history_capacity, s.history_min_spacing)
    ee_hist = PoseHistory(s.history_capacity, s.history_min_spacing)
    base_hist.check_capacity(dist.max_lookback)
    ee_hist.check_capacity(dist.max_lookback)

    out = guidance_step(plan, start, base_hist, ee_hist, 0.0, dist, start, 0)
    X_d = out.X_EE_des_hat
    P = sc.perception
    tracker = LegTracker(
        PassthroughConfig(tuple(math.radians(a) for a in P.angle_window_deg),
                          tuple(P.distance_window)),
        ClusterParams(P.eps, P.min_pts), P.coherence, P.stale_after, P.max_leg_width,
        tuple(P.leg_gap))
    h = sc.human
    human = HumanModel.at_rest(
        X_d.position, start.theta, hand_height=g.hand_height,
        shoulder_offset=tuple(h.shoulder_offset), hand_offset=tuple(h.hand_offset),
        K_arm=h.K_arm, preferred_speed=h.preferred_speed, pursuit_gain=h.pursuit_gain,
        velocity_tau=h.velocity_tau, max_speed=h.max_speed,
        stance_half_width=h.stance_half_width, gait_amplitude=h.gait_amplitude,
        stride_length=h.stride_length, drift=make_drift(sc))
    basis = motion_basis(np.zeros(3), np.array([math.cos(start.theta), math.sin(start.theta), 0.0]))
    imp = _impedance(sc, basis, 0.0)
    state = SimState(0, start, BaseCommand(), plan, 0, base_hist, ee_hist, tracker, human,
                     out, X_d, X_d, basis, imp,
                     np.random.default_rng([int(s.seed), 0x1A5E7]), ctx_dt=s.dt)
    base_hist.append(0.0, start.to_task(0.0))
    return ctx, state


def _impedance(sc: Scenario, basis: StiffnessBasis, k_y: float) -> CartesianImpedance:
    imp = sc.impedance
    return compose_matrices(basis, AxisGains(imp.k_x, k_y, imp.k_z, imp.damping_ratio),
                            imp.k_yaw)


def _perceive(ctx: SimContext, st: SimState, t: float) -> None:
    b, m = st.base, ctx.mount
    c, s = math.cos(b.theta), math.sin(b.theta)
    sensor = PlanarPose(b.x + c * m.x - s * m.y, b.y + s * m.x + c * m.y, b.theta + m.theta)
    r = ctx.scenario.laser.leg_radius
    legs = np.column_stack([st.human.legs(), [r, r]])
    scan = raycast(ctx.world, sensor, ctx.beams, ctx.scenario.laser.noise_sigma,
                   st.laser_rng, legs, t, m)
    est, st.scan_points, st.scan_clusters = st.tracker.update(scan)
    st.h_valid = est.valid
    if est.valid:
        ex, ey = est.pose.x, est.pose.y
        st.X_H = PlanarPose(b.x + c * ex - s * ey, b.y + s * ex + c * ey, 0.0)
        st.last_valid_t = t


def _replan(ctx: SimContext, st: SimState, t: float) -> None:
    grid = ctx.world.occupancy_grid(t)
    try:
        st.plan = plan_waypoints(grid, st.base, ctx.goal, ctx.planner_inflation,
                                 ctx.scenario.guidance.waypoint_spacing)
        st.progress = 0
        st.guidance = _guide(ctx, st)
    except NoPath:
        pass
    st.last_replan_t = t


def _guide(ctx: SimContext, st: SimState) -> GuidanceOutput:
    out = guidance_step(st.plan, st.base, st.base_hist, st.ee_hist, st.y_adaptive,
                        ctx.dist, ctx.start, st.progress)
    st.progress = out.target_index
    return out


def base_violates(ctx: SimContext, base: PlanarPose, t: float) -> bool:
    if not ctx.collision_grid.is_free_world(base.x, base.y):
        return True
    infl = ctx.scenario.sim.collision_inflation
    for m in ctx.world.moving:
        cx, cy = m.center(t)
        if math.hypot(base.x - cx, base.y - cy) <= m.radius + infl:
            return True
    return False


def sim_step(ctx: SimContext, st: SimState) -> SimState:
    """Advance the closed loop by one tick and append a trace record."""
    sc = ctx.scenario
    s = sc.sim
    dt = s.dt
    t = st.tick * dt

    if ctx.world.dynamic and t - st.last_replan_t >= sc.guidance.replan_period - 1e-12:
        _replan(ctx, st, t)
    if st.tick % sc.laser.scan_every == 0:
        _perceive(ctx, st, t)

    # adaptive pulling from the previous desired human pose
    X_H_des = st.guidance.X_H_des
    X_H = st.X_H if st.X_H is not None else X_H_des
    p = pulling_vector(X_H_des, PlanarPose(X_H.x, X_H.y, X_H_des.theta))
    p_sat = saturate(p)
    alpha = base_gain(float(p_sat[0]), ctx.pulling.d_stop)
    if t - st.last_valid_t > sc.perception.tracking_grace:
        alpha = 0.0
    if s.adaptive:
        if st.h_valid:
            tau = sc.pulling.y_filter_tau
            blend = 1.0 - math.exp(-dt / tau) if tau > 0.0 else 1.0
            st.y_adaptive += blend * (float(p_sat[1]) - st.y_adaptive)
        k_y = lateral_stiffness(st.y_adaptive, ctx.pulling)
    else:
        st.y_adaptive = 0.0
        k_y = 0.0

    # guidance was computed for the current base pose at the end of the last tick
    out = st.guidance
    X_d_new = out.X_EE_des.translate_local(0.0, st.y_adaptive, 0.0)
    st.basis = motion_basis(st.X_d.position, X_d_new.position, st.basis,
                            sc.impedance.eps_motion)
    st.imp = _impedance(sc, st.basis, k_y)

    g = sc.guidance
    tau_vir = virtual_torques(st.base, out.X_B_target, g.F_des, alpha, g.negate_yaw)
    b = st.base
    c, sn = math.cos(b.theta), math.sin(b.theta)
    fx, fy = st.human.arm_force[0] * s.ext_gain, st.human.arm_force[1] * s.ext_gain
    tau_ext = BaseTorque(c * fx + sn * fy, -sn * fx + c * fy, 0.0)
    st.cmd = admittance_step(ctx.admittance, st.cmd, tau_vir, tau_ext)
    v = st.cmd
    st.base = PlanarPose(b.x + (c * v.v_x - sn * v.v_y) * dt,
                         b.y + (sn * v.v_x + c * v.v_y) * dt,
                         b.theta + v.omega * dt)

    anchor = st.human.anchor()
    ee = ee_step(X_d_new, st.imp, anchor, st.human.K_arm, s.max_ee_displacement,
                 (st.base.x, st.base.y), s.reach)
    V_d = np.append((X_d_new.position - st.X_d.position) / dt, 0.0)
    V = np.append((ee.position - st.ee.position) / dt, 0.0)
    wrench = impedance_wrench(X_d_new, ee, V_d, V, st.imp)
    st.human = human_step(st.human, ee, dt)
    st.X_d, st.ee = X_d_new, ee

    t_next = (st.tick + 1) * dt
    st.base_hist.append(t_next, st.base.to_task(0.0))
    st.ee_hist.append(t_next, out.X_EE_des)
    # desired poses for the new base pose; the record below is one snapshot at t_next
    out = st.guidance = _guide(ctx, st)

    violation = base_violates(ctx, st.base, t_next)
    reached = math.hypot(st.base.x - ctx.goal.x, st.base.y - ctx.goal.y) <= s.goal_tolerance \
        and st.progress >= len(st.plan.waypoints) - 1
    hx = st.X_H.x if st.X_H is not None else math.nan
    hy = st.X_H.y if st.X_H is not None else math.nan
    st.trace.append((
        t_next,
        st.base.x, st.base.y, st.base.theta,
        v.v_x, v.v_y, v.omega,
        out.X_B_target.x, out.X_B_target.y, float(out.target_index),
        out.X_EE_des.x, out.X_EE_des.y, out.X_EE_des.z, out.X_EE_des.yaw,
        out.X_EE_des_hat.x, out.X_EE_des_hat.y, out.X_EE_des_hat.z, out.X_EE_des_hat.yaw,
        ee.x, ee.y, ee.z,
        out.X_H_des.x, out.X_H_des.y, out.X_H_des.theta,
        hx, hy, 1.0 if st.h_valid else 0.0,
        float(st.human.body[0]), float(st.human.body[1]),
        float(p[0]), float(p[1]), float(p_sat[0]), float(p_sat[1]),
        alpha, st.y_adaptive, k_y,
        tau_vir.f_x, tau_vir.f_y, tau_vir.mu_z,
        tau_ext.f_x, tau_ext.f_y,
        float(wrench.force[0]), float(wrench.force[1]), float(wrench.force[2]),
        float(st.human.arm_force[0]), float(st.human.arm_force[1]),
        float(st.scan_points), float(st.scan_clusters), float(len(st.tracker.tracks)),
        1.0 if out.warmup else 0.0, 1.0 if violation else 0.0, 1.0 if reached else 0.0,
    ))
    st.tick += 1
    st.done = reached or t_next >= s.max_time - 1e-9
    return st


def run(sc: Scenario) -> tuple[Trace, Metrics]:
    """Run a scenario to the goal or its time limit."""
    ctx, st = initialize(sc)
    while not st.done:
        sim_step(ctx, st)
    return st.trace, metrics(st.trace, sc.sim.footprint_half_width)
