"""Synthetic hand motion, training-data generation, closed-loop harness."""

import platform
import time

import numpy as np

from . import __version__, accel, bounds as bounds_mod, ocp, prediction, refpath, so3
from .config import ScenarioBundle, TrainingConfig, bundle_to_dict
from .errors import OutOfRange
from .kinematics import fk_with_jacobian, forward_kinematics
from .prediction import HumanObservation
from .simlog import LogRow, SimLog


def min_jerk_trajectory(p0, pf, duration, t):
    """Minimum-jerk point-to-point motion; returns (position, velocity)."""
    if t < 0.0 or t > duration:
        raise OutOfRange(f"t={t} outside [0, {duration}]")
    p0 = np.asarray(p0, dtype=float)
    pf = np.asarray(pf, dtype=float)
    tau = t / duration
    s = 10.0 * tau**3 - 15.0 * tau**4 + 6.0 * tau**5
    ds = (30.0 * tau**2 - 60.0 * tau**3 + 30.0 * tau**4) / duration
    return p0 + s * (pf - p0), ds * (pf - p0)


class HandModel:
    """Piecewise minimum-jerk hand motion with holds between legs.

    The hand keeps a constant grasp-facing orientation: profile.rpy is a
    small offset applied to the reference frame passed as base_rotation
    (the path-end orientation once the scene is built).
    """

    def __init__(self, profile, base_rotation=None):
        self.profile = profile
        base = np.eye(3) if base_rotation is None else base_rotation
        self.R = base @ so3.rotation_from_rpy(*profile.rpy)
        self._legs = []
        start = np.asarray(profile.rest, dtype=float)
        for leg in profile.legs:
            self._legs.append((leg.t0, leg.t1, start, np.asarray(leg.target, dtype=float)))
            start = np.asarray(leg.target, dtype=float)

    def sample(self, t) -> HumanObservation:
        p = np.asarray(self.profile.rest, dtype=float)
        v = np.zeros(3)
        for t0, t1, p0, p1 in self._legs:
            if t < t0:
                break
            if t <= t1:
                p, v = min_jerk_trajectory(p0, p1, t1 - t0, t - t0)
                break
            p = p1
        return HumanObservation(p=p, v=v, R=self.R, t=float(t))


def generate_training_data(training: TrainingConfig, seed):
    """Synthetic reach trajectories labeled with their goal.

    Each trajectory starts at rest on a sphere around the rest center,
    follows a minimum-jerk reach to a goal drawn uniformly from the box,
    and is subsampled at the given rate (both endpoints included). Targets
    carry i.i.d. Gaussian noise.
    """
    rng = np.random.default_rng(seed)
    n_samples = int(round(training.traj_duration * training.sample_rate)) + 1
    times = np.arange(n_samples) / training.sample_rate
    X = []
    goals = []
    for _ in range(training.n_trajectories):
        goal = training.box_center + rng.uniform(-1.0, 1.0, 3) * training.box_half
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        start = training.rest_center + training.rest_radius * direction
        for t in times:
            p, v = min_jerk_trajectory(start, goal, training.traj_duration, t)
            X.append(np.concatenate((p, v)))
            goals.append(goal + rng.normal(0.0, training.noise_sigma, 3))
    return np.asarray(X), np.asarray(goals)


def build_scene(bundle: ScenarioBundle, models):
    """Reference path and planner for a scenario's initial conditions."""
    sc = bundle.scenario
    hand = HandModel(sc.hand)
    obs0 = hand.sample(0.0)
    p_r0, R_r0 = forward_kinematics(bundle.chain, sc.q0)
    pred0 = prediction.predict_handover_location(models, obs0)
    hand_dir = obs0.p - pred0.mu
    hand_dir = hand_dir / np.linalg.norm(hand_dir)
    path = refpath.build_reference_path(p_r0, sc.p_ra, pred0.mu, R_r0, hand_dir)
    # grasp-facing hand orientation: small offset from the path-end reference
    hand = HandModel(sc.hand, base_rotation=so3.exp_map(path.rotvecs[-1]))
    obs0 = hand.sample(0.0)
    goal0 = prediction.adapt_goal(pred0, obs0, path, bundle.predictor)
    planner = ocp.make_planner(
        chain=bundle.chain,
        path=path,
        models=models,
        q0=sc.q0,
        ocp_cfg=bundle.ocp,
        predictor_params=bundle.predictor,
        sync_params=bundle.sync,
        bound_cfg=bundle.bounds,
        initial_goal_phi=goal0.coords.phi,
    )
    planner.goal = goal0
    return hand, planner, goal0


def _make_row(t, planner, goal, status, solve_ms):
    q = planner.x[0].copy()
    dq = planner.x[1].copy()
    p_r, R_r, _ = fk_with_jacobian(planner.chain, q)
    rpy = so3.rpy_from_rotation(R_r)
    phi_c = float(planner.xi[0])
    ep = refpath.decompose_position_error(p_r, planner.path, phi_c, clamp=True)
    eo = refpath.decompose_orientation_error(R_r, planner.path, phi_c, clamp=True)
    bound_vals = planner.bound_set.eval_all(phi_c)
    widths = planner.bound_set.c[:, 1] - planner.bound_set.c[:, 0]  # at the anchor
    plan = planner.plan
    return LogRow(
        t=float(t),
        q=q,
        dq=dq,
        p_r=p_r,
        rpy_r=np.array(rpy),
        phi_c=phi_c,
        dphi=float(planner.xi[1]),
        phi_h=goal.phi_h,
        phi_ho=goal.coords.phi,
        w_pred=goal.w_pred,
        e_orth=np.array([ep.e1, ep.e2, eo.e1, eo.e2]),
        bound_vals=bound_vals,
        status=status,
        solve_ms=solve_ms,
        e_par_p=ep.e_par,
        e_par_o=eo.e_par,
        d_pred=goal.d_pred,
        goal_e=np.array([goal.coords.e1, goal.coords.e2]),
        ori_targets=np.asarray(goal.ori_targets, dtype=float),
        anchor_widths=widths,
        continuity_residual=planner.continuity_residual,
        corridor_overshoot=planner.corridor_overshoot,
        qp_iterations=plan.qp_iterations if plan else 0,
        objective=plan.objective if plan else 0.0,
        max_slack=plan.max_slack if plan else 0.0,
        dynamics_residual=plan.dynamics_residual if plan else 0.0,
    )


def state_snapshot(planner, status="ok"):
    """Planner state as the wire-format dict served to UI clients."""
    goal = planner.goal
    p_r, R_r, _ = fk_with_jacobian(planner.chain, planner.x[0])
    rpy_r = so3.rpy_from_rotation(R_r)
    phi_c = float(planner.xi[0])
    ep = refpath.decompose_position_error(p_r, planner.path, phi_c, clamp=True)
    eo = refpath.decompose_orientation_error(R_r, planner.path, phi_c, clamp=True)
    vals = planner.bound_set.eval_all(phi_c)
    return {
        "type": "state",
        "t": round(planner.t, 9),
        "q": [float(v) for v in planner.x[0]],
        "p_r": [float(v) for v in p_r],
        "rpy_r": [float(v) for v in rpy_r],
        "phi_c": phi_c,
        "phi_h": goal.phi_h,
        "phi_ho": goal.coords.phi,
        "w_pred": goal.w_pred,
        "bounds": {
            "p1": [float(vals[0, 0]), float(vals[0, 1])],
            "p2": [float(vals[1, 0]), float(vals[1, 1])],
            "o1": [float(vals[2, 0]), float(vals[2, 1])],
            "o2": [float(vals[3, 0]), float(vals[3, 1])],
        },
        "e_orth": [ep.e1, ep.e2, eo.e1, eo.e2],
        "status": status,
    }


def run_closed_loop_stream(bundle: ScenarioBundle, models, stream):
    """Batch planner pass over a recorded (t, p, rpy) hand stream.

    Velocities are finite-differenced from consecutive samples, exactly as
    the interactive bridge does, so a lockstep replay of the same stream
    must reproduce these snapshots bit for bit.
    """
    stream = [
        (float(t), np.asarray(p, dtype=float), np.asarray(rpy, dtype=float))
        for t, p, rpy in stream
    ]
    sc = bundle.scenario
    t0, p0, _ = stream[0]
    probe = HumanObservation(p=p0, v=np.zeros(3), R=np.eye(3), t=t0)
    pred0 = prediction.predict_handover_location(models, probe)
    p_r0, R_r0 = forward_kinematics(bundle.chain, sc.q0)
    hand_dir = p0 - pred0.mu
    hand_dir = hand_dir / np.linalg.norm(hand_dir)
    path = refpath.build_reference_path(p_r0, sc.p_ra, pred0.mu, R_r0, hand_dir)
    base_R = so3.exp_map(path.rotvecs[-1])

    def observe(t, p, rpy, vel):
        return HumanObservation(p=p, v=vel, R=base_R @ so3.rotation_from_rpy(*rpy), t=t)

    goal0 = prediction.adapt_goal(pred0, observe(*stream[0], np.zeros(3)), path, bundle.predictor)
    planner = ocp.make_planner(
        chain=bundle.chain,
        path=path,
        models=models,
        q0=sc.q0,
        ocp_cfg=bundle.ocp,
        predictor_params=bundle.predictor,
        sync_params=bundle.sync,
        bound_cfg=bundle.bounds,
        initial_goal_phi=goal0.coords.phi,
    )
    planner.goal = goal0
    snapshots = []
    prev = None
    vel = np.zeros(3)
    for t, p, rpy in stream:
        if prev is not None and t > prev[0]:
            vel = (p - prev[1]) / (t - prev[0])
        prev = (t, p)
        plan, _ = ocp.mpc_step(planner, observe(t, p, rpy, vel))
        snapshots.append(state_snapshot(planner, plan.status))
    return snapshots


def run_closed_loop(bundle: ScenarioBundle, models) -> SimLog:
    """Step hand and planner on the control grid until grasp or timeout."""
    sc = bundle.scenario
    ts = bundle.ocp.ts
    wall_start = time.perf_counter()
    hand, planner, goal0 = build_scene(bundle, models)

    rows = [_make_row(0.0, planner, goal0, "init", 0.0)]
    hand_stream = []
    n_steps = int(round(sc.duration / ts))
    grasped = False
    t_grasp = None
    for k in range(n_steps):
        t = k * ts
        obs = hand.sample(t)
        hand_stream.append((t, obs.p.copy(), sc.hand.rpy.copy()))
        plan, _ = ocp.mpc_step(planner, obs)

        t_next = (k + 1) * ts
        obs_next = hand.sample(t_next)
        goal_next = prediction.evaluate_goal(models, obs_next, planner.path, bundle.predictor)
        p_r, _, _ = fk_with_jacobian(planner.chain, planner.x[0])
        grasped = bool(
            float(np.linalg.norm(p_r - obs_next.p)) < sc.grasp_pos_tol
            and abs(goal_next.phi_h - goal_next.coords.phi) < sc.grasp_phi_tol
        )
        status = plan.status
        if grasped:
            status = "grasp"
            t_grasp = t_next
        elif k == n_steps - 1:
            status = "timeout"
        rows.append(_make_row(t_next, planner, goal_next, status, plan.solve_ms))
        if grasped:
            break

    meta = {
        "scenario": sc.name,
        "seed": sc.seed,
        "ts": ts,
        "grasped": grasped,
        "t_grasp": t_grasp,
        "timeout": not grasped,
        "steps": len(rows) - 1,
        "wall_time_s": time.perf_counter() - wall_start,
        "backend": accel.backend_name(),
        "versions": {
            "package": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "config": bundle_to_dict(bundle),
    }
    return SimLog(rows=rows, meta=meta, hand_stream=hand_stream)
