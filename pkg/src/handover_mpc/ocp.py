"""Receding-horizon optimal control problem and planner loop.

Joint and path dynamics are jerk-driven triple integrators discretized
exactly under a first-order-hold input. States are condensed out, so the
QP decision vector stacks the input increments over the horizon plus one
L1 slack per corridor constraint:

    z = [du_1..du_N (7 each) | dv_1..dv_N | s_1..s_N (4 each)]

Cartesian errors are linearized about the warm-start trajectory; one
linearize+solve pass per control cycle (real-time iteration) by default.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import bounds as bounds_mod
from . import prediction, refpath, so3, sync
from .errors import BadWarmStart, ValidationError
from .kinematics import KinematicChain, fk_with_jacobian
from .qp import QP, QpSolution, solve_qp


def discretize_dynamics(ts):
    """Exact discretization of one scalar jerk chain under FOH input.

    Returns (Phi, Gamma0, Gamma1) with x_{i+1} = Phi x_i + G0 u_i + G1 u_{i+1}
    for state (pos, vel, acc) and input linearly interpolated between the
    endpoint jerks.
    """
    if ts <= 0:
        raise ValidationError("sample time must be positive")
    phi = np.array([[1.0, ts, ts * ts / 2.0], [0.0, 1.0, ts], [0.0, 0.0, 1.0]])
    g0 = np.array([ts**3 / 8.0, ts * ts / 3.0, ts / 2.0])
    g1 = np.array([ts**3 / 24.0, ts * ts / 6.0, ts / 2.0])
    return phi, g0, g1


def prediction_matrices(ts, n_horizon):
    """Input-to-state maps of the condensed horizon.

    SU[i, j] is the (3,) coefficient of u_j in x_i; S0[i] the coefficient
    of x_0 (= Phi^i).
    """
    phi, g0, g1 = discretize_dynamics(ts)
    s0 = np.empty((n_horizon + 1, 3, 3))
    su = np.zeros((n_horizon + 1, n_horizon + 1, 3))
    s0[0] = np.eye(3)
    for i in range(n_horizon):
        s0[i + 1] = phi @ s0[i]
        su[i + 1] = su[i] @ phi.T
        su[i + 1, i] += g0
        su[i + 1, i + 1] += g1
    return s0, su


@dataclass(frozen=True)
class OcpConfig:
    horizon: int = 10
    ts: float = 0.1
    w_par_p: float = 100.0  # tangential position error
    w_par_o: float = 10.0  # tangential orientation error
    w_xi: tuple = (10.0, 50.0, 1.0)  # desired path state tracking
    w_u: float = 1e-3
    w_v: float = 1e-3
    w_dq: float = 0.01  # joint-velocity damping (null-space settling)
    w_ddq: float = 0.002
    w_term_p: float = 500.0
    w_term_o: float = 50.0
    slack_penalty: float = 1e3
    sqp_iterations: int = 1
    solver_tol: float = 1e-9
    max_qp_iterations: int = 80
    dphi_limit: float = 2.0  # |path velocity| bound, m/s
    ddphi_limit: float = 10.0  # m/s^2
    v_limit: float = 200.0  # path jerk bound, m/s^3
    phi_margin: float = 0.05  # m, linear extrapolation allowed past the path start

    def __post_init__(self):
        if self.horizon < 2:
            raise ValidationError("horizon must be >= 2")
        if self.ts <= 0:
            raise ValidationError("ts must be positive")
        if self.w_term_p <= self.w_term_o:
            raise ValidationError("w_term_p must exceed w_term_o")
        weights = (self.w_par_p, self.w_par_o, *self.w_xi, self.w_u, self.w_v)
        if any(w < 0 for w in weights):
            raise ValidationError("cost weights must be nonnegative")


@dataclass
class Plan:
    X: np.ndarray  # (N+1, 3, 7) joint states (rows pos/vel/acc)
    Xi: np.ndarray  # (N+1, 3) path states
    U: np.ndarray  # (N+1, 7) jerk nodes, index 0 fixed
    V: np.ndarray  # (N+1,) path jerk nodes
    e_pos: np.ndarray  # (N+1, 3) decomposed position errors (e1, e2, par)
    e_ori: np.ndarray  # (N+1, 3)
    status: str
    objective: float
    solve_ms: float
    qp_iterations: int
    dynamics_residual: float
    max_slack: float


@dataclass
class PlannerState:
    chain: KinematicChain
    path: refpath.ReferencePath
    models: list
    ocp_cfg: OcpConfig
    predictor_params: prediction.PredictorParams
    sync_params: sync.SyncParams
    bound_cfg: bounds_mod.BoundConfig
    bound_set: bounds_mod.BoundSet
    x: np.ndarray  # (3, 7) current joint pos/vel/acc
    xi: np.ndarray  # (3,) current path state
    u_node: np.ndarray  # (7,) input node at current time
    v_node: float
    U_ws: np.ndarray  # (N, 7) warm-start inputs for stages 1..N
    V_ws: np.ndarray  # (N,)
    t: float = 0.0
    plan: Plan | None = None
    goal: prediction.AdaptedHandoverGoal | None = None
    continuity_residual: float = 0.0
    corridor_overshoot: float = 0.0  # post-hoc nonlinear bound violation


def make_planner(
    chain,
    path,
    models,
    q0,
    ocp_cfg=None,
    predictor_params=None,
    sync_params=None,
    bound_cfg=None,
    initial_goal_phi=None,
) -> PlannerState:
    ocp_cfg = ocp_cfg or OcpConfig()
    bound_cfg = bound_cfg or bounds_mod.BoundConfig()
    handover_start = float(path.breakpoints[-2])
    anchor = path.length if initial_goal_phi is None else float(initial_goal_phi)
    x = np.zeros((3, 7))
    x[0] = np.asarray(q0, dtype=float)
    n = ocp_cfg.horizon
    return PlannerState(
        chain=chain,
        path=path,
        models=models,
        ocp_cfg=ocp_cfg,
        predictor_params=predictor_params or prediction.PredictorParams(),
        sync_params=sync_params or sync.SyncParams(),
        bound_cfg=bound_cfg,
        bound_set=bounds_mod.initial_bounds(handover_start, anchor, bound_cfg),
        x=x,
        xi=np.zeros(3),
        u_node=np.zeros(7),
        v_node=0.0,
        U_ws=np.zeros((n, 7)),
        V_ws=np.zeros(n),
    )


def propagate(ts, x0, u0, U):
    """Roll the FOH dynamics over the horizon; returns (N+1, ...) states."""
    phi, g0, g1 = discretize_dynamics(ts)
    n = U.shape[0]
    out = np.empty((n + 1,) + x0.shape)
    out[0] = x0
    prev_u = u0
    for i in range(n):
        out[i + 1] = phi @ out[i] + np.multiply.outer(g0, prev_u) + np.multiply.outer(g1, U[i])
        prev_u = U[i]
    return out


def _euler_rate_inverse(roll, pitch, yaw):
    """Maps spatial angular velocity to ZYX angle rates."""
    cp, sp = np.cos(pitch), np.sin(pitch)
    cy, sy = np.cos(yaw), np.sin(yaw)
    return (
        np.array(
            [
                [cy, sy, 0.0],
                [-sy * cp, cy * cp, 0.0],
                [cy * sp, sy * sp, cp],
            ]
        )
        / cp
    )


@dataclass
class StageLinearization:
    e_pos: np.ndarray  # (3,) values (e1, e2, par)
    e_ori: np.ndarray  # (3,)
    dpos_dq: np.ndarray  # (3, 7)
    dpos_dphi: np.ndarray  # (3,)
    dori_dq: np.ndarray  # (3, 7)
    dori_dphi: np.ndarray  # (3,)
    p: np.ndarray
    R: np.ndarray


def linearize_stage(chain, path, q, phi) -> StageLinearization:
    """Nonlinear path errors and their exact first derivatives at (q, phi)."""
    phi = min(max(float(phi), 0.0), path.length)
    p, R, J = fk_with_jacobian(chain, q)
    seg = path.segment_index(phi)
    ref_p, ref_rot = refpath.eval_path(path, phi)
    t_hat = path.tangents[seg]
    b1, b2 = path.b_p1[seg], path.b_p2[seg]
    e = p - ref_p
    e_pos = np.array([b1 @ e, b2 @ e, t_hat @ e])
    B = np.vstack((b1, b2, t_hat))
    dpos_dq = B @ J[:3]
    dpos_dphi = np.array([0.0, 0.0, -1.0])

    r_proj = path.projection_frame(seg)
    r_err = R @ so3.exp_map(ref_rot).T
    rpy = so3.rpy_from_rotation(r_proj.T @ r_err @ r_proj)
    ein_rp = _euler_rate_inverse(*rpy) @ r_proj.T  # angular velocity -> angle rates
    dang_dq = ein_rp @ J[3:]  # rows (roll, pitch, yaw)
    dang_dphi = ein_rp @ (-R @ so3.right_jacobian(ref_rot) @ path.rotvec_rate(seg))
    # component order (orth-1, orth-2, tangential) = (yaw, roll, pitch)
    order = (2, 0, 1)
    return StageLinearization(
        e_pos=e_pos,
        e_ori=np.array([rpy.yaw, rpy.roll, rpy.pitch]),
        dpos_dq=dpos_dq,
        dpos_dphi=dpos_dphi,
        dori_dq=dang_dq[order, :],
        dori_dphi=dang_dphi[list(order)],
        p=p,
        R=R,
    )


class _Assembled:
    """QP plus everything needed to decode its solution."""

    def __init__(self, qp_problem, U_ws, V_ws, stage_lins, xi_bar):
        self.qp = qp_problem
        self.U_ws = U_ws
        self.V_ws = V_ws
        self.stage_lins = stage_lins
        self.xi_bar = xi_bar


def assemble_qp(state: PlannerState, goal, xi_d, bound_set, ocp_cfg=None) -> _Assembled:
    """Condensed convex QP about the warm-start trajectory."""
    cfg = ocp_cfg or state.ocp_cfg
    n = cfg.horizon
    chain, path = state.chain, state.path
    limits = chain.limits
    U_ws, V_ws = state.U_ws, state.V_ws
    if not (np.all(np.isfinite(U_ws)) and np.all(np.isfinite(V_ws))):
        raise BadWarmStart("warm-start inputs contain non-finite values")

    X_bar = propagate(cfg.ts, state.x, state.u_node, U_ws)
    Xi_bar = propagate(cfg.ts, state.xi, state.v_node, V_ws)
    if not np.all(np.isfinite(X_bar)):
        raise BadWarmStart("warm-start state trajectory diverged")

    _, su = prediction_matrices(cfg.ts, n)
    Pq, Pdq, Pddq = su[1:, 1:, 0], su[1:, 1:, 1], su[1:, 1:, 2]

    nu, nv, ns = 7 * n, n, 4 * n
    nz = nu + nv + ns
    i7 = np.eye(7)

    stage_lins = [None] * (n + 1)
    for i in range(1, n + 1):
        stage_lins[i] = linearize_stage(chain, path, X_bar[i, 0], Xi_bar[i, 0])

    H = np.zeros((nz, nz))
    gv = np.zeros(nz)

    def add_sq(row, value, weight):
        if weight == 0.0:
            return
        H[:] += (2.0 * weight) * np.outer(row, row)
        gv[:] += (2.0 * weight * value) * row

    def scalar_rows(i, lin_dq, lin_dphi):
        row = np.zeros(nz)
        row[:nu] = np.kron(Pq[i - 1], lin_dq)
        row[nu : nu + nv] = lin_dphi * Pq[i - 1]
        return row

    xi_d_arr = np.array([xi_d.phi_d, xi_d.dphi_d, xi_d.ddphi_d])
    for i in range(1, n + 1):
        lin = stage_lins[i]
        # tangential errors
        add_sq(scalar_rows(i, lin.dpos_dq[2], lin.dpos_dphi[2]), lin.e_pos[2], cfg.w_par_p)
        add_sq(scalar_rows(i, lin.dori_dq[2], lin.dori_dphi[2]), lin.e_ori[2], cfg.w_par_o)
        # desired path state tracking
        for comp, pmat in enumerate((Pq, Pdq, Pddq)):
            row = np.zeros(nz)
            row[nu : nu + nv] = pmat[i - 1]
            add_sq(row, Xi_bar[i, comp] - xi_d_arr[comp], cfg.w_xi[comp])
        # joint motion damping
        for k in range(7):
            row = np.zeros(nz)
            row[:nu] = np.kron(Pdq[i - 1], i7[k])
            add_sq(row, X_bar[i, 1, k], cfg.w_dq)
            row = np.zeros(nz)
            row[:nu] = np.kron(Pddq[i - 1], i7[k])
            add_sq(row, X_bar[i, 2, k], cfg.w_ddq)
        # input regularization (absolute inputs)
        for k in range(7):
            row = np.zeros(nz)
            row[(i - 1) * 7 + k] = 1.0
            add_sq(row, U_ws[i - 1, k], cfg.w_u)
        row = np.zeros(nz)
        row[nu + i - 1] = 1.0
        add_sq(row, V_ws[i - 1], cfg.w_v)

    # terminal tracking of the adapted handover deviations
    lin_n = stage_lins[n]
    targets_p = (goal.coords.e1, goal.coords.e2)
    for m in range(2):
        add_sq(
            scalar_rows(n, lin_n.dpos_dq[m], lin_n.dpos_dphi[m]),
            lin_n.e_pos[m] - targets_p[m],
            cfg.w_term_p,
        )
        add_sq(
            scalar_rows(n, lin_n.dori_dq[m], lin_n.dori_dphi[m]),
            lin_n.e_ori[m] - goal.ori_targets[m],
            cfg.w_term_o,
        )
    # L1 slack cost
    gv[nu + nv :] += cfg.slack_penalty

    rows_A = []
    rows_b = []

    def add_le(row, ub):
        rows_A.append(row)
        rows_b.append(ub)

    # joint state boxes over all stages, via the condensed maps
    x_lo = np.stack((limits.q_lower, -limits.dq_max, -limits.ddq_max))
    x_hi = np.stack((limits.q_upper, limits.dq_max, limits.ddq_max))
    for comp, pmat in enumerate((Pq, Pdq, Pddq)):
        amat = np.kron(pmat, i7)
        vals = X_bar[1:, comp, :].reshape(-1)
        hi = np.tile(x_hi[comp], n)
        lo = np.tile(x_lo[comp], n)
        block = np.zeros((amat.shape[0], nz))
        block[:, :nu] = amat
        rows_A.extend(block)
        rows_b.extend(hi - vals)
        rows_A.extend(-block)
        rows_b.extend(vals - lo)

    # path state boxes (phi may dip slightly below the path start; the
    # segment extrapolates linearly there and the applied state is clamped)
    xi_lo = np.array([-cfg.phi_margin, -cfg.dphi_limit, -cfg.ddphi_limit])
    xi_hi = np.array([path.length, cfg.dphi_limit, cfg.ddphi_limit])
    for comp, pmat in enumerate((Pq, Pdq, Pddq)):
        block = np.zeros((n, nz))
        block[:, nu : nu + nv] = pmat
        vals = Xi_bar[1:, comp]
        rows_A.extend(block)
        rows_b.extend(xi_hi[comp] - vals)
        rows_A.extend(-block)
        rows_b.extend(vals - xi_lo[comp])

    # input boxes (decision variables directly)
    u_hi = np.tile(limits.jerk_max, n)
    eye_u = np.zeros((nu, nz))
    eye_u[:, :nu] = np.eye(nu)
    rows_A.extend(eye_u)
    rows_b.extend(u_hi - U_ws.reshape(-1))
    rows_A.extend(-eye_u)
    rows_b.extend(U_ws.reshape(-1) + u_hi)
    eye_v = np.zeros((nv, nz))
    eye_v[:, nu : nu + nv] = np.eye(nv)
    rows_A.extend(eye_v)
    rows_b.extend(cfg.v_limit - V_ws)
    rows_A.extend(-eye_v)
    rows_b.extend(V_ws + cfg.v_limit)

    # soft corridor constraints: |error - corridor| <= slack, slack >= 0
    for i in range(1, n + 1):
        lin = stage_lins[i]
        psi = bound_set.eval_all(Xi_bar[i, 0])
        err_rows = (
            (lin.e_pos[0], scalar_rows(i, lin.dpos_dq[0], lin.dpos_dphi[0])),
            (lin.e_pos[1], scalar_rows(i, lin.dpos_dq[1], lin.dpos_dphi[1])),
            (lin.e_ori[0], scalar_rows(i, lin.dori_dq[0], lin.dori_dphi[0])),
            (lin.e_ori[1], scalar_rows(i, lin.dori_dq[1], lin.dori_dphi[1])),
        )
        for m, (val, row) in enumerate(err_rows):
            s_col = nu + nv + (i - 1) * 4 + m
            up = row.copy()
            up[s_col] = -1.0
            add_le(up, psi[m, 1] - val)
            lo = -row
            lo[s_col] = -1.0
            add_le(lo, val - psi[m, 0])
            s_row = np.zeros(nz)
            s_row[s_col] = -1.0
            add_le(s_row, 0.0)

    qp_problem = QP(H=H, g=gv, A=np.asarray(rows_A), b=np.asarray(rows_b))
    return _Assembled(qp_problem, U_ws.copy(), V_ws.copy(), stage_lins, Xi_bar)


def _decode(assembled: _Assembled, sol: QpSolution, cfg):
    n = cfg.horizon
    nu = 7 * n
    dU = sol.x[:nu].reshape(n, 7)
    dV = sol.x[nu : nu + n]
    slack = sol.x[nu + n :]
    return assembled.U_ws + dU, assembled.V_ws + dV, slack


def build_plan(state: PlannerState, U, V, sol: QpSolution, slack, solve_ms) -> Plan:
    cfg = state.ocp_cfg
    X = propagate(cfg.ts, state.x, state.u_node, U)
    Xi = propagate(cfg.ts, state.xi, state.v_node, V)
    n = cfg.horizon
    e_pos = np.zeros((n + 1, 3))
    e_ori = np.zeros((n + 1, 3))
    for i in range(n + 1):
        phi = min(max(Xi[i, 0], 0.0), state.path.length)
        p, R, _ = fk_with_jacobian(state.chain, X[i, 0])
        ep = refpath.decompose_position_error(p, state.path, phi)
        eo = refpath.decompose_orientation_error(R, state.path, phi)
        e_pos[i] = (ep.e1, ep.e2, ep.e_par)
        e_ori[i] = (eo.e1, eo.e2, eo.e_par)

    # dynamics residual of the returned trajectories (should be exact)
    phi_m, g0, g1 = discretize_dynamics(cfg.ts)
    res = 0.0
    full_U = np.vstack((state.u_node[None, :], U))
    full_V = np.concatenate(([state.v_node], V))
    for i in range(n):
        pred = phi_m @ X[i] + np.multiply.outer(g0, full_U[i]) + np.multiply.outer(g1, full_U[i + 1])
        res = max(res, float(np.abs(pred - X[i + 1]).max()))
        pred_xi = phi_m @ Xi[i] + g0 * full_V[i] + g1 * full_V[i + 1]
        res = max(res, float(np.abs(pred_xi - Xi[i + 1]).max()))

    return Plan(
        X=X,
        Xi=Xi,
        U=full_U,
        V=full_V,
        e_pos=e_pos,
        e_ori=e_ori,
        status="ok" if sol.status == "optimal" else sol.status,
        objective=sol.objective,
        solve_ms=solve_ms,
        qp_iterations=sol.iterations,
        dynamics_residual=res,
        max_slack=float(slack.max(initial=0.0)),
    )


def mpc_step(state: PlannerState, obs) -> tuple[Plan, PlannerState]:
    """One control cycle: predict, synchronize, replan bounds, solve, apply."""
    t0 = time.perf_counter()
    cfg = state.ocp_cfg

    goal = prediction.evaluate_goal(
        state.models, obs, state.path, state.predictor_params
    )
    xi_d = sync.desired_path_state(
        goal.coords.phi, goal.phi_h, float(state.xi[0]), state.sync_params
    )
    new_bounds = bounds_mod.replan_bounds(
        state.bound_set, float(state.xi[0]), goal, state.bound_cfg
    )
    state.continuity_residual = bounds_mod.continuity_residual(
        state.bound_set, new_bounds, float(state.xi[0])
    )
    state.bound_set = new_bounds
    state.goal = goal

    sol = None
    slack = np.zeros(4 * cfg.horizon)
    for _ in range(max(1, cfg.sqp_iterations)):
        assembled = assemble_qp(state, goal, xi_d, new_bounds)
        sol = solve_qp(
            assembled.qp, tol=cfg.solver_tol, max_iter=cfg.max_qp_iterations
        )
        U_new, V_new, slack = _decode(assembled, sol, cfg)
        state.U_ws, state.V_ws = U_new, V_new

    solve_ms = (time.perf_counter() - t0) * 1e3
    plan = build_plan(state, state.U_ws, state.V_ws, sol, slack, solve_ms)

    # apply the first input; clip defensively when the solver was cut short
    u1 = state.U_ws[0].copy()
    v1 = float(state.V_ws[0])
    if plan.status != "ok":
        u1 = np.clip(u1, -state.chain.limits.jerk_max, state.chain.limits.jerk_max)
        v1 = float(np.clip(v1, -cfg.v_limit, cfg.v_limit))
    phi_m, g0, g1 = discretize_dynamics(cfg.ts)
    state.x = phi_m @ state.x + np.multiply.outer(g0, state.u_node) + np.multiply.outer(g1, u1)
    state.xi = phi_m @ state.xi + g0 * state.v_node + g1 * v1
    state.xi[0] = min(max(state.xi[0], 0.0), state.path.length)
    state.u_node = u1
    state.v_node = v1
    state.t += cfg.ts

    # shift warm start, duplicating the last stage
    state.U_ws = np.vstack((state.U_ws[1:], state.U_ws[-1:]))
    state.V_ws = np.concatenate((state.V_ws[1:], state.V_ws[-1:]))

    # post-hoc corridor check on the applied state (nonlinear errors)
    phi_now = float(state.xi[0])
    p, R, _ = fk_with_jacobian(state.chain, state.x[0])
    ep = refpath.decompose_position_error(p, state.path, phi_now, clamp=True)
    eo = refpath.decompose_orientation_error(R, state.path, phi_now, clamp=True)
    psi = state.bound_set.eval_all(phi_now)
    errs = np.array([ep.e1, ep.e2, eo.e1, eo.e2])
    overshoot = np.maximum(errs - psi[:, 1], 0.0) + np.maximum(psi[:, 0] - errs, 0.0)
    state.corridor_overshoot = float(overshoot.max())

    state.plan = plan
    return plan, state
