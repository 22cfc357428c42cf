"""WebSocket session service for the interactive UI.

One connection = one planner. Incoming hand poses are sampled latest-wins
(stale timestamps dropped); the planner ticks at the control period and
broadcasts a state message per cycle. With `?lockstep=1` the planner
instead ticks exactly once per accepted hand pose and replies with the
resulting state, which makes sessions reproducible for tests and replay
comparisons.

Hand pose rpy is the grasp-frame offset from the reference path's end
orientation, matching the scenario files.
"""

import asyncio
import json
import logging
import time

import numpy as np
import uvicorn
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from . import gpr, ocp, prediction, refpath, sim, simlog, so3
from .config import ScenarioBundle, load_scenario

log = logging.getLogger("handover_mpc.bridge")


class Session:
    """Planner session consuming raw hand poses; transport-agnostic."""

    def __init__(self, bundle: ScenarioBundle, models=None):
        self.bundle = bundle
        if models is None:
            X, goals = sim.generate_training_data(
                bundle.scenario.training, bundle.scenario.seed
            )
            models = gpr.fit_axis_models(X, goals, bundle.gp)
        self.models = models
        self.running = False
        self._reset_state()

    def _reset_state(self):
        self.planner = None
        self.path_end_rotation = None
        self.last_obs = None  # (t, p, rpy)
        self.prev_sample = None  # (t, p) for velocity estimation
        self.velocity = np.zeros(3)

    def reset(self):
        self._reset_state()
        self.running = False

    def update_hand(self, t, p, rpy):
        """Latest-wins hand pose; returns False for stale timestamps."""
        if self.last_obs is not None and t < self.last_obs[0]:
            return False
        self.last_obs = (float(t), np.asarray(p, dtype=float), np.asarray(rpy, dtype=float))
        return True

    def _ensure_scene(self):
        t, p, rpy = self.last_obs
        probe = prediction.HumanObservation(p=p, v=np.zeros(3), R=np.eye(3), t=t)
        pred0 = prediction.predict_handover_location(self.models, probe)
        sc = self.bundle.scenario
        from .kinematics import forward_kinematics

        p_r0, R_r0 = forward_kinematics(self.bundle.chain, sc.q0)
        hand_dir = p - pred0.mu
        hand_dir = hand_dir / np.linalg.norm(hand_dir)
        path = refpath.build_reference_path(p_r0, sc.p_ra, pred0.mu, R_r0, hand_dir)
        self.path_end_rotation = so3.exp_map(path.rotvecs[-1])
        obs0 = self._observation()
        goal0 = prediction.adapt_goal(pred0, obs0, path, self.bundle.predictor)
        self.planner = ocp.make_planner(
            chain=self.bundle.chain,
            path=path,
            models=self.models,
            q0=sc.q0,
            ocp_cfg=self.bundle.ocp,
            predictor_params=self.bundle.predictor,
            sync_params=self.bundle.sync,
            bound_cfg=self.bundle.bounds,
            initial_goal_phi=goal0.coords.phi,
        )
        self.planner.goal = goal0

    def _observation(self):
        t, p, rpy = self.last_obs
        if self.prev_sample is not None and t > self.prev_sample[0]:
            self.velocity = (p - self.prev_sample[1]) / (t - self.prev_sample[0])
        self.prev_sample = (t, p.copy())
        R = self.path_end_rotation @ so3.rotation_from_rpy(*rpy)
        return prediction.HumanObservation(p=p, v=self.velocity, R=R, t=t)

    def tick(self):
        """One control cycle against the latest hand pose."""
        if self.last_obs is None:
            return None
        if self.planner is None:
            self._ensure_scene()
        obs = self._observation()
        plan, _ = ocp.mpc_step(self.planner, obs)
        return self.state_message(plan.status)

    def state_message(self, status="ok"):
        return sim.state_snapshot(self.planner, status)


def _error(code, detail):
    return {"type": "error", "code": code, "detail": detail}


def handle_message(session: Session, raw: str):
    """Decode one client frame; returns (reply_or_None, tick_now: bool)."""
    try:
        msg = json.loads(raw)
    except json.JSONDecodeError as exc:
        return _error("parse", str(exc)), False
    if not isinstance(msg, dict) or "type" not in msg:
        return _error("schema", "message must be an object with a type"), False
    kind = msg["type"]
    if kind == "hand_pose":
        try:
            t = float(msg["t"])
            p = [float(v) for v in msg["p"]]
            rpy = [float(v) for v in msg["rpy"]]
            if len(p) != 3 or len(rpy) != 3:
                raise ValueError("p and rpy must have 3 entries")
        except (KeyError, TypeError, ValueError) as exc:
            return _error("schema", f"bad hand_pose: {exc}"), False
        accepted = session.update_hand(t, p, rpy)
        return None, accepted and session.running
    if kind == "control":
        action = msg.get("action")
        if action == "start":
            session.running = True
            return None, False
        if action == "pause":
            session.running = False
            return None, False
        if action == "reset":
            name = msg.get("scenario")
            if name:
                try:
                    session.bundle = load_scenario(name)
                except Exception as exc:
                    return _error("scenario", str(exc)), False
            session.reset()
            return None, False
        return _error("unknown_action", str(action)), False
    return _error("unknown_type", str(kind)), False


def create_app(bundle: ScenarioBundle, models=None) -> FastAPI:
    app = FastAPI()

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        lockstep = ws.query_params.get("lockstep") == "1"
        session = Session(bundle, models=models)
        try:
            if lockstep:
                while True:
                    raw = await ws.receive_text()
                    reply, do_tick = handle_message(session, raw)
                    if reply is not None:
                        await ws.send_json(reply)
                    if do_tick:
                        state = await asyncio.to_thread(session.tick)
                        if state is not None:
                            await ws.send_json(state)
            else:
                await _cadence_loop(ws, session)
        except WebSocketDisconnect:
            session.running = False

    return app


async def _cadence_loop(ws: WebSocket, session: Session):
    ts = session.bundle.ocp.ts
    next_due = time.monotonic()

    async def receiver():
        while True:
            raw = await ws.receive_text()
            reply, _ = handle_message(session, raw)
            if reply is not None:
                await ws.send_json(reply)

    recv_task = asyncio.create_task(receiver())
    try:
        while True:
            if recv_task.done():
                recv_task.result()
                break
            now = time.monotonic()
            if now < next_due:
                await asyncio.sleep(min(next_due - now, 0.02))
                continue
            next_due += ts
            if session.running and session.last_obs is not None:
                state = await asyncio.to_thread(session.tick)
                if state is not None:
                    await ws.send_json(state)
    finally:
        recv_task.cancel()


def create_replay_app(csv_path) -> FastAPI:
    """Serve a recorded log as state messages over the same schema."""
    data, statuses = simlog.read_log_csv(csv_path)
    cols = simlog.CSV_HEADER.split(",")
    idx = {name: cols.index(name) for name in cols if name != "status"}

    def row_message(i):
        row = data[i]
        return {
            "type": "state",
            "t": row[idx["t"]],
            "q": [row[idx[f"q{j}"]] for j in range(1, 8)],
            "p_r": [row[idx[c]] for c in ("prx", "pry", "prz")],
            "rpy_r": [row[idx[c]] for c in ("rr", "rp", "ry")],
            "phi_c": row[idx["phi_c"]],
            "phi_h": row[idx["phi_h"]],
            "phi_ho": row[idx["phi_ho"]],
            "w_pred": row[idx["w_pred"]],
            "bounds": {
                "p1": [row[idx["b_p1_lo"]], row[idx["b_p1_up"]]],
                "p2": [row[idx["b_p2_lo"]], row[idx["b_p2_up"]]],
                "o1": [row[idx["b_o1_lo"]], row[idx["b_o1_up"]]],
                "o2": [row[idx["b_o2_lo"]], row[idx["b_o2_up"]]],
            },
            "e_orth": [row[idx[c]] for c in ("ep1", "ep2", "eo1", "eo2")],
            "status": statuses[i],
        }

    app = FastAPI()

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        fast = ws.query_params.get("fast") == "1"
        dt = 0.0 if fast else float(np.diff(data[:, idx["t"]]).mean() if len(data) > 1 else 0.1)
        try:
            for i in range(len(data)):
                await ws.send_json(row_message(i))
                if dt:
                    await asyncio.sleep(dt)
            while True:  # keep the session open for the viewer
                await ws.receive_text()
        except WebSocketDisconnect:
            pass

    return app


def serve_session(port, bundle: ScenarioBundle):
    """Run the interactive endpoint until interrupted."""
    uvicorn.run(create_app(bundle), host="127.0.0.1", port=port, log_level="warning")


def serve_replay(port, csv_path):
    uvicorn.run(create_replay_app(csv_path), host="127.0.0.1", port=port, log_level="warning")
