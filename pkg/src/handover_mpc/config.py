"""Scenario/config loading and validation.

Scenario files are YAML; every section is optional and falls back to the
bundled defaults. `load_scenario` accepts a file path or the name of a
bundled scenario (nominal, pause, retreat).
"""

import importlib.resources
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import bounds as bounds_mod
from . import gpr, ocp, prediction, sync
from .errors import ParseError, ValidationError
from .kinematics import JointLimits, KinematicChain


def default_chain(dq_max=0.96, ddq_max=10.0, jerk_max=300.0) -> KinematicChain:
    """Bundled 7-DoF anthropomorphic arm (modified DH)."""
    n = 7
    limits = JointLimits(
        q_lower=np.array([-2.8973, -1.7628, -2.8973, -3.0718, -2.8973, -0.0175, -2.8973]),
        q_upper=np.array([2.8973, 1.7628, 2.8973, -0.0698, 2.8973, 3.7525, 2.8973]),
        dq_max=np.full(n, dq_max),
        ddq_max=np.full(n, ddq_max),
        jerk_max=np.full(n, jerk_max),
    )
    return KinematicChain(
        alpha=np.array([0.0, -np.pi / 2, np.pi / 2, np.pi / 2, -np.pi / 2, np.pi / 2, np.pi / 2]),
        a=np.array([0.0, 0.0, 0.0, 0.0825, -0.0825, 0.0, 0.088]),
        d=np.array([0.333, 0.0, 0.316, 0.0, 0.384, 0.0, 0.0]),
        theta_offset=np.zeros(n),
        tool_position=np.array([0.0, 0.0, 0.2]),
        limits=limits,
    )


@dataclass(frozen=True)
class HandLeg:
    t0: float
    t1: float
    target: np.ndarray  # (3,)

    def __post_init__(self):
        if self.t1 <= self.t0:
            raise ValidationError("hand leg must have t1 > t0")


@dataclass(frozen=True)
class HandProfile:
    rest: np.ndarray  # (3,)
    rpy: np.ndarray  # (3,) constant hand orientation
    legs: tuple  # of HandLeg, chronological

    def __post_init__(self):
        t = 0.0
        for leg in self.legs:
            if leg.t0 < t - 1e-9:
                raise ValidationError("hand legs overlap")
            t = leg.t1


@dataclass(frozen=True)
class TrainingConfig:
    box_center: np.ndarray  # goal sampling box, m
    box_half: np.ndarray
    rest_center: np.ndarray  # hand start sphere
    rest_radius: float = 0.06
    n_trajectories: int = 20
    traj_duration: float = 1.6
    sample_rate: float = 10.0  # Hz
    noise_sigma: float = 0.005  # m

    def __post_init__(self):
        if self.n_trajectories < 1:
            raise ValidationError("n_trajectories must be >= 1")
        if self.traj_duration <= 0 or self.sample_rate <= 0:
            raise ValidationError("training duration/rate must be positive")
        if self.noise_sigma < 0:
            raise ValidationError("noise_sigma must be nonnegative")


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    duration: float  # s, cap
    q0: np.ndarray  # (7,)
    p_ra: np.ndarray  # (3,) approach via-point
    hand: HandProfile
    training: TrainingConfig
    grasp_pos_tol: float = 0.01  # m
    grasp_phi_tol: float = 0.01  # m

    def __post_init__(self):
        if self.duration <= 0:
            raise ValidationError("duration must be positive")


@dataclass(frozen=True)
class ScenarioBundle:
    scenario: Scenario
    chain: KinematicChain
    ocp: ocp.OcpConfig
    predictor: prediction.PredictorParams
    sync: sync.SyncParams
    gp: gpr.Hyperparameters
    bounds: bounds_mod.BoundConfig
    raw: dict = field(repr=False, default_factory=dict)


def _vec(data, name, n):
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name}: not numeric ({exc})")
    if arr.shape != (n,) or not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name}: expected {n} finite values")
    return arr


def _build(cls, section, name, **fixups):
    try:
        return cls(**{**section, **fixups})
    except TypeError as exc:
        raise ValidationError(f"{name}: {exc}")


def load_scenario_dict(data: dict) -> ScenarioBundle:
    if not isinstance(data, dict):
        raise ParseError("scenario file must contain a mapping")
    hand_raw = data.get("hand", {})
    legs = tuple(
        HandLeg(t0=float(l["t0"]), t1=float(l["t1"]), target=_vec(l["to"], "hand.legs.to", 3))
        for l in hand_raw.get("legs", [])
    )
    hand = HandProfile(
        rest=_vec(hand_raw.get("rest", (0.8, 0.3, 0.7)), "hand.rest", 3),
        rpy=_vec(hand_raw.get("rpy", (0.0, 0.0, 0.0)), "hand.rpy", 3),
        legs=legs,
    )
    tr_raw = dict(data.get("training", {}))
    for key, n in (("box_center", 3), ("box_half", 3), ("rest_center", 3)):
        if key in tr_raw:
            tr_raw[key] = _vec(tr_raw[key], f"training.{key}", 3)
    tr_raw.setdefault("box_center", _vec((0.6, 0.1, 0.7), "training.box_center", 3))
    tr_raw.setdefault("box_half", _vec((0.08, 0.1, 0.06), "training.box_half", 3))
    tr_raw.setdefault("rest_center", hand.rest.copy())
    training = _build(TrainingConfig, tr_raw, "training")

    scenario = Scenario(
        name=str(data.get("name", "unnamed")),
        seed=int(data.get("seed", 0)),
        duration=float(data.get("duration", 8.0)),
        q0=_vec(data.get("q0", (-0.4, -0.93, -0.59, -2.55, 0.62, 2.15, 0.74)), "q0", 7),
        p_ra=_vec(data.get("p_ra", (0.42, -0.15, 0.62)), "p_ra", 3),
        hand=hand,
        training=training,
        grasp_pos_tol=float(data.get("grasp_pos_tol", 0.01)),
        grasp_phi_tol=float(data.get("grasp_phi_tol", 0.01)),
    )

    gp_raw = dict(data.get("gp", {}))
    hp = gpr.Hyperparameters(
        signal_var=float(gp_raw.get("signal_var", 0.05)),
        lengthscales=_vec(
            gp_raw.get("lengthscales", (0.3, 0.3, 0.3, 0.5, 0.5, 0.5)), "gp.lengthscales", 6
        ),
        noise_var=float(gp_raw.get("noise_var", 1e-4)),
    )
    limits_raw = data.get("limits", {})
    chain = default_chain(
        dq_max=float(limits_raw.get("dq_max", 0.96)),
        ddq_max=float(limits_raw.get("ddq_max", 10.0)),
        jerk_max=float(limits_raw.get("jerk_max", 300.0)),
    )

    ocp_raw = dict(data.get("ocp", {}))
    if "w_xi" in ocp_raw:
        ocp_raw["w_xi"] = tuple(float(v) for v in ocp_raw["w_xi"])
    ocp_cfg = _build(ocp.OcpConfig, ocp_raw, "ocp")
    predictor = _build(prediction.PredictorParams, dict(data.get("predictor", {})), "predictor")
    sync_params = _build(sync.SyncParams, dict(data.get("sync", {})), "sync")
    bound_cfg = _build(bounds_mod.BoundConfig, dict(data.get("bounds", {})), "bounds")

    return ScenarioBundle(
        scenario=scenario,
        chain=chain,
        ocp=ocp_cfg,
        predictor=predictor,
        sync=sync_params,
        gp=hp,
        bounds=bound_cfg,
        raw=data,
    )


def bundled_scenario_path(name: str) -> Path:
    res = importlib.resources.files("handover_mpc") / "scenarios" / f"{name}.yaml"
    return Path(str(res))


def load_scenario(path_or_name) -> ScenarioBundle:
    """Load a scenario file, or a bundled scenario by name."""
    p = Path(path_or_name)
    if not p.exists():
        candidate = bundled_scenario_path(str(path_or_name))
        if candidate.exists():
            p = candidate
        else:
            raise ParseError(f"scenario not found: {path_or_name}")
    try:
        data = yaml.safe_load(p.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ParseError(f"{p}: {exc}")
    return load_scenario_dict(data or {})


def bundle_to_dict(bundle: ScenarioBundle) -> dict:
    """Serializable echo of every effective setting."""
    sc = bundle.scenario
    return {
        "name": sc.name,
        "seed": sc.seed,
        "duration": sc.duration,
        "q0": sc.q0.tolist(),
        "p_ra": sc.p_ra.tolist(),
        "grasp_pos_tol": sc.grasp_pos_tol,
        "grasp_phi_tol": sc.grasp_phi_tol,
        "hand": {
            "rest": sc.hand.rest.tolist(),
            "rpy": sc.hand.rpy.tolist(),
            "legs": [
                {"t0": leg.t0, "t1": leg.t1, "to": leg.target.tolist()}
                for leg in sc.hand.legs
            ],
        },
        "training": {
            "box_center": sc.training.box_center.tolist(),
            "box_half": sc.training.box_half.tolist(),
            "rest_center": sc.training.rest_center.tolist(),
            "rest_radius": sc.training.rest_radius,
            "n_trajectories": sc.training.n_trajectories,
            "traj_duration": sc.training.traj_duration,
            "sample_rate": sc.training.sample_rate,
            "noise_sigma": sc.training.noise_sigma,
        },
        "gp": {
            "signal_var": bundle.gp.signal_var,
            "lengthscales": np.asarray(bundle.gp.lengthscales).tolist(),
            "noise_var": bundle.gp.noise_var,
        },
        "ocp": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(bundle.ocp).items()},
        "predictor": asdict(bundle.predictor),
        "sync": asdict(bundle.sync),
        "bounds": asdict(bundle.bounds),
        "limits": {
            "dq_max": float(bundle.chain.limits.dq_max[0]),
            "ddq_max": float(bundle.chain.limits.ddq_max[0]),
            "jerk_max": float(bundle.chain.limits.jerk_max[0]),
        },
    }


def dump_scenario(bundle: ScenarioBundle, path):
    Path(path).write_text(yaml.safe_dump(bundle_to_dict(bundle), sort_keys=False), encoding="utf-8")
