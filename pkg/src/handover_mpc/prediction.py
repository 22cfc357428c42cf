"""Adapted handover goal: GPR prediction blended with the measured hand.

The blend weight follows the hand's remaining path distance to the
predicted goal through a tanh switch; the projected GPR covariance
ellipse becomes an axis-aligned uncertainty box in the path frame.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import gpr, refpath
from .errors import NotPSD, ValidationError


@dataclass(frozen=True)
class HumanObservation:
    p: np.ndarray  # hand position, m
    v: np.ndarray  # hand velocity, m/s
    R: np.ndarray  # hand orientation
    t: float  # s

    def features(self):
        return np.concatenate((self.p, self.v))


class HandoverPrediction(NamedTuple):
    mu: np.ndarray  # (3,) mean handover position, m
    var: np.ndarray  # (3,) per-axis variance (diagonal covariance), m^2

    @property
    def cov(self):
        return np.diag(self.var)


@dataclass(frozen=True)
class PredictorParams:
    alpha_p: float = 10.0  # 1/m
    d_p: float = 2.0
    alpha_o: float = 10.0  # 1/m
    d_o: float = 2.0
    confidence_scale: float = 2.0  # ellipse half-axes in sigmas
    meas_sigma: float = 0.01  # m, hand-tracking noise floor

    def __post_init__(self):
        if self.alpha_p <= 0 or self.alpha_o <= 0:
            raise ValidationError("predictor alphas must be positive")


@dataclass(frozen=True)
class AdaptedHandoverGoal:
    coords: refpath.PathCoordinates  # adapted goal in the path frame
    half_widths: np.ndarray  # (2,) uncertainty box, m
    ori_targets: np.ndarray  # (2,) orthogonal orientation targets, rad
    w_pred: float
    d_pred: float  # hand distance to the raw predicted goal, m
    phi_h: float  # hand path parameter
    hand_coords: refpath.PathCoordinates
    mu_coords: refpath.PathCoordinates
    clamped: bool  # goal phi clamped into the handover segment


def predict_handover_location(models, obs: HumanObservation) -> HandoverPrediction:
    """Stack the three per-axis GPR posteriors."""
    x = obs.features()
    mu = np.empty(3)
    var = np.empty(3)
    for j, model in enumerate(models):
        mu[j], var[j] = gpr.predict(model, x)
    return HandoverPrediction(mu=mu, var=var)


def prediction_weight(d_pred, alpha, d) -> float:
    """tanh switch in (0, 1); 0.5 exactly at alpha*d_pred == d."""
    return 0.5 + 0.5 * float(np.tanh(alpha * d_pred - d))


def bounding_box_from_axes(r1, r2, theta):
    """Half-widths of the smallest axis-aligned box around an ellipse."""
    c, s = np.cos(theta), np.sin(theta)
    return (
        float(np.sqrt((r1 * c) ** 2 + (r2 * s) ** 2)),
        float(np.sqrt((r1 * s) ** 2 + (r2 * c) ** 2)),
    )


def ellipse_bounding_box(sigma, confidence_scale):
    """Uncertainty box of a 2x2 covariance at the given sigma scale."""
    sigma = np.asarray(sigma, dtype=float)
    scale = max(1.0, float(np.abs(sigma).max()))
    if not np.allclose(sigma, sigma.T, atol=1e-10 * scale):
        raise NotPSD("covariance not symmetric")
    evals, evecs = np.linalg.eigh(sigma)
    if evals.min() < -1e-10 * scale:
        raise NotPSD("covariance has negative eigenvalues")
    evals = np.maximum(evals, 0.0)
    r2, r1 = confidence_scale * np.sqrt(evals)  # eigh sorts ascending
    theta = float(np.arctan2(evecs[1, 1], evecs[0, 1]))  # angle of the major axis
    return bounding_box_from_axes(r1, r2, theta)


def adapt_goal(
    pred: HandoverPrediction,
    obs: HumanObservation,
    path: refpath.ReferencePath,
    params: PredictorParams,
) -> AdaptedHandoverGoal:
    """Blend the GPR goal with the measured hand pose, in path coordinates.

    The blend runs on the handover (last) segment. The uncertainty box is
    scaled by the weight so it vanishes as the measured hand takes over.
    """
    seg = path.n_segments - 1
    mu_c = refpath.project_point_to_path(pred.mu, path, seg)
    hand_c = refpath.project_point_to_path(obs.p, path, seg)
    d_pred = hand_c.phi - mu_c.phi
    w = prediction_weight(d_pred, params.alpha_p, params.d_p)

    e1 = w * mu_c.e1 + (1.0 - w) * hand_c.e1
    e2 = w * mu_c.e2 + (1.0 - w) * hand_c.e2
    phi = w * mu_c.phi + (1.0 - w) * hand_c.phi
    clamped = False
    lo, hi = float(path.breakpoints[seg]), path.length
    if phi < lo or phi > hi:
        phi = min(max(phi, lo), hi)
        clamped = True

    sigma_path = refpath.project_covariance_to_path(pred.cov, path, seg)
    box = ellipse_bounding_box(sigma_path, params.confidence_scale)
    # blend toward the hand-tracking noise floor as the measurement takes over
    floor = params.confidence_scale * params.meas_sigma
    half_widths = w * np.asarray(box) + (1.0 - w) * floor

    ori = adapt_orientation_goal(obs, path, params, d_pred)
    return AdaptedHandoverGoal(
        coords=refpath.PathCoordinates(e1=e1, e2=e2, phi=phi, in_segment=not clamped),
        half_widths=half_widths,
        ori_targets=ori,
        w_pred=w,
        d_pred=d_pred,
        phi_h=hand_c.phi,
        hand_coords=hand_c,
        mu_coords=mu_c,
        clamped=clamped,
    )


def adapt_orientation_goal(obs, path, params, d_pred):
    """Orthogonal orientation targets from the hand pose.

    The hand rotation is decomposed against the path end (last segment's
    orientation frame) and faded in as the hand closes on the goal.
    """
    err = refpath.decompose_orientation_error(obs.R, path, path.length)
    w = prediction_weight(d_pred, params.alpha_o, params.d_o)
    return (1.0 - w) * np.array([err.e1, err.e2])


def evaluate_goal(models, obs, path, params) -> AdaptedHandoverGoal:
    """Full predictor pass for one control cycle."""
    return adapt_goal(predict_handover_location(models, obs), obs, path, params)
