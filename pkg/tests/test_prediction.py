import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from handover_mpc import gpr, prediction, refpath, so3
from handover_mpc.errors import NotPSD

from .oracles import ellipse_box_by_sampling


def make_obs(p, v=(0, 0, 0), R=None, t=0.0, path=None):
    if R is None:
        if path is None:
            R = np.eye(3)
        else:
            _, rot_end = refpath.eval_path(path, path.length)
            R = so3.exp_map(rot_end)  # grasp-facing
    return prediction.HumanObservation(
        p=np.asarray(p, dtype=float),
        v=np.asarray(v, dtype=float),
        R=R,
        t=t,
    )


@pytest.fixture()
def straight_path():
    return refpath.build_reference_path(
        [0, 0, 0], [0.4, 0, 0], [1.4, 0, 0.3], np.eye(3), [1, 0, 0]
    )


def exact_models(points, goals, noise=0.0):
    hp = gpr.Hyperparameters(signal_var=1.0, lengthscales=np.ones(6), noise_var=noise)
    X = np.asarray(points, dtype=float)
    return gpr.fit_axis_models(X, np.asarray(goals, dtype=float), hp)


def test_single_point_exact_prediction():
    x = np.concatenate(([0.5, 0.1, 0.2], [0, 0, 0]))
    models = exact_models([x], [[0.9, 0.15, 0.3]])
    pred = prediction.predict_handover_location(models, make_obs([0.5, 0.1, 0.2]))
    assert_allclose(pred.mu, [0.9, 0.15, 0.3], atol=1e-12)
    assert np.all(pred.var <= 1e-12)


def test_far_observation_recovers_prior(rng):
    X = rng.normal(size=(20, 6))
    models = exact_models(X, rng.normal(size=(20, 3)), noise=1e-4)
    pred = prediction.predict_handover_location(models, make_obs([40, 40, 40], [5, 5, 5]))
    assert_allclose(pred.var, [1.0, 1.0, 1.0], atol=1e-9)


def test_assembly_equals_per_axis_predict(rng):
    X = rng.normal(size=(15, 6))
    goals = rng.normal(size=(15, 3))
    models = exact_models(X, goals, noise=1e-4)
    obs = make_obs(rng.normal(size=3), rng.normal(size=3))
    pred = prediction.predict_handover_location(models, obs)
    for j in range(3):
        mu, var = gpr.predict(models[j], obs.features())
        assert pred.mu[j] == mu
        assert pred.var[j] == var


def test_prediction_weight_values():
    assert prediction.prediction_weight(0.4, 5.0, 2.0) == pytest.approx(0.5, abs=1e-15)
    assert prediction.prediction_weight(1e6, 5.0, 2.0) == pytest.approx(1.0, abs=1e-9)
    assert prediction.prediction_weight(0.0, 5.0, 2.0) == pytest.approx(
        0.0179862099620916, abs=1e-12
    )


@settings(max_examples=200, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_prediction_weight_monotone_bounded(d1, d2):
    w1 = prediction.prediction_weight(d1, 10.0, 2.0)
    w2 = prediction.prediction_weight(d2, 10.0, 2.0)
    assert 0.0 < w1 < 1.0
    if d1 < d2:
        assert w1 <= w2


def test_ellipse_box_axis_aligned():
    assert_allclose(prediction.bounding_box_from_axes(2.0, 1.0, 0.0), (2.0, 1.0), atol=1e-15)


def test_ellipse_box_circle(rng):
    for theta in rng.uniform(0, np.pi, 10):
        assert_allclose(prediction.bounding_box_from_axes(0.7, 0.7, theta), (0.7, 0.7), atol=1e-12)


def test_ellipse_box_30_degrees():
    x1, x2 = prediction.bounding_box_from_axes(2.0, 1.0, np.pi / 6)
    assert_allclose(x1, 1.8027756377319946, atol=1e-12)
    assert_allclose(x2, 1.3228756555322954, atol=1e-12)
    # brute-force boundary sampling oracle
    s1, s2 = ellipse_box_by_sampling(2.0, 1.0, np.pi / 6, n=200_000)
    assert abs(x1 - s1) <= 1e-6
    assert abs(x2 - s2) <= 1e-6


def test_ellipse_box_dominates_samples(rng):
    angles = np.linspace(0, 2 * np.pi, 500, endpoint=False)
    ct, st_ = np.cos(angles), np.sin(angles)
    for _ in range(200):
        M = rng.normal(size=(2, 2))
        sigma = M @ M.T
        x1, x2 = prediction.ellipse_bounding_box(sigma, 2.0)
        evals, evecs = np.linalg.eigh(sigma)
        r2, r1 = 2.0 * np.sqrt(np.maximum(evals, 0))
        theta = np.arctan2(evecs[1, 1], evecs[0, 1])
        px = r1 * np.cos(theta) * ct - r2 * np.sin(theta) * st_
        py = r1 * np.sin(theta) * ct + r2 * np.cos(theta) * st_
        assert np.all(np.abs(px) <= x1 + 1e-9)
        assert np.all(np.abs(py) <= x2 + 1e-9)


def test_ellipse_box_rejects_non_psd():
    with pytest.raises(NotPSD):
        prediction.ellipse_bounding_box(np.array([[1.0, 0.0], [0.0, -0.1]]), 2.0)


def test_adapt_goal_pure_prediction(straight_path):
    # hand far beyond the predicted goal: w ~ 1
    models = exact_models([np.concatenate(([2.4, 0, 0.3], np.zeros(3)))], [[0.9, 0.05, 0.25]])
    obs = make_obs([2.4, 0.0, 0.3], path=straight_path)
    pred = prediction.predict_handover_location(models, obs)
    goal = prediction.adapt_goal(pred, obs, straight_path, prediction.PredictorParams())
    mu_c = refpath.project_point_to_path(pred.mu, straight_path, 1)
    assert goal.w_pred > 0.99
    assert abs(goal.coords.e1 - mu_c.e1) <= 1e-3
    assert abs(goal.coords.phi - mu_c.phi) <= 2e-2


def test_adapt_goal_pure_measurement(straight_path):
    # hand far short of the predicted goal: w ~ 0, goal -> hand coords
    models = exact_models([np.concatenate(([0.5, 0, 0.1], np.zeros(3)))], [[1.3, 0.1, 0.3]])
    obs = make_obs([0.55, 0.02, 0.12], path=straight_path)
    pred = prediction.predict_handover_location(models, obs)
    params = prediction.PredictorParams()
    goal = prediction.adapt_goal(pred, obs, straight_path, params)
    hand_c = refpath.project_point_to_path(obs.p, straight_path, 1)
    assert goal.w_pred < 0.01
    assert abs(goal.coords.e1 - hand_c.e1) <= 1e-2
    # half-widths settle at the measurement floor, not zero
    floor = params.confidence_scale * params.meas_sigma
    assert_allclose(goal.half_widths, floor * (1 - goal.w_pred) + goal.w_pred * goal.half_widths, atol=5e-3)


def test_adapt_goal_midpoint(straight_path):
    # arg = alpha*d_pred - d = 0 -> w = 1/2 -> exact midpoint
    params = prediction.PredictorParams(alpha_p=5.0, d_p=2.0)
    models = exact_models([np.concatenate(([0.8, 0.03, 0.18], np.zeros(3)))], [[0.8, 0.03, 0.18]])
    obs_probe = make_obs([0.8, 0.03, 0.18])
    pred = prediction.predict_handover_location(models, obs_probe)
    mu_c = refpath.project_point_to_path(pred.mu, straight_path, 1)
    # place the hand so phi_h - phi_mu = 0.4 exactly
    seg_t = straight_path.tangents[1]
    obs = make_obs(pred.mu + 0.4 * seg_t + 0.02 * straight_path.b_p1[1], path=straight_path)
    goal = prediction.adapt_goal(pred, obs, straight_path, params)
    hand_c = refpath.project_point_to_path(obs.p, straight_path, 1)
    assert_allclose(goal.d_pred, 0.4, atol=1e-12)
    assert_allclose(goal.w_pred, 0.5, atol=1e-12)
    assert_allclose(goal.coords.e1, 0.5 * (mu_c.e1 + hand_c.e1), atol=1e-12)
    assert_allclose(goal.coords.phi, 0.5 * (mu_c.phi + hand_c.phi), atol=1e-12)


def test_adapt_goal_is_convex_combination(straight_path, rng):
    models = exact_models(
        rng.normal(size=(10, 6)) * 0.3 + np.concatenate(([0.8, 0, 0.2], np.zeros(3))),
        rng.normal(size=(10, 3)) * 0.05 + [0.9, 0.05, 0.22],
        noise=1e-3,
    )
    for _ in range(20):
        obs = make_obs([0.8, 0, 0.2] + 0.4 * rng.normal(size=3), path=straight_path)
        pred = prediction.predict_handover_location(models, obs)
        goal = prediction.adapt_goal(pred, obs, straight_path, prediction.PredictorParams())
        mu_c, hand_c = goal.mu_coords, goal.hand_coords
        for attr in ("e1", "e2"):
            lo = min(getattr(mu_c, attr), getattr(hand_c, attr)) - 1e-12
            hi = max(getattr(mu_c, attr), getattr(hand_c, attr)) + 1e-12
            assert lo <= getattr(goal.coords, attr) <= hi


def test_adapt_orientation_goal_limits(straight_path):
    params = prediction.PredictorParams(alpha_o=5.0, d_o=2.0)
    _, rot_end = refpath.eval_path(straight_path, straight_path.length)
    R_off = so3.exp_map(np.array([0.05, -0.1, 0.2]))
    obs = make_obs([1, 0, 0.2], R=R_off @ so3.exp_map(rot_end))
    far = prediction.adapt_orientation_goal(obs, straight_path, params, d_pred=10.0)
    assert np.abs(far).max() <= 1e-6
    near = prediction.adapt_orientation_goal(obs, straight_path, params, d_pred=0.0)
    e = refpath.decompose_orientation_error(obs.R, straight_path, straight_path.length)
    assert_allclose(near, 0.9820137900379084 * np.array([e.e1, e.e2]), atol=1e-12)
    # hand exactly at the reference orientation: zero regardless of weight
    obs2 = make_obs([1, 0, 0.2], R=so3.exp_map(rot_end))
    assert_allclose(
        prediction.adapt_orientation_goal(obs2, straight_path, params, 0.3), [0, 0], atol=1e-12
    )
