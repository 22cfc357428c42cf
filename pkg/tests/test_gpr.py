import numpy as np
import pytest
from numpy.testing import assert_allclose

from handover_mpc import accel, gpr
from handover_mpc.errors import NotPositiveDefinite, ValidationError


def hp(noise=1e-4, sig=1.0, ls=None):
    return gpr.Hyperparameters(
        signal_var=sig,
        lengthscales=np.asarray(ls if ls is not None else np.ones(6)),
        noise_var=noise,
    )


def random_dataset(rng, n):
    X = rng.normal(size=(n, 6))
    y = np.sin(X[:, 0]) + 0.1 * rng.normal(size=n)
    return gpr.Dataset(X=X, y=y)


def dense_kernel(X1, X2, h):
    d = (X1[:, None, :] - X2[None, :, :]) / np.asarray(h.lengthscales)
    return h.signal_var * np.exp(-0.5 * np.sum(d * d, axis=2))


def test_fit_single_point_alpha():
    data = gpr.Dataset(X=np.zeros((1, 6)), y=np.array([2.5]))
    model = gpr.fit(data, hp(noise=0.0))
    assert_allclose(model.alpha, [2.5], atol=1e-15)


def test_factorization_reconstructs(rng):
    data = random_dataset(rng, 50)
    h = hp()
    model = gpr.fit(data, h)
    K = dense_kernel(data.X, data.X, h) + h.noise_var * np.eye(50)
    rec = model.chol_lower @ model.chol_lower.T
    assert np.abs(rec - K).max() / np.abs(K).max() <= 1e-10


def test_alpha_matches_dense_solve(rng):
    data = random_dataset(rng, 100)
    h = hp()
    model = gpr.fit(data, h)
    K = dense_kernel(data.X, data.X, h) + h.noise_var * np.eye(100)
    assert np.abs(model.alpha - np.linalg.solve(K, data.y)).max() <= 1e-8


def test_predict_noise_free_interpolation():
    X = np.zeros((1, 6))
    model = gpr.fit(gpr.Dataset(X=X, y=np.array([1.7])), hp(noise=0.0))
    mu, var = gpr.predict(model, np.zeros(6))
    assert_allclose(mu, 1.7, atol=1e-12)
    assert var <= 1e-12


def test_predict_one_point_closed_form():
    # k(x,x) = signal_var = 1, noise 1: mu = 1/(1+1), var = 1 - 1/2
    model = gpr.fit(gpr.Dataset(X=np.zeros((1, 6)), y=np.array([1.0])), hp(noise=1.0))
    mu, var = gpr.predict(model, np.zeros(6))
    assert_allclose(mu, 0.5, atol=1e-14)
    assert_allclose(var, 0.5, atol=1e-14)


def test_predict_far_from_data_recovers_prior(rng):
    data = random_dataset(rng, 30)
    h = hp(sig=0.7)
    model = gpr.fit(data, h)
    mu, var = gpr.predict(model, np.full(6, 50.0))
    assert abs(mu) <= 1e-9
    assert_allclose(var, 0.7, atol=1e-9)


def test_lml_single_point_closed_form():
    model = gpr.fit(gpr.Dataset(X=np.zeros((1, 6)), y=np.array([1.0])), hp(noise=0.0))
    assert_allclose(gpr.log_marginal_likelihood(model), -1.4189385332046727, atol=1e-12)


def test_lml_zero_targets_is_pure_complexity(rng):
    X = rng.normal(size=(20, 6))
    h = hp()
    model = gpr.fit(gpr.Dataset(X=X, y=np.zeros(20)), h)
    K = dense_kernel(X, X, h) + h.noise_var * np.eye(20)
    expected = -0.5 * np.linalg.slogdet(K)[1] - 10 * np.log(2 * np.pi)
    assert_allclose(gpr.log_marginal_likelihood(model), expected, atol=1e-10)


def test_lml_matches_dense(rng):
    data = random_dataset(rng, 60)
    h = hp()
    model = gpr.fit(data, h)
    K = dense_kernel(data.X, data.X, h) + h.noise_var * np.eye(60)
    expected = (
        -0.5 * data.y @ np.linalg.solve(K, data.y)
        - 0.5 * np.linalg.slogdet(K)[1]
        - 30 * np.log(2 * np.pi)
    )
    assert abs(gpr.log_marginal_likelihood(model) - expected) <= 1e-8


def test_kernel_matrix_psd(rng):
    X = rng.normal(size=(40, 6))
    K = accel.se_kernel_matrix(X, X, np.ones(6), 1.0)
    assert np.linalg.eigvalsh(K).min() >= -1e-10
    assert np.abs(K - K.T).max() <= 1e-14


def test_interpolation_with_tiny_noise(rng):
    X = rng.normal(size=(40, 6))
    y = np.cos(X[:, 1])
    model = gpr.fit(gpr.Dataset(X=X, y=y), hp(noise=1e-12))
    for i in range(40):
        mu, _ = gpr.predict(model, X[i])
        assert abs(mu - y[i]) <= 1e-4


def test_variance_never_exceeds_prior(rng):
    data = random_dataset(rng, 50)
    h = hp(sig=0.3)
    model = gpr.fit(data, h)
    for _ in range(200):
        _, var = gpr.predict(model, rng.normal(size=6) * 3)
        assert var <= 0.3 + 1e-12


def test_duplicate_inputs_zero_noise_not_pd():
    X = np.zeros((2, 6))
    with pytest.raises(NotPositiveDefinite):
        gpr.fit(gpr.Dataset(X=X, y=np.array([1.0, -1.0])), hp(noise=0.0))


def test_hyperparameter_validation():
    with pytest.raises(ValidationError, match="noise_variance"):
        gpr.Hyperparameters(signal_var=1.0, lengthscales=np.ones(6), noise_var=-1e-4)
    with pytest.raises(ValidationError):
        gpr.Hyperparameters(signal_var=0.0, lengthscales=np.ones(6), noise_var=1e-4)


def test_axis_models_assembly(rng):
    X = rng.normal(size=(30, 6))
    goals = rng.normal(size=(30, 3))
    models = gpr.fit_axis_models(X, goals, hp())
    assert len(models) == 3
    for j in range(3):
        assert_allclose(models[j].data.y, goals[:, j], atol=0)


def test_csv_round_trip(tmp_path, rng):
    X = rng.normal(size=(12, 6))
    goals = rng.normal(size=(12, 3))
    path = tmp_path / "train.csv"
    gpr.write_training_csv(path, X, goals)
    X2, g2 = gpr.read_training_csv(path)
    assert np.abs(X2 - X).max() <= 1e-11
    assert np.abs(g2 - goals).max() <= 1e-11


def test_kernel_backends_agree(rng):
    X1 = rng.normal(size=(25, 6))
    X2 = rng.normal(size=(17, 6))
    ls = np.array([0.3, 0.3, 0.3, 1.5, 1.5, 1.5])
    from handover_mpc import _kernels
    from handover_mpc.accel import _np_se_kernel_matrix

    a = accel.se_kernel_matrix(X1, X2, ls, 0.05)
    b = _kernels.se_kernel_matrix_impl(X1, X2, ls, 0.05)
    c = _np_se_kernel_matrix(X1, X2, ls, 0.05)
    assert np.abs(a - b).max() <= 1e-13
    assert np.abs(a - c).max() <= 1e-12
