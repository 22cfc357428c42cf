"""Gaussian process regression with a squared-exponential kernel.

One scalar model per output; the handover predictor stacks three of them
(one per spatial component). Solves go through a cached Cholesky
factorization of K + noise*I, never an explicit inverse.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from . import accel
from .errors import NotPositiveDefinite, ValidationError


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray  # (n, 6): hand position (m) and velocity (m/s)
    y: np.ndarray  # (n,): one spatial component of the handover location, m

    def __post_init__(self):
        if self.X.ndim != 2 or self.X.shape[0] < 1:
            raise ValidationError("dataset needs at least one row")
        if self.y.shape != (self.X.shape[0],):
            raise ValidationError("dataset target length mismatch")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.y))):
            raise ValidationError("dataset contains non-finite entries")


@dataclass(frozen=True)
class Hyperparameters:
    signal_var: float  # m^2
    lengthscales: np.ndarray  # (6,)
    noise_var: float  # m^2

    def __post_init__(self):
        if self.signal_var <= 0:
            raise ValidationError("signal_variance must be positive")
        if self.noise_var < 0:
            raise ValidationError("noise_variance must be nonnegative")
        if np.any(np.asarray(self.lengthscales) <= 0):
            raise ValidationError("lengthscales must be positive")


@dataclass(frozen=True)
class TrainedModel:
    data: Dataset
    hp: Hyperparameters
    chol_lower: np.ndarray  # L with L L^T = K + noise*I
    alpha: np.ndarray  # (K + noise*I)^{-1} y


def fit(data: Dataset, hp: Hyperparameters) -> TrainedModel:
    K = accel.se_kernel_matrix(data.X, data.X, hp.lengthscales, hp.signal_var)
    K[np.diag_indices_from(K)] += hp.noise_var
    try:
        L, _ = cho_factor(K, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"kernel matrix not positive definite: {exc}")
    alpha = cho_solve((L, True), data.y, check_finite=False)
    return TrainedModel(data=data, hp=hp, chol_lower=np.tril(L), alpha=alpha)


def predict(model: TrainedModel, x_star):
    """Posterior mean (m) and variance (m^2) at one test input."""
    x_star = np.asarray(x_star, dtype=float)
    k_star = accel.se_kernel_vec(
        model.data.X, x_star, model.hp.lengthscales, model.hp.signal_var
    )
    mu = float(k_star @ model.alpha)
    w = solve_triangular(model.chol_lower, k_star, lower=True, check_finite=False)
    var = model.hp.signal_var - float(w @ w)
    return mu, max(var, 0.0)


def log_marginal_likelihood(model: TrainedModel) -> float:
    n = model.data.y.shape[0]
    return float(
        -0.5 * model.data.y @ model.alpha
        - np.sum(np.log(np.diag(model.chol_lower)))
        - 0.5 * n * np.log(2.0 * np.pi)
    )


# training data files: one row per sample, goal columns repeated per row
CSV_COLUMNS = ("px", "py", "pz", "vx", "vy", "vz", "gx", "gy", "gz")


def write_training_csv(path, X, goals):
    X = np.asarray(X, dtype=float)
    goals = np.asarray(goals, dtype=float)
    rows = np.hstack((X, goals))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.12g}" for v in row) + "\n")


def read_training_csv(path):
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != CSV_COLUMNS:
            raise ValidationError(f"unexpected training CSV header: {header}")
        body = np.loadtxt(fh, delimiter=",", ndmin=2)
    return body[:, :6], body[:, 6:9]


def axis_datasets(X, goals):
    """Split shared inputs + 3D goals into three scalar datasets."""
    return [Dataset(X=X, y=np.ascontiguousarray(goals[:, j])) for j in range(3)]


def fit_axis_models(X, goals, hp: Hyperparameters):
    return [fit(ds, hp) for ds in axis_datasets(X, goals)]
