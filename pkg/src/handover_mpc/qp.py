"""Dense convex QP solver: minimize 0.5 x'Hx + g'x  s.t.  Ax <= b.

Infeasible-start Mehrotra predictor-corrector interior-point method.
Deterministic: no randomization, fixed iteration schedule. Box constraints
are passed as ordinary rows of A.
"""

from dataclasses import dataclass

import numpy as np

from .errors import Infeasible, InfeasibleBounds


@dataclass(frozen=True)
class QP:
    H: np.ndarray  # (n, n) symmetric PSD
    g: np.ndarray  # (n,)
    A: np.ndarray  # (m, n)
    b: np.ndarray  # (m,)

    @property
    def n(self):
        return self.g.shape[0]

    @property
    def m(self):
        return self.b.shape[0]


@dataclass
class QpSolution:
    x: np.ndarray
    lam: np.ndarray
    objective: float
    iterations: int
    primal_residual: float
    dual_residual: float
    gap: float
    status: str  # "optimal" | "max_iterations"


def box_rows(lower, upper, n, indices=None):
    """(A, b) rows encoding lower <= x[idx] <= upper."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if np.any(lower > upper):
        raise InfeasibleBounds("box lower bound exceeds upper bound")
    idx = np.arange(n) if indices is None else np.asarray(indices)
    k = idx.shape[0]
    A = np.zeros((2 * k, n))
    A[np.arange(k), idx] = 1.0
    A[k + np.arange(k), idx] = -1.0
    return A, np.concatenate((upper, -lower))


def _solve_psd(M, rhs):
    """Cholesky solve with escalating jitter on failure."""
    jitter = 0.0
    scale = max(float(np.trace(M)) / M.shape[0], 1.0)
    for attempt in range(4):
        try:
            L = np.linalg.cholesky(M + jitter * np.eye(M.shape[0]))
            break
        except np.linalg.LinAlgError:
            jitter = scale * 10.0 ** (-12 + 3 * attempt)
    else:
        raise Infeasible("KKT system not positive definite")
    y = np.linalg.solve(L, rhs)
    return np.linalg.solve(L.T, y)


def solve_qp(qp: QP, tol=1e-6, max_iter=60, x0=None) -> QpSolution:
    """Solve to primal/dual residuals <= tol (infinity norms).

    Iteration cap returns the best iterate flagged "max_iterations";
    genuinely inconsistent constraints raise Infeasible.
    """
    H, g, A, b = qp.H, qp.g, qp.A, qp.b
    n, m = qp.n, qp.m
    if m == 0:
        x = _solve_psd(H, -g)
        return QpSolution(
            x=x,
            lam=np.zeros(0),
            objective=float(0.5 * x @ H @ x + g @ x),
            iterations=0,
            primal_residual=0.0,
            dual_residual=0.0,
            gap=0.0,
            status="optimal",
        )

    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()
    s = np.maximum(b - A @ x, 1.0)
    lam = np.ones(m)
    b_scale = 1.0 + float(np.abs(b).max(initial=0.0))

    best = None
    for it in range(1, max_iter + 1):
        r_d = H @ x + g + A.T @ lam
        r_p = A @ x + s - b
        mu = float(s @ lam) / m
        pr = float(np.abs(r_p).max())
        dr = float(np.abs(r_d).max())
        if best is None or pr + dr + mu < best[0]:
            best = (pr + dr + mu, x.copy(), lam.copy(), pr, dr, mu, it - 1)
        if pr <= tol and dr <= tol and mu <= 1e-3 * tol:
            return QpSolution(
                x=x,
                lam=lam,
                objective=float(0.5 * x @ H @ x + g @ x),
                iterations=it - 1,
                primal_residual=pr,
                dual_residual=dr,
                gap=mu,
                status="optimal",
            )
        # divergence heuristic: multipliers exploding while clearly infeasible
        if float(np.abs(lam).max()) > 1e13 and pr > 1e-3 * b_scale:
            raise Infeasible("dual iterates diverged; constraints inconsistent")

        s_safe = np.maximum(s, 1e-16)
        d = np.minimum(lam / s_safe, 1e18)  # finite even when slacks underflow
        M = H + (A.T * d) @ A

        # predictor (affine scaling) step
        rhs = -r_d + A.T @ (lam - d * r_p)
        dx_aff = _solve_psd(M, rhs)
        ds_aff = -r_p - A @ dx_aff
        dlam_aff = -lam - d * ds_aff

        alpha_p = _max_step(s, ds_aff)
        alpha_d = _max_step(lam, dlam_aff)
        mu_aff = float((s + alpha_p * ds_aff) @ (lam + alpha_d * dlam_aff)) / m
        sigma = (mu_aff / mu) ** 3 if mu > 0 else 0.0

        # corrector with centering
        r_c = s * lam - sigma * mu + ds_aff * dlam_aff
        rhs = -r_d + A.T @ (r_c / s_safe - d * r_p)
        dx = _solve_psd(M, rhs)
        ds = -r_p - A @ dx
        dlam = (-r_c - lam * ds) / s_safe

        tau = min(0.9995, 1.0 - min(0.01, 10.0 * mu))  # fraction to boundary
        alpha = min(tau * _max_step(s, ds), tau * _max_step(lam, dlam), 1.0)
        x += alpha * dx
        s += alpha * ds
        lam += alpha * dlam

    _, x, lam, pr, dr, mu, it = best
    return QpSolution(
        x=x,
        lam=lam,
        objective=float(0.5 * x @ H @ x + g @ x),
        iterations=max_iter,
        primal_residual=pr,
        dual_residual=dr,
        gap=mu,
        status="max_iterations",
    )


def _max_step(v, dv):
    """Largest alpha in (0, 1] keeping v + alpha*dv >= 0."""
    neg = dv < 0
    if not np.any(neg):
        return 1.0
    return min(1.0, float(np.min(-v[neg] / dv[neg])))
