"""Rotation exponential/logarithm maps and RPY extraction.

Rotation vectors are axis*angle 3-vectors; the canonical log branch keeps
the angle in [0, pi). RPY follows the ZYX convention,
R = Rz(yaw) @ Ry(pitch) @ Rx(roll).
"""

from typing import NamedTuple

import numpy as np

from .errors import AngleNearPi, GimbalLock

# below this angle the Rodrigues/log coefficients switch to series form
SMALL_ANGLE = 1e-8


class RpyAngles(NamedTuple):
    roll: float
    pitch: float
    yaw: float


def skew(v):
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def is_rotation(R, tol=1e-9):
    return (
        R.shape == (3, 3)
        and np.allclose(R.T @ R, np.eye(3), atol=tol)
        and abs(np.linalg.det(R) - 1.0) <= tol
    )


def exp_map(v):
    """Rodrigues rotation about v/|v| by angle |v|."""
    v = np.asarray(v, dtype=float)
    theta2 = float(v @ v)
    theta = np.sqrt(theta2)
    K = skew(v)
    if theta < SMALL_ANGLE:
        c1 = 1.0 - theta2 / 6.0
        c2 = 0.5 - theta2 / 24.0
    else:
        c1 = np.sin(theta) / theta
        c2 = (1.0 - np.cos(theta)) / theta2
    return np.eye(3) + c1 * K + c2 * (K @ K)


def log_map(R):
    """Inverse of exp_map on the canonical branch (angle in [0, pi)).

    Raises AngleNearPi within ~1e-6 rad of pi, where the branch cut makes
    the axis undefined; angles up to pi - 1e-6 round-trip to 1e-10.
    """
    R = np.asarray(R, dtype=float)
    tr = float(np.trace(R))
    # trace = -1 + (pi - angle)^2 near the cut; -1 + 5e-13 ~ pi - 7e-7
    if tr <= -1.0 + 5e-13:
        raise AngleNearPi(f"rotation angle too close to pi (trace={tr:.15f})")
    w = 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    s = np.linalg.norm(w)  # sin(theta)
    c = min(max(0.5 * (tr - 1.0), -1.0), 1.0)  # cos(theta)
    theta = np.arctan2(s, c)
    if theta < SMALL_ANGLE:
        return w * (1.0 + theta * theta / 6.0)
    if theta < 2.356194490192345:  # 3*pi/4: antisymmetric part is well conditioned
        return w * (theta / s)
    # near pi the axis comes from the symmetric part: R + R^T = 2cI + 2(1-c) aa^T
    d = (np.diag(R) - c) / (1.0 - c)
    axis = np.sqrt(np.maximum(d, 0.0))
    i = int(np.argmax(axis))
    j, k = (i + 1) % 3, (i + 2) % 3
    denom = (1.0 - c) * axis[i]
    axis[j] = 0.5 * (R[i, j] + R[j, i]) / denom
    axis[k] = 0.5 * (R[i, k] + R[k, i]) / denom
    axis /= np.linalg.norm(axis)
    if axis @ w < 0.0:
        axis = -axis
    return theta * axis


def rpy_from_rotation(R):
    """ZYX roll/pitch/yaw of R; raises GimbalLock near |pitch| = pi/2."""
    R = np.asarray(R, dtype=float)
    sp = -R[2, 0]
    cp = np.sqrt(R[0, 0] ** 2 + R[1, 0] ** 2)
    if cp < 1e-6:
        raise GimbalLock(f"|cos(pitch)| = {cp:.2e}")
    return RpyAngles(
        roll=float(np.arctan2(R[2, 1], R[2, 2])),
        pitch=float(np.arctan2(sp, cp)),
        yaw=float(np.arctan2(R[1, 0], R[0, 0])),
    )


def rotation_from_rpy(roll, pitch, yaw):
    cr, sr = np.cos(roll), np.sin(roll)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cy, sy = np.cos(yaw), np.sin(yaw)
    return np.array(
        [
            [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
            [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
            [-sp, cp * sr, cp * cr],
        ]
    )


def right_jacobian(v):
    """Right Jacobian of exp: Exp(v + dv) ~ Exp(v) Exp(Jr(v) dv)."""
    v = np.asarray(v, dtype=float)
    theta2 = float(v @ v)
    theta = np.sqrt(theta2)
    K = skew(v)
    if theta < SMALL_ANGLE:
        c1 = 0.5 - theta2 / 24.0
        c2 = 1.0 / 6.0 - theta2 / 120.0
    else:
        c1 = (1.0 - np.cos(theta)) / theta2
        c2 = (theta - np.sin(theta)) / (theta2 * theta)
    return np.eye(3) - c1 * K + c2 * (K @ K)


def left_jacobian_inv(v):
    """Inverse left Jacobian: d/dt Log(R) = Jl_inv(Log R) w for Rdot = skew(w) R."""
    v = np.asarray(v, dtype=float)
    theta2 = float(v @ v)
    theta = np.sqrt(theta2)
    K = skew(v)
    if theta < SMALL_ANGLE:
        c = 1.0 / 12.0 + theta2 / 720.0
    else:
        c = 1.0 / theta2 - (1.0 + np.cos(theta)) / (2.0 * theta * np.sin(theta))
    return np.eye(3) - 0.5 * K + c * (K @ K)
