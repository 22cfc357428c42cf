"""Serial-chain forward kinematics and geometric Jacobian.

Chains are revolute-only, described by modified DH parameters plus a fixed
tool transform. The hot frame recursion lives in `accel.mdh_frames`.
"""

from dataclasses import dataclass, field

import numpy as np

from . import accel
from .errors import DimensionMismatch, ValidationError


@dataclass(frozen=True)
class JointLimits:
    q_lower: np.ndarray
    q_upper: np.ndarray
    dq_max: np.ndarray  # symmetric bound, rad/s
    ddq_max: np.ndarray  # rad/s^2
    jerk_max: np.ndarray  # rad/s^3

    def __post_init__(self):
        if not np.all(self.q_lower < self.q_upper):
            raise ValidationError("joint limits: q_lower must be < q_upper")
        for name in ("dq_max", "ddq_max", "jerk_max"):
            if not np.all(getattr(self, name) > 0):
                raise ValidationError(f"joint limits: {name} must be positive")


@dataclass(frozen=True)
class KinematicChain:
    """Modified-DH description: one row per revolute joint."""

    alpha: np.ndarray  # rad, link twist (preceding link)
    a: np.ndarray  # m, link length (preceding link)
    d: np.ndarray  # m, joint offset
    theta_offset: np.ndarray  # rad, added to the joint variable
    tool_rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    tool_position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    limits: JointLimits | None = None

    def __post_init__(self):
        n = self.n_joints
        if not 1 <= n <= 16:
            raise ValidationError(f"chain must have 1..16 joints, got {n}")
        for name in ("alpha", "a", "d", "theta_offset"):
            arr = getattr(self, name)
            if arr.shape != (n,) or not np.all(np.isfinite(arr)):
                raise ValidationError(f"chain parameter {name} malformed")

    @property
    def n_joints(self):
        return self.alpha.shape[0]

    def _check_q(self, q):
        q = np.asarray(q, dtype=float)
        if q.shape != (self.n_joints,):
            raise DimensionMismatch(
                f"expected {self.n_joints} joint values, got shape {q.shape}"
            )
        return q


def forward_kinematics(chain: KinematicChain, q):
    """Tool pose: (position 3-vector, rotation matrix)."""
    q = chain._check_q(q)
    Rs, ps = accel.mdh_frames(chain.alpha, chain.a, chain.d, chain.theta_offset, q)
    R_last = Rs[-1]
    p = ps[-1] + R_last @ chain.tool_position
    return p, R_last @ chain.tool_rotation


def geometric_jacobian(chain: KinematicChain, q):
    """6 x n Jacobian mapping dq to (linear; angular) tool velocity."""
    q = chain._check_q(q)
    Rs, ps = accel.mdh_frames(chain.alpha, chain.a, chain.d, chain.theta_offset, q)
    p_ee = ps[-1] + Rs[-1] @ chain.tool_position
    axes = Rs[:, :, 2]  # joint z axes in base frame
    J = np.empty((6, chain.n_joints))
    J[:3] = np.cross(axes, p_ee[None, :] - ps).T
    J[3:] = axes.T
    return J


def fk_with_jacobian(chain: KinematicChain, q):
    """One frame recursion shared by FK and Jacobian (planner hot path)."""
    q = chain._check_q(q)
    Rs, ps = accel.mdh_frames(chain.alpha, chain.a, chain.d, chain.theta_offset, q)
    p_ee = ps[-1] + Rs[-1] @ chain.tool_position
    R_ee = Rs[-1] @ chain.tool_rotation
    axes = Rs[:, :, 2]
    J = np.empty((6, chain.n_joints))
    J[:3] = np.cross(axes, p_ee[None, :] - ps).T
    J[3:] = axes.T
    return p_ee, R_ee, J
