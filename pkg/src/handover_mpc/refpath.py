"""Piecewise-linear position/orientation reference paths.

A path is parameterized by arc length phi (meters). Positions interpolate
linearly between via-points; orientations interpolate linearly between the
via rotation vectors (Lie algebra of the global frame). Every segment
carries two orthonormal frames:

  position:    {tangent, b_p1, b_p2}
  orientation: {b_omega, b_o1, b_o2}

in which end-effector errors are decomposed into (orthogonal-1,
orthogonal-2, tangential) components.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import so3
from .errors import DegenerateSegment, NotPSD, OutOfRange

_VERTICAL = np.array([0.0, 0.0, 1.0])
_FALLBACK = np.array([1.0, 0.0, 0.0])


class PathCoordinates(NamedTuple):
    e1: float
    e2: float
    phi: float
    in_segment: bool = True


class DecomposedError(NamedTuple):
    e1: float
    e2: float
    e_par: float


def _orthonormal_pair(axis):
    """Two unit vectors completing `axis` to a right-handed triple.

    First direction: vertical component orthogonal to the axis, falling
    back to global x when the axis is (near) vertical.
    """
    b1 = _VERTICAL - (_VERTICAL @ axis) * axis
    n = np.linalg.norm(b1)
    if n < 1e-8:
        b1 = _FALLBACK - (_FALLBACK @ axis) * axis
        n = np.linalg.norm(b1)
    b1 = b1 / n
    b2 = np.cross(axis, b1)
    return b1, b2


@dataclass(frozen=True)
class ReferencePath:
    points: np.ndarray  # (K+1, 3) via positions
    rotvecs: np.ndarray  # (K+1, 3) via orientations, axis*angle
    breakpoints: np.ndarray  # (K+1,) segment start parameters, arc length
    tangents: np.ndarray  # (K, 3)
    b_p1: np.ndarray  # (K, 3)
    b_p2: np.ndarray  # (K, 3)
    b_omega: np.ndarray  # (K, 3)
    b_o1: np.ndarray  # (K, 3)
    b_o2: np.ndarray  # (K, 3)

    @property
    def n_segments(self):
        return self.tangents.shape[0]

    @property
    def length(self):
        return float(self.breakpoints[-1])

    def segment_index(self, phi):
        """Segment owning phi; right-open intervals, last segment closed."""
        k = int(np.searchsorted(self.breakpoints, phi, side="right") - 1)
        return min(max(k, 0), self.n_segments - 1)

    def rotvec_rate(self, seg):
        """d(pi_o)/dphi on a segment (constant)."""
        dphi = self.breakpoints[seg + 1] - self.breakpoints[seg]
        return (self.rotvecs[seg + 1] - self.rotvecs[seg]) / dphi

    def projection_frame(self, seg):
        """Columns (b_o2 | b_omega | b_o1); proper rotation by construction."""
        return np.column_stack((self.b_o2[seg], self.b_omega[seg], self.b_o1[seg]))


def from_via_points(points, rotvecs) -> ReferencePath:
    """Build a path through the given via positions/orientations."""
    points = np.asarray(points, dtype=float)
    rotvecs = np.asarray(rotvecs, dtype=float)
    nseg = points.shape[0] - 1
    lengths = np.linalg.norm(np.diff(points, axis=0), axis=1)
    if np.any(lengths <= 1e-6):
        raise DegenerateSegment("consecutive via-points closer than 1e-6 m")
    breakpoints = np.concatenate(([0.0], np.cumsum(lengths)))
    tangents = np.diff(points, axis=0) / lengths[:, None]

    b_p1 = np.empty((nseg, 3))
    b_p2 = np.empty((nseg, 3))
    b_omega = np.empty((nseg, 3))
    b_o1 = np.empty((nseg, 3))
    b_o2 = np.empty((nseg, 3))
    for k in range(nseg):
        b_p1[k], b_p2[k] = _orthonormal_pair(tangents[k])
        w = rotvecs[k + 1] - rotvecs[k]
        wn = np.linalg.norm(w)
        # segment without rotation: reuse the position tangent as the axis
        b_omega[k] = tangents[k] if wn < 1e-10 else w / wn
        b_o1[k], b_o2[k] = _orthonormal_pair(b_omega[k])

    return ReferencePath(
        points=points,
        rotvecs=rotvecs,
        breakpoints=breakpoints,
        tangents=tangents,
        b_p1=b_p1,
        b_p2=b_p2,
        b_omega=b_omega,
        b_o1=b_o1,
        b_o2=b_o2,
    )


def goal_orientation(R_start, hand_direction):
    """Rotation whose tool z axis points along hand_direction.

    Uses the minimal rotation taking the start tool axis onto the target
    direction, which is also the orientation closest to R_start among all
    admissible ones.
    """
    d = np.asarray(hand_direction, dtype=float)
    d = d / np.linalg.norm(d)
    z0 = R_start[:, 2]
    c = float(z0 @ d)
    axis = np.cross(z0, d)
    s = np.linalg.norm(axis)
    if s < 1e-12:
        if c > 0.0:
            return R_start.copy()
        # antiparallel: half turn about any axis orthogonal to z0
        flip, _ = _orthonormal_pair(z0)
        return so3.exp_map(np.pi * flip) @ R_start
    angle = np.arctan2(s, c)
    return so3.exp_map(angle * axis / s) @ R_start


def build_reference_path(p_r0, p_ra, p_ho0, R_r0, hand_direction) -> ReferencePath:
    """Two-segment handover path start -> approach -> handover point.

    The goal orientation aligns the tool z axis with hand_direction; the
    orientation reference ramps linearly in the Lie algebra from the start
    orientation to the goal over total arc length, split at the via point.
    """
    points = np.array([p_r0, p_ra, p_ho0], dtype=float)
    lengths = np.linalg.norm(np.diff(points, axis=0), axis=1)
    if np.any(lengths <= 1e-6):
        raise DegenerateSegment("consecutive via-points closer than 1e-6 m")
    v0 = so3.log_map(R_r0)
    v_goal = so3.log_map(goal_orientation(R_r0, hand_direction))
    frac = lengths[0] / lengths.sum()
    rotvecs = np.array([v0, v0 + frac * (v_goal - v0), v_goal])
    return from_via_points(points, rotvecs)


def _check_phi(path, phi, clamp):
    if clamp:
        return float(min(max(phi, 0.0), path.length))
    if phi < 0.0 or phi > path.length:
        raise OutOfRange(f"phi={phi} outside [0, {path.length}]")
    return float(phi)


def eval_path(path: ReferencePath, phi, clamp=False):
    """Reference position and orientation vector at phi."""
    phi = _check_phi(path, phi, clamp)
    k = path.segment_index(phi)
    s = (phi - path.breakpoints[k]) / (path.breakpoints[k + 1] - path.breakpoints[k])
    pos = (1.0 - s) * path.points[k] + s * path.points[k + 1]
    rot = (1.0 - s) * path.rotvecs[k] + s * path.rotvecs[k + 1]
    return pos, rot


def decompose_position_error(p, path: ReferencePath, phi, clamp=False):
    """Error of p against the path at phi, in the segment's path frame."""
    phi = _check_phi(path, phi, clamp)
    k = path.segment_index(phi)
    ref, _ = eval_path(path, phi)
    e = np.asarray(p, dtype=float) - ref
    return DecomposedError(
        e1=float(path.b_p1[k] @ e),
        e2=float(path.b_p2[k] @ e),
        e_par=float(path.tangents[k] @ e),
    )


def decompose_orientation_error(R, path: ReferencePath, phi, clamp=False):
    """Orientation error of R against the path at phi.

    The error rotation R @ Exp(pi_o(phi))^T is conjugated into the
    segment's orientation frame and read off as ZYX angles; (yaw, roll,
    pitch) map to (orthogonal-1, orthogonal-2, tangential).
    """
    phi = _check_phi(path, phi, clamp)
    k = path.segment_index(phi)
    _, rot = eval_path(path, phi)
    R_err = np.asarray(R, dtype=float) @ so3.exp_map(rot).T
    R_proj = path.projection_frame(k)
    rpy = so3.rpy_from_rotation(R_proj.T @ R_err @ R_proj)
    return DecomposedError(e1=rpy.yaw, e2=rpy.roll, e_par=rpy.pitch)


def project_point_to_path(x, path: ReferencePath, segment) -> PathCoordinates:
    """Orthogonal projection of x onto a (linear) segment.

    phi may land outside the segment; that is reported via in_segment
    rather than an error.
    """
    x = np.asarray(x, dtype=float)
    t = path.tangents[segment]
    phi0 = path.breakpoints[segment]
    phi_out = phi0 + float((x - path.points[segment]) @ t)
    rel = x - (path.points[segment] + (phi_out - phi0) * t)
    inside = path.breakpoints[segment] - 1e-12 <= phi_out <= path.breakpoints[segment + 1] + 1e-12
    return PathCoordinates(
        e1=float(path.b_p1[segment] @ rel),
        e2=float(path.b_p2[segment] @ rel),
        phi=phi_out,
        in_segment=bool(inside),
    )


def project_covariance_to_path(sigma, path: ReferencePath, segment):
    """2x2 covariance of the orthogonal deviations on a segment."""
    sigma = np.asarray(sigma, dtype=float)
    scale = max(1.0, float(np.abs(sigma).max()))
    if not np.allclose(sigma, sigma.T, atol=1e-10 * scale):
        raise NotPSD("covariance not symmetric")
    if np.linalg.eigvalsh(sigma).min() < -1e-10 * scale:
        raise NotPSD("covariance has negative eigenvalues")
    B = np.vstack((path.b_p1[segment], path.b_p2[segment]))
    out = B @ sigma @ B.T
    return 0.5 * (out + out.T)
