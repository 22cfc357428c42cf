"""Quadratic error-bounding functions of the path parameter.

Eight bounds (position/orientation x two orthogonal directions x
lower/upper), each of the form value(phi) = c + a*(phi - anchor)^2 on the
validity range [phi_start, anchor] and clamped to the endpoint values
outside it. Replanning keeps the value at the robot's current phi exactly
and moves the anchor target to the latest adapted goal.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ValidationError

# index order of the four bounded error components
COMPONENTS = ("p1", "p2", "o1", "o2")


@dataclass(frozen=True)
class BoundConfig:
    init_pos: float = 0.3  # m, initial corridor half-width
    init_ori: float = 0.6  # rad
    eps_width_pos: float = 0.002  # m, minimum corridor width
    eps_width_ori: float = 0.02  # rad
    ori_half: float = 0.05  # rad, fixed orientation target half-width

    def __post_init__(self):
        if min(self.init_pos, self.init_ori, self.eps_width_pos, self.eps_width_ori) <= 0:
            raise ValidationError("bound widths must be positive")


class QuadraticBound(NamedTuple):
    c: float  # target value at the anchor
    a: float  # curvature
    anchor: float  # adapted handover path parameter
    phi_start: float  # handover-segment entry


def eval_bound(bound: QuadraticBound, phi) -> float:
    """Bound value with constant extrapolation beyond the validity range."""
    lo, hi = bound.phi_start, bound.anchor
    if hi < lo:
        lo, hi = hi, lo
    phi = min(max(float(phi), lo), hi)
    return bound.c + bound.a * (phi - bound.anchor) ** 2


@dataclass(frozen=True)
class BoundSet:
    """Snapshot of the eight bounds for one control step.

    c/a are (4, 2) arrays over COMPONENTS x (lower, upper). The active
    validity range is [pin, anchor]: pin is where value continuity was
    enforced at the last replan, and behind it the bounds extend flat so
    the lower/upper parabolas can never cross.
    """

    c: np.ndarray
    a: np.ndarray
    anchor: float
    phi_start: float  # handover-segment entry (kept for reference)
    pin: float
    widened: bool = field(default=False, compare=False)

    def bound(self, comp, side) -> QuadraticBound:
        j = 0 if side == "lower" else 1
        i = COMPONENTS.index(comp) if isinstance(comp, str) else comp
        return QuadraticBound(
            c=float(self.c[i, j]),
            a=float(self.a[i, j]),
            anchor=self.anchor,
            phi_start=self.pin,
        )

    def eval_all(self, phi) -> np.ndarray:
        """(4, 2) array of bound values at phi (clamped to the range)."""
        lo, hi = sorted((self.pin, self.anchor))
        phi = min(max(float(phi), lo), hi)
        return self.c + self.a * (phi - self.anchor) ** 2


def initial_bounds(phi_start, anchor, cfg: BoundConfig) -> BoundSet:
    """Wide constant corridor used at handover-segment entry."""
    half = np.array([cfg.init_pos, cfg.init_pos, cfg.init_ori, cfg.init_ori])
    c = np.column_stack((-half, half))
    return BoundSet(
        c=c,
        a=np.zeros((4, 2)),
        anchor=float(anchor),
        phi_start=float(phi_start),
        pin=float(phi_start),
    )


def _targets(goal, cfg: BoundConfig):
    """Anchor-value targets (4, 2) from the adapted goal."""
    centers = np.array(
        [goal.coords.e1, goal.coords.e2, goal.ori_targets[0], goal.ori_targets[1]]
    )
    halves = np.array(
        [
            max(goal.half_widths[0], 0.5 * cfg.eps_width_pos),
            max(goal.half_widths[1], 0.5 * cfg.eps_width_pos),
            max(cfg.ori_half, 0.5 * cfg.eps_width_ori),
            max(cfg.ori_half, 0.5 * cfg.eps_width_ori),
        ]
    )
    return np.column_stack((centers - halves, centers + halves))


def replan_bounds(prev: BoundSet, phi_r, goal, cfg: BoundConfig) -> BoundSet:
    """New bound set anchored at the current goal, continuous at phi_r.

    phi_r is clamped into the overlap of the old and new validity ranges
    so the two-point construction matches the (clamped) evaluation rule.
    """
    targets = _targets(goal, cfg)
    widened = False
    for i in range(4):
        if targets[i, 1] < targets[i, 0]:
            # cannot happen with half-width construction; widen defensively
            mid = 0.5 * (targets[i, 0] + targets[i, 1])
            eps = cfg.eps_width_pos if i < 2 else cfg.eps_width_ori
            targets[i] = (mid - 0.5 * eps, mid + 0.5 * eps)
            widened = True
    if goal.w_pred < 0.5:
        # once the measured hand dominates, the corridor may only narrow
        prev_widths = prev.c[:, 1] - prev.c[:, 0]
        for i in range(4):
            width = targets[i, 1] - targets[i, 0]
            if width > prev_widths[i]:
                mid = 0.5 * (targets[i, 0] + targets[i, 1])
                targets[i] = (mid - 0.5 * prev_widths[i], mid + 0.5 * prev_widths[i])
    anchor = float(goal.coords.phi)
    prev_vals = prev.eval_all(phi_r)  # previous bound's own clamping rule
    # pin the new parabola where it must reproduce the previous value; the
    # pin may sit beyond the anchor when the robot has overshot the goal
    phi_pt = max(float(phi_r), prev.phi_start)
    gap = phi_pt - anchor
    if abs(gap) < 1e-6:
        # construction degenerates: hold the previous values this cycle
        targets = prev_vals.copy()
        a = np.zeros((4, 2))
    else:
        a = (prev_vals - targets) / gap**2
    return BoundSet(
        c=targets,
        a=a,
        anchor=anchor,
        phi_start=prev.phi_start,
        pin=phi_pt,
        widened=widened,
    )


def continuity_residual(prev: BoundSet, new: BoundSet, phi_r) -> float:
    """Max |new - prev| over the eight bounds at the replan point."""
    return float(np.abs(new.eval_all(phi_r) - prev.eval_all(phi_r)).max())
