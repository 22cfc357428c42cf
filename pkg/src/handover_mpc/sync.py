"""Human-robot progress synchronization along the path.

The desired path speed is a saturated P law on the difference between the
robot's and the human's remaining path distance to the handover point;
negative values (backward motion) are deliberate.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class SyncParams:
    dphi_max: float = 0.5  # m/s
    s: float = 5.0  # 1/m
    b: float = 0.005  # m, forward bias

    def __post_init__(self):
        if self.dphi_max <= 0 or self.s <= 0:
            raise ValidationError("sync: dphi_max and s must be positive")


class DesiredPathState(NamedTuple):
    phi_d: float
    dphi_d: float
    ddphi_d: float


def desired_path_state(goal_phi, phi_h, phi_c, params: SyncParams) -> DesiredPathState:
    """Target path state for the current cycle.

    goal_phi is the adapted handover path parameter, phi_h/phi_c the human
    and robot progress. The acceleration target stays zero; only the stage
    cost tracks it.
    """
    d_h = phi_h - goal_phi
    d_r = goal_phi - phi_c
    dphi = params.dphi_max * np.tanh(params.s * (d_r - d_h + params.b))
    return DesiredPathState(phi_d=float(goal_phi), dphi_d=float(dphi), ddphi_d=0.0)
