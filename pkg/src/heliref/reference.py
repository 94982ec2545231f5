"""
Reference trajectory generation.

The desired probe path approaches the wind-free drogue path from behind
along the flight track, closing an initial separation with a quintic
(minimum-jerk) profile: C^2, zero closure rate and zero acceleration at
both ends, so the feedforward acceleration stays far below saturation.
After the approach duration the desired closure is identically zero.
"""

from dataclasses import dataclass

import numpy as np

from .controllers import ReferenceSample
from .drogue import DrogueState, nominal_trajectory
from .plant import PlantParams


@dataclass(frozen=True)
class ClosureSchedule:
    """Scalar separation profile behind the drogue along the track."""

    initial_separation: float = 5.0   # m
    approach_duration: float = 30.0   # s

    def __post_init__(self):
        if self.initial_separation < 0:
            raise ValueError("initial_separation must be non-negative")
        if self.approach_duration <= 0:
            raise ValueError("approach_duration must be positive")

    def closure(self, t: float) -> tuple[float, float, float]:
        """Separation s(t) and its first two derivatives; s hits 0 at T."""
        T = self.approach_duration
        s0 = self.initial_separation
        if t >= T:
            return 0.0, 0.0, 0.0
        tau = t / T
        blend = tau**3 * (10.0 - 15.0 * tau + 6.0 * tau**2)
        dblend = (30.0 * tau**2 - 60.0 * tau**3 + 30.0 * tau**4) / T
        ddblend = (60.0 * tau - 180.0 * tau**2 + 120.0 * tau**3) / T**2
        return s0 * (1.0 - blend), -s0 * dblend, -s0 * ddblend


def reference_at(t: float, schedule: ClosureSchedule, params: PlantParams,
                 drogue_initial: DrogueState) -> ReferenceSample:
    """
    Planner sample at time t: desired probe state trailing the nominal
    drogue by the scheduled separation, with exact schedule derivatives
    as the velocity/acceleration feedforward. Yaw rate reference is zero
    (straight tanker track).
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    nominal = nominal_trajectory(t, params, drogue_initial)
    speed = np.linalg.norm(drogue_initial.velocity)
    track = drogue_initial.velocity / speed
    s, s_dot, s_ddot = schedule.closure(t)
    return ReferenceSample(
        probe_pos_des=nominal.position - s * track,
        probe_vel_des=nominal.velocity - s_dot * track,
        accel_des=nominal.acceleration - s_ddot * track,
        drogue_pos_des=nominal.position,
        drogue_vel_des=nominal.velocity,
        psi_dot_des=0.0,
    )
