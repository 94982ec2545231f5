"""
Outer-loop position controllers and dynamic-inversion attitude command.

Two PD acceleration laws share one reference trajectory:

    standard:  feedback on the CG-to-drogue closure
    proposed:  feedback on the probe-tip-to-drogue closure

The proposed law reduces to the standard one exactly when the probe
offset is zero. The attitude command is obtained by inverting the
horizontal zero dynamics analytically; correctness is defined by the
round trip zero_dynamics_accel(invert_to_attitude(cmd)) == cmd.
"""

from dataclasses import dataclass, field

import numpy as np

from .kinematics import Attitude, ProbeGeometry, probe_position, probe_velocity, THETA_GUARD
from .plant import AccelCommand, HelicopterState, PlantParams, zero_dynamics_accel


class InfeasibleCommandError(ValueError):
    """No attitude within the singularity guard achieves the command."""


@dataclass(frozen=True)
class ControllerGains:
    """Diagonal PD gains; entries must be positive."""

    kp: np.ndarray = field(default_factory=lambda: np.array([0.41, 0.37, 35.0]))
    kd: np.ndarray = field(default_factory=lambda: np.array([0.75, 0.75, 8.8]))

    def __post_init__(self):
        object.__setattr__(self, "kp", np.asarray(self.kp, dtype=float))
        object.__setattr__(self, "kd", np.asarray(self.kd, dtype=float))
        if self.kp.shape != (3,) or self.kd.shape != (3,):
            raise ValueError("gains must be 3-vectors of diagonal entries")
        if not (self.kp > 0).all() or not (self.kd > 0).all():
            raise ValueError("all gain entries must be positive")


@dataclass(frozen=True)
class ReferenceSample:
    """Planner output at one instant."""

    probe_pos_des: np.ndarray      # desired probe position (NED, m)
    probe_vel_des: np.ndarray      # desired probe velocity (m/s)
    accel_des: np.ndarray          # desired acceleration feedforward (m/s^2)
    drogue_pos_des: np.ndarray     # planned (wind-free) drogue position
    drogue_vel_des: np.ndarray     # planned drogue velocity
    psi_dot_des: float = 0.0       # desired yaw rate (rad/s)


def _pd_command(pos, vel, drogue_pos, drogue_vel, ref: ReferenceSample,
                gains: ControllerGains) -> AccelCommand:
    closure_err = (ref.probe_pos_des - ref.drogue_pos_des) - (pos - drogue_pos)
    closure_rate_err = (ref.probe_vel_des - ref.drogue_vel_des) - (vel - drogue_vel)
    accel = ref.accel_des + gains.kd * closure_rate_err + gains.kp * closure_err
    return AccelCommand(
        x_ddot=float(accel[0]), y_ddot=float(accel[1]), z_ddot=float(accel[2]),
        psi_dot=ref.psi_dot_des,
    )


def standard_command(state: HelicopterState, drogue, ref: ReferenceSample,
                     gains: ControllerGains) -> AccelCommand:
    """PD acceleration command fed back on the CG closure error."""
    return _pd_command(state.position, state.velocity,
                       drogue.position, drogue.velocity, ref, gains)


def proposed_command(state: HelicopterState, geom: ProbeGeometry, drogue,
                     ref: ReferenceSample, gains: ControllerGains) -> AccelCommand:
    """PD acceleration command fed back on the probe-tip closure error."""
    return _pd_command(probe_position(state, geom), probe_velocity(state, geom),
                       drogue.position, drogue.velocity, ref, gains)


def invert_to_attitude(cmd: AccelCommand, psi_c: float,
                       params: PlantParams) -> Attitude:
    """
    Attitude command whose zero dynamics reproduce (x_ddot, y_ddot).

    Solving the horizontal zero dynamics for the attitude offsets:

        tan(theta_c - theta_trim) = -(Xc cos(psi) + Yc sin(psi)) / g
        tan(phi_c - phi_trim)     = cos(theta_c - theta_trim)
                                    * (-Xc sin(psi) + Yc cos(psi)) / g

    Raises InfeasibleCommandError when the commanded pitch or roll lands
    inside the singularity guard.
    """
    cpsi, spsi = np.cos(psi_c), np.sin(psi_c)
    along = cmd.x_ddot * cpsi + cmd.y_ddot * spsi
    across = -cmd.x_ddot * spsi + cmd.y_ddot * cpsi

    dtheta = np.arctan(-along / params.g)
    dphi = np.arctan(np.cos(dtheta) * across / params.g)
    theta_c = params.theta_trim + dtheta
    phi_c = params.phi_trim + dphi
    if abs(theta_c) >= np.pi / 2 - THETA_GUARD or abs(dtheta) >= np.pi / 2 - THETA_GUARD:
        raise InfeasibleCommandError(
            f"commanded pitch {theta_c:.4f} rad inside singularity guard"
        )
    return Attitude(phi=float(phi_c), theta=float(theta_c), psi=float(psi_c))


def yaw_command(ref: ReferenceSample) -> float:
    """Commanded yaw rate is the planner's desired yaw rate, unchanged."""
    return ref.psi_dot_des
