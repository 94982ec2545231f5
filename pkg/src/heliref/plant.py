"""
Surrogate helicopter plant.

The horizontal channels follow the attitude-driven zero dynamics

    Xddot = -g * (tan(theta - theta_trim) * cos(psi)
                  + tan(phi - phi_trim) / cos(theta - theta_trim) * sin(psi))
    Yddot = -g * (tan(theta - theta_trim) * sin(psi)
                  - tan(phi - phi_trim) / cos(theta - theta_trim) * cos(psi))

while the vertical acceleration and yaw rate commands pass straight
through. The inner attitude loop is either ideal (attitude snaps to the
command each step) or a first-order lag with time constant tau.
"""

from dataclasses import dataclass, field

import numpy as np

from .kinematics import Attitude, AngularRates, SingularAttitudeError, THETA_GUARD

MAX_DT = 0.05


class TimeStepError(ValueError):
    """Integration step outside (0, MAX_DT]."""


@dataclass(frozen=True)
class PlantParams:
    """Physical and inner-loop parameters."""

    g: float = 9.81                 # m/s^2
    theta_trim: float = 0.0        # rad
    phi_trim: float = 0.0          # rad
    tanker_speed: float = 56.58    # m/s, refueling airspeed
    inner_loop_mode: str = "lag"   # "ideal" | "lag"
    inner_loop_tau: float = 0.3    # s, attitude lag time constant
    accel_limit: float = 5.0       # m/s^2, per-axis command saturation

    def __post_init__(self):
        if self.g <= 0:
            raise ValueError("g must be positive")
        if self.tanker_speed <= 0:
            raise ValueError("tanker_speed must be positive")
        if self.inner_loop_mode not in ("ideal", "lag"):
            raise ValueError(f"unknown inner_loop_mode {self.inner_loop_mode!r}")
        if self.inner_loop_mode == "lag" and self.inner_loop_tau <= 0:
            raise ValueError("inner_loop_tau must be positive in lag mode")


@dataclass(frozen=True)
class HelicopterState:
    """CG position/velocity in NED plus Euler attitude and rates."""

    position: np.ndarray
    velocity: np.ndarray
    attitude: Attitude = field(default_factory=Attitude)
    rates: AngularRates = field(default_factory=AngularRates)

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float))


@dataclass(frozen=True)
class AccelCommand:
    """Commanded NED accelerations (m/s^2) and yaw rate (rad/s)."""

    x_ddot: float = 0.0
    y_ddot: float = 0.0
    z_ddot: float = 0.0
    psi_dot: float = 0.0

    def horizontal(self) -> np.ndarray:
        return np.array([self.x_ddot, self.y_ddot])


def clip_command(cmd: AccelCommand, limit: float) -> AccelCommand:
    """Saturate acceleration components to +/-limit (yaw rate untouched)."""
    return AccelCommand(
        x_ddot=float(np.clip(cmd.x_ddot, -limit, limit)),
        y_ddot=float(np.clip(cmd.y_ddot, -limit, limit)),
        z_ddot=float(np.clip(cmd.z_ddot, -limit, limit)),
        psi_dot=cmd.psi_dot,
    )


def zero_dynamics_accel(att: Attitude, params: PlantParams) -> tuple[float, float]:
    """
    Horizontal CG accelerations produced by an attitude offset from trim.

    Raises SingularAttitudeError when theta - theta_trim approaches +/-90 deg.
    """
    dtheta = att.theta - params.theta_trim
    dphi = att.phi - params.phi_trim
    if abs(dtheta) >= np.pi / 2 - THETA_GUARD:
        raise SingularAttitudeError(
            f"pitch offset {dtheta:.4f} rad within guard of +/-pi/2"
        )
    tan_th = np.tan(dtheta)
    roll_term = np.tan(dphi) / np.cos(dtheta)
    cpsi, spsi = np.cos(att.psi), np.sin(att.psi)
    x_ddot = -params.g * (tan_th * cpsi + roll_term * spsi)
    y_ddot = -params.g * (tan_th * spsi - roll_term * cpsi)
    return float(x_ddot), float(y_ddot)


def _lag_deriv(y: np.ndarray, cmd: AccelCommand, att_cmd: Attitude,
               params: PlantParams) -> np.ndarray:
    """State derivative for lag mode; y = [pos(3), vel(3), phi, theta, psi]."""
    att = Attitude(phi=y[6], theta=y[7], psi=y[8])
    ax, ay = zero_dynamics_accel(att, params)
    tau = params.inner_loop_tau
    return np.array([
        y[3], y[4], y[5],
        ax, ay, cmd.z_ddot,
        (att_cmd.phi - y[6]) / tau,
        (att_cmd.theta - y[7]) / tau,
        cmd.psi_dot,
    ])


def _rk4(y: np.ndarray, dt: float, deriv) -> np.ndarray:
    k1 = deriv(y)
    k2 = deriv(y + 0.5 * dt * k1)
    k3 = deriv(y + 0.5 * dt * k2)
    k4 = deriv(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step(state: HelicopterState, cmd: AccelCommand, att_cmd: Attitude,
         dt: float, params: PlantParams) -> HelicopterState:
    """
    Advance the plant one RK4 step of length dt under a held command.

    Ideal mode: attitude snaps to att_cmd for the whole step, horizontal
    accelerations come from the zero dynamics at att_cmd, Zddot and psi_dot
    pass through. The realized attitude path is piecewise constant, so the
    reported roll/pitch rates are zero (its derivative almost everywhere);
    feeding the jump increments back as rates would close an algebraic loop
    through the probe-velocity term. Lag mode: roll/pitch relax toward
    att_cmd with time constant tau while the zero dynamics always read the
    current (lagged) attitude.
    """
    if not 0.0 < dt <= MAX_DT:
        raise TimeStepError(f"dt={dt} outside (0, {MAX_DT}]")

    if params.inner_loop_mode == "ideal":
        att = Attitude(att_cmd.phi, att_cmd.theta, att_cmd.psi).check()
        ax, ay = zero_dynamics_accel(att, params)
        accel = np.array([ax, ay, cmd.z_ddot])

        def deriv(y):
            return np.concatenate([y[3:6], accel])

        y = _rk4(np.concatenate([state.position, state.velocity]), dt, deriv)
        new_att = Attitude(att.phi, att.theta, att.psi + cmd.psi_dot * dt)
        rates = AngularRates(phi_dot=0.0, theta_dot=0.0, psi_dot=cmd.psi_dot)
        return HelicopterState(position=y[0:3], velocity=y[3:6],
                               attitude=new_att, rates=rates)

    y0 = np.array([
        *state.position, *state.velocity,
        state.attitude.phi, state.attitude.theta, state.attitude.psi,
    ])
    y = _rk4(y0, dt, lambda s: _lag_deriv(s, cmd, att_cmd, params))
    new_att = Attitude(phi=y[6], theta=y[7], psi=y[8]).check()
    tau = params.inner_loop_tau
    rates = AngularRates(
        phi_dot=(att_cmd.phi - new_att.phi) / tau,
        theta_dot=(att_cmd.theta - new_att.theta) / tau,
        psi_dot=cmd.psi_dot,
    )
    return HelicopterState(position=y[0:3], velocity=y[3:6],
                           attitude=new_att, rates=rates)
