"""
Euler-angle kinematics for the refueling simulator.

Conventions:
    - NED (North-East-Down) inertial frame.
    - Z-Y-X (yaw-pitch-roll) Euler sequence; ``rotation_matrix`` maps body
      coordinates to NED: ``v_ned = R @ v_body``.
    - Attitude rates are Euler-angle rates (phi_dot, theta_dot, psi_dot),
      not body rates; all time derivatives here are chain-rule derivatives
      of R along an Euler-angle trajectory.

The probe tip is a fixed point in the body frame, offset from the center
of gravity by ``x_bar``; its inertial position and velocity follow from
R and its first derivative.
"""

from dataclasses import dataclass, field

import numpy as np

# Pitch guard: |theta| must stay below pi/2 - THETA_GUARD (inversion
# singularity). Refueling flight keeps theta within a few degrees.
THETA_GUARD = 1e-3

# Rotation generators d/dangle of the elementary rotations, pulled out of
# the factored form dRz/dpsi = Sz @ Rz (and likewise for y, x axes).
_SX = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
_SY = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
_SZ = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])


class SingularAttitudeError(ValueError):
    """Pitch is too close to +/-90 deg for the Euler parameterization."""


@dataclass(frozen=True)
class Attitude:
    """Euler angles (rad): roll phi, pitch theta, yaw psi."""

    phi: float = 0.0
    theta: float = 0.0
    psi: float = 0.0

    def check(self) -> "Attitude":
        if not np.isfinite([self.phi, self.theta, self.psi]).all():
            raise SingularAttitudeError("attitude angles must be finite")
        if abs(self.theta) >= np.pi / 2 - THETA_GUARD:
            raise SingularAttitudeError(
                f"pitch {self.theta:.4f} rad within guard of +/-pi/2"
            )
        return self


@dataclass(frozen=True)
class AngularRates:
    """Euler-angle rates (rad/s)."""

    phi_dot: float = 0.0
    theta_dot: float = 0.0
    psi_dot: float = 0.0


@dataclass(frozen=True)
class ProbeGeometry:
    """Probe-tip offset from the CG in the body frame (m)."""

    x_bar: np.ndarray = field(default_factory=lambda: np.array([3.0, 0.0, 0.0]))

    def __post_init__(self):
        object.__setattr__(self, "x_bar", np.asarray(self.x_bar, dtype=float))
        if self.x_bar.shape != (3,):
            raise ValueError("x_bar must be a 3-vector")


def _factors(att: Attitude):
    """Elementary rotations Rz(psi), Ry(theta), Rx(phi)."""
    cphi, sphi = np.cos(att.phi), np.sin(att.phi)
    cth, sth = np.cos(att.theta), np.sin(att.theta)
    cpsi, spsi = np.cos(att.psi), np.sin(att.psi)
    rz = np.array([[cpsi, -spsi, 0.0], [spsi, cpsi, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[cth, 0.0, sth], [0.0, 1.0, 0.0], [-sth, 0.0, cth]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cphi, -sphi], [0.0, sphi, cphi]])
    return rz, ry, rx


def rotation_matrix(att: Attitude) -> np.ndarray:
    """
    Body-to-NED rotation matrix for a Z-Y-X Euler attitude.

    Args:
        att: Euler angles; pitch must satisfy the singularity guard.

    Returns:
        3x3 orthonormal matrix R with det(R) = +1.
    """
    att.check()
    rz, ry, rx = _factors(att)
    return rz @ ry @ rx


def rotation_matrix_dot(att: Attitude, rates: AngularRates) -> np.ndarray:
    """
    Analytic time derivative of ``rotation_matrix`` along an Euler-rate
    trajectory:

        dR/dt = psi_dot * Sz R + theta_dot * Rz Sy Ry Rx + phi_dot * Rz Ry Sx Rx
    """
    att.check()
    rz, ry, rx = _factors(att)
    d_psi = _SZ @ rz @ ry @ rx
    d_theta = rz @ _SY @ ry @ rx
    d_phi = rz @ ry @ _SX @ rx
    return rates.psi_dot * d_psi + rates.theta_dot * d_theta + rates.phi_dot * d_phi


def rotation_matrix_ddot(
    att: Attitude, rates: AngularRates, accels: AngularRates
) -> np.ndarray:
    """
    Analytic second time derivative of ``rotation_matrix``.

    ``accels`` holds the Euler-angle accelerations (rad/s^2), reusing the
    AngularRates container. Second-order chain rule over the factored
    rotation Rz Ry Rx:

        d2R/dt2 = sum_i a_i * dR/dq_i + sum_ij w_i w_j * d2R/dq_i dq_j
    """
    att.check()
    rz, ry, rx = _factors(att)

    dz = _SZ @ rz          # dRz/dpsi
    dy = _SY @ ry          # dRy/dtheta
    dx = _SX @ rx          # dRx/dphi
    ddz = _SZ @ dz
    ddy = _SY @ dy
    ddx = _SX @ dx

    wps, wth, wph = rates.psi_dot, rates.theta_dot, rates.phi_dot
    aps, ath, aph = accels.psi_dot, accels.theta_dot, accels.phi_dot

    out = aps * (dz @ ry @ rx) + ath * (rz @ dy @ rx) + aph * (rz @ ry @ dx)
    out += wps**2 * (ddz @ ry @ rx) + wth**2 * (rz @ ddy @ rx) + wph**2 * (rz @ ry @ ddx)
    out += 2.0 * wps * wth * (dz @ dy @ rx)
    out += 2.0 * wps * wph * (dz @ ry @ dx)
    out += 2.0 * wth * wph * (rz @ dy @ dx)
    return out


def probe_position(state, geom: ProbeGeometry) -> np.ndarray:
    """Probe-tip position in NED: x_P = x_cg + R @ x_bar."""
    return state.position + rotation_matrix(state.attitude) @ geom.x_bar


def probe_velocity(state, geom: ProbeGeometry) -> np.ndarray:
    """Probe-tip velocity in NED: xdot_P = xdot_cg + dR/dt @ x_bar."""
    return state.velocity + rotation_matrix_dot(state.attitude, state.rates) @ geom.x_bar
