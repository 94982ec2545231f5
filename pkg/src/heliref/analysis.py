"""
Ultimate-boundedness analysis for the closure-error dynamics.

The closed loop under the probe-feedback law with perfect inversion obeys

    eddot = -Kd edot - Kp e + d_drogue + d_probe

with both disturbance terms norm-bounded. The quadratic form

    V(E) = 1/2 e' Q1 e + 1/2 edot' edot + eps e' edot,  Q1 = Kp + eps Kd

is positive definite for 0 < eps < min(Kd), and V decreases everywhere
outside the invariant set

    Lambda = { E : V(E) <= level },
    level = (delta_d + delta_r)^2 / 2
            * ( max(Kp) / min(Kp)^2 + 1 / min(Kd)^2 )

so trajectories enter Lambda in finite time and stay. The companion norm
ceilings (delta_d + delta_r) / min(Kp) and / min(Kd) are the practical
docking-error guarantees; this module evaluates V and Vdot, computes the
set level, integrates the error dynamics directly, and issues per-
trajectory verdicts.
"""

from dataclasses import dataclass, asdict

import numpy as np

from .controllers import ControllerGains
from .drogue import UncertaintyBounds

DEFAULT_EPSILON_FRACTION = 0.01


class IndefiniteFormError(ValueError):
    """The assembled quadratic form is not positive definite."""


class DisturbanceBoundError(ValueError):
    """A disturbance sample violates its declared bound."""


@dataclass(frozen=True)
class ErrorState:
    """Stacked closure error E = [e; edot]."""

    e: np.ndarray
    e_dot: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "e", np.asarray(self.e, dtype=float))
        object.__setattr__(self, "e_dot", np.asarray(self.e_dot, dtype=float))


def default_epsilon(gains: ControllerGains) -> float:
    return DEFAULT_EPSILON_FRACTION * float(gains.kd.min())


@dataclass(frozen=True)
class LyapunovParams:
    """Blocks of the quadratic form: Q1 = Kp + eps*Kd (diag), Q3 = eps*I, Q4 = I."""

    epsilon: float
    q1: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q1", np.asarray(self.q1, dtype=float))

    @classmethod
    def from_gains(cls, gains: ControllerGains,
                   epsilon: float | None = None) -> "LyapunovParams":
        eps = default_epsilon(gains) if epsilon is None else float(epsilon)
        if eps <= 0:
            raise IndefiniteFormError("epsilon must be positive")
        if not (gains.kd > eps).all():
            raise IndefiniteFormError("epsilon must satisfy Kd > eps*I")
        params = cls(epsilon=eps, q1=gains.kp + eps * gains.kd)
        if np.linalg.eigvalsh(params.full_matrix()).min() <= 0:
            raise IndefiniteFormError("assembled form is not positive definite")
        return params

    def full_matrix(self) -> np.ndarray:
        """Dense 6x6 [[Q1, eps I], [eps I, I]] for eigenvalue checks."""
        q = np.zeros((6, 6))
        q[:3, :3] = np.diag(self.q1)
        q[3:, 3:] = np.eye(3)
        q[:3, 3:] = self.epsilon * np.eye(3)
        q[3:, :3] = self.epsilon * np.eye(3)
        return q


@dataclass(frozen=True)
class InvariantSetBound:
    """Level of the invariant set and the derived norm ceilings."""

    level: float
    e_norm_ceiling: float
    e_dot_norm_ceiling: float


def invariant_set_level(gains: ControllerGains,
                        bounds: UncertaintyBounds) -> InvariantSetBound:
    """Invariant-set level and norm ceilings for given gains and bounds."""
    delta = bounds.delta_d + bounds.delta_r
    kp_min, kp_max = float(gains.kp.min()), float(gains.kp.max())
    kd_min = float(gains.kd.min())
    level = 0.5 * delta**2 * (kp_max / kp_min**2 + 1.0 / kd_min**2)
    return InvariantSetBound(
        level=level,
        e_norm_ceiling=delta / kp_min,
        e_dot_norm_ceiling=delta / kd_min,
    )


def lyapunov_value(E: ErrorState, params: LyapunovParams):
    """V(E); accepts e/e_dot with shape (..., 3), returns matching shape."""
    e, ed = E.e, E.e_dot
    return (0.5 * (params.q1 * e * e).sum(axis=-1)
            + 0.5 * (ed * ed).sum(axis=-1)
            + params.epsilon * (e * ed).sum(axis=-1))


def error_accel(E: ErrorState, gains: ControllerGains, disturbance) -> np.ndarray:
    """eddot = -Kd edot - Kp e + d."""
    return -gains.kd * E.e_dot - gains.kp * E.e + np.asarray(disturbance, dtype=float)


def vdot_check(E: ErrorState, gains: ControllerGains, params: LyapunovParams,
               disturbance):
    """
    Analytic Vdot along the error dynamics with the given total
    disturbance d = d_drogue + d_probe. Shape-broadcasting like
    ``lyapunov_value``. Negative for every state outside the invariant
    set as long as the disturbance respects its bound.
    """
    e, ed = E.e, E.e_dot
    edd = error_accel(E, gains, disturbance)
    return ((params.q1 * e * ed).sum(axis=-1)
            + (ed * edd).sum(axis=-1)
            + params.epsilon * (e * edd).sum(axis=-1)
            + params.epsilon * (ed * ed).sum(axis=-1))


def error_dynamics_step(E: ErrorState, gains: ControllerGains,
                        drogue_dist, probe_dist, dt: float,
                        bounds: UncertaintyBounds | None = None) -> ErrorState:
    """
    One RK4 step of the error dynamics with both disturbance vectors held
    constant over the step. When ``bounds`` is given, a disturbance
    exceeding its declared bound raises DisturbanceBoundError.
    """
    drogue_dist = np.asarray(drogue_dist, dtype=float)
    probe_dist = np.asarray(probe_dist, dtype=float)
    if bounds is not None:
        if np.linalg.norm(drogue_dist) > bounds.delta_d * (1 + 1e-12):
            raise DisturbanceBoundError("drogue disturbance exceeds delta_d")
        if np.linalg.norm(probe_dist) > bounds.delta_r * (1 + 1e-12):
            raise DisturbanceBoundError("probe disturbance exceeds delta_r")
    d = drogue_dist + probe_dist

    def deriv(e, ed):
        return ed, -gains.kd * ed - gains.kp * e + d

    e0, ed0 = E.e, E.e_dot
    k1e, k1d = deriv(e0, ed0)
    k2e, k2d = deriv(e0 + 0.5 * dt * k1e, ed0 + 0.5 * dt * k1d)
    k3e, k3d = deriv(e0 + 0.5 * dt * k2e, ed0 + 0.5 * dt * k2d)
    k4e, k4d = deriv(e0 + dt * k3e, ed0 + dt * k3d)
    return ErrorState(
        e=e0 + (dt / 6.0) * (k1e + 2 * k2e + 2 * k3e + k4e),
        e_dot=ed0 + (dt / 6.0) * (k1d + 2 * k2d + 2 * k3d + k4d),
    )


def simulate_error_dynamics(E0: ErrorState, gains: ControllerGains,
                            disturbance_fn, t_end: float, dt: float):
    """
    Integrate the error dynamics with a time-continuous disturbance.

    ``disturbance_fn(t)`` must return the total disturbance with shape
    broadcastable to E0.e (so a batch of realizations integrates in one
    call); it is evaluated at the RK4 substage times, keeping the
    integrator fourth-order for smooth disturbances.

    Returns (times, e_traj, edot_traj) with the leading axis being time.
    """
    n = int(round(t_end / dt))
    times = np.arange(n + 1) * dt
    e = np.empty((n + 1,) + E0.e.shape)
    ed = np.empty_like(e)
    e[0], ed[0] = E0.e, E0.e_dot

    kp, kd = gains.kp, gains.kd
    for k in range(n):
        t = times[k]
        ce, cd = e[k], ed[k]
        d1 = disturbance_fn(t)
        d2 = disturbance_fn(t + 0.5 * dt)
        d4 = disturbance_fn(t + dt)
        k1e, k1d = cd, -kd * cd - kp * ce + d1
        y2e, y2d = ce + 0.5 * dt * k1e, cd + 0.5 * dt * k1d
        k2e, k2d = y2d, -kd * y2d - kp * y2e + d2
        y3e, y3d = ce + 0.5 * dt * k2e, cd + 0.5 * dt * k2d
        k3e, k3d = y3d, -kd * y3d - kp * y3e + d2
        y4e, y4d = ce + dt * k3e, cd + dt * k3d
        k4e, k4d = y4d, -kd * y4d - kp * y4e + d4
        e[k + 1] = ce + (dt / 6.0) * (k1e + 2 * k2e + 2 * k3e + k4e)
        ed[k + 1] = cd + (dt / 6.0) * (k1d + 2 * k2d + 2 * k3d + k4d)
    return times, e, ed


@dataclass(frozen=True)
class BoundednessVerdict:
    """Entry/invariance report for one error trajectory."""

    entered: bool
    entry_time: float | None
    exited_after_entry: bool
    max_e_norm_after_entry: float | None

    def to_dict(self) -> dict:
        return asdict(self)


def boundedness_verdict(times: np.ndarray, e_traj: np.ndarray,
                        edot_traj: np.ndarray, bound: InvariantSetBound,
                        params: LyapunovParams) -> BoundednessVerdict:
    """
    Check a sampled trajectory against the invariant set: first entry
    time into Lambda, whether it ever leaves again, and the largest
    ||e|| seen after entry.
    """
    v = lyapunov_value(ErrorState(e=e_traj, e_dot=edot_traj), params)
    inside = v <= bound.level
    if not inside.any():
        return BoundednessVerdict(False, None, False, None)
    first = int(np.argmax(inside))
    exited = bool((~inside[first:]).any())
    max_e = float(np.linalg.norm(e_traj[first:], axis=-1).max())
    return BoundednessVerdict(True, float(times[first]), exited, max_e)
