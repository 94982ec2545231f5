"""
Drogue trajectory generation.

The planner-visible drogue flies a straight line at tanker speed. The
"actual" drogue adds a wind-driven sway: three superposed sinusoids per
axis (along the horizontal wind direction and vertically), frequencies in
the 0.1-0.8 Hz band, with amplitudes renormalized so the worst-case
acceleration deviation satisfies ||xddot_D - xddot_D*|| <= delta_d by
construction. Everything is a pure function of (t, wind, seed), so runs
are bit-reproducible.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .plant import PlantParams

FREQ_BAND_HZ = (0.1, 0.8)
WIND_FULL_SCALE_KT = 5.0
HORIZONTAL_SHARE = 0.7  # share of the acceleration budget in the horizontal axis


@dataclass(frozen=True)
class DrogueState:
    """Drogue position, velocity, acceleration in NED."""

    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float))
        object.__setattr__(self, "acceleration",
                           np.asarray(self.acceleration, dtype=float))


@dataclass(frozen=True)
class WindCondition:
    """Crosswind magnitude (kt, sign flips the sway direction) and heading (rad)."""

    magnitude_kt: float = 0.0
    direction_rad: float = 0.0


@dataclass(frozen=True)
class UncertaintyBounds:
    """Acceleration uncertainty bounds (m/s^2) for drogue and probe."""

    delta_d: float = 0.18
    delta_r: float = 0.51

    def __post_init__(self):
        if self.delta_d < 0 or self.delta_r < 0:
            raise ValueError("uncertainty bounds must be non-negative")


def default_initial_state(params: PlantParams,
                          position=(5.0, 0.0, -1000.0)) -> DrogueState:
    """Drogue initial condition: given position, tanker velocity, no accel."""
    return DrogueState(
        position=np.asarray(position, dtype=float),
        velocity=np.array([params.tanker_speed, 0.0, 0.0]),
        acceleration=np.zeros(3),
    )


def nominal_trajectory(t: float, params: PlantParams,
                       initial: DrogueState) -> DrogueState:
    """Wind-free drogue state: constant-velocity straight line."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return DrogueState(
        position=initial.position + initial.velocity * t,
        velocity=initial.velocity.copy(),
        acceleration=np.zeros(3),
    )


class DrogueMotion:
    """
    Perturbed drogue trajectory, frozen at construction from (wind, seed).

    Per axis (horizontal along the wind heading, vertical), the position
    perturbation is sum_k A_k sin(w_k t + p_k). The amplitude vector is
    scaled so that the analytic worst case

        sqrt((sum_k A_k w_k^2)_h^2 + (sum_k A_k w_k^2)_v^2)

    equals (|wind| / full scale) * delta_d, which guarantees the
    acceleration bound at every t, not just on a sampled grid.
    """

    N_COMPONENTS = 3

    def __init__(self, wind: WindCondition, bounds: UncertaintyBounds,
                 seed: int, initial: DrogueState, params: PlantParams):
        self.wind = wind
        self.bounds = bounds
        self.seed = seed
        self.initial = initial
        self.params = params

        rng = np.random.default_rng(seed)
        n = self.N_COMPONENTS
        lo, hi = (2 * np.pi * f for f in FREQ_BAND_HZ)
        self._omega = rng.uniform(lo, hi, size=(2, n))      # [horizontal, vertical]
        self._phase = rng.uniform(0.0, 2 * np.pi, size=(2, n))
        weights = rng.uniform(0.5, 1.0, size=(2, n))

        scale = abs(wind.magnitude_kt) / WIND_FULL_SCALE_KT
        budget = min(scale, 1.0) * bounds.delta_d
        share = np.array([HORIZONTAL_SHARE, 1.0 - HORIZONTAL_SHARE])
        axis_budget = np.sqrt(share) * budget

        # Worst-case per-axis acceleration of the raw weights, then rescale.
        raw_peak = (weights * self._omega**2).sum(axis=1)
        self._amp = np.zeros((2, n))
        for ax in range(2):
            if axis_budget[ax] > 0 and raw_peak[ax] > 0:
                self._amp[ax] = weights[ax] * axis_budget[ax] / raw_peak[ax]

        direction = wind.direction_rad
        sway = np.array([np.cos(direction), np.sin(direction), 0.0])
        if wind.magnitude_kt < 0:
            sway = -sway
        self._axes = np.stack([sway, np.array([0.0, 0.0, 1.0])])

    def at(self, t: float) -> DrogueState:
        """Drogue state at time t >= 0 (nominal plus sway)."""
        base = nominal_trajectory(t, self.params, self.initial)
        arg = self._omega * t + self._phase
        pos = (self._amp * np.sin(arg)).sum(axis=1)
        vel = (self._amp * self._omega * np.cos(arg)).sum(axis=1)
        acc = -(self._amp * self._omega**2 * np.sin(arg)).sum(axis=1)
        return DrogueState(
            position=base.position + pos @ self._axes,
            velocity=base.velocity + vel @ self._axes,
            acceleration=base.acceleration + acc @ self._axes,
        )


def perturbed_trajectory(t: float, wind: WindCondition, bounds: UncertaintyBounds,
                         seed: int, initial: DrogueState,
                         params: PlantParams) -> DrogueState:
    """One-shot evaluation of the perturbed trajectory (see DrogueMotion)."""
    return DrogueMotion(wind, bounds, seed, initial, params).at(t)


def export_csv(path, times: np.ndarray, motion: DrogueMotion) -> None:
    """Write (t, X_D, Y_D, Z_D, u_D, v_D, w_D) rows for plotting."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "X_D", "Y_D", "Z_D", "u_D", "v_D", "w_D"])
        for t in times:
            s = motion.at(float(t))
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in
                                                (*s.position, *s.velocity)])
