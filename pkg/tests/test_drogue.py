"""Drogue motion: nominal line, bounded sway, reproducibility."""

import numpy as np
import pytest

from heliref.drogue import (
    DrogueMotion,
    DrogueState,
    UncertaintyBounds,
    WindCondition,
    default_initial_state,
    export_csv,
    nominal_trajectory,
    perturbed_trajectory,
)
from heliref.plant import PlantParams

PARAMS = PlantParams()
BOUNDS = UncertaintyBounds()


def test_nominal_initial_state():
    initial = default_initial_state(PARAMS)
    s = nominal_trajectory(0.0, PARAMS, initial)
    np.testing.assert_array_equal(s.position, [5.0, 0.0, -1000.0])
    np.testing.assert_array_equal(s.velocity, [56.58, 0.0, 0.0])
    np.testing.assert_array_equal(s.acceleration, np.zeros(3))


def test_nominal_linear_extrapolation():
    initial = default_initial_state(PARAMS)
    s = nominal_trajectory(10.0, PARAMS, initial)
    np.testing.assert_allclose(s.position, [5.0 + 565.8, 0.0, -1000.0], rtol=1e-15)
    np.testing.assert_array_equal(s.acceleration, np.zeros(3))


def test_zero_wind_equals_nominal():
    initial = default_initial_state(PARAMS)
    motion = DrogueMotion(WindCondition(0.0, 1.3), BOUNDS, seed=42,
                          initial=initial, params=PARAMS)
    for t in (0.0, 3.7, 25.0):
        s = motion.at(t)
        ref = nominal_trajectory(t, PARAMS, initial)
        assert np.array_equal(s.position, ref.position)
        assert np.array_equal(s.velocity, ref.velocity)
        np.testing.assert_array_equal(s.acceleration, np.zeros(3))


def test_acceleration_bound_analytic_and_sampled():
    initial = default_initial_state(PARAMS)
    rng = np.random.default_rng(3)
    grid = np.arange(0.0, 40.0, 0.001)  # dt/10
    for trial in range(3):
        wind = WindCondition(float(rng.uniform(-5, 5)), float(rng.uniform(0, 2 * np.pi)))
        motion = DrogueMotion(wind, BOUNDS, seed=trial, initial=initial, params=PARAMS)
        worst = max(
            np.linalg.norm(motion.at(float(t)).acceleration) for t in grid[::7]
        )
        assert worst <= BOUNDS.delta_d + 1e-12
    # full-strength wind binds exactly at delta_d (analytic renormalization)
    motion = DrogueMotion(WindCondition(5.0, 0.4), BOUNDS, seed=9,
                          initial=initial, params=PARAMS)
    peak = (motion._amp * motion._omega**2).sum(axis=1)
    assert np.linalg.norm(peak) == pytest.approx(BOUNDS.delta_d, rel=1e-12)


def test_sway_derivative_consistency():
    initial = default_initial_state(PARAMS)
    motion = DrogueMotion(WindCondition(4.0, 2.0), BOUNDS, seed=5,
                          initial=initial, params=PARAMS)
    h = 1e-4
    for t in np.linspace(1.0, 30.0, 40):
        plus, minus = motion.at(t + h), motion.at(t - h)
        vel_fd = (plus.position - minus.position) / (2 * h)
        vel = motion.at(t).velocity
        assert np.linalg.norm(vel - vel_fd) < 1e-6 * np.linalg.norm(vel)
        acc_fd = (plus.velocity - minus.velocity) / (2 * h)
        acc = motion.at(t).acceleration
        assert np.linalg.norm(acc - acc_fd) < 1e-6 * max(np.linalg.norm(acc), 1e-9)


def test_bit_reproducible():
    initial = default_initial_state(PARAMS)
    wind = WindCondition(-3.3, 0.9)
    a = DrogueMotion(wind, BOUNDS, seed=77, initial=initial, params=PARAMS)
    b = DrogueMotion(wind, BOUNDS, seed=77, initial=initial, params=PARAMS)
    for t in (0.0, 1.23, 17.77):
        sa, sb = a.at(t), b.at(t)
        assert np.array_equal(sa.position, sb.position)
        assert np.array_equal(sa.velocity, sb.velocity)
        assert np.array_equal(sa.acceleration, sb.acceleration)


def test_negative_wind_reverses_sway():
    initial = default_initial_state(PARAMS)
    pos = DrogueMotion(WindCondition(2.5, 0.7), BOUNDS, seed=8,
                       initial=initial, params=PARAMS)
    neg = DrogueMotion(WindCondition(-2.5, 0.7), BOUNDS, seed=8,
                       initial=initial, params=PARAMS)
    t = 4.2
    dev_pos = pos.at(t).position - nominal_trajectory(t, PARAMS, initial).position
    dev_neg = neg.at(t).position - nominal_trajectory(t, PARAMS, initial).position
    # horizontal sway flips sign, vertical unchanged
    np.testing.assert_allclose(dev_neg[:2], -dev_pos[:2], rtol=1e-12)
    assert dev_neg[2] == pytest.approx(dev_pos[2], rel=1e-12)


def test_one_shot_wrapper_matches_motion():
    initial = default_initial_state(PARAMS)
    wind = WindCondition(1.5, 3.0)
    motion = DrogueMotion(wind, BOUNDS, seed=13, initial=initial, params=PARAMS)
    s = perturbed_trajectory(6.5, wind, BOUNDS, 13, initial, PARAMS)
    assert np.array_equal(s.position, motion.at(6.5).position)


def test_negative_time_rejected():
    initial = default_initial_state(PARAMS)
    with pytest.raises(ValueError):
        nominal_trajectory(-0.1, PARAMS, initial)


def test_csv_export(tmp_path):
    initial = default_initial_state(PARAMS)
    motion = DrogueMotion(WindCondition(2.0, 0.0), BOUNDS, seed=1,
                          initial=initial, params=PARAMS)
    path = tmp_path / "drogue.csv"
    export_csv(path, np.linspace(0.0, 1.0, 11), motion)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,X_D,Y_D,Z_D,u_D,v_D,w_D"
    assert len(lines) == 12
