"""Kinematics: rotation matrices, analytic derivatives, probe mapping."""

import numpy as np
import pytest

from heliref.kinematics import (
    Attitude,
    AngularRates,
    ProbeGeometry,
    SingularAttitudeError,
    probe_position,
    probe_velocity,
    rotation_matrix,
    rotation_matrix_ddot,
    rotation_matrix_dot,
)
from heliref.plant import HelicopterState

FD_STEP = 1e-4


def smooth_attitude(t, amp, freq, phase):
    """Sinusoidal Euler-angle trajectory with analytic rate/accel."""
    ang = amp * np.sin(freq * t + phase)
    rate = amp * freq * np.cos(freq * t + phase)
    accel = -amp * freq**2 * np.sin(freq * t + phase)
    return (Attitude(*ang), AngularRates(*rate), AngularRates(*accel))


def random_trajectory_params(rng):
    # magnitudes bounded away from zero so relative FD comparisons are
    # well-conditioned
    amp = rng.uniform(0.2, 0.5, 3) * rng.choice([-1.0, 1.0], 3)
    freq = rng.uniform(0.5, 2.0, 3)
    phase = rng.uniform(0.0, 2 * np.pi, 3)
    return amp, freq, phase


def test_rotation_identity_at_zero():
    assert np.array_equal(rotation_matrix(Attitude(0.0, 0.0, 0.0)), np.eye(3))


def test_rotation_pure_yaw_maps_x_to_y():
    r = rotation_matrix(Attitude(0.0, 0.0, np.pi / 2))
    np.testing.assert_allclose(r @ np.array([1.0, 0.0, 0.0]),
                               [0.0, 1.0, 0.0], atol=1e-15)


def test_rotation_orthonormal():
    r = rotation_matrix(Attitude(0.1, -0.05, 0.3))
    assert abs(r.T @ r - np.eye(3)).max() < 1e-12
    assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-12)


def test_rotation_isometry_random():
    rng = np.random.default_rng(1)
    for _ in range(100):
        att = Attitude(*rng.uniform(-1.2, 1.2, 3))
        v = rng.normal(size=3)
        assert np.linalg.norm(rotation_matrix(att) @ v) == pytest.approx(
            np.linalg.norm(v), rel=1e-12)


def test_singular_pitch_rejected():
    with pytest.raises(SingularAttitudeError):
        rotation_matrix(Attitude(0.0, np.pi / 2, 0.0))
    with pytest.raises(SingularAttitudeError):
        rotation_matrix(Attitude(0.0, np.nan, 0.0))


def test_rdot_zero_rates():
    assert np.array_equal(
        rotation_matrix_dot(Attitude(0.2, 0.1, -0.4), AngularRates()),
        np.zeros((3, 3)))


def test_rdot_pure_yaw_generator():
    omega = 0.7
    rdot = rotation_matrix_dot(Attitude(), AngularRates(psi_dot=omega))
    expected = omega * np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    np.testing.assert_allclose(rdot, expected, atol=1e-15)


def test_rddot_zero_motion():
    assert np.array_equal(
        rotation_matrix_ddot(Attitude(0.3, -0.2, 1.0), AngularRates(), AngularRates()),
        np.zeros((3, 3)))


def test_rddot_constant_yaw_spin():
    # constant-rate yaw: d2R/dt2 = (psi_dot * Sz)^2 R
    omega = 0.9
    att = Attitude(0.0, 0.0, 0.6)
    sz = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    expected = omega**2 * sz @ sz @ rotation_matrix(att)
    got = rotation_matrix_ddot(att, AngularRates(psi_dot=omega), AngularRates())
    np.testing.assert_allclose(got, expected, atol=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_derivatives_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    amp, freq, phase = random_trajectory_params(rng)
    h = FD_STEP
    for t in rng.uniform(0.0, 10.0, 20):
        att, rates, accels = smooth_attitude(t, amp, freq, phase)
        r_minus = rotation_matrix(smooth_attitude(t - h, amp, freq, phase)[0])
        r_plus = rotation_matrix(smooth_attitude(t + h, amp, freq, phase)[0])
        r_mid = rotation_matrix(att)

        rdot_fd = (r_plus - r_minus) / (2 * h)
        rdot = rotation_matrix_dot(att, rates)
        assert np.linalg.norm(rdot - rdot_fd) < 1e-6 * np.linalg.norm(rdot_fd)

        rddot_fd = (r_plus - 2 * r_mid + r_minus) / h**2
        rddot = rotation_matrix_ddot(att, rates, accels)
        assert np.linalg.norm(rddot - rddot_fd) < 1e-5 * np.linalg.norm(rddot_fd)


def test_probe_position_identity_attitude():
    state = HelicopterState(position=[0.0, 0.0, -1000.0], velocity=np.zeros(3))
    geom = ProbeGeometry(x_bar=[3.0, 0.0, 0.0])
    np.testing.assert_allclose(probe_position(state, geom), [3.0, 0.0, -1000.0])


def test_probe_position_pure_yaw():
    state = HelicopterState(position=np.zeros(3), velocity=np.zeros(3),
                            attitude=Attitude(psi=np.pi / 2))
    geom = ProbeGeometry(x_bar=[3.0, 0.0, 0.0])
    np.testing.assert_allclose(probe_position(state, geom), [0.0, 3.0, 0.0],
                               atol=1e-14)


def test_probe_position_compositional():
    rng = np.random.default_rng(4)
    for _ in range(20):
        att = Attitude(*rng.uniform(-0.8, 0.8, 3))
        pos = rng.normal(size=3) * 100
        geom = ProbeGeometry(x_bar=rng.normal(size=3))
        state = HelicopterState(position=pos, velocity=np.zeros(3), attitude=att)
        expected = pos + rotation_matrix(att) @ geom.x_bar
        assert np.array_equal(probe_position(state, geom), expected)


def test_probe_velocity_zero_rates_is_cg_velocity():
    state = HelicopterState(position=np.zeros(3), velocity=[10.0, -2.0, 0.5],
                            attitude=Attitude(0.2, 0.1, -0.3))
    geom = ProbeGeometry(x_bar=[3.0, 0.5, -0.2])
    np.testing.assert_allclose(probe_velocity(state, geom), [10.0, -2.0, 0.5])


def test_probe_velocity_yaw_rate_formula():
    # pure yaw rate w with forward offset L adds (0, w L, 0)
    omega, length = 0.4, 3.0
    state = HelicopterState(position=np.zeros(3), velocity=[56.0, 0.0, 0.0],
                            rates=AngularRates(psi_dot=omega))
    geom = ProbeGeometry(x_bar=[length, 0.0, 0.0])
    np.testing.assert_allclose(probe_velocity(state, geom),
                               [56.0, omega * length, 0.0], atol=1e-15)


def test_probe_velocity_matches_position_finite_difference():
    rng = np.random.default_rng(11)
    amp, freq, phase = random_trajectory_params(rng)
    geom = ProbeGeometry(x_bar=[3.0, 0.4, -0.6])
    h = FD_STEP

    def state_at(t):
        att, rates, _ = smooth_attitude(t, amp, freq, phase)
        pos = np.array([56.58 * t, 2.0 * np.sin(0.3 * t), -1000.0])
        vel = np.array([56.58, 0.6 * np.cos(0.3 * t), 0.0])
        return HelicopterState(position=pos, velocity=vel, attitude=att, rates=rates)

    for t in rng.uniform(0.5, 20.0, 25):
        fd = (probe_position(state_at(t + h), geom)
              - probe_position(state_at(t - h), geom)) / (2 * h)
        vel = probe_velocity(state_at(t), geom)
        assert np.linalg.norm(vel - fd) < 1e-6 * np.linalg.norm(fd)


def test_probe_offset_norm_constant_along_trajectory():
    rng = np.random.default_rng(8)
    amp, freq, phase = random_trajectory_params(rng)
    geom = ProbeGeometry(x_bar=[3.0, 0.0, -0.5])
    expected = np.linalg.norm(geom.x_bar)
    for t in np.linspace(0.0, 20.0, 200):
        att, _, _ = smooth_attitude(t, amp, freq, phase)
        state = HelicopterState(position=np.array([t, -t, 5.0]),
                                velocity=np.zeros(3), attitude=att)
        offset = probe_position(state, geom) - state.position
        assert abs(np.linalg.norm(offset) - expected) < 1e-10
