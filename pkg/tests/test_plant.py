"""Plant: zero dynamics, RK4 stepping, inner-loop modes."""

import math

import numpy as np
import pytest

from heliref.kinematics import Attitude, AngularRates, SingularAttitudeError
from heliref.plant import (
    AccelCommand,
    HelicopterState,
    PlantParams,
    TimeStepError,
    clip_command,
    step,
    zero_dynamics_accel,
)


def trim_state(params, velocity=(56.58, 0.0, 0.0)):
    return HelicopterState(
        position=np.array([0.0, 0.0, -1000.0]),
        velocity=np.array(velocity),
        attitude=Attitude(phi=params.phi_trim, theta=params.theta_trim),
        rates=AngularRates(),
    )


def test_trim_attitude_gives_zero_accel():
    params = PlantParams(theta_trim=0.03, phi_trim=-0.01)
    for psi in (0.0, 1.0, -2.5):
        ax, ay = zero_dynamics_accel(
            Attitude(phi=-0.01, theta=0.03, psi=psi), params)
        assert ax == pytest.approx(0.0, abs=1e-15)
        assert ay == pytest.approx(0.0, abs=1e-15)


def test_zero_dynamics_pitch_only_formula():
    params = PlantParams()
    ax, ay = zero_dynamics_accel(Attitude(theta=0.1), params)
    assert ax == pytest.approx(-9.81 * math.tan(0.1), rel=1e-14)
    assert ay == pytest.approx(0.0, abs=1e-15)


def test_zero_dynamics_singularity():
    with pytest.raises(SingularAttitudeError):
        zero_dynamics_accel(Attitude(theta=np.pi / 2 - 1e-4), PlantParams())


def test_step_rejects_bad_dt():
    params = PlantParams(inner_loop_mode="ideal")
    state = trim_state(params)
    cmd = AccelCommand()
    att = Attitude()
    for dt in (0.0, -0.01, 0.06):
        with pytest.raises(TimeStepError):
            step(state, cmd, att, dt, params)


@pytest.mark.parametrize("mode", ["ideal", "lag"])
def test_force_free_flight_keeps_velocity(mode):
    # trim attitude, zero commands: no spurious drift under RK4
    params = PlantParams(inner_loop_mode=mode)
    state = trim_state(params)
    v0 = state.velocity.copy()
    for _ in range(500):
        state = step(state, AccelCommand(), Attitude(), 0.01, params)
    assert abs(state.velocity - v0).max() < 1e-12
    assert state.position[0] == pytest.approx(v0[0] * 5.0, rel=1e-12)


def test_ideal_mode_constant_attitude_constant_accel():
    params = PlantParams(inner_loop_mode="ideal")
    att_cmd = Attitude(phi=0.02, theta=-0.05, psi=0.3)
    ax, ay = zero_dynamics_accel(att_cmd, params)
    cmd = AccelCommand(z_ddot=0.7)
    state = trim_state(params)
    dt = 0.01
    prev_v = state.velocity.copy()
    for _ in range(200):
        state = step(state, cmd, att_cmd, dt, params)
        dv = (state.velocity - prev_v) / dt
        np.testing.assert_allclose(dv, [ax, ay, 0.7], rtol=1e-12, atol=1e-13)
        prev_v = state.velocity.copy()
    assert state.attitude.phi == att_cmd.phi
    assert state.attitude.theta == att_cmd.theta


def test_lag_mode_first_order_response():
    tau = 0.3
    params = PlantParams(inner_loop_mode="lag", inner_loop_tau=tau)
    att_cmd = Attitude(phi=0.08, theta=-0.06)
    state = trim_state(params)
    dt = 0.01
    t = 0.0
    while t < 5 * tau - 1e-9:
        state = step(state, AccelCommand(), att_cmd, dt, params)
        t += dt
    # 1 - exp(-5) = 99.33%: within 1% of the command after 5 tau
    assert abs(state.attitude.phi - att_cmd.phi) < 0.01 * abs(att_cmd.phi)
    assert abs(state.attitude.theta - att_cmd.theta) < 0.01 * abs(att_cmd.theta)
    expected_phi = att_cmd.phi * (1.0 - math.exp(-t / tau))
    assert state.attitude.phi == pytest.approx(expected_phi, rel=1e-6)


def test_rk4_fourth_order_convergence():
    # constant attitude command in lag mode: smooth nonlinear dynamics,
    # identical ODE at every resolution
    params = PlantParams(inner_loop_mode="lag", inner_loop_tau=0.25)
    att_cmd = Attitude(phi=0.1, theta=-0.12)
    cmd = AccelCommand(z_ddot=0.4)
    horizon = 2.0

    def final_position(dt):
        state = trim_state(params)
        for _ in range(int(round(horizon / dt))):
            state = step(state, cmd, att_cmd, dt, params)
        return state.position

    ref = final_position(0.04 / 16)
    err_coarse = np.linalg.norm(final_position(0.04) - ref)
    err_fine = np.linalg.norm(final_position(0.02) - ref)
    ratio = err_coarse / err_fine
    assert 12.0 < ratio < 20.0


def test_clip_command():
    cmd = AccelCommand(x_ddot=9.0, y_ddot=-7.0, z_ddot=1.0, psi_dot=0.4)
    clipped = clip_command(cmd, 5.0)
    assert clipped == AccelCommand(x_ddot=5.0, y_ddot=-5.0, z_ddot=1.0, psi_dot=0.4)


def test_params_validation():
    with pytest.raises(ValueError):
        PlantParams(inner_loop_mode="warp")
    with pytest.raises(ValueError):
        PlantParams(inner_loop_mode="lag", inner_loop_tau=0.0)
    with pytest.raises(ValueError):
        PlantParams(g=-1.0)
