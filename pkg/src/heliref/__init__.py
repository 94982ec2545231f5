"""Deterministic docking simulator and boundedness analysis toolkit."""

from .kinematics import (
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
from .plant import (
    AccelCommand,
    HelicopterState,
    PlantParams,
    TimeStepError,
    clip_command,
    step,
    zero_dynamics_accel,
)
from .drogue import (
    DrogueMotion,
    DrogueState,
    UncertaintyBounds,
    WindCondition,
    nominal_trajectory,
    perturbed_trajectory,
)
from .controllers import (
    ControllerGains,
    InfeasibleCommandError,
    ReferenceSample,
    invert_to_attitude,
    proposed_command,
    standard_command,
    yaw_command,
)
from .reference import ClosureSchedule, reference_at
from .analysis import (
    BoundednessVerdict,
    DisturbanceBoundError,
    ErrorState,
    IndefiniteFormError,
    InvariantSetBound,
    LyapunovParams,
    boundedness_verdict,
    error_dynamics_step,
    invariant_set_level,
    lyapunov_value,
    simulate_error_dynamics,
    vdot_check,
)
from .harness import BatchSummary, RunConfig, RunRecord, run_batch, run_once

__version__ = "0.1.0"
