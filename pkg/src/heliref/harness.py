"""
Closed-loop docking runs and the Monte Carlo batch experiment.

One run wires reference -> controller -> attitude inversion -> plant step
-> probe kinematics at a fixed time step, against a wind-perturbed drogue.
A batch drives paired seeds: every seed produces one standard-controller
run and one probe-feedback run under identical wind and initial offsets,
then aggregates docking statistics and invariant-set verdicts.

All randomness flows from integer seeds through SeedSequence children, so
batches are bit-reproducible and safe to farm out to worker processes;
aggregation is an ordered reduction over (seed, controller).
"""

import csv
import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import analysis
from .controllers import (
    ControllerGains,
    InfeasibleCommandError,
    invert_to_attitude,
    proposed_command,
    standard_command,
)
from .drogue import DrogueMotion, DrogueState, UncertaintyBounds, WindCondition
from .kinematics import (
    Attitude,
    AngularRates,
    ProbeGeometry,
    SingularAttitudeError,
    rotation_matrix,
    rotation_matrix_dot,
)
from .plant import AccelCommand, HelicopterState, PlantParams, clip_command, step
from .reference import ClosureSchedule, reference_at

CONTROLLERS = ("standard", "proposed")


def _finite_or_none(value):
    """NaN-free floats for strict JSON."""
    if value is None or not np.isfinite(value):
        return None
    return float(value)


@dataclass(frozen=True)
class RunConfig:
    """Full configuration of a single simulation run."""

    seed: int = 1
    controller: str = "proposed"
    dt: float = 0.01
    horizon: float = 40.0
    docking_tolerance: float = 0.2
    initial_offset_range: tuple = (-0.2, 0.2)
    wind_range_kt: tuple = (-5.0, 5.0)
    helicopter_initial_position: tuple = (0.0, 0.0, -1000.0)
    drogue_initial_position: tuple = (5.0, 0.0, -1000.0)
    paired: bool = True
    plant: PlantParams = field(default_factory=PlantParams)
    gains: ControllerGains = field(default_factory=ControllerGains)
    geometry: ProbeGeometry = field(default_factory=ProbeGeometry)
    bounds: UncertaintyBounds = field(default_factory=UncertaintyBounds)
    schedule: ClosureSchedule = field(default_factory=ClosureSchedule)

    def __post_init__(self):
        if self.controller not in CONTROLLERS:
            raise ValueError(f"controller must be one of {CONTROLLERS}")
        if self.docking_tolerance <= 0:
            raise ValueError("docking_tolerance must be positive")
        if self.horizon <= self.schedule.approach_duration:
            raise ValueError("horizon must exceed the approach duration")
        if not 0.0 < self.dt <= 0.05:
            raise ValueError("dt must lie in (0, 0.05]")


@dataclass
class RunRecord:
    """Time series and outcome of one run."""

    seed: int
    controller: str
    wind: WindCondition
    initial_offset: np.ndarray
    times: np.ndarray
    heli_position: np.ndarray      # (n, 3)
    heli_velocity: np.ndarray      # (n, 3)
    attitude: np.ndarray           # (n, 3) phi, theta, psi
    rates: np.ndarray              # (n, 3)
    probe_position: np.ndarray     # (n, 3)
    drogue_position: np.ndarray    # (n, 3)
    drogue_velocity: np.ndarray    # (n, 3)
    error: np.ndarray              # (n, 3) closure error of the active law
    error_rate: np.ndarray         # (n, 3)
    docking_error: float
    success: bool
    measured_delta_r: float
    verdict: analysis.BoundednessVerdict
    e_norm_ceiling_measured: float
    saturation_steps: int
    aborted: bool = False
    abort_reason: str = ""

    def run_id(self) -> str:
        return f"s{self.seed:05d}_{self.controller}"

    def error_norm(self) -> np.ndarray:
        return np.linalg.norm(self.error, axis=1)


CSV_HEADER = [
    "t",
    "X", "Y", "Z", "X_dot", "Y_dot", "Z_dot",
    "phi", "theta", "psi", "phi_dot", "theta_dot", "psi_dot",
    "X_P", "Y_P", "Z_P",
    "X_D", "Y_D", "Z_D", "u_D", "v_D", "w_D",
    "e_x", "e_y", "e_z", "edot_x", "edot_y", "edot_z",
    "e_norm",
]


def draw_conditions(seed: int, config: RunConfig):
    """Per-seed random initial offset and wind; paired across controllers."""
    entropy = seed if config.paired else (seed, CONTROLLERS.index(config.controller))
    root = np.random.SeedSequence(entropy)
    cond_child, drogue_child = root.spawn(2)
    rng = np.random.default_rng(cond_child)
    lo, hi = config.initial_offset_range
    offset = rng.uniform(lo, hi, size=3)
    wlo, whi = config.wind_range_kt
    wind = WindCondition(
        magnitude_kt=float(rng.uniform(wlo, whi)),
        direction_rad=float(rng.uniform(0.0, 2.0 * np.pi)),
    )
    return offset, wind, drogue_child


def _reference_attitudes(config: RunConfig, times: np.ndarray,
                         drogue_initial: DrogueState) -> np.ndarray:
    """Attitude trajectory implied by the reference acceleration schedule."""
    out = np.empty((len(times), 3))
    psi_ref = 0.0
    for k, t in enumerate(times):
        ref = reference_at(float(t), config.schedule, config.plant, drogue_initial)
        cmd = AccelCommand(x_ddot=float(ref.accel_des[0]),
                           y_ddot=float(ref.accel_des[1]),
                           z_ddot=float(ref.accel_des[2]),
                           psi_dot=ref.psi_dot_des)
        att = invert_to_attitude(cmd, psi_ref, config.plant)
        out[k] = (att.phi, att.theta, att.psi)
        psi_ref += ref.psi_dot_des * config.dt
    return out


def _probe_accel_fd(att_series: np.ndarray, x_bar: np.ndarray,
                    dt: float) -> np.ndarray:
    """Second central differences of R(att) @ x_bar (interior samples)."""
    pos = np.empty_like(att_series)
    for k, (phi, theta, psi) in enumerate(att_series):
        pos[k] = rotation_matrix(Attitude(phi, theta, psi)) @ x_bar
    return (pos[2:] - 2.0 * pos[1:-1] + pos[:-2]) / dt**2


def measure_probe_uncertainty(att_series: np.ndarray, ref_att_series: np.ndarray,
                              x_bar: np.ndarray, dt: float) -> float:
    """
    Empirical probe-acceleration uncertainty: the largest deviation of the
    finite-differenced probe-offset acceleration from its reference-
    trajectory counterpart.
    """
    if len(att_series) < 3 or not np.any(x_bar):
        return 0.0
    actual = _probe_accel_fd(att_series, x_bar, dt)
    nominal = _probe_accel_fd(ref_att_series, x_bar, dt)
    return float(np.linalg.norm(actual - nominal, axis=1).max())


def run_once(config: RunConfig) -> RunRecord:
    """Simulate one full docking run."""
    params, gains, geom = config.plant, config.gains, config.geometry
    offset, wind, drogue_child = draw_conditions(config.seed, config)

    drogue_initial = DrogueState(
        position=np.asarray(config.drogue_initial_position, dtype=float),
        velocity=np.array([params.tanker_speed, 0.0, 0.0]),
        acceleration=np.zeros(3),
    )
    motion = DrogueMotion(wind, config.bounds, drogue_child, drogue_initial, params)

    state = HelicopterState(
        position=np.asarray(config.helicopter_initial_position, dtype=float) + offset,
        velocity=np.array([params.tanker_speed, 0.0, 0.0]),
        attitude=Attitude(phi=params.phi_trim, theta=params.theta_trim, psi=0.0),
        rates=AngularRates(),
    )

    n_steps = int(round(config.horizon / config.dt))
    times = np.arange(n_steps + 1) * config.dt
    shape = (n_steps + 1, 3)
    heli_pos = np.empty(shape)
    heli_vel = np.empty(shape)
    att = np.empty(shape)
    rates = np.empty(shape)
    probe_pos = np.empty(shape)
    drog_pos = np.empty(shape)
    drog_vel = np.empty(shape)
    err = np.empty(shape)
    err_rate = np.empty(shape)

    rot = rotation_matrix
    use_probe = config.controller == "proposed"
    psi_c = 0.0
    saturation_steps = 0
    aborted = False
    abort_reason = ""
    last = n_steps

    for k in range(n_steps + 1):
        t = float(times[k])
        ref = reference_at(t, config.schedule, params, drogue_initial)
        dstate = motion.at(t)

        heli_pos[k] = state.position
        heli_vel[k] = state.velocity
        att[k] = (state.attitude.phi, state.attitude.theta, state.attitude.psi)
        rates[k] = (state.rates.phi_dot, state.rates.theta_dot, state.rates.psi_dot)
        drog_pos[k] = dstate.position
        drog_vel[k] = dstate.velocity

        probe_pos[k] = np.nan
        err[k] = np.nan
        err_rate[k] = np.nan
        try:
            r = rot(state.attitude)
            rdot_xbar = rotation_matrix_dot(state.attitude, state.rates) @ geom.x_bar
            probe_pos[k] = state.position + r @ geom.x_bar
            probe_vel = state.velocity + rdot_xbar

            if use_probe:
                fb_pos, fb_vel = probe_pos[k], probe_vel
                cmd_raw = proposed_command(state, geom, dstate, ref, gains)
            else:
                fb_pos, fb_vel = state.position, state.velocity
                cmd_raw = standard_command(state, dstate, ref, gains)

            err[k] = (ref.probe_pos_des - ref.drogue_pos_des) - (fb_pos - dstate.position)
            err_rate[k] = (ref.probe_vel_des - ref.drogue_vel_des) - (fb_vel - dstate.velocity)

            if k == n_steps:
                break
            cmd = clip_command(cmd_raw, params.accel_limit)
            if cmd != cmd_raw:
                saturation_steps += 1
            att_cmd = invert_to_attitude(cmd, psi_c, params)
            state = step(state, cmd, att_cmd, config.dt, params)
            psi_c += cmd.psi_dot * config.dt
            if not np.isfinite(state.position).all() or not np.isfinite(state.velocity).all():
                raise FloatingPointError("non-finite state")
        except (SingularAttitudeError, InfeasibleCommandError, FloatingPointError) as exc:
            aborted = True
            abort_reason = f"{type(exc).__name__}: {exc}"
            last = k
            break

    if aborted:
        times = times[: last + 1]
        for arr in (heli_pos, heli_vel, att, rates, probe_pos,
                    drog_pos, drog_vel, err, err_rate):
            arr.resize((last + 1, 3), refcheck=False)

    k_contact = int(round(config.schedule.approach_duration / config.dt))
    if aborted or k_contact > last:
        docking_error = float("nan")
        success = False
    else:
        docking_error = float(np.linalg.norm(probe_pos[k_contact] - drog_pos[k_contact]))
        success = docking_error <= config.docking_tolerance

    delta_r = float("nan")
    try:
        ref_att = _reference_attitudes(config, times, drogue_initial)
        delta_r = measure_probe_uncertainty(att, ref_att, geom.x_bar, config.dt)
    except (InfeasibleCommandError, SingularAttitudeError):
        pass

    if np.isfinite(delta_r):
        measured = UncertaintyBounds(delta_d=config.bounds.delta_d, delta_r=delta_r)
        ib = analysis.invariant_set_level(gains, measured)
        lyap = analysis.LyapunovParams.from_gains(gains)
        verdict = analysis.boundedness_verdict(times, err, err_rate, ib, lyap)
        ceiling = ib.e_norm_ceiling
    else:
        verdict = analysis.BoundednessVerdict(False, None, False, None)
        ceiling = float("nan")

    return RunRecord(
        seed=config.seed, controller=config.controller, wind=wind,
        initial_offset=offset, times=times,
        heli_position=heli_pos, heli_velocity=heli_vel, attitude=att,
        rates=rates, probe_position=probe_pos, drogue_position=drog_pos,
        drogue_velocity=drog_vel, error=err, error_rate=err_rate,
        docking_error=docking_error, success=success,
        measured_delta_r=delta_r, verdict=verdict,
        e_norm_ceiling_measured=ceiling,
        saturation_steps=saturation_steps,
        aborted=aborted, abort_reason=abort_reason,
    )


@dataclass
class BatchSummary:
    """Table-style aggregate over a batch of paired runs."""

    n_runs: int
    seeds: tuple
    per_controller: dict
    per_run: list
    bound_compliant_runs: int
    config_digest: str

    def to_json(self) -> str:
        payload = {
            "n_runs": self.n_runs,
            "seeds": list(self.seeds),
            "config_digest": self.config_digest,
            "bound_compliant_runs": self.bound_compliant_runs,
            "per_controller": self.per_controller,
            "per_run": self.per_run,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def config_digest(config: RunConfig) -> str:
    """Short stable hash of everything but seed/controller."""
    payload = config_to_dict(config)
    payload.pop("seed", None)
    payload.pop("controller", None)
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha1(blob).hexdigest()[:10]


def config_to_dict(config: RunConfig) -> dict:
    return {
        "seed": config.seed,
        "controller": config.controller,
        "dt": config.dt,
        "horizon": config.horizon,
        "docking_tolerance": config.docking_tolerance,
        "initial_offset_range": list(config.initial_offset_range),
        "wind_range_kt": list(config.wind_range_kt),
        "helicopter_initial_position": list(config.helicopter_initial_position),
        "drogue_initial_position": list(config.drogue_initial_position),
        "paired": config.paired,
        "plant": {
            "g": config.plant.g,
            "theta_trim": config.plant.theta_trim,
            "phi_trim": config.plant.phi_trim,
            "tanker_speed": config.plant.tanker_speed,
            "inner_loop_mode": config.plant.inner_loop_mode,
            "inner_loop_tau": config.plant.inner_loop_tau,
            "accel_limit": config.plant.accel_limit,
        },
        "gains": {"Kp": config.gains.kp.tolist(), "Kd": config.gains.kd.tolist()},
        "geometry": {"x_bar": config.geometry.x_bar.tolist()},
        "bounds": {"delta_D": config.bounds.delta_d, "delta_R": config.bounds.delta_r},
        "schedule": {
            "initial_separation": config.schedule.initial_separation,
            "approach_duration": config.schedule.approach_duration,
        },
    }


def _run_one_job(config: RunConfig) -> RunRecord:
    return run_once(config)


def run_batch(config: RunConfig, n_runs: int, seed0: int | None = None,
              workers: int = 1):
    """
    Run the paired-seed experiment: seeds seed0..seed0+n_runs-1, each with
    both controllers. Returns (BatchSummary, list[RunRecord]) with records
    ordered by (seed, controller index) regardless of worker count.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    base = config.seed if seed0 is None else seed0
    seeds = tuple(range(base, base + n_runs))
    jobs = [replace(config, seed=s, controller=c)
            for s in seeds for c in CONTROLLERS]

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_one_job, jobs, chunksize=1))
    else:
        records = [run_once(job) for job in jobs]

    per_controller = {}
    for name in CONTROLLERS:
        subset = [r for r in records if r.controller == name]
        completed = [r for r in subset if not r.aborted]
        errors = np.array([r.docking_error for r in completed])
        per_controller[name] = {
            "runs": len(subset),
            "completed": len(completed),
            "mean_docking_error_m": float(errors.mean()) if len(errors) else None,
            "std_docking_error_m": float(errors.std(ddof=1)) if len(errors) > 1 else None,
            "success_rate": sum(r.success for r in subset) / len(subset),
        }

    compliant = 0
    per_run = []
    for r in records:
        v = r.verdict
        ok = (not r.aborted and v.entered and not v.exited_after_entry
              and v.max_e_norm_after_entry is not None
              and v.max_e_norm_after_entry <= r.e_norm_ceiling_measured)
        compliant += ok
        per_run.append({
            "seed": r.seed,
            "controller": r.controller,
            "docking_error_m": _finite_or_none(r.docking_error),
            "success": bool(r.success),
            "wind_kt": r.wind.magnitude_kt,
            "measured_delta_r": _finite_or_none(r.measured_delta_r),
            "e_norm_ceiling_measured": _finite_or_none(r.e_norm_ceiling_measured),
            "entry_time": v.entry_time,
            "exited_after_entry": v.exited_after_entry,
            "max_e_norm_after_entry": v.max_e_norm_after_entry,
            "bound_compliant": bool(ok),
            "aborted": r.aborted,
            "abort_reason": r.abort_reason,
            "saturation_steps": r.saturation_steps,
        })

    summary = BatchSummary(
        n_runs=n_runs,
        seeds=seeds,
        per_controller=per_controller,
        per_run=per_run,
        bound_compliant_runs=compliant,
        config_digest=config_digest(config),
    )
    return summary, records


def batch_output_dir(root: str, config: RunConfig, seeds) -> str:
    name = f"batch_{config_digest(config)}_s{min(seeds)}-{max(seeds)}"
    return os.path.join(root, name)


def write_run_csv(path: str, record: RunRecord) -> None:
    """Per-run time series in the documented 29-column layout."""
    cols = np.column_stack([
        record.times,
        record.heli_position, record.heli_velocity,
        record.attitude, record.rates,
        record.probe_position,
        record.drogue_position, record.drogue_velocity,
        record.error, record.error_rate,
        record.error_norm(),
    ])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in cols:
            writer.writerow([repr(float(v)) for v in row])


def write_run_verdict(path: str, record: RunRecord) -> None:
    payload = {
        "seed": record.seed,
        "controller": record.controller,
        "docking_error_m": _finite_or_none(record.docking_error),
        "success": bool(record.success),
        "measured_delta_r": _finite_or_none(record.measured_delta_r),
        "e_norm_ceiling_measured": _finite_or_none(record.e_norm_ceiling_measured),
        "verdict": record.verdict.to_dict(),
        "aborted": record.aborted,
        "abort_reason": record.abort_reason,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_batch_outputs(out_dir: str, summary: BatchSummary,
                        records: list) -> None:
    os.makedirs(out_dir, exist_ok=True)
    for record in records:
        write_run_csv(os.path.join(out_dir, f"run_{record.run_id()}.csv"), record)
        write_run_verdict(os.path.join(out_dir, f"run_{record.run_id()}.json"), record)
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        fh.write(summary.to_json())
        fh.write("\n")
