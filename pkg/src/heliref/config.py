"""
YAML configuration handling for the CLI.

The schema mirrors RunConfig with nested sections (plant, gains, geometry,
bounds, schedule). Gains are the only required section; everything else
falls back to defaults. Validation errors always carry the dotted path of
the offending key, and ``--set dotted.key=value`` overrides are applied on
the raw mapping before validation.
"""

import yaml

from .controllers import ControllerGains
from .drogue import UncertaintyBounds
from .harness import RunConfig
from .kinematics import ProbeGeometry
from .plant import PlantParams
from .reference import ClosureSchedule


class ConfigError(Exception):
    """Bad or missing configuration; ``key`` is the dotted path."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


_SCALAR_KEYS = {
    "seed": int,
    "controller": str,
    "dt": float,
    "horizon": float,
    "docking_tolerance": float,
    "paired": bool,
}
_PAIR_KEYS = ("initial_offset_range", "wind_range_kt")
_TRIPLE_KEYS = ("helicopter_initial_position", "drogue_initial_position")
_SECTIONS = {
    "plant": {"g": float, "theta_trim": float, "phi_trim": float,
              "tanker_speed": float, "inner_loop_mode": str,
              "inner_loop_tau": float, "accel_limit": float},
    "gains": {"Kp": list, "Kd": list},
    "geometry": {"x_bar": list},
    "bounds": {"delta_D": float, "delta_R": float},
    "schedule": {"initial_separation": float, "approach_duration": float},
}


def load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(path, f"cannot read config: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(path, f"invalid YAML: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(path, "top level must be a mapping")
    return data


def apply_overrides(cfg: dict, assignments) -> dict:
    """Apply ``dotted.key=value`` strings onto a nested mapping."""
    for item in assignments or []:
        if "=" not in item:
            raise ConfigError(item, "override must look like dotted.key=value")
        dotted, raw = item.split("=", 1)
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigError(dotted, f"cannot parse value {raw!r}: {exc}") from exc
        node = cfg
        parts = dotted.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(dotted, "path collides with a scalar value")
        node[parts[-1]] = value
    return cfg


def _vector(cfg: dict, section: str, key: str, length: int, default=None):
    src = cfg.get(section, {})
    dotted = f"{section}.{key}" if section else key
    if key not in src:
        if default is None:
            raise ConfigError(dotted, "required key is missing")
        return list(default)
    value = src[key]
    if not isinstance(value, (list, tuple)) or len(value) != length:
        raise ConfigError(dotted, f"must be a list of {length} numbers")
    try:
        return [float(v) for v in value]
    except (TypeError, ValueError) as exc:
        raise ConfigError(dotted, "entries must be numeric") from exc


def _scalar(node: dict, dotted_prefix: str, key: str, kind, default):
    dotted = f"{dotted_prefix}{key}"
    if key not in node:
        return default
    value = node[key]
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(dotted, "must be true or false")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(dotted, "must be a string")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(dotted, "must be a number")
    return kind(value)


def _check_unknown(cfg: dict):
    known_top = set(_SCALAR_KEYS) | set(_PAIR_KEYS) | set(_TRIPLE_KEYS) | set(_SECTIONS)
    for key in cfg:
        if key not in known_top:
            raise ConfigError(key, "unknown key")
    for section, fields in _SECTIONS.items():
        node = cfg.get(section, {})
        if not isinstance(node, dict):
            raise ConfigError(section, "must be a mapping")
        for key in node:
            if key not in fields:
                raise ConfigError(f"{section}.{key}", "unknown key")


def build_run_config(cfg: dict) -> RunConfig:
    """Validate a raw mapping and construct the RunConfig."""
    _check_unknown(cfg)

    kwargs = {}
    for key, kind in _SCALAR_KEYS.items():
        default = getattr(RunConfig, key)
        kwargs[key] = _scalar(cfg, "", key, kind, default)
    for key in _PAIR_KEYS:
        kwargs[key] = tuple(_vector(cfg, "", key, 2, getattr(RunConfig, key)))
    for key in _TRIPLE_KEYS:
        kwargs[key] = tuple(_vector(cfg, "", key, 3, getattr(RunConfig, key)))

    plant_node = cfg.get("plant", {})
    plant_defaults = PlantParams()
    plant_kwargs = {}
    for key in _SECTIONS["plant"]:
        plant_kwargs[key] = _scalar(plant_node, "plant.", key,
                                    _SECTIONS["plant"][key],
                                    getattr(plant_defaults, key))

    kp = _vector(cfg, "gains", "Kp", 3)
    kd = _vector(cfg, "gains", "Kd", 3)
    x_bar = _vector(cfg, "geometry", "x_bar", 3, ProbeGeometry().x_bar)

    bounds_node = cfg.get("bounds", {})
    bounds_defaults = UncertaintyBounds()
    delta_d = _scalar(bounds_node, "bounds.", "delta_D", float, bounds_defaults.delta_d)
    delta_r = _scalar(bounds_node, "bounds.", "delta_R", float, bounds_defaults.delta_r)

    sched_node = cfg.get("schedule", {})
    sched_defaults = ClosureSchedule()
    separation = _scalar(sched_node, "schedule.", "initial_separation", float,
                         sched_defaults.initial_separation)
    duration = _scalar(sched_node, "schedule.", "approach_duration", float,
                       sched_defaults.approach_duration)

    try:
        return RunConfig(
            plant=PlantParams(**plant_kwargs),
            gains=ControllerGains(kp=kp, kd=kd),
            geometry=ProbeGeometry(x_bar=x_bar),
            bounds=UncertaintyBounds(delta_d=delta_d, delta_r=delta_r),
            schedule=ClosureSchedule(initial_separation=separation,
                                     approach_duration=duration),
            **kwargs,
        )
    except ValueError as exc:
        raise ConfigError("config", str(exc)) from exc
