"""Key=value config files shared by the gait, feedback, and plant layers.

Format: one ``key = value`` pair per line, ``#`` starts a comment, keys are
dotted lowercase paths, all values are numbers.  Unknown keys are rejected
so typos fail loudly.
"""

from __future__ import annotations

from .cpg import CpgParams, default_halt_pose
from .errors import ConfigurationError
from .feedback import FeedbackGains, FilterParams, PidGains
from .plant import PlantParams


def default_config() -> dict[str, float]:
    """Every supported key with its default value."""
    cpg = CpgParams()
    gains = FeedbackGains()
    filt = FilterParams()
    plant = PlantParams()
    cfg = {
        # gait waveforms (angles rad, frequency Hz, lift in retraction units)
        "cpg.halt_eta": 0.1,
        "cpg.halt_arm_eta": 0.05,
        "cpg.lift_amplitude": cpg.lift_amplitude,
        "cpg.swing_amplitude": cpg.swing_amplitude,
        "cpg.lateral_sway_amplitude": cpg.lateral_sway_amplitude,
        "cpg.arm_swing_amplitude": cpg.arm_swing_amplitude,
        "cpg.double_support_fraction": cpg.double_support_fraction,
        "cpg.frequency": cpg.frequency,
        # deviation filters (s, rad, 1/s)
        "filter.smoothing_time": filt.smoothing_time,
        "filter.deadband": filt.deadband,
        "filter.leak_rate": filt.leak_rate,
        # timing action (dimensionless)
        "gains.timing_speed_up": gains.timing_speed_up,
        "gains.timing_slow_down": gains.timing_slow_down,
        "gains.min_timing_factor": gains.min_timing_factor,
        # surrogate plant (rad/s, 1/s, rad/s^2, kg*m, rad)
        "plant.natural_freq_pitch": plant.natural_freq[0],
        "plant.natural_freq_roll": plant.natural_freq[1],
        "plant.damping": plant.damping,
        "plant.gait_coupling": plant.gait_coupling,
        "plant.noise_std": plant.noise_std,
        "plant.effective_inertia": plant.effective_inertia,
        "plant.fall_threshold": plant.fall_threshold,
    }
    for action in (
        "arm_angle_x",
        "arm_angle_y",
        "supp_foot_angle_x",
        "cont_foot_angle_x",
        "com_shift_x",
        "com_shift_y",
    ):
        pid: PidGains = getattr(gains, action)
        cfg[f"gains.{action}.kp"] = pid.kp
        cfg[f"gains.{action}.kd"] = pid.kd
        cfg[f"gains.{action}.ki"] = pid.ki
    return cfg


def parse_config_text(text: str) -> dict[str, float]:
    """Parse key=value lines; values must be numeric."""
    out: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigurationError(f"line {lineno}: empty key")
        try:
            out[key] = float(value)
        except ValueError as exc:
            raise ConfigurationError(
                f"line {lineno}: value for {key!r} is not a number: {value!r}"
            ) from exc
    return out


def load_config(path) -> dict[str, float]:
    """Load a config file and merge it over the defaults."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    overrides = parse_config_text(text)
    cfg = default_config()
    for key, value in overrides.items():
        if key not in cfg:
            raise ConfigurationError(f"unknown config key {key!r}")
        cfg[key] = value
    return cfg


def write_config(cfg: dict[str, float], path) -> None:
    with open(path, "w") as fh:
        for key in sorted(cfg):
            fh.write(f"{key} = {cfg[key]:.12g}\n")


def cpg_from_config(cfg: dict[str, float]) -> CpgParams:
    halt = default_halt_pose(eta=cfg["cpg.halt_eta"])
    halt.left_arm.eta = halt.right_arm.eta = cfg["cpg.halt_arm_eta"]
    return CpgParams(
        halt_pose=halt,
        lift_amplitude=cfg["cpg.lift_amplitude"],
        swing_amplitude=cfg["cpg.swing_amplitude"],
        lateral_sway_amplitude=cfg["cpg.lateral_sway_amplitude"],
        arm_swing_amplitude=cfg["cpg.arm_swing_amplitude"],
        double_support_fraction=cfg["cpg.double_support_fraction"],
        frequency=cfg["cpg.frequency"],
    )


def gains_from_config(cfg: dict[str, float]) -> FeedbackGains:
    def pid(action: str) -> PidGains:
        return PidGains(
            kp=cfg[f"gains.{action}.kp"],
            kd=cfg[f"gains.{action}.kd"],
            ki=cfg[f"gains.{action}.ki"],
        )

    return FeedbackGains(
        arm_angle_x=pid("arm_angle_x"),
        arm_angle_y=pid("arm_angle_y"),
        supp_foot_angle_x=pid("supp_foot_angle_x"),
        cont_foot_angle_x=pid("cont_foot_angle_x"),
        com_shift_x=pid("com_shift_x"),
        com_shift_y=pid("com_shift_y"),
        timing_speed_up=cfg["gains.timing_speed_up"],
        timing_slow_down=cfg["gains.timing_slow_down"],
        min_timing_factor=cfg["gains.min_timing_factor"],
    )


def filter_from_config(cfg: dict[str, float]) -> FilterParams:
    return FilterParams(
        smoothing_time=cfg["filter.smoothing_time"],
        deadband=cfg["filter.deadband"],
        leak_rate=cfg["filter.leak_rate"],
    )


def plant_from_config(cfg: dict[str, float], seed: int = 0) -> PlantParams:
    return PlantParams(
        natural_freq=(cfg["plant.natural_freq_pitch"], cfg["plant.natural_freq_roll"]),
        damping=cfg["plant.damping"],
        gait_coupling=cfg["plant.gait_coupling"],
        noise_std=cfg["plant.noise_std"],
        effective_inertia=cfg["plant.effective_inertia"],
        fall_threshold=cfg["plant.fall_threshold"],
        seed=seed,
    )
