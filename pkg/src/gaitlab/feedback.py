"""Fused-angle feedback: deviation filtering and corrective-action activation.

The fused pitch/roll deviations are smoothed, deadbanded, and differentiated
per plane; arm and support-foot actions use the P/D terms, the continuous
foot angle and CoM shifts use a leaky integral, and the timing action scales
the gait-phase increment from the deadbanded roll deviation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import InvalidInputError
from .pose import AbstractPose, LegGeometry


@dataclass
class PidGains:
    kp: float = 0.0
    kd: float = 0.0
    ki: float = 0.0

    def __post_init__(self):
        if self.kp < 0 or self.kd < 0 or self.ki < 0:
            raise InvalidInputError("gains must be >= 0")


@dataclass
class FeedbackGains:
    """Per-action gains; I-gains are used only by cont_foot_angle_x and com_shift."""

    arm_angle_x: PidGains = field(default_factory=lambda: PidGains(kp=0.8, kd=0.25))
    arm_angle_y: PidGains = field(default_factory=lambda: PidGains(kp=1.2, kd=0.35))
    supp_foot_angle_x: PidGains = field(default_factory=lambda: PidGains(kp=0.5, kd=0.1))
    cont_foot_angle_x: PidGains = field(default_factory=lambda: PidGains(ki=0.4))
    com_shift_x: PidGains = field(default_factory=lambda: PidGains(ki=0.02))
    com_shift_y: PidGains = field(default_factory=lambda: PidGains(ki=0.02))
    timing_speed_up: float = 0.6
    timing_slow_down: float = 0.6
    min_timing_factor: float = 0.1

    def __post_init__(self):
        if self.timing_speed_up < 0 or self.timing_slow_down < 0:
            raise InvalidInputError("timing gains must be >= 0")
        if self.min_timing_factor <= 0:
            raise InvalidInputError("min_timing_factor must be > 0")

    def to_array(self) -> np.ndarray:
        return np.array(
            [
                self.arm_angle_x.kp,
                self.arm_angle_x.kd,
                self.arm_angle_y.kp,
                self.arm_angle_y.kd,
                self.supp_foot_angle_x.kp,
                self.supp_foot_angle_x.kd,
                self.cont_foot_angle_x.ki,
                self.com_shift_x.ki,
                self.com_shift_y.ki,
                self.timing_speed_up,
                self.timing_slow_down,
                self.min_timing_factor,
            ]
        )


def zero_gains() -> FeedbackGains:
    """All-zero gains: the closed loop degenerates to the open-loop gait."""
    return FeedbackGains(
        arm_angle_x=PidGains(),
        arm_angle_y=PidGains(),
        supp_foot_angle_x=PidGains(),
        cont_foot_angle_x=PidGains(),
        com_shift_x=PidGains(),
        com_shift_y=PidGains(),
        timing_speed_up=0.0,
        timing_slow_down=0.0,
    )


@dataclass
class FilterParams:
    """Smoothing, deadband, and integrator leak shared by both planes."""

    smoothing_time: float = 0.05
    deadband: float = 0.02
    leak_rate: float = 0.2

    def __post_init__(self):
        if self.smoothing_time <= 0 or self.leak_rate <= 0 or self.deadband < 0:
            raise InvalidInputError("filter constants must be positive (deadband >= 0)")

    def to_array(self) -> np.ndarray:
        return np.array([self.smoothing_time, self.deadband, self.leak_rate])


@dataclass
class PdiTerms:
    p: float = 0.0
    d: float = 0.0
    i: float = 0.0


class DeviationFilters:
    """Mutable smoothed/deadbanded P, D and leaky-I state for both planes.

    State layout matches the kernel: (smoothed, d-estimate, integral) for
    the pitch plane then the roll plane.  Owned by a single control loop.
    """

    def __init__(self, params: FilterParams | None = None):
        self.params = params or FilterParams()
        self.state = np.zeros(_kernels.FILTER_STATE_SIZE)

    def update(self, d_theta: float, d_phi: float, dt: float) -> tuple[PdiTerms, PdiTerms]:
        """Advance both filters by one sample; returns (pitch, roll) terms."""
        if dt <= 0.0:
            raise InvalidInputError("dt must be > 0")
        pdi = _kernels.filters_step(
            self.state, float(d_theta), float(d_phi), float(dt), self.params.to_array()
        )
        return PdiTerms(pdi[0], pdi[1], pdi[2]), PdiTerms(pdi[3], pdi[4], pdi[5])

    def reset(self):
        self.state[:] = 0.0


@dataclass
class Activations:
    """Corrective-action magnitudes; angles in rad, CoM shifts in m."""

    arm_angle_x: float = 0.0
    arm_angle_y: float = 0.0
    supp_foot_angle_x: float = 0.0
    cont_foot_angle_x: float = 0.0
    com_shift_x: float = 0.0
    com_shift_y: float = 0.0
    timing_factor: float = 1.0

    def __post_init__(self):
        if self.timing_factor <= 0:
            raise InvalidInputError("timing_factor must be > 0")

    def to_array(self) -> np.ndarray:
        return np.array(
            [
                self.arm_angle_x,
                self.arm_angle_y,
                self.supp_foot_angle_x,
                self.cont_foot_angle_x,
                self.com_shift_x,
                self.com_shift_y,
                self.timing_factor,
            ]
        )


def compute_activations(
    pitch_terms: PdiTerms,
    roll_terms: PdiTerms,
    gains: FeedbackGains,
    support_leg_sign: int,
) -> Activations:
    """Scale filtered deviations into activations.

    support_leg_sign is +1 when the left leg is the support leg, -1 for the
    right.  Tilting toward the support leg (outward) slows the gait down,
    tilting away from it (inward) speeds it up.
    """
    if support_leg_sign not in (1, -1):
        raise InvalidInputError("support_leg_sign must be +1 or -1")
    pdi = np.array(
        [
            pitch_terms.p,
            pitch_terms.d,
            pitch_terms.i,
            roll_terms.p,
            roll_terms.d,
            roll_terms.i,
        ]
    )
    out = np.empty(_kernels.ACT_SIZE)
    _kernels.activations_from(pdi, gains.to_array(), float(support_leg_sign), out)
    return Activations(*out)


def apply_actions(
    open_loop: AbstractPose,
    act: Activations,
    support_leg_sign: int = 1,
    geom: LegGeometry | None = None,
    halt_eta: float = 0.1,
) -> tuple[AbstractPose, bool]:
    """Superimpose activations onto the open-loop pose.

    Arm angles add to both arms, the continuous foot angle to both feet, the
    support foot angle to the support foot only.  CoM shifts displace both
    ankle targets by the negated shift and re-solve the leg IK, applying the
    resulting leg-angle deltas.  Returns the modified pose and a flag that is
    True when a retraction had to be clamped into [0, 1].
    """
    if support_leg_sign not in (1, -1):
        raise InvalidInputError("support_leg_sign must be +1 or -1")
    geom = geom or LegGeometry()
    pose = open_loop.to_array()
    geom_arr = np.array([geom.thigh, geom.shank, halt_eta])
    saturated = _kernels.apply_actions_flat(
        pose, act.to_array(), float(support_leg_sign), geom_arr
    )
    return AbstractPose.from_array(pose), bool(saturated)
