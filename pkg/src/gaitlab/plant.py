"""Seeded surrogate of the torso attitude dynamics, and the closed-loop runner.

The plant is NOT a physics claim.  It is a deliberately simple pair of
decoupled damped-pendulum planes (fused pitch and fused roll) driven by a
phase-locked gait excitation, the corrective-action activations, impulse
disturbances, and seeded noise.  It exists so the feedback and optimizer
layers have a deterministic closed loop with the right interfaces and
qualitative signs; no quantitative match with any robot is attempted.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .cpg import CpgParams, GaitCommand
from .errors import InvalidInputError
from .feedback import Activations, FeedbackGains, FilterParams
from .pose import LegGeometry

DT = 0.01  # closed-loop step, 100 Hz servo rate
FALL_THRESHOLD = 0.7  # rad

# column order of the activation effectiveness matrix
_ACT_COLUMNS = ("arm_angle_x", "arm_angle_y", "supp_foot_angle_x",
                "cont_foot_angle_x", "com_shift_x", "com_shift_y")


def default_effectiveness() -> np.ndarray:
    """Per-plane acceleration per unit activation, shape (2, 6).

    Row 0 is the pitch plane (arm Y and CoM-shift X act there), row 1 the
    roll plane.  Signs are restoring: a positive activation produced by a
    positive deviation accelerates the torso back toward upright.
    """
    eff = np.zeros((2, 6))
    eff[0, 1] = -3.0  # arm angle Y, rad/s^2 per rad
    eff[0, 4] = -18.0  # CoM shift X, rad/s^2 per m
    eff[1, 0] = -2.0  # arm angle X
    eff[1, 2] = -2.5  # support foot angle X
    eff[1, 3] = -1.5  # continuous foot angle X
    eff[1, 5] = -18.0  # CoM shift Y
    return eff


@dataclass
class TorsoState:
    """Fused pitch/roll and their rates; frozen once the fall flag latches."""

    fused_pitch: float = 0.0
    fused_roll: float = 0.0
    pitch_rate: float = 0.0
    roll_rate: float = 0.0
    fallen: bool = False

    def to_array(self) -> np.ndarray:
        return np.array([self.fused_pitch, self.fused_roll, self.pitch_rate, self.roll_rate])


@dataclass
class PlantParams:
    """Surrogate torso dynamics.

    The pitch plane is a slow pendulum (kick recovery and noise wander are
    what the sagittal feedback fights); the roll plane is faster and sits
    near the sway excitation frequency, so the lateral feedback mostly damps
    a resonance.
    """

    natural_freq: tuple[float, float] = (1.2, 4.0)  # rad/s, (pitch, roll)
    damping: float = 0.4  # 1/s
    gait_coupling: float = 0.35  # rad/s^2 excitation amplitude
    action_effectiveness: np.ndarray = field(default_factory=default_effectiveness)
    noise_std: float = 0.06  # rad/s^2
    effective_inertia: float = 12.0  # kg*m, maps impulse to a rate kick
    fall_threshold: float = FALL_THRESHOLD
    seed: int = 0

    def __post_init__(self):
        self.natural_freq = tuple(np.broadcast_to(np.asarray(self.natural_freq, float), (2,)))
        self.action_effectiveness = np.asarray(self.action_effectiveness, dtype=float)
        if self.action_effectiveness.shape != (2, 6):
            raise InvalidInputError("action_effectiveness must have shape (2, 6)")
        if self.damping < 0:
            raise InvalidInputError("damping must be >= 0")
        if self.noise_std < 0:
            raise InvalidInputError("noise_std must be >= 0")
        if self.effective_inertia <= 0:
            raise InvalidInputError("effective_inertia must be > 0")

    def to_array(self) -> np.ndarray:
        return np.array(
            [
                self.natural_freq[0],
                self.natural_freq[1],
                self.damping,
                self.gait_coupling,
                self.fall_threshold,
            ]
        )


@dataclass
class Disturbance:
    """An impulse hitting the torso at a given time."""

    time: float
    impulse: float  # kg*m/s
    direction: str  # front, back, left, right

    def __post_init__(self):
        if self.impulse < 0:
            raise InvalidInputError("impulse must be >= 0")
        if self.direction not in ("front", "back", "left", "right"):
            raise InvalidInputError(f"unknown disturbance direction {self.direction!r}")

    def rate_kick(self, effective_inertia: float) -> tuple[float, float]:
        """(pitch, roll) rate change.  A push from the front tips backward."""
        k = self.impulse / effective_inertia
        return {
            "front": (-k, 0.0),
            "back": (k, 0.0),
            "left": (0.0, -k),
            "right": (0.0, k),
        }[self.direction]


@dataclass
class RealGap:
    """Deterministic perturbation turning the sim plant into the 'real' one."""

    natural_freq_scale: float = 1.12
    effectiveness_scale: float = 0.85
    coupling_scale: float = 1.2
    noise_scale: float = 1.3
    seed_offset: int = 10007


def make_real_plant(p: PlantParams, gap: RealGap | None = None) -> PlantParams:
    """Apply the sim-to-real gap to a base plant; zero gap returns it unchanged."""
    gap = gap or RealGap()
    return replace(
        p,
        natural_freq=tuple(f * gap.natural_freq_scale for f in p.natural_freq),
        action_effectiveness=p.action_effectiveness * gap.effectiveness_scale,
        gait_coupling=p.gait_coupling * gap.coupling_scale,
        noise_std=p.noise_std * gap.noise_scale,
        seed=p.seed + gap.seed_offset,
    )


def step_plant(
    s: TorsoState,
    excitation: tuple[float, float],
    activations: Activations,
    disturbance: Disturbance | None,
    p: PlantParams,
    dt: float,
    noise: tuple[float, float] = (0.0, 0.0),
) -> TorsoState:
    """Advance the torso one step with semi-implicit Euler.

    Fallen states are frozen.  ``noise`` is the per-plane acceleration noise
    sample for this step; run_sequence supplies the seeded stream.
    """
    if not 0.0 < dt <= 0.02:
        raise InvalidInputError("dt must be in (0, 0.02]")
    if s.fallen:
        return replace(s)

    pitch_rate = s.pitch_rate
    roll_rate = s.roll_rate
    if disturbance is not None:
        kp, kr = disturbance.rate_kick(p.effective_inertia)
        pitch_rate += kp
        roll_rate += kr

    act = activations.to_array()
    acc_p, acc_r = _kernels.plant_accels(
        s.fused_pitch,
        s.fused_roll,
        pitch_rate,
        roll_rate,
        float(excitation[0]),
        float(excitation[1]),
        act,
        p.to_array(),
        p.action_effectiveness,
    )
    pitch_rate += dt * (acc_p + noise[0])
    pitch = s.fused_pitch + dt * pitch_rate
    roll_rate += dt * (acc_r + noise[1])
    roll = s.fused_roll + dt * roll_rate
    fallen = abs(pitch) > p.fall_threshold or abs(roll) > p.fall_threshold
    return TorsoState(pitch, roll, pitch_rate, roll_rate, fallen)


def gait_excitation(mu: float, cmd: GaitCommand, p: PlantParams) -> tuple[float, float]:
    """Phase-locked torso excitation of the stepping gait."""
    return _kernels.gait_excitation(float(mu), cmd.vx, cmd.vy, cmd.wz, p.gait_coupling)


@dataclass
class RunTrace:
    """Closed-loop time series at uniform spacing dt.

    All arrays share the first dimension.  If the torso fell, the trace is
    truncated at the fall sample and ``fall`` is True.
    """

    dt: float
    t: np.ndarray
    mu: np.ndarray
    pitch: np.ndarray
    roll: np.ndarray
    pitch_rate: np.ndarray
    roll_rate: np.ndarray
    d_theta: np.ndarray
    d_phi: np.ndarray
    e_p_alpha: np.ndarray
    e_p_beta: np.ndarray
    activations: np.ndarray
    pose: np.ndarray
    fall: bool
    saturations: int

    def __len__(self) -> int:
        return self.t.shape[0]

    @property
    def fall_time(self) -> float | None:
        return float(self.t[-1]) if self.fall else None


def standard_test_sequence() -> list[tuple[GaitCommand, float]]:
    """The fixed command sequence used for cost evaluation.

    Forward walk, omni-directional turns left and right, sideways walk, a
    turn in place, and a backward walk.
    """
    return [
        (GaitCommand(vx=0.7), 4.0),
        (GaitCommand(vx=0.4, wz=0.5), 3.0),
        (GaitCommand(vx=0.4, wz=-0.5), 3.0),
        (GaitCommand(vy=0.6), 3.0),
        (GaitCommand(wz=0.7), 3.0),
        (GaitCommand(vx=-0.5), 4.0),
    ]


def _segment_commands(seq, dt: float) -> np.ndarray:
    total = sum(d for _, d in seq)
    if total <= 0:
        raise InvalidInputError("total sequence duration must be > 0")
    chunks = []
    for cmd, duration in seq:
        n = int(round(duration / dt))
        chunks.append(np.tile([cmd.vx, cmd.vy, cmd.wz], (n, 1)))
    return np.concatenate(chunks, axis=0)


def run_sequence(
    gains: FeedbackGains,
    cpg: CpgParams,
    seq: list[tuple[GaitCommand, float]],
    p: PlantParams,
    disturbances: list[Disturbance] = (),
    filter_params: FilterParams | None = None,
    geom: LegGeometry | None = None,
) -> RunTrace:
    """Run the closed loop (CPG + corrective actions + plant) at dt = 0.01 s.

    Deterministic: identical arguments and seed give bit-identical traces.
    """
    filter_params = filter_params or FilterParams()
    geom = geom or LegGeometry()
    cmds = _segment_commands(seq, DT)
    n = cmds.shape[0]

    rng = np.random.default_rng(p.seed)
    noise = rng.normal(0.0, p.noise_std, size=(n, 2)) if p.noise_std > 0 else np.zeros((n, 2))

    dist_steps = np.array([int(round(d.time / DT)) for d in disturbances], dtype=np.int64)
    dist_kicks = np.array(
        [d.rate_kick(p.effective_inertia) for d in disturbances], dtype=float
    ).reshape(len(disturbances), 2)

    halt_eta = 0.5 * (cpg.halt_pose.left_leg.eta + cpg.halt_pose.right_leg.eta)
    geom_arr = np.array([geom.thigh, geom.shank, halt_eta])

    mu_out, state, dev, ep, act, pose, fall_idx, saturations = _kernels.run_closed_loop(
        cmds,
        noise,
        dist_steps,
        dist_kicks,
        cpg.to_array(),
        gains.to_array(),
        filter_params.to_array(),
        p.to_array(),
        p.action_effectiveness,
        geom_arr,
        DT,
        0.0,
        np.zeros(4),
    )

    fell = fall_idx >= 0
    end = fall_idx + 1 if fell else n
    t = np.arange(end) * DT
    return RunTrace(
        dt=DT,
        t=t,
        mu=mu_out[:end],
        pitch=state[:end, 0],
        roll=state[:end, 1],
        pitch_rate=state[:end, 2],
        roll_rate=state[:end, 3],
        d_theta=dev[:end, 0],
        d_phi=dev[:end, 1],
        e_p_alpha=ep[:end, 0],
        e_p_beta=ep[:end, 1],
        activations=act[:end],
        pose=pose[:end],
        fall=fell,
        saturations=int(saturations),
    )


def phase_plot_series(trace: RunTrace) -> np.ndarray:
    """(fused pitch, fused pitch rate) pairs straight from the plant state."""
    if len(trace) == 0:
        raise InvalidInputError("trace is empty")
    return np.column_stack([trace.pitch, trace.pitch_rate])


def trace_to_csv(trace: RunTrace, path) -> None:
    """Write the trace in the documented CSV schema."""
    fall_col = np.zeros(len(trace), dtype=int)
    if trace.fall:
        fall_col[-1] = 1
    data = np.column_stack(
        [
            trace.t,
            trace.mu,
            trace.pitch,
            trace.roll,
            trace.pitch_rate,
            trace.roll_rate,
            trace.d_theta,
            trace.d_phi,
            fall_col,
        ]
    )
    header = "t,mu,pitch,roll,pitch_rate,roll_rate,d_theta,d_phi,fall"
    np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.12g")


def phase_plot_to_csv(trace: RunTrace, path) -> None:
    np.savetxt(
        path,
        phase_plot_series(trace),
        delimiter=",",
        header="fused_pitch,fused_pitch_rate",
        comments="",
        fmt="%.12g",
    )
