"""Fused-angles attitude representation and a complementary attitude filter.

Conventions: quaternions are (w, x, y, z), unit norm, and rotate body-frame
vectors into the global frame.  Fused angles split an orientation into fused
yaw, fused pitch (sagittal tilt, positive leaning forward over +x), fused
roll (lateral tilt, positive leaning toward +y) and a hemisphere flag.  The
tilt pair is defined from the global z-axis expressed in body coordinates,
which makes it invariant under global yaw rotations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidInputError

_UNIT_TOL = 1e-9


def wrap_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    x = (a + math.pi) % (2.0 * math.pi)
    if x == 0.0:
        x = 2.0 * math.pi
    return x - math.pi


@dataclass
class Quaternion:
    """Unit quaternion (w, x, y, z), body-to-global rotation."""

    w: float = 1.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def norm(self) -> float:
        return math.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2)

    def normalized(self) -> "Quaternion":
        n = self.norm()
        if n < 1e-12:
            return Quaternion(1.0, 0.0, 0.0, 0.0)
        return Quaternion(self.w / n, self.x / n, self.y / n, self.z / n)

    def conjugate(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other: "Quaternion") -> "Quaternion":
        w1, x1, y1, z1 = self.w, self.x, self.y, self.z
        w2, x2, y2, z2 = other.w, other.x, other.y, other.z
        return Quaternion(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ).normalized()

    def rotate(self, v) -> np.ndarray:
        """Rotate a 3-vector from the body frame into the global frame."""
        return self.to_matrix() @ np.asarray(v, dtype=float)

    def rotate_inverse(self, v) -> np.ndarray:
        """Rotate a 3-vector from the global frame into the body frame."""
        return self.to_matrix().T @ np.asarray(v, dtype=float)

    def to_matrix(self) -> np.ndarray:
        w, x, y, z = self.w, self.x, self.y, self.z
        return np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ]
        )

    @staticmethod
    def from_rotvec(v) -> "Quaternion":
        """Quaternion for a rotation vector (axis * angle, radians)."""
        v = np.asarray(v, dtype=float)
        angle = float(np.linalg.norm(v))
        if angle < 1e-12:
            # first-order expansion keeps tiny increments exact enough
            return Quaternion(1.0, 0.5 * v[0], 0.5 * v[1], 0.5 * v[2]).normalized()
        axis = v / angle
        s = math.sin(0.5 * angle)
        return Quaternion(
            math.cos(0.5 * angle), axis[0] * s, axis[1] * s, axis[2] * s
        ).normalized()

    @staticmethod
    def identity() -> "Quaternion":
        return Quaternion(1.0, 0.0, 0.0, 0.0)


@dataclass
class FusedAngles:
    """Fused yaw/pitch/roll plus hemisphere flag."""

    yaw: float = 0.0
    pitch: float = 0.0
    roll: float = 0.0
    hemisphere: int = 1

    def __post_init__(self):
        if self.hemisphere not in (1, -1):
            raise InvalidInputError(f"hemisphere must be +1 or -1, got {self.hemisphere}")
        if not (-math.pi / 2 - 1e-12 <= self.pitch <= math.pi / 2 + 1e-12):
            raise InvalidInputError(f"fused pitch {self.pitch} outside [-pi/2, pi/2]")
        if not (-math.pi / 2 - 1e-12 <= self.roll <= math.pi / 2 + 1e-12):
            raise InvalidInputError(f"fused roll {self.roll} outside [-pi/2, pi/2]")
        s2 = math.sin(self.pitch) ** 2 + math.sin(self.roll) ** 2
        if s2 > 1.0 + 1e-9:
            raise InvalidInputError(
                f"sin^2(pitch) + sin^2(roll) = {s2} exceeds 1; not a valid tilt"
            )


@dataclass
class ImuSample:
    """One gyro/accelerometer reading with its sample interval."""

    gyro: np.ndarray
    accel: np.ndarray
    dt: float

    def __post_init__(self):
        self.gyro = np.asarray(self.gyro, dtype=float)
        self.accel = np.asarray(self.accel, dtype=float)
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise InvalidInputError(f"dt must be finite and positive, got {self.dt}")


@dataclass
class FilterState:
    """State of the complementary attitude filter."""

    attitude: Quaternion = field(default_factory=Quaternion.identity)
    correction_gain: float = 2.0
    gyro_bias: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.gyro_bias = np.asarray(self.gyro_bias, dtype=float)
        if self.correction_gain < 0.0:
            raise InvalidInputError("correction_gain must be >= 0")


def quat_to_fused(q: Quaternion) -> FusedAngles:
    """Decompose a unit quaternion into fused angles.

    The global z-axis in body coordinates is the third row of the rotation
    matrix; its sagittal component gives sin(pitch), its lateral component
    sin(roll), and its vertical sign the hemisphere.
    """
    if abs(q.norm() - 1.0) > 1e-6:
        raise InvalidInputError(f"quaternion norm {q.norm()} is not 1 within tolerance")
    w, x, y, z = q.w, q.x, q.y, q.z
    sin_pitch = 2.0 * (w * y - x * z)
    sin_roll = 2.0 * (w * x + y * z)
    sin_pitch = min(1.0, max(-1.0, sin_pitch))
    sin_roll = min(1.0, max(-1.0, sin_roll))
    hemi = 1 if (1.0 - 2.0 * (x * x + y * y)) >= 0.0 else -1
    yaw = wrap_angle(2.0 * math.atan2(z, w))
    return FusedAngles(yaw, math.asin(sin_pitch), math.asin(sin_roll), hemi)


def fused_to_quat(f: FusedAngles) -> Quaternion:
    """Reconstruct the quaternion from fused angles (yaw about z, then tilt)."""
    sth = math.sin(f.pitch)
    sph = math.sin(f.roll)
    s2 = sth * sth + sph * sph
    if s2 > 1.0 + 1e-9:
        raise InvalidInputError(f"sin^2(pitch) + sin^2(roll) = {s2} exceeds 1")
    s2 = min(s2, 1.0)
    sin_alpha = math.sqrt(s2)
    cos_alpha = f.hemisphere * math.sqrt(1.0 - s2)
    alpha = math.atan2(sin_alpha, cos_alpha)
    gamma = math.atan2(sth, sph)  # tilt axis azimuth; 0/0 -> 0 for identity
    sa = math.sin(0.5 * alpha)
    tilt = Quaternion(math.cos(0.5 * alpha), sa * math.cos(gamma), sa * math.sin(gamma), 0.0)
    qz = Quaternion(math.cos(0.5 * f.yaw), 0.0, 0.0, math.sin(0.5 * f.yaw))
    return (qz * tilt).normalized()


def fused_deviation(measured: FusedAngles, expected: FusedAngles) -> tuple[float, float]:
    """Deviation of measured fused pitch/roll from the expected values."""
    return measured.pitch - expected.pitch, measured.roll - expected.roll


def filter_update(s: FilterState, m: ImuSample) -> FilterState:
    """Advance the complementary filter by one IMU sample.

    The attitude is integrated with the bias-corrected gyro rates, then tilted
    toward the accelerometer-implied gravity direction at ``correction_gain``
    per second.  Accelerometer samples with norm below 1 m/s^2 carry no usable
    gravity direction and are skipped.
    """
    omega = m.gyro - s.gyro_bias
    q = s.attitude * Quaternion.from_rotvec(omega * m.dt)

    a_norm = float(np.linalg.norm(m.accel))
    if a_norm >= 1.0:
        up_meas = m.accel / a_norm
        up_pred = q.rotate_inverse(np.array([0.0, 0.0, 1.0]))
        corr = s.correction_gain * m.dt * np.cross(up_meas, up_pred)
        q = q * Quaternion.from_rotvec(corr)

    return replace(s, attitude=q.normalized())
