"""Heatmap post-processing and pinhole extrinsic calibration.

Heatmaps are 2-D float arrays with values in [0, 1] (row-major, index
[row, col]).  Detection coordinates are sub-pixel (cx along columns, cy
along rows).  Connected components use 8-connectivity; morphology uses a
fixed 3x3 square structuring element with out-of-image pixels treated as
background.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from ._accel import NUMBA_ENABLED, maybe_njit
from .errors import (
    BehindCameraError,
    DegenerateComponentError,
    InvalidInputError,
)
from .numopt import SimplexConfig, SimplexResult, nelder_mead
from .orientation import Quaternion


def _check_heatmap(h) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] < 1 or h.shape[1] < 1:
        raise InvalidInputError("heatmap must be a non-empty 2-D array")
    if not np.all(np.isfinite(h)):
        raise InvalidInputError("heatmap values must be finite")
    return h


def _check_mask(b) -> np.ndarray:
    b = np.asarray(b)
    if b.ndim != 2:
        raise InvalidInputError("mask must be 2-D")
    return b.astype(bool)


def threshold(h, t: float) -> np.ndarray:
    """Binarize: 1 where value >= t."""
    h = _check_heatmap(h)
    if not 0.0 <= t <= 1.0:
        raise InvalidInputError("threshold must be in [0, 1]")
    return (h >= t).astype(np.uint8)


def _shifted_stack(b: np.ndarray, fill: bool) -> np.ndarray:
    padded = np.pad(b, 1, constant_values=fill)
    views = [
        padded[dr : dr + b.shape[0], dc : dc + b.shape[1]]
        for dr in range(3)
        for dc in range(3)
    ]
    return np.stack(views)


def erode(b) -> np.ndarray:
    """3x3 erosion; the border counts as background."""
    b = _check_mask(b)
    return np.all(_shifted_stack(b, False), axis=0).astype(np.uint8)


def dilate(b) -> np.ndarray:
    """3x3 dilation; nothing grows in from outside the image."""
    b = _check_mask(b)
    return np.any(_shifted_stack(b, False), axis=0).astype(np.uint8)


@maybe_njit(cache=True)
def _label_unionfind(mask):
    """Two-pass 8-connectivity labeling with union-find (numba kernel)."""
    h, w = mask.shape
    labels = np.zeros((h, w), np.int32)
    parent = np.zeros(h * w + 2, np.int32)
    nlab = 0
    for r in range(h):
        for c in range(w):
            if mask[r, c] == 0:
                continue
            best = 0
            for k in range(4):  # already-scanned neighbors: NW, N, NE, W
                if k == 0:
                    rr, cc = r - 1, c - 1
                elif k == 1:
                    rr, cc = r - 1, c
                elif k == 2:
                    rr, cc = r - 1, c + 1
                else:
                    rr, cc = r, c - 1
                if rr < 0 or cc < 0 or cc >= w:
                    continue
                lab = labels[rr, cc]
                if lab == 0:
                    continue
                while parent[lab] != lab:  # find root
                    parent[lab] = parent[parent[lab]]
                    lab = parent[lab]
                if best == 0 or lab < best:
                    if best != 0:
                        parent[best] = lab
                    best = lab
                elif lab != best:
                    parent[lab] = best
            if best == 0:
                nlab += 1
                parent[nlab] = nlab
                best = nlab
            labels[r, c] = best
    for r in range(h):
        for c in range(w):
            lab = labels[r, c]
            if lab == 0:
                continue
            while parent[lab] != lab:
                lab = parent[lab]
            labels[r, c] = lab
    return labels


def _label_numpy(mask: np.ndarray) -> np.ndarray:
    """Pure-numpy labeling: iterate min-label propagation to a fixed point."""
    h, w = mask.shape
    big = h * w + 1
    labels = np.where(mask, np.arange(1, h * w + 1).reshape(h, w), big)
    while True:
        padded = np.full((h + 2, w + 2), big, dtype=labels.dtype)
        padded[1:-1, 1:-1] = labels
        views = [
            padded[dr : dr + h, dc : dc + w] for dr in range(3) for dc in range(3)
        ]
        new = np.min(np.stack(views), axis=0)
        new = np.where(mask, np.minimum(labels, new), big)
        if np.array_equal(new, labels):
            break
        labels = new
    return np.where(mask, labels, 0).astype(np.int32)


def connected_components(b) -> list[np.ndarray]:
    """8-connected components of a binary mask.

    Returns one (n, 2) array of (row, col) indices per component, pixels in
    row-major order, components ordered by their first pixel in scan order.
    """
    b = _check_mask(b)
    if b.size == 0 or not b.any():
        return []
    mask = b.astype(np.uint8)
    labels = _label_unionfind(mask) if NUMBA_ENABLED else _label_numpy(mask)
    flat = labels.ravel()
    fg = np.flatnonzero(flat)
    order = np.argsort(flat[fg], kind="stable")  # stable keeps scan order per label
    sorted_labels = flat[fg][order]
    boundaries = np.flatnonzero(np.diff(sorted_labels)) + 1
    groups = np.split(fg[order], boundaries)
    groups.sort(key=lambda g: g[0])
    w = b.shape[1]
    return [np.column_stack([g // w, g % w]) for g in groups]


@dataclass
class Detection:
    """One blob: sub-pixel centroid, summed intensity, pixel count."""

    cx: float
    cy: float
    mass: float
    pixel_count: int


def subpixel_centroid(h, component: np.ndarray) -> Detection:
    """Intensity-weighted centroid of a component over the original heatmap."""
    h = _check_heatmap(h)
    component = np.asarray(component)
    if component.size == 0:
        raise DegenerateComponentError("empty component")
    rows = component[:, 0]
    cols = component[:, 1]
    weights = h[rows, cols]
    mass = float(weights.sum())
    if mass <= 0.0:
        raise DegenerateComponentError("component has zero total mass")
    return Detection(
        cx=float(np.dot(weights, cols) / mass),
        cy=float(np.dot(weights, rows) / mass),
        mass=mass,
        pixel_count=int(component.shape[0]),
    )


def detect_blobs(h, t: float = 0.2, min_pixels: int = 1) -> list[Detection]:
    """Threshold, open (erode then dilate), label, and take centroids."""
    h = _check_heatmap(h)
    mask = dilate(erode(threshold(h, t)))
    out = []
    for comp in connected_components(mask):
        if comp.shape[0] >= min_pixels:
            out.append(subpixel_centroid(h, comp))
    return out


@dataclass
class CameraIntrinsics:
    focal: float  # px
    cx: float
    cy: float

    def __post_init__(self):
        if self.focal <= 0:
            raise InvalidInputError("focal length must be > 0")


@dataclass
class CameraPose:
    """Camera extrinsics (position in world, camera-to-world rotation) and intrinsics."""

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    orientation: Quaternion = field(default_factory=Quaternion.identity)
    intrinsics: CameraIntrinsics = field(default_factory=lambda: CameraIntrinsics(500.0, 320.0, 240.0))

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)


def project(point, pose: CameraPose) -> np.ndarray:
    """Pinhole projection of a world point to pixels (+z optical axis,
    +x right, +y down in the camera frame)."""
    p_cam = pose.orientation.rotate_inverse(np.asarray(point, dtype=float) - pose.position)
    if p_cam[2] <= 0.0:
        raise BehindCameraError(f"point depth {p_cam[2]:.6f} is not positive")
    k = pose.intrinsics
    return np.array(
        [k.focal * p_cam[0] / p_cam[2] + k.cx, k.focal * p_cam[1] / p_cam[2] + k.cy]
    )


@dataclass
class CalibrationResult:
    pose: CameraPose
    rms_residual: float
    converged: bool
    iterations: int


def calibrate_extrinsics(
    observations,
    intrinsics: CameraIntrinsics,
    guess: CameraPose,
    cfg: SimplexConfig | None = None,
) -> CalibrationResult:
    """Fit camera position and orientation to (world point, pixel) pairs.

    Runs Nelder-Mead over a 6-vector (position offset, rotation-vector
    increment composed onto the guess), minimizing mean squared reprojection
    error.  Needs at least 4 observations.
    """
    observations = [(np.asarray(w, float), np.asarray(px, float)) for w, px in observations]
    if len(observations) < 4:
        raise InvalidInputError("need at least 4 observations")
    cfg = cfg or SimplexConfig(max_iter=4000, x_tol=1e-12, f_tol=1e-16)

    def pose_from(params) -> CameraPose:
        return CameraPose(
            position=guess.position + params[:3],
            orientation=guess.orientation * Quaternion.from_rotvec(params[3:]),
            intrinsics=intrinsics,
        )

    def objective(params) -> float:
        pose = pose_from(params)
        err = 0.0
        for world, pixel in observations:
            p_cam = pose.orientation.rotate_inverse(world - pose.position)
            if p_cam[2] <= 1e-6:
                err += 1e6 + (1.0 - p_cam[2]) ** 2  # keep the simplex in front
                continue
            u = intrinsics.focal * p_cam[0] / p_cam[2] + intrinsics.cx
            v = intrinsics.focal * p_cam[1] / p_cam[2] + intrinsics.cy
            err += (u - pixel[0]) ** 2 + (v - pixel[1]) ** 2
        return err / len(observations)

    result: SimplexResult = nelder_mead(objective, np.zeros(6), cfg)
    # one restart from the found point polishes flat valleys cheaply
    result2 = nelder_mead(objective, result.x, cfg)
    if result2.fun < result.fun:
        result2 = SimplexResult(
            result2.x, result2.fun, result.iterations + result2.iterations, result2.converged
        )
        result = result2
    return CalibrationResult(
        pose=pose_from(result.x),
        rms_residual=math.sqrt(result.fun),
        converged=result.converged,
        iterations=result.iterations,
    )


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) PGM into a [0, 1] float heatmap."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        m = re.compile(rb"(?:\s*(?:#[^\n]*\n)?)*(\S+)").match(data, pos)
        if m is None:
            raise InvalidInputError(f"malformed PGM header in {path}")
        tokens.append(m.group(1))
        pos = m.end()
    if tokens[0] != b"P5":
        raise InvalidInputError(f"{path} is not a binary PGM (magic {tokens[0]!r})")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval <= 0 or maxval > 255:
        raise InvalidInputError(f"unsupported PGM maxval {maxval}")
    pixels = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos + 1)
    return pixels.reshape(height, width).astype(float) / maxval


def write_pgm(h, path) -> None:
    """Write a [0, 1] heatmap as a binary PGM with maxval 255."""
    h = _check_heatmap(h)
    scaled = np.clip(np.round(h * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (h.shape[1], h.shape[0]))
        fh.write(scaled.tobytes())


def read_heatmap_csv(path) -> np.ndarray:
    return _check_heatmap(np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=float)))


def detections_to_csv(detections_by_channel: dict[int, list[Detection]], path) -> None:
    """Write the documented detections schema: channel,cx,cy,mass,pixels."""
    lines = ["channel,cx,cy,mass,pixels"]
    for channel in sorted(detections_by_channel):
        for det in detections_by_channel[channel]:
            lines.append(
                "%d,%.6f,%.6f,%.6f,%d" % (channel, det.cx, det.cy, det.mass, det.pixel_count)
            )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
