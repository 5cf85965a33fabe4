"""Rigid-transform algebra and fixed-frame registration.

Rotations are 3x3 row-major matrices; matrices are the only rotation
representation exchanged between modules (quaternions appear internally and on
the wire for inbound body poses). Units are meters and radians throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels

ROTATION_TOL = 1e-9  # orthonormality / determinant contract for valid rotations
INGEST_FIX_TOL = 1e-6  # above this defect, re-orthonormalize ingested rotations
INGEST_REJECT_TOL = 1e-2  # above this defect, reject ingested rotations


def _frozen_array(values, shape) -> np.ndarray:
    a = np.array(values, dtype=float)
    if a.shape != shape:
        raise ValueError(f"expected array of shape {shape}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite values")
    a.setflags(write=False)
    return a


def rotation_defect(rotation) -> float:
    """Max absolute deviation of R^T R from the identity."""
    r = np.asarray(rotation, dtype=float)
    return float(np.max(np.abs(r.T @ r - np.eye(3))))


def check_rotation(rotation, tol: float = ROTATION_TOL) -> np.ndarray:
    r = np.asarray(rotation, dtype=float)
    if r.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got {r.shape}")
    if rotation_defect(r) > tol:
        raise ValueError(f"matrix is not orthonormal within {tol}")
    if abs(float(np.linalg.det(r)) - 1.0) > tol:
        raise ValueError(f"determinant is not +1 within {tol}")
    return r


@dataclass(frozen=True)
class Transform:
    """Rigid SE(3) element; maps child-frame coordinates into the parent frame."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rot = _frozen_array(self.rotation, (3, 3))
        check_rotation(rot)
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", _frozen_array(self.translation, (3,)))


def identity() -> Transform:
    return Transform(np.eye(3), np.zeros(3))


def compose(a: Transform, b: Transform) -> Transform:
    """a then b: rotation a.R @ b.R, translation a.R @ b.t + a.t."""
    return Transform(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)


def inverse(t: Transform) -> Transform:
    rt = t.rotation.T
    return Transform(rt.copy(), -(rt @ t.translation))


def apply(t: Transform, point) -> np.ndarray:
    """Transform a point from the child frame into the parent frame."""
    return t.rotation @ np.asarray(point, dtype=float) + t.translation


def angle_axis(rotation) -> np.ndarray:
    """Rotation vector axis*theta with theta in [0, pi].

    At theta == pi the axis sign makes the largest-magnitude component
    positive (ties prefer x, then y, then z); below 1e-7 the first-order vee
    of the skew part is returned directly.
    """
    return kernels.matrix_to_rotvec(np.asarray(rotation, dtype=float))


def from_angle_axis(v) -> np.ndarray:
    return kernels.rotvec_to_matrix(np.asarray(v, dtype=float))


def rotation_distance(a, b) -> float:
    """Geodesic distance between two rotations (norm of the relative rotation vector)."""
    return float(np.linalg.norm(kernels.rotation_error(np.asarray(a, float), np.asarray(b, float))))


def quat_to_matrix(w: float, x: float, y: float, z: float) -> np.ndarray:
    n = math.sqrt(w * w + x * x + y * y + z * z)
    if n < 1e-12:
        raise ValueError("zero-norm quaternion")
    w, x, y, z = w / n, x / n, y / n, z / n
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ],
        dtype=float,
    )


def matrix_to_quat(rotation) -> tuple:
    """(w, x, y, z) with w >= 0."""
    r = np.asarray(rotation, dtype=float)
    t = float(np.trace(r))
    if t > 0.0:
        s = math.sqrt(t + 1.0) * 2.0
        w = 0.25 * s
        x = (r[2, 1] - r[1, 2]) / s
        y = (r[0, 2] - r[2, 0]) / s
        z = (r[1, 0] - r[0, 1]) / s
    elif r[0, 0] > r[1, 1] and r[0, 0] > r[2, 2]:
        s = math.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2]) * 2.0
        w = (r[2, 1] - r[1, 2]) / s
        x = 0.25 * s
        y = (r[0, 1] + r[1, 0]) / s
        z = (r[0, 2] + r[2, 0]) / s
    elif r[1, 1] > r[2, 2]:
        s = math.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2]) * 2.0
        w = (r[0, 2] - r[2, 0]) / s
        x = (r[0, 1] + r[1, 0]) / s
        y = 0.25 * s
        z = (r[1, 2] + r[2, 1]) / s
    else:
        s = math.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1]) * 2.0
        w = (r[1, 0] - r[0, 1]) / s
        x = (r[0, 2] + r[2, 0]) / s
        y = (r[1, 2] + r[2, 1]) / s
        z = 0.25 * s
    if w < 0.0:
        w, x, y, z = -w, -x, -y, -z
    return (w, x, y, z)


def reorthonormalize(rotation) -> np.ndarray:
    """Nearest rotation by polar decomposition (SVD), det forced to +1."""
    r = np.asarray(rotation, dtype=float)
    u, _, vt = np.linalg.svd(r)
    out = u @ vt
    if np.linalg.det(out) < 0.0:
        u = u.copy()
        u[:, -1] = -u[:, -1]
        out = u @ vt
    return out


def transform_to_json(t: Transform) -> dict:
    return {
        "rotation": [float(v) for v in t.rotation.reshape(9)],
        "translation": [float(v) for v in t.translation],
    }


def transform_from_json(doc: dict) -> Transform:
    """Ingest a serialized transform, tolerating rounding but rejecting garbage.

    Orthonormality defect above 1e-6 triggers polar re-orthonormalization;
    above 1e-2 the value is rejected.
    """
    rot = np.asarray(doc["rotation"], dtype=float).reshape(3, 3)
    trans = np.asarray(doc["translation"], dtype=float)
    defect = rotation_defect(rot)
    if defect > INGEST_REJECT_TOL:
        raise ValueError(f"rotation defect {defect:.3g} exceeds reject threshold {INGEST_REJECT_TOL}")
    if defect > INGEST_FIX_TOL or abs(float(np.linalg.det(rot)) - 1.0) > INGEST_FIX_TOL:
        rot = reorthonormalize(rot)
    return Transform(rot, trans)


class Frame(Enum):
    OPTICAL = "optical"
    HEADSET = "headset"
    ROBOT_BASE = "robot_base"


@dataclass(frozen=True)
class FrameRegistry:
    """Session-constant registration of the tracked frames into the world frame."""

    world_from_optical: Transform
    world_from_headset: Transform
    world_from_robot_base: Transform

    def world_from(self, frame: Frame) -> Transform:
        if frame is Frame.OPTICAL:
            return self.world_from_optical
        if frame is Frame.HEADSET:
            return self.world_from_headset
        return self.world_from_robot_base


def to_world(registry: FrameRegistry, frame: Frame, t: Transform) -> Transform:
    """Express a transform measured in one of the registered frames in the world frame."""
    return compose(registry.world_from(frame), t)


def registry_from_json(doc: dict) -> FrameRegistry:
    return FrameRegistry(
        world_from_optical=transform_from_json(doc["world_from_optical"]),
        world_from_headset=transform_from_json(doc["world_from_headset"]),
        world_from_robot_base=transform_from_json(doc["world_from_robot_base"]),
    )


def registry_to_json(reg: FrameRegistry) -> dict:
    return {
        "world_from_optical": transform_to_json(reg.world_from_optical),
        "world_from_headset": transform_to_json(reg.world_from_headset),
        "world_from_robot_base": transform_to_json(reg.world_from_robot_base),
    }
