"""7-DOF serial-arm kinematics and the resolved-rate position servo.

The arm is fully config-driven: seven revolute joints, each a fixed transform
from its parent followed by a rotation about a unit axis, between a base frame
and a flange-to-effector transform. The servo advances joint angles with a
damped pseudo-inverse of the geometric Jacobian, a per-joint velocity cap, a
hard joint-limit clamp, and an axis-aligned workspace clamp on the desired
translation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import kernels, se3
from .se3 import Transform

AXIS_TOL = 1e-9

# re-exported servo telemetry flag bits
FLAG_VEL_SATURATED = kernels.FLAG_VEL_SATURATED
FLAG_JOINT_CLAMPED = kernels.FLAG_JOINT_CLAMPED
FLAG_BOX_CLAMPED = kernels.FLAG_BOX_CLAMPED


@dataclass(frozen=True)
class JointDescriptor:
    fixed_transform: Transform  # parent link frame -> joint frame, before rotation
    axis: np.ndarray  # unit rotation axis in the joint frame
    limits: tuple  # (min, max) radians

    def __post_init__(self):
        ax = np.array(self.axis, dtype=float)
        if ax.shape != (3,):
            raise ValueError("axis must be a 3-vector")
        if abs(float(np.linalg.norm(ax)) - 1.0) > AXIS_TOL:
            raise ValueError("axis must be unit-norm within 1e-9")
        ax.setflags(write=False)
        object.__setattr__(self, "axis", ax)
        lo, hi = float(self.limits[0]), float(self.limits[1])
        if not lo < hi:
            raise ValueError(f"joint limits must satisfy min < max, got [{lo}, {hi}]")
        object.__setattr__(self, "limits", (lo, hi))


@dataclass(frozen=True)
class SerialArm:
    joints: tuple
    base_frame: Transform
    flange_to_effector: Transform
    joint_velocity_limit: float
    name: str = "arm"

    def __post_init__(self):
        if len(self.joints) != 7:
            raise ValueError(f"arm must have exactly 7 joints, got {len(self.joints)}")
        object.__setattr__(self, "joints", tuple(self.joints))
        if self.joint_velocity_limit <= 0:
            raise ValueError("joint_velocity_limit must be positive")
        # packed kernel arrays; the base frame is folded into the first joint's
        # fixed transform so the chain is base . prod(fixed_i . Rot_i) . flange
        pre_r = np.empty((7, 3, 3))
        pre_p = np.empty((7, 3))
        axes = np.empty((7, 3))
        first = se3.compose(self.base_frame, self.joints[0].fixed_transform)
        pre_r[0] = first.rotation
        pre_p[0] = first.translation
        for i in range(1, 7):
            pre_r[i] = self.joints[i].fixed_transform.rotation
            pre_p[i] = self.joints[i].fixed_transform.translation
        for i in range(7):
            axes[i] = self.joints[i].axis
        for a in (pre_r, pre_p, axes):
            a.setflags(write=False)
        qmin = np.array([j.limits[0] for j in self.joints])
        qmax = np.array([j.limits[1] for j in self.joints])
        qmin.setflags(write=False)
        qmax.setflags(write=False)
        object.__setattr__(self, "_pre_r", pre_r)
        object.__setattr__(self, "_pre_p", pre_p)
        object.__setattr__(self, "_axes", axes)
        object.__setattr__(self, "_qmin", qmin)
        object.__setattr__(self, "_qmax", qmax)

    @property
    def joint_limits_min(self) -> np.ndarray:
        return self._qmin

    @property
    def joint_limits_max(self) -> np.ndarray:
        return self._qmax

    def kernel_args(self) -> tuple:
        return (
            self._pre_r,
            self._pre_p,
            self._axes,
            self.flange_to_effector.rotation,
            self.flange_to_effector.translation,
        )


@dataclass(frozen=True)
class JointState:
    angles: np.ndarray
    timestamp: float = 0.0

    def __post_init__(self):
        a = np.array(self.angles, dtype=float)
        if a.shape != (7,):
            raise ValueError("expected 7 joint angles")
        a.setflags(write=False)
        object.__setattr__(self, "angles", a)


@dataclass(frozen=True)
class ServoConfig:
    gain_k: float = 0.5  # 1/s task-space proportional gain
    damping_lambda: float = 1e-3
    dt: float = 0.01
    workspace_min: np.ndarray = field(default_factory=lambda: np.array([-2.0, -2.0, -2.0]))
    workspace_max: np.ndarray = field(default_factory=lambda: np.array([2.0, 2.0, 2.0]))

    def __post_init__(self):
        if self.gain_k <= 0 or self.dt <= 0:
            raise ValueError("gain_k and dt must be positive")
        if self.dt * self.gain_k >= 0.5:
            raise ValueError("dt * gain_k must stay below 0.5 for discrete stability")
        lo = np.array(self.workspace_min, dtype=float)
        hi = np.array(self.workspace_max, dtype=float)
        if lo.shape != (3,) or hi.shape != (3,) or not np.all(lo < hi):
            raise ValueError("workspace box must have min < max per axis")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "workspace_min", lo)
        object.__setattr__(self, "workspace_max", hi)


def _angles(q) -> np.ndarray:
    if isinstance(q, JointState):
        return q.angles
    return np.asarray(q, dtype=float)


def forward_kinematics(arm: SerialArm, q) -> Transform:
    r, p = kernels.fk_pose(*arm.kernel_args(), _angles(q))
    return Transform(r, p)


def joint_frames(arm: SerialArm, q) -> tuple:
    """(joint origins (7,3), joint axes in world (7,3), effector Transform)."""
    origins, zaxes, r, p = kernels.fk_frames(*arm.kernel_args(), _angles(q))
    return origins, zaxes, Transform(r, p)


def geometric_jacobian(arm: SerialArm, q) -> np.ndarray:
    """6x7 Jacobian, rows: 3 linear (m/rad) then 3 angular (rad/rad)."""
    origins, zaxes, _, p = kernels.fk_frames(*arm.kernel_args(), _angles(q))
    return kernels.jacobian(origins, zaxes, p)


def pose_error(current: Transform, desired: Transform) -> np.ndarray:
    """6-vector (translation difference; rotation vector of desired . current^T)."""
    lin = desired.translation - current.translation
    ang = kernels.rotation_error(desired.rotation, current.rotation)
    return np.concatenate([lin, ang])


def servo_tick(arm: SerialArm, angles: np.ndarray, desired: Transform, cfg: ServoConfig) -> tuple:
    """One resolved-rate step.

    Returns (next angles, effector Transform at the input angles, 6-vector
    error against the workspace-clamped desired pose, flag bits).
    """
    q_next, eff_r, eff_p, err, flags = kernels.servo_step(
        *arm.kernel_args(),
        arm.joint_limits_min,
        arm.joint_limits_max,
        arm.joint_velocity_limit,
        np.asarray(angles, dtype=float),
        desired.rotation,
        desired.translation,
        cfg.gain_k,
        cfg.damping_lambda,
        cfg.dt,
        cfg.workspace_min,
        cfg.workspace_max,
    )
    return q_next, Transform(eff_r, eff_p), err, flags


def resolved_rate_step(arm: SerialArm, q: JointState, desired: Transform, cfg: ServoConfig) -> JointState:
    q_next, _, _, _ = servo_tick(arm, q.angles, desired, cfg)
    return JointState(q_next, q.timestamp + cfg.dt)


def servo_rollout(arm: SerialArm, angles, desired: Transform, cfg: ServoConfig, n_steps: int) -> tuple:
    """n_steps toward a fixed desired pose; returns (final angles,
    translational error norms per step (n+1,), accumulated flag bits)."""
    return kernels.servo_rollout(
        *arm.kernel_args(),
        arm.joint_limits_min,
        arm.joint_limits_max,
        arm.joint_velocity_limit,
        np.asarray(angles, dtype=float),
        desired.rotation,
        desired.translation,
        cfg.gain_k,
        cfg.damping_lambda,
        cfg.dt,
        cfg.workspace_min,
        cfg.workspace_max,
        int(n_steps),
    )


def clamp_to_workspace(cfg: ServoConfig, position) -> np.ndarray:
    return np.clip(np.asarray(position, dtype=float), cfg.workspace_min, cfg.workspace_max)


def arm_from_json(doc: dict) -> SerialArm:
    joints = tuple(
        JointDescriptor(
            fixed_transform=se3.transform_from_json(j["transform"]),
            axis=np.asarray(j["axis"], dtype=float),
            limits=(float(j["limits"][0]), float(j["limits"][1])),
        )
        for j in doc["joints"]
    )
    return SerialArm(
        joints=joints,
        base_frame=se3.transform_from_json(doc["base_frame"]),
        flange_to_effector=se3.transform_from_json(doc["flange_to_effector"]),
        joint_velocity_limit=float(doc["joint_velocity_limit"]),
        name=str(doc.get("name", "arm")),
    )


def arm_to_json(arm: SerialArm) -> dict:
    return {
        "name": arm.name,
        "joints": [
            {
                "transform": se3.transform_to_json(j.fixed_transform),
                "axis": [float(v) for v in j.axis],
                "limits": [j.limits[0], j.limits[1]],
            }
            for j in arm.joints
        ],
        "base_frame": se3.transform_to_json(arm.base_frame),
        "flange_to_effector": se3.transform_to_json(arm.flange_to_effector),
        "joint_velocity_limit": arm.joint_velocity_limit,
    }


def load_arm(path) -> tuple:
    """Load an arm description file; returns (arm, full document)."""
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    return arm_from_json(doc), doc
