"""Control modes mapping body pose and joystick input to the desired effector pose.

Three laws produce the virtual effector target:

* joystick: the initial effector position plus the integrated world-frame
  joystick velocity,
* body: a rigid link attached to the body frame, captured at trial start,
* dual: the same link, but reshaped on-line by the joystick velocity rotated
  into the body frame, so body motion carries it while the joystick edits it.

With the body frozen the dual law reduces to the joystick law; with the
joystick silent it reduces to the body law. The effector orientation is frozen
at its trial-start value in all three modes.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .se3 import Transform


class Mode(Enum):
    JOYSTICK = "joystick"
    BODY = "body"
    DUAL = "dual"


@dataclass(frozen=True)
class ModeConfig:
    mode: Mode
    joystick_gain: float = 0.25  # m/s per unit deflection
    joystick_max_speed: float = 0.25  # m/s
    dead_zone: float = 0.02  # deflection fraction mapped to zero, per axis

    def __post_init__(self):
        if self.joystick_gain <= 0 or self.joystick_max_speed <= 0:
            raise ValueError("joystick gain and max speed must be positive")
        if not 0.0 <= self.dead_zone < 1.0:
            raise ValueError("dead_zone must be in [0, 1)")


@dataclass(frozen=True)
class BodyState:
    pose: Transform  # world_from_body
    timestamp: float


@dataclass(frozen=True)
class JoystickSample:
    velocity_world: np.ndarray  # m/s, already mapped into the world frame
    timestamp: float

    def __post_init__(self):
        v = np.array(self.velocity_world, dtype=float)
        if v.shape != (3,):
            raise ValueError("velocity must be a 3-vector")
        v.setflags(write=False)
        object.__setattr__(self, "velocity_world", v)


class VirtualLink:
    """Body-frame pointer vector plus the frozen effector orientation.

    ``link_body`` is constant in joystick and body modes and is mutated by
    each dual-mode tick; the remaining fields are the trial-start capture.
    """

    __slots__ = ("link_body", "frozen_rotation", "t0_body", "t0_effector_position")

    def __init__(self, link_body, frozen_rotation, t0_body: Transform, t0_effector_position):
        self.link_body = np.array(link_body, dtype=float)
        rot = np.array(frozen_rotation, dtype=float)
        rot.setflags(write=False)
        self.frozen_rotation = rot
        self.t0_body = t0_body
        pos = np.array(t0_effector_position, dtype=float)
        pos.setflags(write=False)
        self.t0_effector_position = pos

    def link_length(self) -> float:
        return float(np.linalg.norm(self.link_body))


def init_link(body0: BodyState, effector0: Transform) -> VirtualLink:
    """Capture the link at trial start: the effector position expressed in the
    body frame, plus the frozen effector orientation."""
    rel = body0.pose.rotation.T @ (effector0.translation - body0.pose.translation)
    return VirtualLink(
        link_body=rel,
        frozen_rotation=effector0.rotation,
        t0_body=body0.pose,
        t0_effector_position=effector0.translation,
    )


def desired_pose(position, frozen_rotation) -> Transform:
    return Transform(frozen_rotation, np.asarray(position, dtype=float))


def joystick_target(link: VirtualLink, accumulated, sample: JoystickSample, dt: float) -> tuple:
    """Integrate the world-frame joystick velocity from the initial effector
    position. Returns (new accumulated displacement, desired pose)."""
    acc = np.asarray(accumulated, dtype=float) + dt * sample.velocity_world
    return acc, desired_pose(link.t0_effector_position + acc, link.frozen_rotation)


def body_target(link: VirtualLink, body: BodyState) -> Transform:
    # dual_step with zero velocity leaves the link bit-identical and shares the
    # rollout kernels' arithmetic for the placement itself
    _, pos = kernels.dual_step(body.pose.rotation, body.pose.translation, link.link_body, np.zeros(3), 0.0)
    return desired_pose(pos, link.frozen_rotation)


def dual_target(link: VirtualLink, body: BodyState, sample: JoystickSample, dt: float) -> Transform:
    """Reshape the link by the joystick velocity rotated into the body frame,
    then place the target through the body pose. Mutates ``link.link_body``."""
    link_next, pos = kernels.dual_step(
        body.pose.rotation, body.pose.translation, link.link_body, sample.velocity_world, dt
    )
    link.link_body = link_next
    return desired_pose(pos, link.frozen_rotation)


def velocity_from_deflection(cfg: ModeConfig, deflection) -> np.ndarray:
    """Map a raw [-1, 1]^3 deflection to a world velocity: per-axis dead zone,
    gain, then a norm clamp at the configured max speed."""
    d = np.clip(np.asarray(deflection, dtype=float), -1.0, 1.0)
    d = np.where(np.abs(d) < cfg.dead_zone, 0.0, d)
    v = cfg.joystick_gain * d
    speed = float(np.linalg.norm(v))
    if speed > cfg.joystick_max_speed:
        v = v * (cfg.joystick_max_speed / speed)
    return v
