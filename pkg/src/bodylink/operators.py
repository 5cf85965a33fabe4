"""Scripted synthetic operators closing the teleoperation loop.

Minimal proportional policies with saturation: they exist to exercise the
pipeline deterministically, not to imitate human performance. BodyOnly steers
with body rotation for error components perpendicular to the link (the lever
does the work) and body translation along it (depth). JoystickOnly commands a
velocity toward the target. SequentialDual plays the body first and brings the
joystick in once the remaining error drops below a handoff fraction of the
initial error, after which both channels stay active.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import se3
from .control import BodyState, JoystickSample, Mode, ModeConfig, VirtualLink
from .se3 import Transform


class PolicyKind(Enum):
    BODY_ONLY = "body-only"
    JOYSTICK_ONLY = "joystick-only"
    SEQUENTIAL_DUAL = "sequential-dual"


# which control mode each policy drives in the protocol trials
NATURAL_MODE = {
    PolicyKind.BODY_ONLY: Mode.BODY,
    PolicyKind.JOYSTICK_ONLY: Mode.JOYSTICK,
    PolicyKind.SEQUENTIAL_DUAL: Mode.DUAL,
}


@dataclass(frozen=True)
class OperatorPolicy:
    kind: PolicyKind
    body_rot_speed_max: float = 0.8  # rad/s, invented default (configurable)
    body_trans_speed_max: float = 0.15  # m/s, invented default
    joystick_speed_max: float = 0.2  # m/s
    handoff_fraction: float = 0.2
    gain: float = 2.0  # 1/s proportional rate on the observed error
    noise_seed: int = 0
    tremor_amplitude: float = 0.0  # m, bounded body-position noise per tick

    def __post_init__(self):
        if min(self.body_rot_speed_max, self.body_trans_speed_max, self.joystick_speed_max, self.gain) <= 0:
            raise ValueError("speed limits and gain must be positive")
        if not 0.0 < self.handoff_fraction < 1.0:
            raise ValueError("handoff_fraction must be in (0, 1)")


@dataclass(frozen=True)
class OperatorOutput:
    """Per-tick increments: a world-frame rotation (about the body origin) and
    translation of the body, plus the joystick velocity sample."""

    rot_delta: np.ndarray  # rad, axis*angle
    trans_delta: np.ndarray  # m
    joystick: JoystickSample


@dataclass
class ReachState:
    """Per-reach context for the handoff logic."""

    initial_error_norm: float = 0.0
    handed_off: bool = False


def _clip_norm(v: np.ndarray, limit: float) -> np.ndarray:
    n = float(np.linalg.norm(v))
    if n > limit:
        return v * (limit / n)
    return v


def step(
    policy: OperatorPolicy,
    observed_error,
    link: VirtualLink,
    body: BodyState,
    dt: float,
    reach: ReachState = None,
    rng: np.random.Generator = None,
) -> OperatorOutput:
    """One operator decision; ``observed_error`` is target minus the virtual
    effector position, in the world frame."""
    e = np.asarray(observed_error, dtype=float)
    t = body.timestamp + dt
    zero = JoystickSample(np.zeros(3), t)
    rot = np.zeros(3)
    trans = np.zeros(3)
    joy = zero

    use_body = policy.kind in (PolicyKind.BODY_ONLY, PolicyKind.SEQUENTIAL_DUAL)
    use_joystick = policy.kind is PolicyKind.JOYSTICK_ONLY
    if policy.kind is PolicyKind.SEQUENTIAL_DUAL:
        if reach is None:
            raise ValueError("SequentialDual needs a ReachState")
        if not reach.handed_off and float(np.linalg.norm(e)) <= policy.handoff_fraction * reach.initial_error_norm:
            reach.handed_off = True
        use_joystick = reach.handed_off

    if use_body:
        lever = body.pose.rotation @ link.link_body
        lever_norm = float(np.linalg.norm(lever))
        if lever_norm > 1e-6:
            lhat = lever / lever_norm
            e_par = float(np.dot(e, lhat)) * lhat
            e_perp = e - e_par
            v_trans = _clip_norm(policy.gain * e_par, policy.body_trans_speed_max)
            omega = _clip_norm((policy.gain / lever_norm) * np.cross(lhat, e_perp), policy.body_rot_speed_max)
        else:
            v_trans = _clip_norm(policy.gain * e, policy.body_trans_speed_max)
            omega = np.zeros(3)
        trans = dt * v_trans
        rot = dt * omega
        if policy.tremor_amplitude > 0.0 and rng is not None:
            tremor = policy.tremor_amplitude * rng.uniform(-1.0, 1.0, size=3)
            trans = _clip_norm(trans + tremor, policy.body_trans_speed_max * dt)

    if use_joystick:
        joy = JoystickSample(_clip_norm(policy.gain * e, policy.joystick_speed_max), t)

    return OperatorOutput(rot_delta=rot, trans_delta=trans, joystick=joy)


def apply_body_delta(pose: Transform, out: OperatorOutput) -> Transform:
    """World-frame increment: rotate about the body origin, then translate."""
    if not np.any(out.rot_delta) and not np.any(out.trans_delta):
        return pose
    rot = se3.from_angle_axis(out.rot_delta) @ pose.rotation
    return Transform(rot, pose.translation + out.trans_delta)


class Operator:
    """Stateful wrapper: tracks the per-reach context and the tremor stream."""

    def __init__(self, policy: OperatorPolicy):
        self.policy = policy
        self.rng = np.random.default_rng(policy.noise_seed)
        self.reach = ReachState()

    def begin_reach(self, initial_error_norm: float) -> None:
        self.reach = ReachState(initial_error_norm=float(initial_error_norm))

    def step(self, observed_error, link: VirtualLink, body: BodyState, dt: float) -> OperatorOutput:
        return step(self.policy, observed_error, link, body, dt, reach=self.reach, rng=self.rng)


class TrialTimeout(RuntimeError):
    """A scripted trial exceeded the per-target watchdog."""


@dataclass(frozen=True)
class SimResult:
    events: list  # event rows (dicts, JSONL-ready)
    telemetry: list  # telemetry rows
    completed: bool
    duration: float


def check_pairing(policy_kind: PolicyKind, mode: Mode) -> None:
    """Protocol trials pair each policy with its natural mode; degenerate
    policies (body-only, joystick-only) are additionally allowed under DUAL,
    where they exercise the documented mode equivalences."""
    if mode is NATURAL_MODE[policy_kind]:
        return
    if mode is Mode.DUAL and policy_kind in (PolicyKind.BODY_ONLY, PolicyKind.JOYSTICK_ONLY):
        return
    raise ValueError(f"policy {policy_kind.value} cannot drive mode {mode.value}")


def run_trial(
    policy: OperatorPolicy,
    spec,
    arm,
    servo_cfg,
    mode_cfg: ModeConfig,
    *,
    home_angles,
    body_start: Transform,
    tick_rate: float = 100.0,
    timeout: float = 60.0,
    session_id: str = "sim",
    config_digest: str = "",
) -> SimResult:
    """Closed-loop simulation of one full trial at a fixed tick.

    Deterministic in (policy, spec, arm, servo_cfg, mode_cfg, scenario); the
    returned rows use the same schema as live sessions. Raises TrialTimeout if
    any single target is not validated within ``timeout`` simulated seconds.
    """
    from .session import SessionCore  # local import to avoid a cycle

    check_pairing(policy.kind, mode_cfg.mode)
    core = SessionCore(
        arm=arm,
        servo_cfg=servo_cfg,
        mode_cfg=mode_cfg,
        trial_spec=spec,
        home_angles=home_angles,
        session_id=session_id,
        config_digest=config_digest,
    )
    dt = 1.0 / tick_rate
    operator = Operator(policy)
    body_pose = body_start
    core.start_trial(0.0, BodyState(body_pose, 0.0))

    events: list = []
    telemetry: list = []
    last_target_index = -1
    max_ticks = int(timeout * tick_rate) * len(core.trial.sequence) + 1
    t = 0.0
    for i in range(max_ticks):
        t = i * dt
        target = core.trial.current_target()
        if core.trial.current_target_index != last_target_index:
            last_target_index = core.trial.current_target_index
            target_since = t
            operator.begin_reach(float(np.linalg.norm(target - core.virtual_position())))
        if t - target_since > timeout:
            raise TrialTimeout(
                f"target {last_target_index} not validated after {timeout:.0f}s "
                f"(distance {np.linalg.norm(core.effector_position() - target):.3f} m)"
            )
        error = target - core.virtual_position()
        out = operator.step(error, core.link, BodyState(body_pose, t), dt)
        body_pose = apply_body_delta(body_pose, out)
        ev, row = core.tick(t, BodyState(body_pose, t), out.joystick.velocity_world)
        events.extend(ev)
        telemetry.append(row)
        if core.phase == "done":
            break
    else:
        raise TrialTimeout("trial did not complete within the global watchdog")
    return SimResult(events=events, telemetry=telemetry, completed=True, duration=t)
