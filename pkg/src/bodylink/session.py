"""Session orchestration: the fixed-tick engine shared by scripted simulations
and live networked sessions.

One SessionCore owns all mutable control state (joint angles, virtual link,
joystick integrator, trial state machine); everything else interacts through
its tick inputs and the rows/snapshots it emits. Integration always uses the
tick schedule's dt, never measured wall time.
"""

from __future__ import annotations

import numpy as np

from . import arm as arm_mod
from . import se3, trial as trial_mod
from .arm import SerialArm, ServoConfig, servo_tick
from .control import BodyState, Mode, ModeConfig, VirtualLink, body_target, dual_target, init_link, joystick_target
from .se3 import Transform

WARN_BODY_STALE = "body_stale"
BODY_STALE_AFTER = 0.2  # s without a body pose before holding the last target


class SessionCore:
    """Single-writer control loop state; advance with tick()."""

    def __init__(self, arm: SerialArm, servo_cfg: ServoConfig, mode_cfg: ModeConfig,
                 trial_spec, home_angles, session_id: str = "session", config_digest: str = ""):
        self.arm = arm
        self.servo_cfg = servo_cfg
        self.mode_cfg = mode_cfg
        self.trial_spec = trial_spec
        self.session_id = session_id
        self.config_digest = config_digest
        self.angles = np.asarray(home_angles, dtype=float).copy()
        self.home_pose = arm_mod.forward_kinematics(arm, self.angles)
        self.desired = self.home_pose
        self.link: VirtualLink = None
        self.acc = np.zeros(3)
        self.trial: trial_mod.TrialState = None
        self.phase = "idle"  # idle | running | done | aborted
        self.effector = self.home_pose
        self.last_body: BodyState = None
        self.last_flags = 0
        self.warnings: list = []
        self._seq = 0

    # --- state queries -------------------------------------------------

    def virtual_position(self) -> np.ndarray:
        return self.desired.translation

    def effector_position(self) -> np.ndarray:
        return self.effector.translation

    def set_mode(self, mode: Mode) -> bool:
        """Mode changes are allowed only outside a running trial."""
        if self.phase == "running":
            return False
        self.mode_cfg = ModeConfig(
            mode=mode,
            joystick_gain=self.mode_cfg.joystick_gain,
            joystick_max_speed=self.mode_cfg.joystick_max_speed,
            dead_zone=self.mode_cfg.dead_zone,
        )
        return True

    def start_trial(self, t: float, body: BodyState) -> None:
        """Capture the link from the current body pose and effector pose."""
        effector0 = arm_mod.forward_kinematics(self.arm, self.angles)
        self.link = init_link(body, effector0)
        self.acc = np.zeros(3)
        self.desired = effector0
        self.trial = trial_mod.TrialState(self.trial_spec)
        self.phase = "running"

    def abort(self, t: float, reason: str) -> dict:
        self.phase = "aborted"
        return self._event_row(
            trial_mod.TrialEvent(t, trial_mod.EVENT_TRIAL_ABORTED,
                                 self.trial.current_target_index if self.trial else -1,
                                 self.effector_position()),
            note=reason,
        )

    # --- tick ----------------------------------------------------------

    def tick(self, t: float, body: BodyState, joystick_velocity, body_stale: bool = False) -> tuple:
        """Advance one control tick; returns (event rows, telemetry row)."""
        warnings = []
        if self.phase == "running":
            if body_stale or body is None:
                warnings.append(WARN_BODY_STALE)  # hold the last desired pose
            else:
                mode = self.mode_cfg.mode
                from .control import JoystickSample

                sample = JoystickSample(np.asarray(joystick_velocity, dtype=float), t)
                if mode is Mode.JOYSTICK:
                    self.acc, self.desired = joystick_target(self.link, self.acc, sample, self.servo_cfg.dt)
                elif mode is Mode.BODY:
                    self.desired = body_target(self.link, body)
                else:
                    self.desired = dual_target(self.link, body, sample, self.servo_cfg.dt)

        q_next, eff, err, flags = servo_tick(self.arm, self.angles, self.desired, self.servo_cfg)
        self.effector = eff

        if flags & arm_mod.FLAG_BOX_CLAMPED and self.phase == "running" and body is not None:
            # anti-windup: the integrators follow the workspace-clamped target
            clamped = arm_mod.clamp_to_workspace(self.servo_cfg, self.desired.translation)
            if self.mode_cfg.mode is Mode.JOYSTICK:
                self.acc = clamped - self.link.t0_effector_position
            elif self.mode_cfg.mode is Mode.DUAL:
                self.link.link_body = body.pose.rotation.T @ (clamped - body.pose.translation)
            self.desired = Transform(self.desired.rotation, clamped)

        event_rows = []
        if self.phase == "running":
            for ev in self.trial.update(self.effector_position(), t):
                event_rows.append(self._event_row(ev))
            if self.trial.finished:
                self.phase = "done"

        self.last_flags = flags
        self.last_body = body
        self.warnings = warnings
        row = self._telemetry_row(t, body, flags, warnings)
        self.angles = q_next
        return event_rows, row

    # --- row builders ----------------------------------------------------

    def _event_row(self, ev: trial_mod.TrialEvent, note: str = None) -> dict:
        row = ev.to_row()
        if note is not None:
            row["note"] = note
        row["session"] = self.session_id
        row["config_hash"] = self.config_digest
        return row

    def _telemetry_row(self, t: float, body: BodyState, flags: int, warnings: list) -> dict:
        return {
            "t": float(t),
            "q": [float(v) for v in self.angles],
            "effector": se3.transform_to_json(self.effector),
            "virtual": se3.transform_to_json(self.desired),
            "body": se3.transform_to_json(body.pose) if body is not None else None,
            "link_body": [float(v) for v in self.link.link_body] if self.link is not None else None,
            "target_index": int(self.trial.current_target_index) if self.trial is not None else None,
            "flags": int(flags),
            "warnings": warnings,
            "session": self.session_id,
            "config_hash": self.config_digest,
        }

    def snapshot(self, t: float) -> dict:
        """Wire snapshot: everything a console needs to render one frame."""
        origins, _, eff = arm_mod.joint_frames(self.arm, self.angles)
        points = [[float(v) for v in self.arm.base_frame.translation]]
        points += [[float(v) for v in p] for p in origins]
        points.append([float(v) for v in eff.translation])
        target = None
        if self.trial is not None and not self.trial.finished:
            target = {
                "index": int(self.trial.current_target_index),
                "position": [float(v) for v in self.trial.current_target()],
                "tolerance": self.trial_spec.tolerance_radius,
                "dwell_progress": float(self.trial.dwell_progress(t)),
            }
        self._seq += 1
        return {
            "type": "snapshot",
            "seq": self._seq,
            "t": float(t),
            "mode": self.mode_cfg.mode.value,
            "q": [float(v) for v in self.angles],
            "effector": se3.transform_to_json(self.effector),
            "virtual": se3.transform_to_json(self.desired),
            "body": se3.transform_to_json(self.last_body.pose) if self.last_body is not None else None,
            "link_body": [float(v) for v in self.link.link_body] if self.link is not None else None,
            "joint_points": points,
            "target": target,
            "trial": {
                "phase": self.phase,
                "validated": len(self.trial.completed) if self.trial else 0,
                "total": 2 * self.trial_spec.n_pairs,
            },
            "sphere": {
                "center": [float(v) for v in self.trial_spec.center],
                "radius": self.trial_spec.sphere_radius,
            },
            "flags": int(self.last_flags),
            "warnings": list(self.warnings),
            "session": self.session_id,
            "config_hash": self.config_digest,
        }
