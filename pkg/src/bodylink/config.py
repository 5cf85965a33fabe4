"""Session configuration: one JSON document wiring frames, arm, servo, mode,
trial protocol, tick rates and operator defaults together.

The config hash is the SHA-256 of the canonicalized document (sorted keys,
compact separators); logs carry it so analysis can refuse mixed inputs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import se3
from .arm import SerialArm, ServoConfig, arm_from_json
from .control import Mode, ModeConfig
from .operators import OperatorPolicy, PolicyKind
from .se3 import FrameRegistry, Transform
from .trial import TrialSpec


def canonical_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def config_hash(doc: dict) -> str:
    return hashlib.sha256(canonical_json(doc).encode("utf-8")).hexdigest()[:16]


def builtin_path(name: str) -> Path:
    return Path(resources.files("bodylink").joinpath("data", name))


@dataclass(frozen=True)
class SessionConfig:
    raw: dict
    digest: str
    registry: FrameRegistry
    arm: SerialArm
    arm_doc: dict
    servo: ServoConfig
    mode: ModeConfig
    trial: TrialSpec
    home_angles: np.ndarray
    body_start: Transform
    tick_rate_control: float
    tick_rate_telemetry: float
    operator_defaults: dict

    def policy(self, kind: PolicyKind, seed: int = 0) -> OperatorPolicy:
        d = self.operator_defaults
        return OperatorPolicy(
            kind=kind,
            body_rot_speed_max=float(d.get("body_rot_speed_max", 0.8)),
            body_trans_speed_max=float(d.get("body_trans_speed_max", 0.15)),
            joystick_speed_max=float(d.get("joystick_speed_max", 0.2)),
            handoff_fraction=float(d.get("handoff_fraction", 0.2)),
            gain=float(d.get("gain", 2.0)),
            noise_seed=seed,
            tremor_amplitude=float(d.get("tremor_amplitude", 0.0)),
        )


def _resolve_arm(ref: str, base_dir: Path) -> Path:
    if ref.startswith("builtin:"):
        return builtin_path(ref.split(":", 1)[1] + ".json")
    p = Path(ref)
    return p if p.is_absolute() else base_dir / p


def session_config_from_doc(doc: dict, base_dir: Path = None) -> SessionConfig:
    base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
    arm_path = _resolve_arm(doc["arm"], base_dir)
    if not arm_path.exists():
        raise FileNotFoundError(f"arm description not found: {arm_path}")
    with open(arm_path, "r", encoding="utf-8") as f:
        arm_doc = json.load(f)
    arm = arm_from_json(arm_doc)

    servo_doc = doc["servo"]
    servo = ServoConfig(
        gain_k=float(servo_doc["gain_k"]),
        damping_lambda=float(servo_doc["damping_lambda"]),
        dt=float(servo_doc["dt"]),
        workspace_min=np.asarray(servo_doc["workspace_box"]["min"], dtype=float),
        workspace_max=np.asarray(servo_doc["workspace_box"]["max"], dtype=float),
    )
    mode_doc = doc["mode"]
    mode = ModeConfig(
        mode=Mode(mode_doc["mode"]),
        joystick_gain=float(mode_doc["joystick_gain"]),
        joystick_max_speed=float(mode_doc["joystick_max_speed"]),
        dead_zone=float(mode_doc.get("dead_zone", 0.02)),
    )
    trial = TrialSpec.from_json(doc["trial"])
    tick_control = float(doc.get("tick_rate_control", 100.0))
    tick_telemetry = float(doc.get("tick_rate_telemetry", 30.0))
    if tick_control < tick_telemetry:
        raise ValueError("tick_rate_control must be >= tick_rate_telemetry")
    if abs(servo.dt * tick_control - 1.0) > 1e-9:
        raise ValueError("servo dt must equal 1 / tick_rate_control")
    home = np.asarray(doc["home_joint_angles"], dtype=float)
    return SessionConfig(
        raw=doc,
        digest=config_hash(doc),
        registry=se3.registry_from_json(doc["frames"]),
        arm=arm,
        arm_doc=arm_doc,
        servo=servo,
        mode=mode,
        trial=trial,
        home_angles=home,
        body_start=se3.transform_from_json(doc["body_start"]),
        tick_rate_control=tick_control,
        tick_rate_telemetry=tick_telemetry,
        operator_defaults=doc.get("operator", {}),
    )


def load_session_config(path) -> SessionConfig:
    p = Path(path)
    with open(p, "r", encoding="utf-8") as f:
        doc = json.load(f)
    return session_config_from_doc(doc, base_dir=p.parent)


def default_config_path() -> Path:
    return builtin_path("session_default.json")
