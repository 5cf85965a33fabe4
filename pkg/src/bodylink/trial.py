"""Reach-trial protocol: target generation, dwell validation, event log.

A trial alternates between points on a sphere (near-uniform Fibonacci lattice)
and the sphere center, starting with a surface point. A target validates once
the real effector has stayed continuously inside the closed tolerance ball for
the dwell time; leaving the ball resets the timer. The engine is a pure state
machine: replaying a recorded effector trajectory reproduces the identical
event sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

EVENT_TARGET_SHOWN = "TargetShown"
EVENT_TOLERANCE_ENTERED = "ToleranceEntered"
EVENT_TOLERANCE_EXITED = "ToleranceExited"
EVENT_TARGET_VALIDATED = "TargetValidated"
EVENT_TRIAL_COMPLETED = "TrialCompleted"
EVENT_TRIAL_ABORTED = "TrialAborted"

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


class TrialSequenceError(ValueError):
    """Raised when update is called with a non-increasing timestamp."""


@dataclass(frozen=True)
class TrialSpec:
    center: np.ndarray
    sphere_radius: float = 0.15
    n_pairs: int = 15
    tolerance_radius: float = 0.02
    dwell_time: float = 1.0
    seed: int = 0

    def __post_init__(self):
        c = np.array(self.center, dtype=float)
        if c.shape != (3,):
            raise ValueError("center must be a 3-vector")
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        if self.n_pairs < 1:
            raise ValueError("n_pairs must be >= 1")
        if self.dwell_time <= 0:
            raise ValueError("dwell_time must be positive")
        if not 0 < self.tolerance_radius < self.sphere_radius:
            raise ValueError("tolerance_radius must be positive and below sphere_radius")

    def to_json(self) -> dict:
        return {
            "center": [float(v) for v in self.center],
            "sphere_radius": self.sphere_radius,
            "n_pairs": self.n_pairs,
            "tolerance_radius": self.tolerance_radius,
            "dwell_time": self.dwell_time,
            "seed": self.seed,
        }

    @staticmethod
    def from_json(doc: dict) -> "TrialSpec":
        return TrialSpec(
            center=np.asarray(doc["center"], dtype=float),
            sphere_radius=float(doc["sphere_radius"]),
            n_pairs=int(doc["n_pairs"]),
            tolerance_radius=float(doc["tolerance_radius"]),
            dwell_time=float(doc["dwell_time"]),
            seed=int(doc.get("seed", 0)),
        )


def fibonacci_sphere(n: int, radius: float, center) -> np.ndarray:
    """Offset Fibonacci lattice: z_i = 1 - 2(i+0.5)/n, azimuth i * golden angle."""
    if n < 1:
        raise ValueError("n must be >= 1")
    c = np.asarray(center, dtype=float)
    pts = np.empty((n, 3))
    for i in range(n):
        z = 1.0 - 2.0 * (i + 0.5) / n
        phi = i * GOLDEN_ANGLE
        rho = math.sqrt(max(0.0, 1.0 - z * z))
        pts[i] = c + radius * np.array([rho * math.cos(phi), rho * math.sin(phi), z])
    return pts


@dataclass(frozen=True)
class TargetSequence:
    """2*n_pairs targets: surface_0, center, surface_1, center, ..."""

    positions: np.ndarray  # (2*n_pairs, 3)
    kinds: tuple  # "surface" | "center" per entry

    def __len__(self) -> int:
        return self.positions.shape[0]


def build_sequence(spec: TrialSpec) -> TargetSequence:
    surface = fibonacci_sphere(spec.n_pairs, spec.sphere_radius, spec.center)
    positions = np.empty((2 * spec.n_pairs, 3))
    kinds = []
    for i in range(spec.n_pairs):
        positions[2 * i] = surface[i]
        kinds.append("surface")
        positions[2 * i + 1] = spec.center
        kinds.append("center")
    positions.setflags(write=False)
    return TargetSequence(positions=positions, kinds=tuple(kinds))


@dataclass(frozen=True)
class TrialEvent:
    timestamp: float
    kind: str
    target_index: int
    effector_position: np.ndarray

    def to_row(self) -> dict:
        return {
            "t": float(self.timestamp),
            "kind": self.kind,
            "target_index": int(self.target_index),
            "effector": [float(v) for v in self.effector_position],
        }


@dataclass
class TrialState:
    """Dwell-validation state machine over a target sequence."""

    spec: TrialSpec
    sequence: TargetSequence = None
    current_target_index: int = 0
    dwell_entered_at: float = None
    completed: list = field(default_factory=list)  # (index, t_appear, t_validated)
    started: bool = False
    finished: bool = False
    _shown_at: float = None
    _last_t: float = None

    def __post_init__(self):
        if self.sequence is None:
            self.sequence = build_sequence(self.spec)

    def current_target(self) -> np.ndarray:
        return self.sequence.positions[self.current_target_index]

    def dwell_progress(self, t: float) -> float:
        if self.finished or self.dwell_entered_at is None:
            return 0.0
        return min(1.0, (t - self.dwell_entered_at) / self.spec.dwell_time)

    def update(self, effector_pos, t: float) -> list:
        """Advance the state machine one sample; returns emitted events."""
        if self._last_t is not None and t <= self._last_t:
            raise TrialSequenceError(f"non-increasing timestamp {t} after {self._last_t}")
        self._last_t = t
        if self.finished:
            return []
        pos = np.asarray(effector_pos, dtype=float)
        events = []
        if not self.started:
            self.started = True
            self._shown_at = t
            events.append(TrialEvent(t, EVENT_TARGET_SHOWN, 0, pos))
            # tolerance evaluation for a freshly shown target starts next call
            return events
        target = self.current_target()
        d = pos - target
        inside = float(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) <= self.spec.tolerance_radius**2
        if inside:
            if self.dwell_entered_at is None:
                self.dwell_entered_at = t
                events.append(TrialEvent(t, EVENT_TOLERANCE_ENTERED, self.current_target_index, pos))
            if t - self.dwell_entered_at >= self.spec.dwell_time:
                idx = self.current_target_index
                self.completed.append((idx, self._shown_at, t))
                events.append(TrialEvent(t, EVENT_TARGET_VALIDATED, idx, pos))
                self.dwell_entered_at = None
                if idx + 1 < len(self.sequence):
                    self.current_target_index = idx + 1
                    self._shown_at = t
                    events.append(TrialEvent(t, EVENT_TARGET_SHOWN, idx + 1, pos))
                else:
                    self.finished = True
                    events.append(TrialEvent(t, EVENT_TRIAL_COMPLETED, idx, pos))
        else:
            if self.dwell_entered_at is not None:
                self.dwell_entered_at = None
                events.append(TrialEvent(t, EVENT_TOLERANCE_EXITED, self.current_target_index, pos))
        return events


def update(state: TrialState, spec: TrialSpec, effector_pos, t: float) -> tuple:
    """Functional wrapper over TrialState.update (spec is carried by the state)."""
    if spec is not state.spec:
        raise ValueError("state was built for a different spec")
    return state, state.update(effector_pos, t)
