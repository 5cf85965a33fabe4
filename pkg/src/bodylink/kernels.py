"""Numerical backend selection.

Imports the compiled extension if it was built, otherwise falls back to the
pure-Python kernels. ``BODYLINK_KERNELS=pure|compiled|auto`` overrides the
choice (``compiled`` raises if the extension is unavailable). Both backends
implement the same functions with bit-identical arithmetic; see
``benchmarks/bench_kernels.py`` for the speed comparison.
"""

from __future__ import annotations

import os

from . import _pykernels

_choice = os.environ.get("BODYLINK_KERNELS", "auto")
if _choice not in ("auto", "compiled", "pure"):
    raise RuntimeError(f"BODYLINK_KERNELS must be auto, compiled or pure (got {_choice!r})")

_impl = None
if _choice in ("auto", "compiled"):
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _choice == "compiled":
            raise
        _impl = None
if _impl is None:
    _impl = _pykernels

BACKEND: str = _impl.BACKEND

FLAG_VEL_SATURATED = _pykernels.FLAG_VEL_SATURATED
FLAG_JOINT_CLAMPED = _pykernels.FLAG_JOINT_CLAMPED
FLAG_BOX_CLAMPED = _pykernels.FLAG_BOX_CLAMPED

rotvec_to_matrix = _impl.rotvec_to_matrix
matrix_to_rotvec = _impl.matrix_to_rotvec
rotation_error = _impl.rotation_error
fk_pose = _impl.fk_pose
fk_frames = _impl.fk_frames
jacobian = _impl.jacobian
servo_step = _impl.servo_step
servo_rollout = _impl.servo_rollout
dual_step = _impl.dual_step
dual_rollout = _impl.dual_rollout
joystick_rollout = _impl.joystick_rollout
body_rollout = _impl.body_rollout
