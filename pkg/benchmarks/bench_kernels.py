"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeats N]

Times the hot kernels on realistic workloads (the same shapes the session loop
and the acceptance suite produce) and, if both backends are importable, prints
the speedup. An end-to-end scripted trial is also timed per backend via
subprocesses so the import-time selection is exercised for real.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from bodylink import _pykernels as pure

try:
    from bodylink import _ckernels as compiled
except ImportError:
    compiled = None


def make_workload(seed: int = 3):
    rng = np.random.default_rng(seed)
    pre_r = np.stack([pure.rotvec_to_matrix(rng.normal(size=3) * 0.4) for _ in range(7)])
    pre_p = rng.normal(size=(7, 3)) * 0.2
    axes = rng.normal(size=(7, 3))
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    fl_r = np.eye(3)
    fl_p = np.array([0.0, 0.0, 0.12])
    q = rng.normal(size=7) * 0.6
    qlim = 3.0 * np.ones(7)
    eff_r, eff_p = pure.fk_pose(pre_r, pre_p, axes, fl_r, fl_p, q)
    des_p = eff_p + np.array([0.2, -0.1, 0.15])
    box = (np.full(3, -5.0), np.full(3, 5.0))
    servo_args = (pre_r, pre_p, axes, fl_r, fl_p, -qlim, qlim, 1.5, q, eff_r, des_p, 0.5, 1e-3, 0.001, *box)

    n = 6000  # one 60 s mode-law rollout at 100 Hz
    body_r = np.stack([pure.rotvec_to_matrix(rng.normal(size=3) * 0.5) for _ in range(n)])
    body_p = rng.normal(size=(n, 3))
    vel = rng.normal(size=(n, 3)) * 0.2
    link0 = rng.normal(size=3)

    return {
        "rotvec_to_matrix (x1000)": lambda impl: [impl.rotvec_to_matrix(v) for v in rng.normal(size=(1000, 3))],
        "fk_frames (x1000)": lambda impl: [impl.fk_frames(pre_r, pre_p, axes, fl_r, fl_p, q) for _ in range(1000)],
        "servo_step (x1000)": lambda impl: [impl.servo_step(*servo_args) for _ in range(1000)],
        "servo_rollout 4000 steps": lambda impl: impl.servo_rollout(*servo_args, 4000),
        "dual_rollout 6000 ticks": lambda impl: impl.dual_rollout(body_r, body_p, link0, vel, 0.01),
        "joystick_rollout 6000 ticks": lambda impl: impl.joystick_rollout(link0, vel, 0.01),
    }


def best_of(fn, impl, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(impl)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_trial(backend: str) -> float:
    """End-to-end scripted trial wall time with the given backend selected."""
    env = dict(os.environ, BODYLINK_KERNELS=backend)
    code = (
        "import time,numpy as np\n"
        "from bodylink.config import load_session_config, default_config_path\n"
        "from bodylink.operators import PolicyKind, run_trial\n"
        "from bodylink.control import Mode, ModeConfig\n"
        "from bodylink.trial import TrialSpec\n"
        "cfg = load_session_config(default_config_path())\n"
        "spec = TrialSpec(center=cfg.trial.center, n_pairs=5)\n"
        "mc = ModeConfig(mode=Mode.DUAL, joystick_gain=0.25, joystick_max_speed=0.25)\n"
        "t0 = time.perf_counter()\n"
        "run_trial(cfg.policy(PolicyKind.SEQUENTIAL_DUAL, seed=1), spec, cfg.arm, cfg.servo, mc,\n"
        "          home_angles=cfg.home_angles, body_start=cfg.body_start)\n"
        "print(time.perf_counter() - t0)\n"
    )
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip().splitlines()[-1])


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--skip-trial", action="store_true", help="kernel table only")
    args = parser.parse_args()

    workload = make_workload()
    width = max(len(k) for k in workload)
    if compiled is None:
        print("compiled kernels not built; timing the pure backend only")
    header = f"{'kernel':<{width}}  {'pure':>10}  {'compiled':>10}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, fn in workload.items():
        t_pure = best_of(fn, pure, args.repeats)
        if compiled is not None:
            t_comp = best_of(fn, compiled, args.repeats)
            print(f"{name:<{width}}  {t_pure * 1e3:>8.2f}ms  {t_comp * 1e3:>8.2f}ms  {t_pure / t_comp:>7.1f}x")
        else:
            print(f"{name:<{width}}  {t_pure * 1e3:>8.2f}ms  {'-':>10}  {'-':>8}")

    if not args.skip_trial:
        print()
        t_pure = bench_trial("pure")
        line = f"5-pair scripted dual trial: pure {t_pure:.2f}s"
        if compiled is not None:
            t_comp = bench_trial("compiled")
            line += f", compiled {t_comp:.2f}s ({t_pure / t_comp:.1f}x)"
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
