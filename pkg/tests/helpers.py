"""Independent oracles used across the test suite.

Everything here deliberately avoids the package's own math paths: rotations go
through scipy quaternions, compositions are sequential loops, sums use
different accumulation orders.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.transform import Rotation as ScipyRotation


def quat_log_rotvec(matrix) -> np.ndarray:
    """Quaternion-logarithm rotation vector (scipy route)."""
    return ScipyRotation.from_matrix(np.asarray(matrix, dtype=float)).as_rotvec()


def rotvec_matrix(v) -> np.ndarray:
    return ScipyRotation.from_rotvec(np.asarray(v, dtype=float)).as_matrix()


def random_rotation(rng, max_angle: float = np.pi - 0.05) -> np.ndarray:
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    return rotvec_matrix(axis * rng.uniform(0.0, max_angle))


def apply_homogeneous(rotation, translation, point) -> np.ndarray:
    """Point transform via an explicit 4x4 homogeneous matrix."""
    m = np.eye(4)
    m[:3, :3] = rotation
    m[:3, 3] = translation
    return (m @ np.array([point[0], point[1], point[2], 1.0]))[:3]


def sequential_fk(joint_translations, joint_axes, joint_angles, flange_translation,
                  base_rotation=None, base_translation=None) -> tuple:
    """Chain composition oracle: base, then per joint a pure-z translation in
    the parent frame followed by a rotation about the named axis."""
    r = np.eye(3) if base_rotation is None else np.asarray(base_rotation, dtype=float)
    p = np.zeros(3) if base_translation is None else np.asarray(base_translation, dtype=float)
    for d, axis, q in zip(joint_translations, joint_axes, joint_angles):
        p = r @ np.asarray(d, dtype=float) + p
        r = r @ ScipyRotation.from_rotvec(np.asarray(axis, dtype=float) * q).as_matrix()
    p = r @ np.asarray(flange_translation, dtype=float) + p
    return r, p


def damped_pinv_step(jacobian, error, gain, lam, dt, q) -> np.ndarray:
    """Resolved-rate step via numpy's dense solve (no saturation, no clamps)."""
    j = np.asarray(jacobian, dtype=float)
    a = j @ j.T + lam * lam * np.eye(6)
    qdot = j.T @ np.linalg.solve(a, gain * np.asarray(error, dtype=float))
    return np.asarray(q, dtype=float) + dt * qdot


def planar_two_link_jacobian(l1: float, l2: float, q1: float, q2: float) -> np.ndarray:
    """Hand-derived x/y position rows for a planar 2-link arm about z."""
    s1, c1 = np.sin(q1), np.cos(q1)
    s12, c12 = np.sin(q1 + q2), np.cos(q1 + q2)
    return np.array(
        [
            [-l1 * s1 - l2 * s12, -l2 * s12],
            [l1 * c1 + l2 * c12, l2 * c12],
        ]
    )


def brute_force_mwu_p(a, b) -> tuple:
    """Independent Mann-Whitney oracle: direct pairwise win counting and full
    enumeration of label assignments; returns (U, two-sided p)."""
    from itertools import combinations

    def u_stat(xs, ys):
        u = 0.0
        for x in xs:
            for y in ys:
                if x > y:
                    u += 1.0
                elif x == y:
                    u += 0.5
        return u

    pooled = list(a) + list(b)
    n = len(pooled)
    na = len(a)
    u_obs = u_stat(a, b)
    le = ge = total = 0
    for comb in combinations(range(n), na):
        chosen = set(comb)
        xs = [pooled[i] for i in comb]
        ys = [pooled[i] for i in range(n) if i not in chosen]
        u = u_stat(xs, ys)
        total += 1
        if u <= u_obs + 1e-9:
            le += 1
        if u >= u_obs - 1e-9:
            ge += 1
    return u_obs, min(1.0, 2.0 * min(le, ge) / total)


def percentile_oracle(values, q: float) -> float:
    """Linear interpolation between closest ranks, written from the definition."""
    v = sorted(float(x) for x in values)
    if len(v) == 1:
        return v[0]
    h = (len(v) - 1) * (q / 100.0)
    lo = int(np.floor(h))
    hi = min(lo + 1, len(v) - 1)
    return v[lo] + (h - lo) * (v[hi] - v[lo])
