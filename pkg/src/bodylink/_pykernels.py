"""Pure-Python numerical kernels.

Reference implementation of the hot-loop math: rotation-vector maps, serial-chain
forward kinematics, the geometric Jacobian, the damped resolved-rate servo step,
and the per-tick control-mode integrators. The compiled twin in ``_ckernels.pyx``
mirrors the exact arithmetic (same operation order, no FMA contraction) so both
backends produce bit-identical results; ``bodylink.kernels`` picks one at import.

All rotations are flat row-major 9-lists internally; the public functions take
and return numpy arrays.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "pure"

# servo_step flag bits
FLAG_VEL_SATURATED = 1
FLAG_JOINT_CLAMPED = 2
FLAG_BOX_CLAMPED = 4

_TINY_ANGLE = 1e-7  # below this, log(R) uses the first-order vee branch
_NEAR_PI = 1e-6  # within this of pi, log(R) uses the symmetric-part branch


def _mat9(a) -> list:
    m = np.asarray(a, dtype=float)
    if m.shape != (3, 3):
        raise ValueError(f"expected 3x3 matrix, got shape {m.shape}")
    return m.reshape(9).tolist()


def _vec3(a) -> list:
    v = np.asarray(a, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"expected 3-vector, got shape {v.shape}")
    return v.tolist()


def _mul33(a: list, b: list) -> list:
    return [
        a[0] * b[0] + a[1] * b[3] + a[2] * b[6],
        a[0] * b[1] + a[1] * b[4] + a[2] * b[7],
        a[0] * b[2] + a[1] * b[5] + a[2] * b[8],
        a[3] * b[0] + a[4] * b[3] + a[5] * b[6],
        a[3] * b[1] + a[4] * b[4] + a[5] * b[7],
        a[3] * b[2] + a[4] * b[5] + a[5] * b[8],
        a[6] * b[0] + a[7] * b[3] + a[8] * b[6],
        a[6] * b[1] + a[7] * b[4] + a[8] * b[7],
        a[6] * b[2] + a[7] * b[5] + a[8] * b[8],
    ]


def _mul3v(a: list, v: list) -> list:
    return [
        a[0] * v[0] + a[1] * v[1] + a[2] * v[2],
        a[3] * v[0] + a[4] * v[1] + a[5] * v[2],
        a[6] * v[0] + a[7] * v[1] + a[8] * v[2],
    ]


def _mul3tv(a: list, v: list) -> list:
    # transpose(a) @ v
    return [
        a[0] * v[0] + a[3] * v[1] + a[6] * v[2],
        a[1] * v[0] + a[4] * v[1] + a[7] * v[2],
        a[2] * v[0] + a[5] * v[1] + a[8] * v[2],
    ]


def _rodrigues(ax: float, ay: float, az: float, angle: float) -> list:
    # axis must be unit-norm; R = I + sin*K + (1-cos)*K^2
    s = math.sin(angle)
    c = 1.0 - math.cos(angle)
    return [
        1.0 + c * (-ay * ay - az * az),
        c * ax * ay - s * az,
        c * ax * az + s * ay,
        c * ax * ay + s * az,
        1.0 + c * (-ax * ax - az * az),
        c * ay * az - s * ax,
        c * ax * az - s * ay,
        c * ay * az + s * ax,
        1.0 + c * (-ax * ax - ay * ay),
    ]


def _rotvec_to_matrix(v: list) -> list:
    x, y, z = v
    theta = math.sqrt(x * x + y * y + z * z)
    if theta < 1e-8:
        # second-order series on the unnormalized vector; exact enough for
        # round-tripping well below the 1e-9 contract
        return [
            1.0 + 0.5 * (-y * y - z * z),
            0.5 * x * y - z,
            0.5 * x * z + y,
            0.5 * x * y + z,
            1.0 + 0.5 * (-x * x - z * z),
            0.5 * y * z - x,
            0.5 * x * z - y,
            0.5 * y * z + x,
            1.0 + 0.5 * (-x * x - y * y),
        ]
    return _rodrigues(x / theta, y / theta, z / theta, theta)


def _matrix_to_rotvec(r: list) -> list:
    trace = r[0] + r[4] + r[8]
    c = 0.5 * (trace - 1.0)
    if c > 1.0:
        c = 1.0
    elif c < -1.0:
        c = -1.0
    # skew part (= 2 sin(theta) * axis); its norm recovers sin(theta) far more
    # accurately than sin(acos(c)) near theta = pi
    s0 = r[7] - r[5]
    s1 = r[2] - r[6]
    s2 = r[3] - r[1]
    sn = 0.5 * math.sqrt(s0 * s0 + s1 * s1 + s2 * s2)
    if sn > 1.0:
        sn = 1.0
    theta = math.atan2(sn, c)
    if theta < _TINY_ANGLE:
        return [0.5 * s0, 0.5 * s1, 0.5 * s2]
    if math.pi - theta < _NEAR_PI:
        # axis from the symmetric part: ((R+R^T)/2 - cI)/(1-c) = a a^T
        denom = 1.0 - c
        m00 = (r[0] - c) / denom
        m11 = (r[4] - c) / denom
        m22 = (r[8] - c) / denom
        m01 = 0.5 * (r[1] + r[3]) / denom
        m02 = 0.5 * (r[2] + r[6]) / denom
        m12 = 0.5 * (r[5] + r[7]) / denom
        if m00 >= m11 and m00 >= m22:
            a0 = math.sqrt(m00 if m00 > 0.0 else 0.0)
            a1 = m01 / a0
            a2 = m02 / a0
        elif m11 >= m22:
            a1 = math.sqrt(m11 if m11 > 0.0 else 0.0)
            a0 = m01 / a1
            a2 = m12 / a1
        else:
            a2 = math.sqrt(m22 if m22 > 0.0 else 0.0)
            a0 = m02 / a2
            a1 = m12 / a2
        d = s0 * a0 + s1 * a1 + s2 * a2
        if d < -1e-12:
            a0, a1, a2 = -a0, -a1, -a2
        elif d <= 1e-12:
            # theta == pi: sign convention, largest-|component| positive
            # (ties prefer x, then y, then z)
            b0, b1, b2 = abs(a0), abs(a1), abs(a2)
            if b0 >= b1 and b0 >= b2:
                flip = a0 < 0.0
            elif b1 >= b2:
                flip = a1 < 0.0
            else:
                flip = a2 < 0.0
            if flip:
                a0, a1, a2 = -a0, -a1, -a2
        return [a0 * theta, a1 * theta, a2 * theta]
    scale = theta / (2.0 * sn)
    return [scale * s0, scale * s1, scale * s2]


def _rotation_error(desired: list, current: list) -> list:
    same = True
    for i in range(9):
        if desired[i] != current[i]:
            same = False
            break
    if same:
        # exact fixed point: identical rotations produce an exactly-zero error
        return [0.0, 0.0, 0.0]
    # desired @ current^T
    m = [
        desired[0] * current[0] + desired[1] * current[1] + desired[2] * current[2],
        desired[0] * current[3] + desired[1] * current[4] + desired[2] * current[5],
        desired[0] * current[6] + desired[1] * current[7] + desired[2] * current[8],
        desired[3] * current[0] + desired[4] * current[1] + desired[5] * current[2],
        desired[3] * current[3] + desired[4] * current[4] + desired[5] * current[5],
        desired[3] * current[6] + desired[4] * current[7] + desired[5] * current[8],
        desired[6] * current[0] + desired[7] * current[1] + desired[8] * current[2],
        desired[6] * current[3] + desired[7] * current[4] + desired[8] * current[5],
        desired[6] * current[6] + desired[7] * current[7] + desired[8] * current[8],
    ]
    return _matrix_to_rotvec(m)


def rotvec_to_matrix(v) -> np.ndarray:
    return np.array(_rotvec_to_matrix(_vec3(v)), dtype=float).reshape(3, 3)


def matrix_to_rotvec(r) -> np.ndarray:
    return np.array(_matrix_to_rotvec(_mat9(r)), dtype=float)


def rotation_error(desired, current) -> np.ndarray:
    return np.array(_rotation_error(_mat9(desired), _mat9(current)), dtype=float)


def _unpack_chain(pre_r, pre_p, axes, fl_r, fl_p, q):
    pr = np.asarray(pre_r, dtype=float)
    pp = np.asarray(pre_p, dtype=float)
    ax = np.asarray(axes, dtype=float)
    n = pr.shape[0]
    if pr.shape != (n, 3, 3) or pp.shape != (n, 3) or ax.shape != (n, 3):
        raise ValueError("inconsistent chain arrays")
    qq = np.asarray(q, dtype=float)
    if qq.shape != (n,):
        raise ValueError(f"expected {n} joint angles, got shape {qq.shape}")
    return (
        n,
        [pr[i].reshape(9).tolist() for i in range(n)],
        [pp[i].tolist() for i in range(n)],
        [ax[i].tolist() for i in range(n)],
        _mat9(fl_r),
        _vec3(fl_p),
        qq.tolist(),
    )


def _fk_frames(n, pre_r, pre_p, axes, fl_r, fl_p, q):
    origins = []
    zaxes = []
    r = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]
    p = [0.0, 0.0, 0.0]
    for i in range(n):
        step = _mul3v(r, pre_p[i])
        p = [p[0] + step[0], p[1] + step[1], p[2] + step[2]]
        r = _mul33(r, pre_r[i])
        origins.append(p)
        zaxes.append(_mul3v(r, axes[i]))
        r = _mul33(r, _rodrigues(axes[i][0], axes[i][1], axes[i][2], q[i]))
    step = _mul3v(r, fl_p)
    p = [p[0] + step[0], p[1] + step[1], p[2] + step[2]]
    r = _mul33(r, fl_r)
    return origins, zaxes, r, p


def fk_pose(pre_r, pre_p, axes, fl_r, fl_p, q):
    n, *chain = _unpack_chain(pre_r, pre_p, axes, fl_r, fl_p, q)
    _, _, r, p = _fk_frames(n, *chain)
    return np.array(r, dtype=float).reshape(3, 3), np.array(p, dtype=float)


def fk_frames(pre_r, pre_p, axes, fl_r, fl_p, q):
    n, *chain = _unpack_chain(pre_r, pre_p, axes, fl_r, fl_p, q)
    origins, zaxes, r, p = _fk_frames(n, *chain)
    return (
        np.array(origins, dtype=float),
        np.array(zaxes, dtype=float),
        np.array(r, dtype=float).reshape(3, 3),
        np.array(p, dtype=float),
    )


def _jacobian(n, origins, zaxes, eff_p):
    # column i: (z_i x (p_e - p_i); z_i), rows linear then angular
    jac = [[0.0] * n for _ in range(6)]
    for i in range(n):
        zx, zy, zz = zaxes[i]
        rx = eff_p[0] - origins[i][0]
        ry = eff_p[1] - origins[i][1]
        rz = eff_p[2] - origins[i][2]
        jac[0][i] = zy * rz - zz * ry
        jac[1][i] = zz * rx - zx * rz
        jac[2][i] = zx * ry - zy * rx
        jac[3][i] = zx
        jac[4][i] = zy
        jac[5][i] = zz
    return jac


def jacobian(origins, zaxes, eff_p) -> np.ndarray:
    o = np.asarray(origins, dtype=float)
    z = np.asarray(zaxes, dtype=float)
    n = o.shape[0]
    jac = _jacobian(n, [o[i].tolist() for i in range(n)], [z[i].tolist() for i in range(n)], _vec3(eff_p))
    return np.array(jac, dtype=float)


def _solve_spd6(a: list, b: list) -> list:
    # Cholesky in place: a is a flat 6x6 (row-major), b length 6
    l = [0.0] * 36
    for i in range(6):
        for j in range(i + 1):
            s = a[i * 6 + j]
            for m in range(j):
                s -= l[i * 6 + m] * l[j * 6 + m]
            if i == j:
                l[i * 6 + j] = math.sqrt(s)
            else:
                l[i * 6 + j] = s / l[j * 6 + j]
    y = [0.0] * 6
    for i in range(6):
        s = b[i]
        for m in range(i):
            s -= l[i * 6 + m] * y[m]
        y[i] = s / l[i * 6 + i]
    x = [0.0] * 6
    for i in range(5, -1, -1):
        s = y[i]
        for m in range(i + 1, 6):
            s -= l[m * 6 + i] * x[m]
        x[i] = s / l[i * 6 + i]
    return x


def _servo_step(n, pre_r, pre_p, axes, fl_r, fl_p, qmin, qmax, vmax, q, des_r, des_p, gain, lam, dt, box_min, box_max):
    flags = 0
    dp = list(des_p)
    for i in range(3):
        if dp[i] < box_min[i]:
            dp[i] = box_min[i]
            flags |= FLAG_BOX_CLAMPED
        elif dp[i] > box_max[i]:
            dp[i] = box_max[i]
            flags |= FLAG_BOX_CLAMPED
    origins, zaxes, eff_r, eff_p = _fk_frames(n, pre_r, pre_p, axes, fl_r, fl_p, q)
    ang = _rotation_error(des_r, eff_r)
    err = [dp[0] - eff_p[0], dp[1] - eff_p[1], dp[2] - eff_p[2], ang[0], ang[1], ang[2]]
    jac = _jacobian(n, origins, zaxes, eff_p)
    # A = J J^T + lam^2 I
    a = [0.0] * 36
    for i in range(6):
        for j in range(6):
            s = 0.0
            for m in range(n):
                s += jac[i][m] * jac[j][m]
            if i == j:
                s += lam * lam
            a[i * 6 + j] = s
    b = [gain * err[i] for i in range(6)]
    x = _solve_spd6(a, b)
    q_next = list(q)
    for m in range(n):
        qd = 0.0
        for i in range(6):
            qd += jac[i][m] * x[i]
        if qd > vmax:
            qd = vmax
            flags |= FLAG_VEL_SATURATED
        elif qd < -vmax:
            qd = -vmax
            flags |= FLAG_VEL_SATURATED
        qn = q[m] + dt * qd
        if qn < qmin[m]:
            qn = qmin[m]
            flags |= FLAG_JOINT_CLAMPED
        elif qn > qmax[m]:
            qn = qmax[m]
            flags |= FLAG_JOINT_CLAMPED
        q_next[m] = qn
    return q_next, eff_r, eff_p, err, flags


def _unpack_limits(qmin, qmax, box_min, box_max):
    return (
        np.asarray(qmin, dtype=float).tolist(),
        np.asarray(qmax, dtype=float).tolist(),
        _vec3(box_min),
        _vec3(box_max),
    )


def servo_step(pre_r, pre_p, axes, fl_r, fl_p, qmin, qmax, vmax, q, des_r, des_p, gain, lam, dt, box_min, box_max):
    n, *chain = _unpack_chain(pre_r, pre_p, axes, fl_r, fl_p, q)
    lim = _unpack_limits(qmin, qmax, box_min, box_max)
    q_next, eff_r, eff_p, err, flags = _servo_step(
        n, chain[0], chain[1], chain[2], chain[3], chain[4], lim[0], lim[1], float(vmax), chain[5],
        _mat9(des_r), _vec3(des_p), float(gain), float(lam), float(dt), lim[2], lim[3],
    )
    return (
        np.array(q_next, dtype=float),
        np.array(eff_r, dtype=float).reshape(3, 3),
        np.array(eff_p, dtype=float),
        np.array(err, dtype=float),
        flags,
    )


def servo_rollout(pre_r, pre_p, axes, fl_r, fl_p, qmin, qmax, vmax, q, des_r, des_p, gain, lam, dt, box_min, box_max, n_steps):
    """Run n_steps servo ticks toward a fixed desired pose.

    Returns (q_final, lin_err_norms[n_steps+1], flags_any); entry i is the
    translational error norm before step i, entry n_steps the final norm.
    """
    n, *chain = _unpack_chain(pre_r, pre_p, axes, fl_r, fl_p, q)
    lim = _unpack_limits(qmin, qmax, box_min, box_max)
    dr = _mat9(des_r)
    dp = _vec3(des_p)
    qq = chain[5]
    norms = [0.0] * (int(n_steps) + 1)
    flags_any = 0
    for step in range(int(n_steps)):
        qq, _, _, err, flags = _servo_step(
            n, chain[0], chain[1], chain[2], chain[3], chain[4], lim[0], lim[1], float(vmax), qq,
            dr, dp, float(gain), float(lam), float(dt), lim[2], lim[3],
        )
        flags_any |= flags
        norms[step] = math.sqrt(err[0] * err[0] + err[1] * err[1] + err[2] * err[2])
    _, _, _, eff_p = _fk_frames(n, chain[0], chain[1], chain[2], chain[3], chain[4], qq)
    ex = dp[0] - eff_p[0]
    ey = dp[1] - eff_p[1]
    ez = dp[2] - eff_p[2]
    norms[int(n_steps)] = math.sqrt(ex * ex + ey * ey + ez * ez)
    return np.array(qq, dtype=float), np.array(norms, dtype=float), flags_any


def dual_step(body_r, body_p, link, vel, dt):
    """One dual-mode tick: reshape the link by the world joystick velocity
    rotated into the body frame, then place the target through the link."""
    br = _mat9(body_r)
    bp = _vec3(body_p)
    lk = _vec3(link)
    v = _vec3(vel)
    dv = _mul3tv(br, v)
    dt = float(dt)
    lk = [lk[0] + dt * dv[0], lk[1] + dt * dv[1], lk[2] + dt * dv[2]]
    tip = _mul3v(br, lk)
    return (
        np.array(lk, dtype=float),
        np.array([tip[0] + bp[0], tip[1] + bp[1], tip[2] + bp[2]], dtype=float),
    )


def dual_rollout(body_r_seq, body_p_seq, link0, vel_seq, dt):
    br = np.asarray(body_r_seq, dtype=float)
    bp = np.asarray(body_p_seq, dtype=float)
    vel = np.asarray(vel_seq, dtype=float)
    n = br.shape[0]
    if bp.shape != (n, 3) or vel.shape != (n, 3) or br.shape != (n, 3, 3):
        raise ValueError("inconsistent rollout arrays")
    lk = _vec3(link0)
    dt = float(dt)
    out = np.empty((n, 3), dtype=float)
    brl = br.reshape(n, 9).tolist()
    bpl = bp.tolist()
    vl = vel.tolist()
    for i in range(n):
        r = brl[i]
        dv = _mul3tv(r, vl[i])
        lk = [lk[0] + dt * dv[0], lk[1] + dt * dv[1], lk[2] + dt * dv[2]]
        tip = _mul3v(r, lk)
        p = bpl[i]
        out[i, 0] = tip[0] + p[0]
        out[i, 1] = tip[1] + p[1]
        out[i, 2] = tip[2] + p[2]
    return out, np.array(lk, dtype=float)


def joystick_rollout(x0, vel_seq, dt):
    vel = np.asarray(vel_seq, dtype=float)
    n = vel.shape[0]
    if vel.shape != (n, 3):
        raise ValueError("inconsistent velocity array")
    base = _vec3(x0)
    acc = [0.0, 0.0, 0.0]
    dt = float(dt)
    out = np.empty((n, 3), dtype=float)
    vl = vel.tolist()
    for i in range(n):
        v = vl[i]
        acc = [acc[0] + dt * v[0], acc[1] + dt * v[1], acc[2] + dt * v[2]]
        out[i, 0] = base[0] + acc[0]
        out[i, 1] = base[1] + acc[1]
        out[i, 2] = base[2] + acc[2]
    return out, np.array(acc, dtype=float)


def body_rollout(body_r_seq, body_p_seq, link):
    br = np.asarray(body_r_seq, dtype=float)
    bp = np.asarray(body_p_seq, dtype=float)
    n = br.shape[0]
    if bp.shape != (n, 3) or br.shape != (n, 3, 3):
        raise ValueError("inconsistent rollout arrays")
    lk = _vec3(link)
    out = np.empty((n, 3), dtype=float)
    brl = br.reshape(n, 9).tolist()
    bpl = bp.tolist()
    for i in range(n):
        tip = _mul3v(brl[i], lk)
        p = bpl[i]
        out[i, 0] = tip[0] + p[0]
        out[i, 1] = tip[1] + p[1]
        out[i, 2] = tip[2] + p[2]
    return out, np.array(lk, dtype=float)
