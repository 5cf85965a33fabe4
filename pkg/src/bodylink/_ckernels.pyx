# cython: language_level=3
"""Compiled numerical kernels.

Line-for-line mirror of ``_pykernels``: identical operation order and the same
libm calls, compiled without FMA contraction, so results are bit-identical to
the pure backend. See ``bodylink.kernels`` for selection.
"""

from libc.math cimport sqrt, sin, cos, atan2, pi

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"

FLAG_VEL_SATURATED = 1
FLAG_JOINT_CLAMPED = 2
FLAG_BOX_CLAMPED = 4

cdef int _F_VEL = 1
cdef int _F_JOINT = 2
cdef int _F_BOX = 4

cdef double _TINY_ANGLE = 1e-7
cdef double _NEAR_PI = 1e-6

DEF MAXJ = 16  # stack bound on chain length; real arms have 7 joints


cdef inline void _mul33(double* a, double* b, double* out) noexcept nogil:
    out[0] = a[0] * b[0] + a[1] * b[3] + a[2] * b[6]
    out[1] = a[0] * b[1] + a[1] * b[4] + a[2] * b[7]
    out[2] = a[0] * b[2] + a[1] * b[5] + a[2] * b[8]
    out[3] = a[3] * b[0] + a[4] * b[3] + a[5] * b[6]
    out[4] = a[3] * b[1] + a[4] * b[4] + a[5] * b[7]
    out[5] = a[3] * b[2] + a[4] * b[5] + a[5] * b[8]
    out[6] = a[6] * b[0] + a[7] * b[3] + a[8] * b[6]
    out[7] = a[6] * b[1] + a[7] * b[4] + a[8] * b[7]
    out[8] = a[6] * b[2] + a[7] * b[5] + a[8] * b[8]


cdef inline void _mul3v(double* a, double* v, double* out) noexcept nogil:
    out[0] = a[0] * v[0] + a[1] * v[1] + a[2] * v[2]
    out[1] = a[3] * v[0] + a[4] * v[1] + a[5] * v[2]
    out[2] = a[6] * v[0] + a[7] * v[1] + a[8] * v[2]


cdef inline void _mul3tv(double* a, double* v, double* out) noexcept nogil:
    out[0] = a[0] * v[0] + a[3] * v[1] + a[6] * v[2]
    out[1] = a[1] * v[0] + a[4] * v[1] + a[7] * v[2]
    out[2] = a[2] * v[0] + a[5] * v[1] + a[8] * v[2]


cdef inline void _rodrigues(double ax, double ay, double az, double angle, double* out) noexcept nogil:
    cdef double s = sin(angle)
    cdef double c = 1.0 - cos(angle)
    out[0] = 1.0 + c * (-ay * ay - az * az)
    out[1] = c * ax * ay - s * az
    out[2] = c * ax * az + s * ay
    out[3] = c * ax * ay + s * az
    out[4] = 1.0 + c * (-ax * ax - az * az)
    out[5] = c * ay * az - s * ax
    out[6] = c * ax * az - s * ay
    out[7] = c * ay * az + s * ax
    out[8] = 1.0 + c * (-ax * ax - ay * ay)


cdef void _rotvec_to_matrix_c(double x, double y, double z, double* out) noexcept nogil:
    cdef double theta = sqrt(x * x + y * y + z * z)
    if theta < 1e-8:
        out[0] = 1.0 + 0.5 * (-y * y - z * z)
        out[1] = 0.5 * x * y - z
        out[2] = 0.5 * x * z + y
        out[3] = 0.5 * x * y + z
        out[4] = 1.0 + 0.5 * (-x * x - z * z)
        out[5] = 0.5 * y * z - x
        out[6] = 0.5 * x * z - y
        out[7] = 0.5 * y * z + x
        out[8] = 1.0 + 0.5 * (-x * x - y * y)
        return
    _rodrigues(x / theta, y / theta, z / theta, theta, out)


cdef void _matrix_to_rotvec_c(double* r, double* out) noexcept nogil:
    cdef double trace = r[0] + r[4] + r[8]
    cdef double c = 0.5 * (trace - 1.0)
    cdef double theta, sn, s0, s1, s2, denom, m00, m11, m22, m01, m02, m12
    cdef double a0, a1, a2, d, b0, b1, b2, scale
    cdef bint flip
    if c > 1.0:
        c = 1.0
    elif c < -1.0:
        c = -1.0
    # skew-part norm recovers sin(theta) accurately near theta = pi
    s0 = r[7] - r[5]
    s1 = r[2] - r[6]
    s2 = r[3] - r[1]
    sn = 0.5 * sqrt(s0 * s0 + s1 * s1 + s2 * s2)
    if sn > 1.0:
        sn = 1.0
    theta = atan2(sn, c)
    if theta < _TINY_ANGLE:
        out[0] = 0.5 * s0
        out[1] = 0.5 * s1
        out[2] = 0.5 * s2
        return
    if pi - theta < _NEAR_PI:
        denom = 1.0 - c
        m00 = (r[0] - c) / denom
        m11 = (r[4] - c) / denom
        m22 = (r[8] - c) / denom
        m01 = 0.5 * (r[1] + r[3]) / denom
        m02 = 0.5 * (r[2] + r[6]) / denom
        m12 = 0.5 * (r[5] + r[7]) / denom
        if m00 >= m11 and m00 >= m22:
            a0 = sqrt(m00 if m00 > 0.0 else 0.0)
            a1 = m01 / a0
            a2 = m02 / a0
        elif m11 >= m22:
            a1 = sqrt(m11 if m11 > 0.0 else 0.0)
            a0 = m01 / a1
            a2 = m12 / a1
        else:
            a2 = sqrt(m22 if m22 > 0.0 else 0.0)
            a0 = m02 / a2
            a1 = m12 / a2
        d = s0 * a0 + s1 * a1 + s2 * a2
        if d < -1e-12:
            a0 = -a0
            a1 = -a1
            a2 = -a2
        elif d <= 1e-12:
            b0 = a0 if a0 >= 0.0 else -a0
            b1 = a1 if a1 >= 0.0 else -a1
            b2 = a2 if a2 >= 0.0 else -a2
            if b0 >= b1 and b0 >= b2:
                flip = a0 < 0.0
            elif b1 >= b2:
                flip = a1 < 0.0
            else:
                flip = a2 < 0.0
            if flip:
                a0 = -a0
                a1 = -a1
                a2 = -a2
        out[0] = a0 * theta
        out[1] = a1 * theta
        out[2] = a2 * theta
        return
    scale = theta / (2.0 * sn)
    out[0] = scale * s0
    out[1] = scale * s1
    out[2] = scale * s2


cdef void _rotation_error_c(double* desired, double* current, double* out) noexcept nogil:
    cdef bint same = True
    cdef int i
    cdef double m[9]
    for i in range(9):
        if desired[i] != current[i]:
            same = False
            break
    if same:
        out[0] = 0.0
        out[1] = 0.0
        out[2] = 0.0
        return
    m[0] = desired[0] * current[0] + desired[1] * current[1] + desired[2] * current[2]
    m[1] = desired[0] * current[3] + desired[1] * current[4] + desired[2] * current[5]
    m[2] = desired[0] * current[6] + desired[1] * current[7] + desired[2] * current[8]
    m[3] = desired[3] * current[0] + desired[4] * current[1] + desired[5] * current[2]
    m[4] = desired[3] * current[3] + desired[4] * current[4] + desired[5] * current[5]
    m[5] = desired[3] * current[6] + desired[4] * current[7] + desired[5] * current[8]
    m[6] = desired[6] * current[0] + desired[7] * current[1] + desired[8] * current[2]
    m[7] = desired[6] * current[3] + desired[7] * current[4] + desired[8] * current[5]
    m[8] = desired[6] * current[6] + desired[7] * current[7] + desired[8] * current[8]
    _matrix_to_rotvec_c(m, out)


cdef int _fk_frames_c(int n, double* pre_r, double* pre_p, double* axes,
                      double* fl_r, double* fl_p, double* q,
                      double* origins, double* zaxes, double* eff_r, double* eff_p) noexcept nogil:
    cdef double r[9]
    cdef double tmp[9]
    cdef double rot[9]
    cdef double p[3]
    cdef double step[3]
    cdef int i, j
    r[0] = 1.0; r[1] = 0.0; r[2] = 0.0
    r[3] = 0.0; r[4] = 1.0; r[5] = 0.0
    r[6] = 0.0; r[7] = 0.0; r[8] = 1.0
    p[0] = 0.0; p[1] = 0.0; p[2] = 0.0
    for i in range(n):
        _mul3v(r, pre_p + 3 * i, step)
        p[0] = p[0] + step[0]
        p[1] = p[1] + step[1]
        p[2] = p[2] + step[2]
        _mul33(r, pre_r + 9 * i, tmp)
        for j in range(9):
            r[j] = tmp[j]
        origins[3 * i] = p[0]
        origins[3 * i + 1] = p[1]
        origins[3 * i + 2] = p[2]
        _mul3v(r, axes + 3 * i, zaxes + 3 * i)
        _rodrigues(axes[3 * i], axes[3 * i + 1], axes[3 * i + 2], q[i], rot)
        _mul33(r, rot, tmp)
        for j in range(9):
            r[j] = tmp[j]
    _mul3v(r, fl_p, step)
    p[0] = p[0] + step[0]
    p[1] = p[1] + step[1]
    p[2] = p[2] + step[2]
    _mul33(r, fl_r, tmp)
    for j in range(9):
        eff_r[j] = tmp[j]
    eff_p[0] = p[0]
    eff_p[1] = p[1]
    eff_p[2] = p[2]
    return 0


cdef void _jacobian_c(int n, double* origins, double* zaxes, double* eff_p, double* jac) noexcept nogil:
    # jac is flat 6 x n row-major
    cdef int i
    cdef double zx, zy, zz, rx, ry, rz
    for i in range(n):
        zx = zaxes[3 * i]
        zy = zaxes[3 * i + 1]
        zz = zaxes[3 * i + 2]
        rx = eff_p[0] - origins[3 * i]
        ry = eff_p[1] - origins[3 * i + 1]
        rz = eff_p[2] - origins[3 * i + 2]
        jac[0 * n + i] = zy * rz - zz * ry
        jac[1 * n + i] = zz * rx - zx * rz
        jac[2 * n + i] = zx * ry - zy * rx
        jac[3 * n + i] = zx
        jac[4 * n + i] = zy
        jac[5 * n + i] = zz


cdef void _solve_spd6_c(double* a, double* b, double* x) noexcept nogil:
    cdef double l[36]
    cdef double y[6]
    cdef double s
    cdef int i, j, m
    for i in range(6):
        for j in range(i + 1):
            s = a[i * 6 + j]
            for m in range(j):
                s -= l[i * 6 + m] * l[j * 6 + m]
            if i == j:
                l[i * 6 + j] = sqrt(s)
            else:
                l[i * 6 + j] = s / l[j * 6 + j]
    for i in range(6):
        s = b[i]
        for m in range(i):
            s -= l[i * 6 + m] * y[m]
        y[i] = s / l[i * 6 + i]
    for i in range(5, -1, -1):
        s = y[i]
        for m in range(i + 1, 6):
            s -= l[m * 6 + i] * x[m]
        x[i] = s / l[i * 6 + i]


cdef int _servo_step_c(int n, double* pre_r, double* pre_p, double* axes,
                       double* fl_r, double* fl_p,
                       double* qmin, double* qmax, double vmax, double* q,
                       double* des_r, double* des_p, double gain, double lam, double dt,
                       double* box_min, double* box_max,
                       double* q_next, double* eff_r, double* eff_p, double* err) noexcept nogil:
    cdef int flags = 0
    cdef double dp[3]
    cdef double origins[3 * MAXJ]
    cdef double zaxes[3 * MAXJ]
    cdef double jac[6 * MAXJ]
    cdef double ang[3]
    cdef double a[36]
    cdef double b[6]
    cdef double x[6]
    cdef double s, qd, qn
    cdef int i, j, m
    for i in range(3):
        dp[i] = des_p[i]
        if dp[i] < box_min[i]:
            dp[i] = box_min[i]
            flags |= _F_BOX
        elif dp[i] > box_max[i]:
            dp[i] = box_max[i]
            flags |= _F_BOX
    _fk_frames_c(n, pre_r, pre_p, axes, fl_r, fl_p, q, origins, zaxes, eff_r, eff_p)
    _rotation_error_c(des_r, eff_r, ang)
    err[0] = dp[0] - eff_p[0]
    err[1] = dp[1] - eff_p[1]
    err[2] = dp[2] - eff_p[2]
    err[3] = ang[0]
    err[4] = ang[1]
    err[5] = ang[2]
    _jacobian_c(n, origins, zaxes, eff_p, jac)
    for i in range(6):
        for j in range(6):
            s = 0.0
            for m in range(n):
                s += jac[i * n + m] * jac[j * n + m]
            if i == j:
                s += lam * lam
            a[i * 6 + j] = s
    for i in range(6):
        b[i] = gain * err[i]
    _solve_spd6_c(a, b, x)
    for m in range(n):
        qd = 0.0
        for i in range(6):
            qd += jac[i * n + m] * x[i]
        if qd > vmax:
            qd = vmax
            flags |= _F_VEL
        elif qd < -vmax:
            qd = -vmax
            flags |= _F_VEL
        qn = q[m] + dt * qd
        if qn < qmin[m]:
            qn = qmin[m]
            flags |= _F_JOINT
        elif qn > qmax[m]:
            qn = qmax[m]
            flags |= _F_JOINT
        q_next[m] = qn
    return flags


def rotvec_to_matrix(v):
    cdef cnp.ndarray[double, ndim=1] vv = np.ascontiguousarray(v, dtype=float)
    if vv.shape[0] != 3:
        raise ValueError("expected 3-vector")
    out = np.empty((3, 3), dtype=float)
    cdef cnp.ndarray[double, ndim=2] o = out
    _rotvec_to_matrix_c(vv[0], vv[1], vv[2], <double*> o.data)
    return out


def matrix_to_rotvec(r):
    cdef cnp.ndarray[double, ndim=2] rr = np.ascontiguousarray(r, dtype=float)
    if rr.shape[0] != 3 or rr.shape[1] != 3:
        raise ValueError("expected 3x3 matrix")
    out = np.empty(3, dtype=float)
    cdef cnp.ndarray[double, ndim=1] o = out
    _matrix_to_rotvec_c(<double*> rr.data, <double*> o.data)
    return out


def rotation_error(desired, current):
    cdef cnp.ndarray[double, ndim=2] dd = np.ascontiguousarray(desired, dtype=float)
    cdef cnp.ndarray[double, ndim=2] cc = np.ascontiguousarray(current, dtype=float)
    if dd.shape[0] != 3 or dd.shape[1] != 3 or cc.shape[0] != 3 or cc.shape[1] != 3:
        raise ValueError("expected 3x3 matrices")
    out = np.empty(3, dtype=float)
    cdef cnp.ndarray[double, ndim=1] o = out
    _rotation_error_c(<double*> dd.data, <double*> cc.data, <double*> o.data)
    return out


cdef _chain_arrays(pre_r, pre_p, axes, fl_r, fl_p, q):
    pr = np.ascontiguousarray(pre_r, dtype=float)
    pp = np.ascontiguousarray(pre_p, dtype=float)
    ax = np.ascontiguousarray(axes, dtype=float)
    fr = np.ascontiguousarray(fl_r, dtype=float)
    fp = np.ascontiguousarray(fl_p, dtype=float)
    qq = np.ascontiguousarray(q, dtype=float)
    n = pr.shape[0]
    if n > MAXJ:
        raise ValueError(f"chain too long for compiled kernels: {n} > {MAXJ}")
    if pr.shape != (n, 3, 3) or pp.shape != (n, 3) or ax.shape != (n, 3):
        raise ValueError("inconsistent chain arrays")
    if fr.shape != (3, 3) or fp.shape != (3,):
        raise ValueError("bad flange arrays")
    if qq.shape != (n,):
        raise ValueError(f"expected {n} joint angles, got shape {qq.shape}")
    return n, pr, pp, ax, fr, fp, qq


def fk_pose(pre_r, pre_p, axes, fl_r, fl_p, q):
    n, pr, pp, ax, fr, fp, qq = _chain_arrays(pre_r, pre_p, axes, fl_r, fl_p, q)
    cdef cnp.ndarray[double, ndim=3] c_pr = pr
    cdef cnp.ndarray[double, ndim=2] c_pp = pp
    cdef cnp.ndarray[double, ndim=2] c_ax = ax
    cdef cnp.ndarray[double, ndim=2] c_fr = fr
    cdef cnp.ndarray[double, ndim=1] c_fp = fp
    cdef cnp.ndarray[double, ndim=1] c_q = qq
    origins = np.empty((n, 3), dtype=float)
    zaxes = np.empty((n, 3), dtype=float)
    eff_r = np.empty((3, 3), dtype=float)
    eff_p = np.empty(3, dtype=float)
    cdef cnp.ndarray[double, ndim=2] c_or = origins
    cdef cnp.ndarray[double, ndim=2] c_za = zaxes
    cdef cnp.ndarray[double, ndim=2] c_er = eff_r
    cdef cnp.ndarray[double, ndim=1] c_ep = eff_p
    _fk_frames_c(n, <double*> c_pr.data, <double*> c_pp.data, <double*> c_ax.data,
                 <double*> c_fr.data, <double*> c_fp.data, <double*> c_q.data,
                 <double*> c_or.data, <double*> c_za.data, <double*> c_er.data, <double*> c_ep.data)
    return eff_r, eff_p


def fk_frames(pre_r, pre_p, axes, fl_r, fl_p, q):
    n, pr, pp, ax, fr, fp, qq = _chain_arrays(pre_r, pre_p, axes, fl_r, fl_p, q)
    cdef cnp.ndarray[double, ndim=3] c_pr = pr
    cdef cnp.ndarray[double, ndim=2] c_pp = pp
    cdef cnp.ndarray[double, ndim=2] c_ax = ax
    cdef cnp.ndarray[double, ndim=2] c_fr = fr
    cdef cnp.ndarray[double, ndim=1] c_fp = fp
    cdef cnp.ndarray[double, ndim=1] c_q = qq
    origins = np.empty((n, 3), dtype=float)
    zaxes = np.empty((n, 3), dtype=float)
    eff_r = np.empty((3, 3), dtype=float)
    eff_p = np.empty(3, dtype=float)
    cdef cnp.ndarray[double, ndim=2] c_or = origins
    cdef cnp.ndarray[double, ndim=2] c_za = zaxes
    cdef cnp.ndarray[double, ndim=2] c_er = eff_r
    cdef cnp.ndarray[double, ndim=1] c_ep = eff_p
    _fk_frames_c(n, <double*> c_pr.data, <double*> c_pp.data, <double*> c_ax.data,
                 <double*> c_fr.data, <double*> c_fp.data, <double*> c_q.data,
                 <double*> c_or.data, <double*> c_za.data, <double*> c_er.data, <double*> c_ep.data)
    return origins, zaxes, eff_r, eff_p


def jacobian(origins, zaxes, eff_p):
    cdef cnp.ndarray[double, ndim=2] c_or = np.ascontiguousarray(origins, dtype=float)
    cdef cnp.ndarray[double, ndim=2] c_za = np.ascontiguousarray(zaxes, dtype=float)
    cdef cnp.ndarray[double, ndim=1] c_ep = np.ascontiguousarray(eff_p, dtype=float)
    n = c_or.shape[0]
    jac = np.empty((6, n), dtype=float)
    cdef cnp.ndarray[double, ndim=2] c_j = jac
    _jacobian_c(n, <double*> c_or.data, <double*> c_za.data, <double*> c_ep.data, <double*> c_j.data)
    return jac


def servo_step(pre_r, pre_p, axes, fl_r, fl_p, qmin, qmax, vmax, q, des_r, des_p, gain, lam, dt, box_min, box_max):
    n, pr, pp, ax, fr, fp, qq = _chain_arrays(pre_r, pre_p, axes, fl_r, fl_p, q)
    cdef cnp.ndarray[double, ndim=3] c_pr = pr
    cdef cnp.ndarray[double, ndim=2] c_pp = pp
    cdef cnp.ndarray[double, ndim=2] c_ax = ax
    cdef cnp.ndarray[double, ndim=2] c_fr = fr
    cdef cnp.ndarray[double, ndim=1] c_fp = fp
    cdef cnp.ndarray[double, ndim=1] c_q = qq
    cdef cnp.ndarray[double, ndim=1] c_qmin = np.ascontiguousarray(qmin, dtype=float)
    cdef cnp.ndarray[double, ndim=1] c_qmax = np.ascontiguousarray(qmax, dtype=float)
    cdef cnp.ndarray[double, ndim=2] c_dr = np.ascontiguousarray(des_r, dtype=float)
    cdef cnp.ndarray[double, ndim=1] c_dp = np.ascontiguousarray(des_p, dtype=float)
    cdef cnp.ndarray[double, ndim=1] c_bmin = np.ascontiguousarray(box_min, dtype=float)
    cdef cnp.ndarray[double, ndim=1] c_bmax = np.ascontiguousarray(box_max, dtype=float)
    q_next = np.empty(n, dtype=float)
    eff_r = np.empty((3, 3), dtype=float)
    eff_p = np.empty(3, dtype=float)
    err = np.empty(6, dtype=float)
    cdef cnp.ndarray[double, ndim=1] c_qn = q_next
    cdef cnp.ndarray[double, ndim=2] c_er = eff_r
    cdef cnp.ndarray[double, ndim=1] c_ep = eff_p
    cdef cnp.ndarray[double, ndim=1] c_err = err
    cdef int flags = _servo_step_c(
        n, <double*> c_pr.data, <double*> c_pp.data, <double*> c_ax.data,
        <double*> c_fr.data, <double*> c_fp.data,
        <double*> c_qmin.data, <double*> c_qmax.data, float(vmax), <double*> c_q.data,
        <double*> c_dr.data, <double*> c_dp.data, float(gain), float(lam), float(dt),
        <double*> c_bmin.data, <double*> c_bmax.data,
        <double*> c_qn.data, <double*> c_er.data, <double*> c_ep.data, <double*> c_err.data)
    return q_next, eff_r, eff_p, err, flags


def servo_rollout(pre_r, pre_p, axes, fl_r, fl_p, qmin, qmax, vmax, q, des_r, des_p, gain, lam, dt, box_min, box_max, n_steps):
    n, pr, pp, ax, fr, fp, qq = _chain_arrays(pre_r, pre_p, axes, fl_r, fl_p, q)
    cdef cnp.ndarray[double, ndim=3] c_pr = pr
    cdef cnp.ndarray[double, ndim=2] c_pp = pp
    cdef cnp.ndarray[double, ndim=2] c_ax = ax
    cdef cnp.ndarray[double, ndim=2] c_fr = fr
    cdef cnp.ndarray[double, ndim=1] c_fp = fp
    cdef cnp.ndarray[double, ndim=1] c_qmin = np.ascontiguousarray(qmin, dtype=float)
    cdef cnp.ndarray[double, ndim=1] c_qmax = np.ascontiguousarray(qmax, dtype=float)
    cdef cnp.ndarray[double, ndim=2] c_dr = np.ascontiguousarray(des_r, dtype=float)
    cdef cnp.ndarray[double, ndim=1] c_dp = np.ascontiguousarray(des_p, dtype=float)
    cdef cnp.ndarray[double, ndim=1] c_bmin = np.ascontiguousarray(box_min, dtype=float)
    cdef cnp.ndarray[double, ndim=1] c_bmax = np.ascontiguousarray(box_max, dtype=float)
    cdef int steps = int(n_steps)
    norms = np.zeros(steps + 1, dtype=float)
    q_out = qq.copy()
    cdef cnp.ndarray[double, ndim=1] c_norms = norms
    cdef cnp.ndarray[double, ndim=1] c_q = q_out
    cdef double q_next[MAXJ]
    cdef double eff_r[9]
    cdef double eff_p[3]
    cdef double err[6]
    cdef double origins[3 * MAXJ]
    cdef double zaxes[3 * MAXJ]
    cdef double ex, ey, ez
    cdef double g = float(gain), lm = float(lam), step_dt = float(dt), vm = float(vmax)
    cdef int flags_any = 0
    cdef int i, m
    cdef double* qp = <double*> c_q.data
    for i in range(steps):
        flags_any |= _servo_step_c(
            n, <double*> c_pr.data, <double*> c_pp.data, <double*> c_ax.data,
            <double*> c_fr.data, <double*> c_fp.data,
            <double*> c_qmin.data, <double*> c_qmax.data, vm, qp,
            <double*> c_dr.data, <double*> c_dp.data, g, lm, step_dt,
            <double*> c_bmin.data, <double*> c_bmax.data,
            q_next, eff_r, eff_p, err)
        for m in range(n):
            qp[m] = q_next[m]
        c_norms[i] = sqrt(err[0] * err[0] + err[1] * err[1] + err[2] * err[2])
    _fk_frames_c(n, <double*> c_pr.data, <double*> c_pp.data, <double*> c_ax.data,
                 <double*> c_fr.data, <double*> c_fp.data, qp,
                 origins, zaxes, eff_r, eff_p)
    ex = (<double*> c_dp.data)[0] - eff_p[0]
    ey = (<double*> c_dp.data)[1] - eff_p[1]
    ez = (<double*> c_dp.data)[2] - eff_p[2]
    c_norms[steps] = sqrt(ex * ex + ey * ey + ez * ez)
    return q_out, norms, flags_any


def dual_step(body_r, body_p, link, vel, dt):
    cdef cnp.ndarray[double, ndim=2] br = np.ascontiguousarray(body_r, dtype=float)
    cdef cnp.ndarray[double, ndim=1] bp = np.ascontiguousarray(body_p, dtype=float)
    cdef cnp.ndarray[double, ndim=1] lk = np.ascontiguousarray(link, dtype=float)
    cdef cnp.ndarray[double, ndim=1] v = np.ascontiguousarray(vel, dtype=float)
    cdef double step_dt = float(dt)
    cdef double dv[3]
    cdef double tip[3]
    link_next = np.empty(3, dtype=float)
    desired = np.empty(3, dtype=float)
    cdef cnp.ndarray[double, ndim=1] c_ln = link_next
    cdef cnp.ndarray[double, ndim=1] c_de = desired
    _mul3tv(<double*> br.data, <double*> v.data, dv)
    c_ln[0] = lk[0] + step_dt * dv[0]
    c_ln[1] = lk[1] + step_dt * dv[1]
    c_ln[2] = lk[2] + step_dt * dv[2]
    _mul3v(<double*> br.data, <double*> c_ln.data, tip)
    c_de[0] = tip[0] + bp[0]
    c_de[1] = tip[1] + bp[1]
    c_de[2] = tip[2] + bp[2]
    return link_next, desired


def dual_rollout(body_r_seq, body_p_seq, link0, vel_seq, dt):
    cdef cnp.ndarray[double, ndim=3] br = np.ascontiguousarray(body_r_seq, dtype=float)
    cdef cnp.ndarray[double, ndim=2] bp = np.ascontiguousarray(body_p_seq, dtype=float)
    cdef cnp.ndarray[double, ndim=2] vel = np.ascontiguousarray(vel_seq, dtype=float)
    cdef int n = br.shape[0]
    if bp.shape[0] != n or vel.shape[0] != n:
        raise ValueError("inconsistent rollout arrays")
    cdef cnp.ndarray[double, ndim=1] lk0 = np.ascontiguousarray(link0, dtype=float)
    out = np.empty((n, 3), dtype=float)
    link_final = np.empty(3, dtype=float)
    cdef cnp.ndarray[double, ndim=2] c_out = out
    cdef cnp.ndarray[double, ndim=1] c_lf = link_final
    cdef double lk[3]
    cdef double dv[3]
    cdef double tip[3]
    cdef double step_dt = float(dt)
    cdef double* rp
    cdef int i
    lk[0] = lk0[0]
    lk[1] = lk0[1]
    lk[2] = lk0[2]
    with nogil:
        for i in range(n):
            rp = (<double*> br.data) + 9 * i
            _mul3tv(rp, (<double*> vel.data) + 3 * i, dv)
            lk[0] = lk[0] + step_dt * dv[0]
            lk[1] = lk[1] + step_dt * dv[1]
            lk[2] = lk[2] + step_dt * dv[2]
            _mul3v(rp, lk, tip)
            (<double*> c_out.data)[3 * i] = tip[0] + (<double*> bp.data)[3 * i]
            (<double*> c_out.data)[3 * i + 1] = tip[1] + (<double*> bp.data)[3 * i + 1]
            (<double*> c_out.data)[3 * i + 2] = tip[2] + (<double*> bp.data)[3 * i + 2]
    c_lf[0] = lk[0]
    c_lf[1] = lk[1]
    c_lf[2] = lk[2]
    return out, link_final


def joystick_rollout(x0, vel_seq, dt):
    cdef cnp.ndarray[double, ndim=2] vel = np.ascontiguousarray(vel_seq, dtype=float)
    cdef cnp.ndarray[double, ndim=1] base = np.ascontiguousarray(x0, dtype=float)
    cdef int n = vel.shape[0]
    out = np.empty((n, 3), dtype=float)
    acc_final = np.empty(3, dtype=float)
    cdef cnp.ndarray[double, ndim=2] c_out = out
    cdef cnp.ndarray[double, ndim=1] c_af = acc_final
    cdef double acc[3]
    cdef double step_dt = float(dt)
    cdef int i
    acc[0] = 0.0
    acc[1] = 0.0
    acc[2] = 0.0
    with nogil:
        for i in range(n):
            acc[0] = acc[0] + step_dt * (<double*> vel.data)[3 * i]
            acc[1] = acc[1] + step_dt * (<double*> vel.data)[3 * i + 1]
            acc[2] = acc[2] + step_dt * (<double*> vel.data)[3 * i + 2]
            (<double*> c_out.data)[3 * i] = base[0] + acc[0]
            (<double*> c_out.data)[3 * i + 1] = base[1] + acc[1]
            (<double*> c_out.data)[3 * i + 2] = base[2] + acc[2]
    c_af[0] = acc[0]
    c_af[1] = acc[1]
    c_af[2] = acc[2]
    return out, acc_final


def body_rollout(body_r_seq, body_p_seq, link):
    cdef cnp.ndarray[double, ndim=3] br = np.ascontiguousarray(body_r_seq, dtype=float)
    cdef cnp.ndarray[double, ndim=2] bp = np.ascontiguousarray(body_p_seq, dtype=float)
    cdef cnp.ndarray[double, ndim=1] lk = np.ascontiguousarray(link, dtype=float)
    cdef int n = br.shape[0]
    if bp.shape[0] != n:
        raise ValueError("inconsistent rollout arrays")
    out = np.empty((n, 3), dtype=float)
    cdef cnp.ndarray[double, ndim=2] c_out = out
    cdef double tip[3]
    cdef int i
    with nogil:
        for i in range(n):
            _mul3v((<double*> br.data) + 9 * i, <double*> lk.data, tip)
            (<double*> c_out.data)[3 * i] = tip[0] + (<double*> bp.data)[3 * i]
            (<double*> c_out.data)[3 * i + 1] = tip[1] + (<double*> bp.data)[3 * i + 1]
            (<double*> c_out.data)[3 * i + 2] = tip[2] + (<double*> bp.data)[3 * i + 2]
    return out, np.asarray(lk).copy()
