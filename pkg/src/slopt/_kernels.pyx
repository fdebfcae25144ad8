# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled RK4 kernels.

Every function here has a line-for-line twin in ``_pykernels``; the two are
checked against each other in the test suite.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sin, pow

cnp.import_array()

cdef double BLOWUP = 1e12


def rk4_linear(const double[::1] t, const double[::1] qa, const double[::1] qm,
               const double[::1] qb, double lam, double y0, double v0,
               const double[::1] jump, bint renorm):
    """Integrate y' = v, v' = -(lam + q) y over the nodes ``t``.

    ``qa[k]``, ``qm[k]``, ``qb[k]`` are the potential at the left end,
    midpoint and right end of step k (one-sided at the ends).  ``jump[k]``
    is an atom mass at node k: after arriving at node k, ``v -= jump[k] * y``.

    Returns ``(y, v, zero_count, status)``; status 0 is ok, 1 means the
    solution exceeded the blow-up threshold.  With ``renorm`` the state is
    rescaled instead (stored history is then only meaningful in sign).
    """
    cdef Py_ssize_t n = t.shape[0] - 1
    cdef Py_ssize_t k
    cdef double h, y, v, ky1, kv1, ky2, kv2, ky3, kv3, ky4, kv4, c0, c1, c2, s
    cdef int last_sign = 0, sign, zeros = 0, status = 0
    y_out = np.full(n + 1, np.nan)
    v_out = np.full(n + 1, np.nan)
    cdef double[::1] ys = y_out
    cdef double[::1] vs = v_out
    y = y0
    v = v0 - jump[0] * y0
    if y0 > 0.0:
        last_sign = 1
    elif y0 < 0.0:
        last_sign = -1
    ys[0] = y
    vs[0] = v
    for k in range(n):
        h = t[k + 1] - t[k]
        c0 = lam + qa[k]
        c1 = lam + qm[k]
        c2 = lam + qb[k]
        ky1 = v
        kv1 = -c0 * y
        ky2 = v + 0.5 * h * kv1
        kv2 = -c1 * (y + 0.5 * h * ky1)
        ky3 = v + 0.5 * h * kv2
        kv3 = -c1 * (y + 0.5 * h * ky2)
        ky4 = v + h * kv3
        kv4 = -c2 * (y + h * ky3)
        y = y + h * (ky1 + 2.0 * ky2 + 2.0 * ky3 + ky4) / 6.0
        v = v + h * (kv1 + 2.0 * kv2 + 2.0 * kv3 + kv4) / 6.0
        v = v - jump[k + 1] * y
        if y > 0.0:
            sign = 1
        elif y < 0.0:
            sign = -1
        else:
            sign = 0
        if sign != 0:
            if last_sign != 0 and sign != last_sign:
                zeros += 1
            last_sign = sign
        s = fabs(y) + fabs(v)
        if s > BLOWUP:
            if renorm:
                y = y / s
                v = v / s
            else:
                status = 1
                ys[k + 1] = y
                vs[k + 1] = v
                break
        ys[k + 1] = y
        vs[k + 1] = v
    return y_out, v_out, zeros, status


cdef inline double _pw(double u, double e):
    if u <= 0.0:
        return 0.0
    return pow(u, e)


def rk4_critical(const double[::1] t, double xi, double eta, double expo,
                 double a, double b):
    """Integrate the coupled system with potential -(y^2+z^2)^expo.

    State (y, y', z, z') starts at (0, a, 0, b).  Returns ``(state, status)``
    with ``state`` of shape (n+1, 4).
    """
    cdef Py_ssize_t n = t.shape[0] - 1
    cdef Py_ssize_t k, j
    cdef double h, w
    cdef double s[4]
    cdef double k1[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    cdef double tmp[4]
    cdef int status = 0
    out = np.full((n + 1, 4), np.nan)
    cdef double[:, ::1] o = out
    s[0] = 0.0
    s[1] = a
    s[2] = 0.0
    s[3] = b
    for j in range(4):
        o[0, j] = s[j]
    for k in range(n):
        h = t[k + 1] - t[k]
        w = _pw(s[0] * s[0] + s[2] * s[2], expo)
        k1[0] = s[1]
        k1[1] = (w - xi) * s[0]
        k1[2] = s[3]
        k1[3] = (w - eta) * s[2]
        for j in range(4):
            tmp[j] = s[j] + 0.5 * h * k1[j]
        w = _pw(tmp[0] * tmp[0] + tmp[2] * tmp[2], expo)
        k2[0] = tmp[1]
        k2[1] = (w - xi) * tmp[0]
        k2[2] = tmp[3]
        k2[3] = (w - eta) * tmp[2]
        for j in range(4):
            tmp[j] = s[j] + 0.5 * h * k2[j]
        w = _pw(tmp[0] * tmp[0] + tmp[2] * tmp[2], expo)
        k3[0] = tmp[1]
        k3[1] = (w - xi) * tmp[0]
        k3[2] = tmp[3]
        k3[3] = (w - eta) * tmp[2]
        for j in range(4):
            tmp[j] = s[j] + h * k3[j]
        w = _pw(tmp[0] * tmp[0] + tmp[2] * tmp[2], expo)
        k4[0] = tmp[1]
        k4[1] = (w - xi) * tmp[0]
        k4[2] = tmp[3]
        k4[3] = (w - eta) * tmp[2]
        for j in range(4):
            s[j] = s[j] + h * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) / 6.0
            o[k + 1, j] = s[j]
        if fabs(s[0]) + fabs(s[1]) + fabs(s[2]) + fabs(s[3]) > BLOWUP:
            status = 1
            break
    return out, status


def rk4_pendulum(const double[::1] t, double ell, double theta0, double omega0):
    """Integrate theta'' + ell sin(theta) = 0 over the nodes ``t``."""
    cdef Py_ssize_t n = t.shape[0] - 1
    cdef Py_ssize_t k
    cdef double h, th, om, a1, b1, a2, b2, a3, b3, a4, b4
    th_out = np.empty(n + 1)
    om_out = np.empty(n + 1)
    cdef double[::1] ths = th_out
    cdef double[::1] oms = om_out
    th = theta0
    om = omega0
    ths[0] = th
    oms[0] = om
    for k in range(n):
        h = t[k + 1] - t[k]
        a1 = om
        b1 = -ell * sin(th)
        a2 = om + 0.5 * h * b1
        b2 = -ell * sin(th + 0.5 * h * a1)
        a3 = om + 0.5 * h * b2
        b3 = -ell * sin(th + 0.5 * h * a2)
        a4 = om + h * b3
        b4 = -ell * sin(th + h * a3)
        th = th + h * (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0
        om = om + h * (b1 + 2.0 * b2 + 2.0 * b3 + b4) / 6.0
        ths[k + 1] = th
        oms[k + 1] = om
    return th_out, om_out
