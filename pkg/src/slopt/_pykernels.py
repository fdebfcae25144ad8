"""Pure-Python twins of the compiled kernels in ``_kernels.pyx``.

Selected automatically when the extension is not built, or forced with
``SLOPT_PURE_PYTHON=1``.  Loops are plain Python on floats; the arithmetic
order matches the Cython source so both backends agree to rounding.
"""

import math

import numpy as np

BLOWUP = 1e12


def rk4_linear(t, qa, qm, qb, lam, y0, v0, jump, renorm):
    t = list(map(float, t))
    qa = list(map(float, qa))
    qm = list(map(float, qm))
    qb = list(map(float, qb))
    jump = list(map(float, jump))
    n = len(t) - 1
    ys = [math.nan] * (n + 1)
    vs = [math.nan] * (n + 1)
    y = float(y0)
    v = float(v0) - jump[0] * y
    last_sign = (y > 0.0) - (y < 0.0)
    zeros = 0
    status = 0
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
        sign = (y > 0.0) - (y < 0.0)
        if sign != 0:
            if last_sign != 0 and sign != last_sign:
                zeros += 1
            last_sign = sign
        s = abs(y) + abs(v)
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
    return np.array(ys), np.array(vs), zeros, status


def _pw(u, e):
    return 0.0 if u <= 0.0 else u ** e


def _rhs(s, xi, eta, expo):
    w = _pw(s[0] * s[0] + s[2] * s[2], expo)
    return (s[1], (w - xi) * s[0], s[3], (w - eta) * s[2])


def rk4_critical(t, xi, eta, expo, a, b):
    t = list(map(float, t))
    n = len(t) - 1
    out = np.full((n + 1, 4), np.nan)
    s = (0.0, float(a), 0.0, float(b))
    rows = [s]
    status = 0
    for k in range(n):
        h = t[k + 1] - t[k]
        k1 = _rhs(s, xi, eta, expo)
        k2 = _rhs([s[j] + 0.5 * h * k1[j] for j in range(4)], xi, eta, expo)
        k3 = _rhs([s[j] + 0.5 * h * k2[j] for j in range(4)], xi, eta, expo)
        k4 = _rhs([s[j] + h * k3[j] for j in range(4)], xi, eta, expo)
        s = tuple(s[j] + h * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) / 6.0
                  for j in range(4))
        rows.append(s)
        if abs(s[0]) + abs(s[1]) + abs(s[2]) + abs(s[3]) > BLOWUP:
            status = 1
            break
    out[: len(rows)] = rows
    return out, status


def rk4_pendulum(t, ell, theta0, omega0):
    t = list(map(float, t))
    n = len(t) - 1
    ths = [0.0] * (n + 1)
    oms = [0.0] * (n + 1)
    th = float(theta0)
    om = float(omega0)
    ths[0] = th
    oms[0] = om
    sin = math.sin
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
    return np.array(ths), np.array(oms)
