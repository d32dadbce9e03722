"""Hot numerical kernels: adaptive Gauss-Kronrod quadrature over the oval
parametrisation, and a Dormand-Prince 5(4) integrator with section crossing.

Everything here is written in the numba-compatible subset of Python.  With
numba disabled (see :mod:`pfab._accel`) the same functions run as plain
Python, which is slow but bit-for-bit the same algorithm.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import njit

# --------------------------------------------------------------------------
# Gauss-Kronrod 7/15 nodes and weights on [-1, 1]
# --------------------------------------------------------------------------
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# Layout of the integrand parameter vector used by the oval quadrature.
P_LOGA, P_LAM, P_Q, P_E, P_P, P_LOGC, P_PU, P_MODE, P_H, P_K, P_L2, P_L1, P_SGN = range(13)
NPARAM = 13

MAXSEG = 4000


@njit
def oval_integrand(theta, par):
    """Integrand in theta after u = a*exp(Lam*sin(theta)**2).

    mode 0:  u**e * (2 phi)**p du
    mode 1:  u**e * (2 phi)**p * phi'(x) du,   x = sgn*u

    phi = C * u**pu * (w - w1) * (w2 - w) with w = u**(1/q).
    """
    loga = par[P_LOGA]
    lam = par[P_LAM]
    q = par[P_Q]
    e = par[P_E]
    p = par[P_P]
    st = math.sin(theta)
    ct = math.cos(theta)
    s2 = st * st
    c2 = ct * ct
    logu = loga + lam * s2
    lw = lam / q
    logw1 = loga / q
    # w - w1 and w2 - w, both without cancellation
    d1 = math.exp(logw1) * math.expm1(lw * s2)
    d2 = -math.exp(logw1 + lw) * math.expm1(-lw * c2)
    if d1 <= 0.0 or d2 <= 0.0:
        return 0.0
    log2phi = math.log(2.0) + par[P_LOGC] + par[P_PU] * logu + math.log(d1) + math.log(d2)
    val = math.exp((e + 1.0) * logu + p * log2phi) * lam * 2.0 * st * ct
    if par[P_MODE] > 0.5:
        h = par[P_H]
        k = par[P_K]
        sgn = par[P_SGN]
        u = math.exp(logu)
        x = sgn * u
        if sgn > 0.0:
            xk1 = math.exp((k - 1.0) * logu)
        else:
            xk1 = 1.0  # only k = 1 is admitted on x < 0
        val *= k * h * xk1 - 2.0 * par[P_L2] * x - par[P_L1]
    return val


@njit
def _gk15(lo, hi, par, xgk, wgk, wg):
    c = 0.5 * (lo + hi)
    r = 0.5 * (hi - lo)
    fc = oval_integrand(c, par)
    resk = fc * wgk[7]
    resg = fc * wg[3]
    for m in range(7):
        dx = r * xgk[m]
        f1 = oval_integrand(c - dx, par)
        f2 = oval_integrand(c + dx, par)
        resk += wgk[m] * (f1 + f2)
        if m % 2 == 1:
            resg += wg[m // 2] * (f1 + f2)
    return resk * r, abs((resk - resg) * r)


@njit
def adaptive_gk(par, lo, hi, rtol, atol, maxseg):
    """Globally adaptive G7-K15 on [lo, hi].

    Returns (value, error_estimate, status, nseg); status 0 means converged,
    1 means the segment budget ran out.
    """
    xgk = _XGK
    wgk = _WGK
    wg = _WG
    a = np.empty(maxseg)
    b = np.empty(maxseg)
    v = np.empty(maxseg)
    er = np.empty(maxseg)
    ninit = 4
    width = (hi - lo) / ninit
    for m in range(ninit):
        a[m] = lo + m * width
        b[m] = lo + (m + 1) * width if m < ninit - 1 else hi
        v[m], er[m] = _gk15(a[m], b[m], par, xgk, wgk, wg)
    n = ninit
    while True:
        tot = 0.0
        toterr = 0.0
        worst = 0
        for m in range(n):
            tot += v[m]
            toterr += er[m]
            if er[m] > er[worst]:
                worst = m
        if toterr <= max(atol, rtol * abs(tot)):
            return tot, toterr, 0, n
        if n + 1 > maxseg:
            return tot, toterr, 1, n
        mid = 0.5 * (a[worst] + b[worst])
        if mid <= a[worst] or mid >= b[worst]:
            return tot, toterr, 1, n
        a[n] = mid
        b[n] = b[worst]
        b[worst] = mid
        v[worst], er[worst] = _gk15(a[worst], b[worst], par, xgk, wgk, wg)
        v[n], er[n] = _gk15(a[n], b[n], par, xgk, wgk, wg)
        n += 1


# --------------------------------------------------------------------------
# Piecewise vector fields and Dormand-Prince 5(4)
# --------------------------------------------------------------------------
_SQ2 = math.sqrt(2.0)

KIND_S1, KIND_S2, KIND_R19, KIND_R20 = 0, 1, 2, 3


@njit
def _poly2(c, x, y):
    # sum c[i, j] x**i y**j, Horner in y inside Horner in x
    n = c.shape[0]
    acc = 0.0
    for i in range(n - 1, -1, -1):
        row = 0.0
        for j in range(n - 1 - i, -1, -1):
            row = row * y + c[i, j]
        acc = acc * x + row
    return acc


@njit
def field(kind, eps, fc, gc, x, y):
    if kind == KIND_S1:
        u = _SQ2 * x * y
        v = 0.25 * _SQ2 * (1.0 - x * x + 2.0 * y * y)
    elif kind == KIND_S2:
        u = 0.5 * _SQ2 * x * y
        v = 0.5 * _SQ2 * (2.0 - 2.0 * x + y * y)
    elif kind == KIND_R19:
        u = -x * y
        v = -0.75 * y * y + x * x / 256.0 - x / 256.0
    else:
        u = -x * y
        v = -0.25 * y * y + x / 256.0 - 1.0 / 256.0
    if eps != 0.0:
        u += eps * _poly2(fc, x, y)
        v += eps * _poly2(gc, x, y)
    return u, v


# Dormand-Prince tableau
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0,
)


@njit
def _rhs(mode, kind, eps, fc, gc, x, y):
    # mode 0: d/dt (x, y, t);  mode 1: d/dy (x, y, t) (Henon's trick)
    u, v = field(kind, eps, fc, gc, x, y)
    if mode == 0:
        return u, v, 1.0
    return u / v, 1.0, 1.0 / v


@njit
def _dp_step(mode, kind, eps, fc, gc, x, y, t, hs):
    k1x, k1y, k1t = _rhs(mode, kind, eps, fc, gc, x, y)
    k2x, k2y, k2t = _rhs(mode, kind, eps, fc, gc, x + hs * _A21 * k1x, y + hs * _A21 * k1y)
    k3x, k3y, k3t = _rhs(mode, kind, eps, fc, gc,
                         x + hs * (_A31 * k1x + _A32 * k2x), y + hs * (_A31 * k1y + _A32 * k2y))
    k4x, k4y, k4t = _rhs(mode, kind, eps, fc, gc,
                         x + hs * (_A41 * k1x + _A42 * k2x + _A43 * k3x),
                         y + hs * (_A41 * k1y + _A42 * k2y + _A43 * k3y))
    k5x, k5y, k5t = _rhs(mode, kind, eps, fc, gc,
                         x + hs * (_A51 * k1x + _A52 * k2x + _A53 * k3x + _A54 * k4x),
                         y + hs * (_A51 * k1y + _A52 * k2y + _A53 * k3y + _A54 * k4y))
    k6x, k6y, k6t = _rhs(mode, kind, eps, fc, gc,
                         x + hs * (_A61 * k1x + _A62 * k2x + _A63 * k3x + _A64 * k4x + _A65 * k5x),
                         y + hs * (_A61 * k1y + _A62 * k2y + _A63 * k3y + _A64 * k4y + _A65 * k5y))
    xn = x + hs * (_B1 * k1x + _B3 * k3x + _B4 * k4x + _B5 * k5x + _B6 * k6x)
    yn = y + hs * (_B1 * k1y + _B3 * k3y + _B4 * k4y + _B5 * k5y + _B6 * k6y)
    tn = t + hs * (_B1 * k1t + _B3 * k3t + _B4 * k4t + _B5 * k5t + _B6 * k6t)
    k7x, k7y, k7t = _rhs(mode, kind, eps, fc, gc, xn, yn)
    ex = hs * (_E1 * k1x + _E3 * k3x + _E4 * k4x + _E5 * k5x + _E6 * k6x + _E7 * k7x)
    ey = hs * (_E1 * k1y + _E3 * k3y + _E4 * k4y + _E5 * k5y + _E6 * k6y + _E7 * k7y)
    et = hs * (_E1 * k1t + _E3 * k3t + _E4 * k4t + _E5 * k5t + _E6 * k6t + _E7 * k7t)
    return xn, yn, tn, ex, ey, et


# status codes of half_passage
ST_OK, ST_BOX, ST_STEPS, ST_STIFF = 0, 1, 2, 3


@njit
def half_passage(kind, eps, fc, gc, x0, direction, rtol, atol, xlo, xhi, ybox, maxsteps):
    """Integrate from (x0, 0) until the orbit returns to y = 0.

    ``direction`` is +1 when the orbit leaves into y > 0, -1 into y < 0.
    The final approach to the section is done in y as independent variable,
    so the returned point lies exactly on y = 0.

    Returns (x_cross, t_cross, status, nsteps).
    """
    x = x0
    y = 0.0
    t = 0.0
    u, v = field(kind, eps, fc, gc, x, y)
    speed = math.sqrt(u * u + v * v)
    hs = 1e-3 * max(1.0, abs(x0)) / max(speed, 1e-300)
    hs = min(hs, 1e-2)
    nsteps = 0
    left = False
    while nsteps < maxsteps:
        nsteps += 1
        xn, yn, tn, ex, ey, et = _dp_step(0, kind, eps, fc, gc, x, y, t, hs)
        sx = atol + rtol * max(abs(x), abs(xn))
        sy = atol + rtol * max(abs(y), abs(yn))
        err = math.sqrt(0.5 * ((ex / sx) ** 2 + (ey / sy) ** 2))
        if not (err == err):
            err = 1e10
        if err <= 1.0:
            if left and direction * yn <= 0.0:
                # crossed; the y-parametrised finish needs dy/dt of one sign
                # over the whole remaining segment, so shrink until the step
                # starts already heading back to the section
                u, v = field(kind, eps, fc, gc, x, y)
                if direction * v >= 0.0:
                    hs *= 0.5
                    continue
                m = 16
                dyv = -y / m
                xc = x
                yc = y
                tc = t
                for _ in range(m):
                    xc, yc, tc, ex2, ey2, et2 = _dp_step(1, kind, eps, fc, gc, xc, yc, tc, dyv)
                return xc, tc, ST_OK, nsteps
            x, y, t = xn, yn, tn
            if direction * y > 0.0:
                left = True
            if x < xlo or x > xhi or abs(y) > ybox:
                return x, t, ST_BOX, nsteps
            fac = 0.9 * err ** (-0.2) if err > 0.0 else 5.0
            hs *= min(5.0, max(0.2, fac))
        else:
            hs *= max(0.1, 0.9 * err ** (-0.2))
            if hs < 1e-14 * max(1.0, t):
                return x, t, ST_STIFF, nsteps
    return x, t, ST_STEPS, nsteps
