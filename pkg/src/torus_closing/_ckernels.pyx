# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled chain evaluation.

Same contract as :mod:`torus_closing._pykernels`; see that module for the
parameter layout.
"""
import numpy as np

from libc.math cimport cos, exp, floor, sin, sqrt

cdef enum:
    TRANSLATE = 0
    HSHEAR = 1
    VSHEAR = 2
    DISKTWIST = 3


cdef inline double _expit(double w) noexcept nogil:
    cdef double e
    if w >= 0.0:
        return 1.0 / (1.0 + exp(-w))
    e = exp(w)
    return e / (1.0 + e)


cdef inline void _bump(double s, double inner, double outer,
                       double* val, double* der) noexcept nogil:
    cdef double width = outer - inner
    cdef double u = (s - inner) / width
    cdef double w, sp, sm
    if u <= 0.0:
        val[0] = 1.0
        der[0] = 0.0
        return
    if u >= 1.0:
        val[0] = 0.0
        der[0] = 0.0
        return
    w = 1.0 / u - 1.0 / (1.0 - u)
    sp = _expit(w)
    sm = _expit(-w)
    val[0] = sp
    der[0] = sp * sm * (-1.0 / (u * u) - 1.0 / ((1.0 - u) * (1.0 - u))) / width


cdef inline void _band(double y, double lo, double hi, double inner, double outer,
                       double* val, double* der) noexcept nogil:
    cdef double yy = y - floor(y)
    cdef double half = 0.5 * (hi - lo)
    cdef double z = (yy - 0.5 * (lo + hi)) / half
    cdef double v, d
    if z <= -1.0 or z >= 1.0:
        val[0] = 0.0
        der[0] = 0.0
        return
    if z >= 0.0:
        _bump(z, inner, outer, &v, &d)
        der[0] = d / half
    else:
        _bump(-z, inner, outer, &v, &d)
        der[0] = -d / half
    val[0] = v


cdef void _eval_one(const int[:] kinds, const double[:, :] params,
                    double* px, double* py, double* jac, bint want_jac) noexcept nogil:
    cdef Py_ssize_t k, ngen = kinds.shape[0]
    cdef double x = px[0], y = py[0]
    cdef double j00 = 1.0, j01 = 0.0, j10 = 0.0, j11 = 1.0
    cdef double l00, l01, l10, l11, t00, t01, t10, t11
    cdef double val, der, dx, dy, rho, radius, phi, c, s, nx, ny, gx, gy, g
    cdef int kind
    for k in range(ngen):
        kind = kinds[k]
        if kind == TRANSLATE:
            x += params[k, 0]
            y += params[k, 1]
            continue
        if kind == HSHEAR:
            _band(y, params[k, 1], params[k, 2], params[k, 3], params[k, 4], &val, &der)
            x += params[k, 0] * val
            if want_jac:
                g = params[k, 0] * der
                j00 = j00 + g * j10
                j01 = j01 + g * j11
            continue
        if kind == VSHEAR:
            _band(x, params[k, 1], params[k, 2], params[k, 3], params[k, 4], &val, &der)
            y += params[k, 0] * val
            if want_jac:
                g = params[k, 0] * der
                j10 = j10 + g * j00
                j11 = j11 + g * j01
            continue
        # DISKTWIST
        radius = params[k, 2]
        dx = x - params[k, 0]
        dx -= floor(dx + 0.5)
        dy = y - params[k, 1]
        dy -= floor(dy + 0.5)
        rho = sqrt(dx * dx + dy * dy)
        if rho >= radius:
            continue
        _bump(rho / radius, params[k, 4], params[k, 5], &val, &der)
        phi = params[k, 3] * val
        c = cos(phi)
        s = sin(phi)
        nx = c * dx - s * dy
        ny = s * dx + c * dy
        x += nx - dx
        y += ny - dy
        if want_jac:
            if rho > 0.0:
                g = params[k, 3] * der / (radius * rho)
                gx = g * dx
                gy = g * dy
            else:
                gx = 0.0
                gy = 0.0
            l00 = c - ny * gx
            l01 = -s - ny * gy
            l10 = s + nx * gx
            l11 = c + nx * gy
            t00 = l00 * j00 + l01 * j10
            t01 = l00 * j01 + l01 * j11
            t10 = l10 * j00 + l11 * j10
            t11 = l10 * j01 + l11 * j11
            j00 = t00
            j01 = t01
            j10 = t10
            j11 = t11
    px[0] = x
    py[0] = y
    if want_jac:
        jac[0] = j00
        jac[1] = j01
        jac[2] = j10
        jac[3] = j11


def eval_chain(kinds, params, points, bint want_jac=False):
    cdef const int[:] kv = np.ascontiguousarray(kinds, dtype=np.intc)
    cdef const double[:, :] pv = np.ascontiguousarray(params, dtype=np.float64)
    pts = np.array(points, dtype=np.float64, order="C", copy=True)
    cdef double[:, :] out = pts
    cdef Py_ssize_t i, n = out.shape[0]
    jac = np.empty((n, 2, 2), dtype=np.float64) if want_jac else np.empty((1, 2, 2))
    cdef double[:, :, :] jv = jac
    cdef double dummy[4]
    with nogil:
        for i in range(n):
            if want_jac:
                _eval_one(kv, pv, &out[i, 0], &out[i, 1], &jv[i, 0, 0], True)
            else:
                _eval_one(kv, pv, &out[i, 0], &out[i, 1], dummy, False)
    return pts, (jac if want_jac else None)


def polar_pullback(kinds, params, starts, ends, s, w, origin):
    cdef const int[:] kv = np.ascontiguousarray(kinds, dtype=np.intc)
    cdef const double[:, :] pv = np.ascontiguousarray(params, dtype=np.float64)
    cdef const double[:, :] a = np.ascontiguousarray(starts, dtype=np.float64)
    cdef const double[:, :] b = np.ascontiguousarray(ends, dtype=np.float64)
    cdef const double[:] sv = np.ascontiguousarray(s, dtype=np.float64)
    cdef const double[:] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double ox = origin[0], oy = origin[1]
    cdef Py_ssize_t i, j, n = a.shape[0], m = sv.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[:] ov = out
    cdef double jac[4]
    cdef double dx, dy, px, py, x, y, u, v, hu, hv, tx, ty, hx, hy, acc
    with nogil:
        for i in range(n):
            dx = b[i, 0] - a[i, 0]
            dy = b[i, 1] - a[i, 1]
            acc = 0.0
            for j in range(m):
                px = a[i, 0] + sv[j] * dx
                py = a[i, 1] + sv[j] * dy
                x = px
                y = py
                _eval_one(kv, pv, &x, &y, jac, True)
                u = px - ox
                u -= floor(u + 0.5)
                v = py - oy
                v -= floor(v + 0.5)
                hu = u + (x - px)
                hv = v + (y - py)
                tx = wv[j] * dx
                ty = wv[j] * dy
                hx = jac[0] * tx + jac[1] * ty
                hy = jac[2] * tx + jac[3] * ty
                acc += 0.5 * ((hu * hy - u * ty) - (hv * hx - v * tx))
            ov[i] = acc
    return out
