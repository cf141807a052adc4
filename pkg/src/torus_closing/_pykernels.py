"""Numpy implementation of chain evaluation.

A chain is encoded as two arrays, in *application* order (first row acts
first):

``kinds``
    int array, one code per generator (see ``TRANSLATE`` ... ``DISKTWIST``).
``params``
    float array of shape ``(n_generators, 6)``:

    ======== ===== ===== ===== ====== ====== ======
    kind     0     1     2     3      4      5
    ======== ===== ===== ===== ====== ====== ======
    translate a    b
    hshear   eps   lo    hi    inner  outer
    vshear   eps   lo    hi    inner  outer
    twist    cx    cy    r     t      inner  outer
    ======== ===== ===== ===== ====== ====== ======

``eval_chain`` maps an ``(N, 2)`` array of lift coordinates and optionally
returns the ``(N, 2, 2)`` Jacobians, accumulated by the chain rule.
"""
import numpy as np

TRANSLATE = 0
HSHEAR = 1
VSHEAR = 2
DISKTWIST = 3


def _expit(w):
    out = np.empty_like(w)
    pos = w >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-w[pos]))
    e = np.exp(w[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def bump(s, inner, outer):
    """Plateau profile and its derivative, vectorized over ``s``."""
    s = np.asarray(s, dtype=np.float64)
    width = outer - inner
    u = (s - inner) / width
    val = np.where(u <= 0.0, 1.0, 0.0)
    der = np.zeros_like(u)
    mid = (u > 0.0) & (u < 1.0)
    if np.any(mid):
        um = u[mid]
        w = 1.0 / um - 1.0 / (1.0 - um)
        sp = _expit(w)
        sm = _expit(-w)
        val[mid] = sp
        der[mid] = sp * sm * (-1.0 / (um * um) - 1.0 / ((1.0 - um) * (1.0 - um))) / width
    return val, der


def band_profile(y, lo, hi, inner, outer):
    """Symmetric band bump on the circle: value and d/dy."""
    yy = y - np.floor(y)
    half = 0.5 * (hi - lo)
    z = (yy - 0.5 * (lo + hi)) / half
    val = np.zeros_like(z)
    der = np.zeros_like(z)
    inside = (z > -1.0) & (z < 1.0)
    if np.any(inside):
        zi = z[inside]
        v, d = bump(np.abs(zi), inner, outer)
        val[inside] = v
        der[inside] = np.where(zi >= 0.0, d, -d) / half
    return val, der


def eval_chain(kinds, params, points, want_jac=False):
    pts = np.array(points, dtype=np.float64, copy=True).reshape(-1, 2)
    x = pts[:, 0]
    y = pts[:, 1]
    n = len(pts)
    if want_jac:
        j00 = np.ones(n)
        j01 = np.zeros(n)
        j10 = np.zeros(n)
        j11 = np.ones(n)
    for kind, p in zip(np.asarray(kinds), np.asarray(params, dtype=np.float64)):
        if kind == TRANSLATE:
            x += p[0]
            y += p[1]
        elif kind == HSHEAR:
            val, der = band_profile(y, p[1], p[2], p[3], p[4])
            x += p[0] * val
            if want_jac:
                g = p[0] * der
                j00 = j00 + g * j10
                j01 = j01 + g * j11
        elif kind == VSHEAR:
            val, der = band_profile(x, p[1], p[2], p[3], p[4])
            y += p[0] * val
            if want_jac:
                g = p[0] * der
                j10 = j10 + g * j00
                j11 = j11 + g * j01
        elif kind == DISKTWIST:
            cx, cy, radius, t, inner, outer = p
            dx = x - cx
            dx = dx - np.floor(dx + 0.5)
            dy = y - cy
            dy = dy - np.floor(dy + 0.5)
            rho = np.sqrt(dx * dx + dy * dy)
            m = rho < radius
            if not np.any(m):
                continue
            dxm, dym, rm = dx[m], dy[m], rho[m]
            val, der = bump(rm / radius, inner, outer)
            phi = t * val
            c = np.cos(phi)
            s = np.sin(phi)
            nx = c * dxm - s * dym
            ny = s * dxm + c * dym
            x[m] += nx - dxm
            y[m] += ny - dym
            if want_jac:
                safe = np.where(rm > 0.0, rm, 1.0)
                g = np.where(rm > 0.0, t * der / (radius * safe), 0.0)
                gx = g * dxm
                gy = g * dym
                l00 = c - ny * gx
                l01 = -s - ny * gy
                l10 = s + nx * gx
                l11 = c + nx * gy
                a00, a01, a10, a11 = j00[m], j01[m], j10[m], j11[m]
                j00[m] = l00 * a00 + l01 * a10
                j01[m] = l00 * a01 + l01 * a11
                j10[m] = l10 * a00 + l11 * a10
                j11[m] = l10 * a01 + l11 * a11
        else:
            raise ValueError(f"unknown generator code {kind}")
    if not want_jac:
        return pts, None
    jac = np.empty((n, 2, 2))
    jac[:, 0, 0] = j00
    jac[:, 0, 1] = j01
    jac[:, 1, 0] = j10
    jac[:, 1, 1] = j11
    return pts, jac


def polar_pullback(kinds, params, starts, ends, s, w, origin):
    """Segment integrals of ``h^* lam - lam`` for ``lam = (u dv - v du) / 2``.

    ``(u, v)`` are chart coordinates about ``origin``; ``s`` and ``w`` are
    quadrature nodes and weights on [0, 1]. Returns one value per segment.
    """
    starts = np.asarray(starts, dtype=np.float64)
    d = np.asarray(ends, dtype=np.float64) - starts
    pts = starts[:, None, :] + s[None, :, None] * d[:, None, :]
    n, m = pts.shape[:2]
    img, jac = eval_chain(kinds, params, pts.reshape(-1, 2), True)
    img = img.reshape(n, m, 2)
    jac = jac.reshape(n, m, 2, 2)
    uv = pts - np.asarray(origin, dtype=np.float64)
    uv -= np.floor(uv + 0.5)
    huv = uv + (img - pts)
    tan = w[None, :, None] * d[:, None, :]
    dh = np.einsum("nmij,nmj->nmi", jac, tan)
    vals = 0.5 * ((huv[..., 0] * dh[..., 1] - uv[..., 0] * tan[..., 1])
                  - (huv[..., 1] * dh[..., 0] - uv[..., 1] * tan[..., 0]))
    return vals.sum(axis=1)
