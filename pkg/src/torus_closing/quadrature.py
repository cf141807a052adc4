"""Quadrature rules used by the invariants.

* periodic trapezoid (equal weights) on the torus,
* Gauss-Legendre in radius times trapezoid in angle on a disk,
* composite Gauss-Legendre along polygonal paths, for line integrals of
  pulled-back 1-forms ``h^* lam - lam``.

Every reduction is a plain ``numpy`` sum over arrays of fixed shape, so
repeated calls are bit-identical.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import PathOutsideDisk

__all__ = [
    "GridSpec", "Path", "Primitive", "POLAR", "XDY", "YDX",
    "torus_nodes", "integrate_torus", "disk_rule", "integrate_disk",
    "line_integral_pullback", "pullback_integrals",
]


@dataclass(frozen=True)
class GridSpec:
    """Points per axis of the periodic trapezoid rule."""

    n: int = 128

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8:
            raise ValueError(f"grid needs n >= 8, got {self.n}")


@lru_cache(maxsize=8)
def _torus_nodes(n):
    s = np.arange(n, dtype=np.float64) / n
    x, y = np.meshgrid(s, s, indexing="ij")
    nodes = np.stack([x, y], axis=-1)
    nodes.setflags(write=False)
    return nodes


def torus_nodes(grid):
    """Read-only ``(n, n, 2)`` array of nodes ``(i/n, j/n)``."""
    n = grid.n if isinstance(grid, GridSpec) else int(grid)
    return _torus_nodes(n)


def integrate_torus(f, grid=GridSpec()):
    """Integral over [0,1)^2 of a 1-periodic field.

    ``f(x, y)`` receives ``(n, n)`` arrays and may return an ``(n, n)`` or
    ``(n, n, k)`` array; the result is a float or a length-``k`` array.
    """
    nodes = torus_nodes(grid)
    vals = np.asarray(f(nodes[..., 0], nodes[..., 1]), dtype=np.float64)
    if vals.ndim == 0:
        return float(vals)
    out = vals.mean(axis=(0, 1))
    return float(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=32)
def _gauss(m):
    x, w = np.polynomial.legendre.leggauss(m)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def disk_rule(center=(0.0, 0.0), radius=1.0, radial_nodes=96, angular_nodes=128):
    """Nodes ``(nr, nth, 2)`` and area weights ``(nr, nth)`` for a disk."""
    x, w = _gauss(radial_nodes)
    r = 0.5 * radius * (x + 1.0)
    wr = 0.5 * radius * w * r
    theta = 2.0 * np.pi * np.arange(angular_nodes) / angular_nodes
    nodes = np.empty((radial_nodes, angular_nodes, 2))
    nodes[..., 0] = center[0] + r[:, None] * np.cos(theta)[None, :]
    nodes[..., 1] = center[1] + r[:, None] * np.sin(theta)[None, :]
    weights = np.repeat(wr[:, None] * (2.0 * np.pi / angular_nodes), angular_nodes, axis=1)
    return nodes, weights


def integrate_disk(f, radial_nodes=96, angular_nodes=128, center=(0.0, 0.0), radius=1.0):
    """Integral of ``f(x, y)`` over the disk with the area element ``r dr dtheta``."""
    nodes, weights = disk_rule(center, radius, radial_nodes, angular_nodes)
    vals = np.asarray(f(nodes[..., 0], nodes[..., 1]), dtype=np.float64)
    return float(np.sum(np.broadcast_to(vals, weights.shape) * weights))


@dataclass(frozen=True)
class Path:
    """Polygonal path through ``waypoints``, ``nodes`` Gauss points per segment."""

    waypoints: tuple
    nodes: int = 64

    def __post_init__(self):
        pts = tuple((float(p[0]), float(p[1])) for p in self.waypoints)
        if len(pts) < 2:
            raise ValueError("a path needs at least two points")
        if self.nodes < 16:
            raise ValueError(f"paths need at least 16 nodes per segment, got {self.nodes}")
        for a, b in zip(pts[:-1], pts[1:]):
            if a == b:
                raise ValueError("consecutive path vertices must be distinct")
        object.__setattr__(self, "waypoints", pts)

    @classmethod
    def segment(cls, start, end, nodes=64):
        return cls((tuple(start), tuple(end)), nodes)

    @property
    def start(self):
        return self.waypoints[0]

    @property
    def end(self):
        return self.waypoints[-1]

    def quadrature(self):
        """Points ``(M, 2)`` and weighted tangents ``(M, 2)`` along the path."""
        x, w = _gauss(self.nodes)
        s = 0.5 * (x + 1.0)
        pts, tan = [], []
        for a, b in zip(self.waypoints[:-1], self.waypoints[1:]):
            a = np.asarray(a)
            d = np.asarray(b) - a
            pts.append(a[None, :] + s[:, None] * d[None, :])
            tan.append(0.5 * w[:, None] * d[None, :])
        return np.concatenate(pts), np.concatenate(tan)


@dataclass(frozen=True)
class Primitive:
    """A 1-form ``P dx + Q dy`` on a disk chart.

    ``coeffs(uv, xy)`` returns ``(P, Q)``; ``uv`` are chart coordinates
    (offset from the chart origin) and ``xy`` the matching lift coordinates.
    """

    name: str
    coeffs: object

    def plus_exact(self, grad, name=None):
        """``self + dS`` where ``grad(xy)`` returns ``(S_x, S_y)``."""
        base = self.coeffs

        def coeffs(uv, xy):
            p, q = base(uv, xy)
            sx, sy = grad(xy)
            return p + sx, q + sy

        return Primitive(name or f"{self.name}+dS", coeffs)


# (x dy - y dx) / 2 = (r^2 / 2) dtheta; d of it is dx ^ dy
POLAR = Primitive("polar", lambda uv, xy: (-0.5 * uv[..., 1], 0.5 * uv[..., 0]))
XDY = Primitive("xdy", lambda uv, xy: (np.zeros_like(uv[..., 0]), uv[..., 0]))
# d(y dx) = -dx ^ dy: actions computed with it carry the opposite sign
YDX = Primitive("ydx", lambda uv, xy: (uv[..., 1], np.zeros_like(uv[..., 0])))


def _pullback_density(fmap, pts, tan, origin, primitive):
    """Integrand values ``(h^* lam - lam)(tan)`` at ``pts``."""
    img, jac = fmap.evaluate(pts, want_jac=True)
    origin = np.asarray(origin, dtype=np.float64)
    uv = pts - origin
    uv = uv - np.floor(uv + 0.5)
    # image chart coordinates follow the displacement, not a fresh wrap
    huv = uv + (img - pts)
    p0, q0 = primitive.coeffs(uv, origin + uv)
    p1, q1 = primitive.coeffs(huv, origin + huv)
    dh = np.einsum("...ij,...j->...i", jac, tan)
    return p1 * dh[..., 0] + q1 * dh[..., 1] - (p0 * tan[..., 0] + q0 * tan[..., 1])


def pullback_integrals(fmap, starts, ends, nodes=64, primitive=POLAR, origin=(0.0, 0.0),
                       panels=1):
    """Batched straight-segment integrals of ``h^* lam - lam``.

    ``starts`` and ``ends`` are ``(N, 2)``; returns ``(N,)``. Each segment is
    cut into ``panels`` equal pieces with ``nodes`` Gauss points apiece.
    """
    starts = np.asarray(starts, dtype=np.float64).reshape(-1, 2)
    ends = np.asarray(ends, dtype=np.float64).reshape(-1, 2)
    x, w = _gauss(nodes)
    s = ((np.arange(panels)[:, None] + 0.5 * (x + 1.0)[None, :]) / panels).ravel()
    w = np.tile(w, panels) / panels
    if primitive is POLAR:
        kinds, params = fmap.encoded
        return kernels.polar_pullback(kinds, params, starts, ends, s, 0.5 * w,
                                      np.asarray(origin, dtype=np.float64))
    d = ends - starts
    pts = starts[:, None, :] + s[None, :, None] * d[:, None, :]
    tan = np.broadcast_to(0.5 * w[None, :, None] * d[:, None, :], pts.shape)
    vals = _pullback_density(fmap, pts, tan, origin, primitive)
    return vals.sum(axis=1)


def line_integral_pullback(fmap, path, primitive=POLAR, disk=None):
    """Integral along ``path`` of ``h^* lam - lam`` for a disk-supported map.

    Coordinates of ``lam`` are taken in the chart centred at ``disk.center``
    (the origin when ``disk`` is None). With a disk given, every quadrature
    node must lie in the closed disk, else :class:`PathOutsideDisk`.
    """
    pts, tan = path.quadrature()
    origin = (0.0, 0.0) if disk is None else disk.center
    if disk is not None:
        check = np.vstack([pts, np.asarray(path.waypoints)])
        if not np.all(disk.contains(check, margin=1e-12 * disk.radius)):
            raise PathOutsideDisk("path leaves the disk")
    return float(np.sum(_pullback_density(fmap, pts, tan, origin, primitive)))
