"""Flux vectors, loop fluxes and actions of torus maps.

Conventions
-----------
``flux_vector`` integrates the displacement of the generator lift (the lift
obtained by lifting each generator along its own isotopy), so it is additive
under composition and not just additive mod 1. ``FluxVector.reduced`` is the
class on the torus.

The swept area across the horizontal cycle ``a`` equals ``vy`` and across the
vertical cycle ``b`` equals ``vx``. The cohomology coefficients ``(a1, a2)``
of the isotopy are ``J0 @ (vx, vy) = (-vy, vx)`` and are exposed as
``FluxVector.pairing``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import Disk, Point2, compose, project
from .errors import NotDiskSupported
from .quadrature import (
    POLAR, GridSpec, Path, disk_rule, integrate_torus, pullback_integrals,
)

__all__ = [
    "FLUX_GRID", "J0", "FluxVector", "Loop", "ActionProfile", "AdditivityReport",
    "flux_vector", "loop_area", "loop_flux", "action_profile",
    "check_action_additivity", "is_exact",
]

FLUX_GRID = GridSpec(512)
J0 = np.array([[0.0, -1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class FluxVector:
    vx: float
    vy: float

    @property
    def vector(self):
        return np.array([self.vx, self.vy])

    @property
    def reduced(self):
        return Point2(*(float(v) for v in project(self.vector)))

    @property
    def pairing(self):
        """Coefficients ``(a1, a2)`` of ``a1 dx + a2 dy``."""
        return tuple(float(v) for v in J0 @ self.vector)


def flux_vector(fmap, grid=FLUX_GRID):
    """Torus average of ``lift(p) - p``."""

    def displacement(x, y):
        pts = np.stack([x, y], axis=-1)
        return fmap(pts) - pts

    vx, vy = integrate_torus(displacement, grid)
    return FluxVector(float(vx), float(vy))


class Loop(NamedTuple):
    """``kind`` is ``"a"`` (horizontal, at height ``level``) or ``"b"`` (vertical)."""

    kind: str
    level: float = 0.0

    @classmethod
    def a(cls, y0=0.0):
        return cls("a", float(y0))

    @classmethod
    def b(cls, x0=0.0):
        return cls("b", float(x0))


def loop_area(fmap, loop, nodes=1024):
    """Signed area between ``loop`` and its image, not reduced.

    For the horizontal cycle ``s -> (s, y0)`` this is the integral of
    ``(Y - y0) dX`` over the image curve; the vertical cycle uses
    ``(X - x0) dY``.
    """
    s = np.arange(nodes, dtype=np.float64) / nodes
    if loop.kind == "a":
        pts = np.column_stack([s, np.full_like(s, loop.level)])
        img, jac = fmap.evaluate(pts, want_jac=True)
        dens = (img[:, 1] - loop.level) * jac[:, 0, 0]
    elif loop.kind == "b":
        pts = np.column_stack([np.full_like(s, loop.level), s])
        img, jac = fmap.evaluate(pts, want_jac=True)
        dens = (img[:, 0] - loop.level) * jac[:, 1, 1]
    else:
        raise ValueError(f"loop kind must be 'a' or 'b', got {loop.kind!r}")
    return float(dens.mean())


def loop_flux(fmap, loop, nodes=1024):
    """Flux across ``loop``, in [0, 1)."""
    v = loop_area(fmap, loop, nodes) % 1.0
    return 0.0 if v >= 1.0 else v


@dataclass(frozen=True)
class ActionProfile:
    """Action function of a disk-supported map and its integral.

    ``values`` holds the action at the disk quadrature ``nodes``; ``g``
    evaluates it anywhere in the disk by a radial line integral.
    """

    disk: Disk
    total: float
    nodes: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    boundary_residual: float
    fmap: object
    primitive: object
    path_nodes: int

    path_panels: int = 4

    def g(self, points):
        return _action_at(self.fmap, self.disk, points, self.primitive, self.path_nodes,
                          self.path_panels)


def _boundary_starts(disk, points):
    uv = disk.local(points)
    rho = np.hypot(uv[..., 0], uv[..., 1])
    safe = np.where(rho > 0.0, rho, 1.0)
    ux = np.where(rho > 0.0, uv[..., 0] / safe, 1.0)
    uy = np.where(rho > 0.0, uv[..., 1] / safe, 0.0)
    c = np.asarray(disk.center)
    starts = np.stack([c[0] + disk.radius * ux, c[1] + disk.radius * uy], axis=-1)
    ends = c + uv
    return starts, ends


def _action_at(fmap, disk, points, primitive, path_nodes, path_panels):
    points = np.asarray(points, dtype=np.float64)
    starts, ends = _boundary_starts(disk, points.reshape(-1, 2))
    vals = pullback_integrals(fmap, starts, ends, path_nodes, primitive, disk.center, path_panels)
    return vals.reshape(points.shape[:-1])


def check_disk_support(fmap, disk, tol=1e-10, samples=256):
    """Largest displacement on circles at and just around the boundary."""
    worst = 0.0
    for scale in (0.999, 1.0, 1.001):
        pts = disk.boundary(samples, scale)
        worst = max(worst, float(np.max(np.abs(fmap(pts) - pts))))
    if worst > tol:
        raise NotDiskSupported(
            f"map moves points near the boundary of {disk} by {worst:.3e} > {tol:.1e}")
    return worst


def action_profile(fmap, disk, primitive=POLAR, radial_nodes=96, angular_nodes=128,
                   path_nodes=32, path_panels=4, support_tol=1e-10):
    """Action function (zero on the boundary) and total action on ``disk``.

    The action at a point is the integral of ``h^* lam - lam`` along the
    radial segment from the boundary, cut into ``path_panels`` Gauss panels
    of ``path_nodes`` points. ``boundary_residual`` is the largest
    value of that integral along boundary-to-center-to-boundary paths, which
    vanishes for an exact form.
    """
    if not isinstance(disk, Disk):
        disk = Disk.make(*disk)
    check_disk_support(fmap, disk, support_tol)
    nodes, weights = disk_rule(disk.center, disk.radius, radial_nodes, angular_nodes)
    values = _action_at(fmap, disk, nodes, primitive, path_nodes, path_panels)
    total = float(np.sum(values * weights))

    c = np.asarray(disk.center)
    anchor = c + np.array([disk.radius, 0.0])
    ring = disk.boundary(32)[1:]
    legs = pullback_integrals(fmap, np.vstack([anchor[None, :], np.repeat(c[None, :], len(ring), 0)]),
                              np.vstack([c[None, :], ring]), path_nodes, primitive, disk.center,
                              panels=max(16, path_panels))
    # only 32 legs, so a much finer rule is cheap and keeps this a clean diagnostic
    boundary_residual = float(np.max(np.abs(legs[0] + legs[1:])))
    return ActionProfile(disk, total, nodes, values, weights, boundary_residual,
                         fmap, primitive, path_nodes, path_panels)


@dataclass(frozen=True)
class AdditivityReport:
    lhs: float
    rhs: float
    residual: float
    a1: float
    a2: float


def check_action_additivity(f1, f2, disk, **kwargs):
    """Compare ``A(f2 o f1)`` with ``A(f1) + A(f2)`` on a common disk."""
    a1 = action_profile(f1, disk, **kwargs).total
    a2 = action_profile(f2, disk, **kwargs).total
    a12 = action_profile(compose(f2, f1), disk, **kwargs).total
    return AdditivityReport(a12, a1 + a2, abs(a12 - a1 - a2), a1, a2)


def is_exact(fmap, grid=FLUX_GRID, tol=1e-9):
    """True when some lift has (numerically) zero mean displacement."""
    r = np.asarray(flux_vector(fmap, grid).reduced)
    return bool(np.all(np.minimum(r, 1.0 - r) <= tol))


def radial_path(disk, point, nodes=64):
    """Radial segment from the boundary to ``point`` (for direct use)."""
    start, end = _boundary_starts(disk, np.asarray(point, dtype=np.float64)[None, :])
    return Path.segment(start[0], end[0], nodes)
