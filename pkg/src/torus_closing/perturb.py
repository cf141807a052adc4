"""Perturbation families: disk twists with nonzero action, and band shears
that move the flux vector onto a rational point."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import (
    SHEAR_PROFILE, BumpProfile, Disk, DiskTwist, HorizontalShear, TorusMap,
    VerticalShear,
)
from .errors import TargetUnreachable
from .invariants import FLUX_GRID, action_profile, flux_vector
from .quadrature import torus_nodes

__all__ = [
    "TwistFamily", "RationalizationResult", "twist_family", "best_rational_pair",
    "rationalize_flux", "DEFAULT_H_BAND", "DEFAULT_V_BAND",
]

DEFAULT_H_BAND = (0.0, 0.5)
DEFAULT_V_BAND = (0.5, 1.0)


@dataclass(frozen=True)
class TwistFamily:
    disk: Disk
    profile: BumpProfile
    action_slope: float

    def member(self, t):
        if t == 0:
            return TorusMap(())
        return TorusMap((DiskTwist(self.disk.center, self.disk.radius, float(t), self.profile),))

    def action(self, t):
        """Total action of ``member(t)``; linear in ``t``."""
        return t * self.action_slope


def twist_family(disk, profile=None, **action_kwargs):
    """Twist family on ``disk``; its action slope ``A(h_1)`` is computed once."""
    if not isinstance(disk, Disk):
        disk = Disk.make(*disk)
    else:
        disk = Disk.make(disk.center[0], disk.center[1], disk.radius)
    profile = profile or BumpProfile()
    h1 = TorusMap((DiskTwist(disk.center, disk.radius, 1.0, profile),))
    slope = action_profile(h1, disk, **action_kwargs).total
    return TwistFamily(disk, profile, slope)


@dataclass(frozen=True)
class RationalizationResult:
    perturbed: TorusMap
    q: int
    p: tuple
    eps_used: tuple
    c0_size: float
    c1_size: float
    original_flux: tuple
    achieved_flux: tuple
    flux_residual: float

    @property
    def target(self):
        return (self.p[0] / self.q, self.p[1] / self.q)


def _round(v):
    return math.floor(v + 0.5)


def best_rational_pair(v, q_max, reach=None):
    """Closest pair ``(p1/q, p2/q)`` to ``v`` with ``1 <= q <= q_max``.

    ``reach(delta) -> bool`` filters candidates (``delta`` = target - v).
    Ties in distance go to the smaller denominator; the result is in lowest
    terms. Returns ``(q, (p1, p2), delta)`` or None if nothing qualifies.
    """
    best = None
    for q in range(1, int(q_max) + 1):
        p = (_round(q * v[0]), _round(q * v[1]))
        g = math.gcd(math.gcd(p[0], p[1]), q)
        if g > 1:
            continue  # same rational already seen with denominator q / g
        delta = np.array([p[0] / q - v[0], p[1] / q - v[1]])
        if reach is not None and not reach(delta):
            continue
        dist = float(np.hypot(*delta))
        if best is None or dist < best[0] - 1e-15:
            best = (dist, q, p, delta)
    if best is None:
        return None
    return best[1], best[2], best[3]


def _bands_meet(shear, disk):
    lo, hi = shear.band
    half = 0.5 * (hi - lo) * shear.profile.outer
    mid = 0.5 * (lo + hi)
    axis = 1 if isinstance(shear, HorizontalShear) else 0
    d = disk.center[axis] - mid
    d -= round(d)
    return abs(d) < half + disk.radius


def rationalize_flux(fmap, q_max, c0_bound, h_band=DEFAULT_H_BAND, v_band=DEFAULT_V_BAND,
                     profile=SHEAR_PROFILE, grid=FLUX_GRID, avoid=(), c0_grid=256):
    """Shear ``fmap`` so that its flux vector becomes ``(p1/q, p2/q)``.

    The result is ``H o V o fmap`` where ``H`` shears horizontally in
    ``h_band`` and ``V`` vertically in ``v_band``. The response of the flux to
    each shear is measured numerically, and the shear amplitudes solve
    ``response @ eps = target - flux``. A target is admissible when the
    largest displacement of ``H o V``, at most ``hypot(eps)``, stays within
    ``c0_bound``; among admissible targets the closest one wins.

    ``avoid`` lists disks that should not meet the shear supports; overlap
    only triggers a warning.
    """
    if q_max < 1 or c0_bound <= 0:
        raise ValueError("need q_max >= 1 and c0_bound > 0")
    unit_h = HorizontalShear(1.0, h_band, profile)
    unit_v = VerticalShear(1.0, v_band, profile)
    for disk in avoid:
        for shear in (unit_h, unit_v):
            if _bands_meet(shear, disk):
                warnings.warn(f"{shear.kind} band {shear.band} meets disk {tuple(disk)}",
                              stacklevel=2)

    base = flux_vector(fmap, grid)
    v = base.vector
    rh = flux_vector(TorusMap((unit_h,)), grid).vector
    rv = flux_vector(TorusMap((unit_v,)), grid).vector
    response = np.column_stack([rh, rv])

    def amplitudes(delta):
        eps = np.linalg.solve(response, delta)
        # already-rational components need no shear at all
        return np.where(np.abs(delta) <= 1e-14, 0.0, eps)

    def reach(delta):
        return float(np.hypot(*amplitudes(delta))) <= c0_bound

    choice = best_rational_pair(v, q_max, reach)
    if choice is None:
        raise TargetUnreachable(
            f"no q <= {q_max} brings flux {tuple(float(c) for c in v)} within shear reach c0 <= {c0_bound}")
    q, p, delta = choice
    eps = amplitudes(delta)

    extra = []
    if eps[0] != 0.0:
        extra.append(HorizontalShear(float(eps[0]), h_band, profile))
    if eps[1] != 0.0:
        extra.append(VerticalShear(float(eps[1]), v_band, profile))
    perturbed = TorusMap(tuple(extra) + fmap.chain)

    nodes = torus_nodes(c0_grid).reshape(-1, 2)
    a, ja = fmap.evaluate(nodes, want_jac=True)
    b, jb = perturbed.evaluate(nodes, want_jac=True)
    c0 = float(np.max(np.hypot(*(b - a).T)))
    c1 = float(np.max(np.abs(jb - ja)))

    achieved = flux_vector(perturbed, grid)
    resid = np.array([achieved.vx - p[0] / q, achieved.vy - p[1] / q])
    return RationalizationResult(
        perturbed=perturbed, q=int(q), p=(int(p[0]), int(p[1])),
        eps_used=(float(eps[0]), float(eps[1])), c0_size=c0, c1_size=c1,
        original_flux=(base.vx, base.vy), achieved_flux=(achieved.vx, achieved.vy),
        flux_residual=float(np.max(np.abs(resid))),
    )
