"""Invariant suite run by ``torus-closing verify``.

Each check returns a :class:`Check` with the measured residual and the
threshold it is held to. Checks that need a disk-supported map are skipped,
not failed, when no declared disk carries the map.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import compose, inverse, iterate, random_chain
from .errors import NotDiskSupported
from .invariants import (
    FLUX_GRID, Loop, action_profile, check_action_additivity, check_disk_support, flux_vector,
    loop_area,
)
from .quadrature import POLAR

__all__ = ["Check", "run_suite", "supporting_disk"]


@dataclass(frozen=True)
class Check:
    name: str
    status: str  # "pass", "fail" or "skip"
    residual: float | None
    threshold: float | None
    detail: str = ""

    @property
    def passed(self):
        return self.status != "fail"

    def as_dict(self):
        return {"name": self.name, "status": self.status, "residual": self.residual,
                "threshold": self.threshold, "detail": self.detail}


def _check(name, residual, threshold, detail=""):
    residual = float(residual)
    ok = np.isfinite(residual) and residual <= threshold
    return Check(name, "pass" if ok else "fail", residual, threshold, detail)


def _wrapped(d):
    return np.abs(d - np.round(d))


def supporting_disk(fmap, disks):
    """First declared disk outside of which ``fmap`` is the identity, or None."""
    for name, disk in disks.items():
        try:
            check_disk_support(fmap, disk)
        except NotDiskSupported:
            continue
        return name, disk
    return None


def _grad_s(xy):
    x, y = xy[..., 0], xy[..., 1]
    k = 2.0 * np.pi
    return (0.1 * k * np.cos(k * x) * np.sin(k * y), 0.1 * k * np.sin(k * x) * np.cos(k * y))


SHIFTED_POLAR = POLAR.plus_exact(_grad_s, "polar+dS")


def run_suite(fmap, disks=None, rng=None, points=100, grid=FLUX_GRID):
    """Run every applicable check on ``fmap``; deterministic given ``rng``."""
    rng = np.random.default_rng(0) if rng is None else rng
    pts = rng.uniform(0.0, 1.0, size=(points, 2))
    shifts = rng.integers(-3, 4, size=(points, 2)).astype(np.float64)
    out = []

    img, jac = fmap.evaluate(pts, want_jac=True)
    out.append(_check("equivariance", np.max(np.abs(fmap(pts + shifts) - img - shifts)), 1e-12))
    det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
    out.append(_check("jacobian_determinant", np.max(np.abs(det - 1.0)), 1e-12))
    h = 1e-6
    fd = np.empty_like(jac)
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        fd[:, :, k] = (fmap(pts + e) - fmap(pts - e)) / (2.0 * h)
    out.append(_check("jacobian_finite_difference", np.max(np.abs(fd - jac)), 1e-6))
    out.append(_check("inverse_roundtrip", np.max(np.abs(inverse(fmap)(img) - pts)), 1e-12))

    fv = flux_vector(fmap, grid).vector
    other = random_chain(rng, 3)
    resid = flux_vector(compose(fmap, other), grid).vector - fv - flux_vector(other, grid).vector
    out.append(_check("flux_additivity", np.max(np.abs(resid)), 1e-10, "f o g, g random 3-chain"))
    worst = max(float(np.max(np.abs(flux_vector(iterate(fmap, k), grid).vector - k * fv)))
                for k in range(2, 9))
    out.append(_check("flux_iteration", worst, 1e-10, "k = 2..8"))
    conv = max(float(_wrapped(loop_area(fmap, Loop.a(0.0)) - fv[1])),
               float(_wrapped(loop_area(fmap, Loop.b(0.0)) - fv[0])))
    out.append(_check("loop_convention", conv, 1e-8, "area across a = vy, across b = vx"))

    found = supporting_disk(fmap, disks or {})
    names = ("action_boundary", "action_additivity", "action_form_independence")
    if found is None:
        out.extend(Check(n, "skip", None, None, "no declared disk supports the map") for n in names)
        return out
    name, disk = found
    prof = action_profile(fmap, disk)
    out.append(_check("action_boundary", prof.boundary_residual, 1e-9, f"disk {name}"))
    add = check_action_additivity(fmap, fmap, disk)
    out.append(_check("action_additivity", add.residual, 1e-8, f"A(f o f) vs 2 A(f) on {name}"))
    shifted = action_profile(fmap, disk, primitive=SHIFTED_POLAR).total
    out.append(_check("action_form_independence", abs(shifted - prof.total), 1e-8,
                      "primitive + d(0.1 sin 2pi x sin 2pi y)"))
    return out
