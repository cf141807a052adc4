"""Periodic points of torus maps and the closing scan.

Periodic points of period ``q`` with lattice vector ``z`` solve
``lift(f^q)(x) - x - z = 0``; they are found by Newton iteration with the
analytic Jacobian of the ``q``-fold chain. The closing scan rationalizes the
flux of ``f``, places a twist family on a disk ``U0`` whose first ``q - 1``
preimages are pairwise disjoint, and searches ``t`` in [0, 1] for a period-q
point of ``h_t o f`` inside ``U0``.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .core import Disk, DiskTwist, Point2, TorusMap, compose, inverse, iterate, project, torus_distance
from .errors import DisjointnessFailed, NoOrbitFound
from .invariants import FLUX_GRID
from .perturb import rationalize_flux, twist_family

__all__ = [
    "OrbitRecord", "SearchDiagnostics", "ScanReport", "find_periodic_points",
    "verify_orbit", "pulled_back_disks", "closing_scan",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OrbitRecord:
    point: Point2
    period: int
    lattice: tuple
    residual: float
    stable_multipliers: tuple

    @property
    def multiplier_product(self):
        a, b = self.stable_multipliers
        return complex(a) * complex(b)


@dataclass
class SearchDiagnostics:
    seeds: int = 0
    candidates: list = field(default_factory=list)
    singular: int = 0
    unconverged: int = 0
    outside_region: int = 0
    unverified: int = 0
    duplicates: int = 0
    best_residual: float = float("inf")


def _seed_grid(region, n):
    s = (np.arange(n) + 0.5) / n
    if region is None:
        x, y = np.meshgrid(s, s, indexing="ij")
        return np.column_stack([x.ravel(), y.ravel()])
    c = np.asarray(region.center)
    u = (2.0 * s - 1.0) * region.radius
    x, y = np.meshgrid(u, u, indexing="ij")
    keep = np.hypot(x, y) <= region.radius
    return np.column_stack([x[keep], y[keep]]) + c


def _newton(fq, x, z, tol, max_iter, diag, max_step=0.1):
    """Vectorized Newton on ``fq(x) - x - z``; returns converged points and residuals."""
    x = x.copy()
    n = len(x)
    alive = np.ones(n, dtype=bool)
    done = np.zeros(n, dtype=bool)
    res = np.full(n, np.inf)
    for _ in range(max_iter + 1):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        img, jac = fq.evaluate(x[idx], want_jac=True)
        F = img - x[idx] - z
        r = np.hypot(F[:, 0], F[:, 1])
        res[idx] = r
        conv = r <= tol
        done[idx[conv]] = True
        alive[idx[conv]] = False
        keep = ~conv
        idx, F, jac = idx[keep], F[keep], jac[keep]
        a = jac[:, 0, 0] - 1.0
        b = jac[:, 0, 1]
        c = jac[:, 1, 0]
        d = jac[:, 1, 1] - 1.0
        det = a * d - b * c
        sing = np.abs(det) < 1e-14
        diag.singular += int(sing.sum())
        alive[idx[sing]] = False
        ok = ~sing
        idx, F = idx[ok], F[ok]
        a, b, c, d, det = a[ok], b[ok], c[ok], d[ok], det[ok]
        step = np.column_stack([(d * F[:, 0] - b * F[:, 1]) / det,
                                (-c * F[:, 0] + a * F[:, 1]) / det])
        norm = np.hypot(step[:, 0], step[:, 1])
        scale = np.minimum(1.0, max_step / np.maximum(norm, 1e-300))
        x[idx] -= step * scale[:, None]
    finite = res[np.isfinite(res)]
    if finite.size:
        diag.best_residual = min(diag.best_residual, float(finite.min()))
    diag.unconverged += int(n - done.sum() - 0)
    return x[done], res[done]


def verify_orbit(fmap, point, q, residual, floor=1e-12):
    """Forward-iterate ``fmap`` q times on the torus; True if it returns.

    Independent of the Newton solver: the map is applied step by step with a
    reduction mod 1 after each step.
    """
    p0 = project(np.asarray(point, dtype=np.float64))
    p = p0
    for _ in range(q):
        p = project(fmap(p))
    dist = float(torus_distance(p, p0))
    return dist <= max(10.0 * residual, floor), dist


def _orbit_points(fmap, x, q):
    pts = [project(x)]
    cur = x
    for _ in range(q - 1):
        cur = fmap(cur)
        pts.append(project(cur))
    return np.stack(pts, axis=1)  # (N, q, 2)


def find_periodic_points(fmap, q, region=None, seeds_per_axis=64, tol=1e-11, max_iter=40,
                         return_diagnostics=False):
    """Period-``q`` points of ``fmap``, one canonical point per orbit.

    Parameters
    ----------
    region : Disk or None
        Seeds are laid out on a ``seeds_per_axis``-square grid over the disk's
        bounding box (or the whole torus) and only solutions in the region
        are kept.
    tol : float
        Newton stops once the residual falls below ``tol``.

    Returns
    -------
    list of OrbitRecord
        Sorted by point. Each orbit is represented by its lexicographically
        smallest point inside ``region``. With ``return_diagnostics`` a
        ``(records, SearchDiagnostics)`` pair is returned instead.
    """
    if q < 1:
        raise ValueError("period must be >= 1")
    diag = SearchDiagnostics()
    fq = iterate(fmap, q)
    seeds = _seed_grid(region, seeds_per_axis)
    diag.seeds = len(seeds)
    disp = fq(seeds) - seeds
    lo = np.floor(disp.min(axis=0)).astype(int)
    hi = np.ceil(disp.max(axis=0)).astype(int)
    sols, sol_res, sol_z = [], [], []
    for zx, zy in itertools.product(range(lo[0], hi[0] + 1), range(lo[1], hi[1] + 1)):
        z = np.array([zx, zy], dtype=np.float64)
        near = np.max(np.abs(disp - z), axis=1) < 0.75
        if not np.any(near):
            continue
        diag.candidates.append((zx, zy))
        x, r = _newton(fq, seeds[near], z, tol, max_iter, diag)
        sols.append(x)
        sol_res.append(r)
        sol_z.append(np.repeat(z[None, :], len(x), axis=0))
    if not sols:
        return ([], diag) if return_diagnostics else []
    x = np.concatenate(sols)
    res = np.concatenate(sol_res)
    zs = np.concatenate(sol_z)
    px = project(x)
    if region is not None:
        inside = region.contains(px)
        diag.outside_region += int((~inside).sum())
        x, px, res, zs = x[inside], px[inside], res[inside], zs[inside]
    if len(x) == 0:
        return ([], diag) if return_diagnostics else []

    verified = np.array([verify_orbit(fmap, p, q, r)[0] for p, r in zip(px, res)], dtype=bool)
    diag.unverified += int((~verified).sum())
    x, px, res, zs = x[verified], px[verified], res[verified], zs[verified]
    if len(x) == 0:
        return ([], diag) if return_diagnostics else []

    orbits = _orbit_points(fmap, px, q)
    order = np.lexsort((orbits[:, 0, 1], orbits[:, 0, 0], res))
    flat = orbits.reshape(-1, 2)
    owner = np.repeat(np.arange(len(px)), q)
    tree = cKDTree(flat, boxsize=1.0)
    removed = np.zeros(len(px), dtype=bool)
    kept = []
    for i in order:
        if removed[i]:
            diag.duplicates += 1
            continue
        kept.append(i)
        for hits in tree.query_ball_point(orbits[i], 1e-6):
            removed[owner[hits]] = True

    records = []
    for i in kept:
        cand = orbits[i]
        if region is not None:
            cand = cand[region.contains(cand)]
        rep = cand[np.lexsort((cand[:, 1], cand[:, 0]))[0]]
        img, jac = fq.evaluate(rep, want_jac=True)
        resid = float(np.hypot(*(img - rep - zs[i])))
        ev = np.linalg.eigvals(jac)
        ev = tuple(sorted((complex(e) for e in ev), key=lambda e: (e.real, e.imag)))
        records.append(OrbitRecord(Point2(float(rep[0]), float(rep[1])), int(q),
                                   (int(zs[i][0]), int(zs[i][1])), resid, ev))
    records.sort(key=lambda r: (r.point.x, r.point.y))
    return (records, diag) if return_diagnostics else records


def _inside(poly, pts):
    """Even-odd rule; ``poly`` (M, 2), ``pts`` (K, 2)."""
    x, y = pts[:, 0][:, None], pts[:, 1][:, None]
    x0, y0 = poly[:, 0][None, :], poly[:, 1][None, :]
    x1, y1 = np.roll(poly[:, 0], -1)[None, :], np.roll(poly[:, 1], -1)[None, :]
    cross = (y0 > y) != (y1 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    return (np.sum(cross & (x < xint), axis=1) % 2) == 1


def pulled_back_disks(fmap, disk, q, samples=256):
    """Boundaries of ``U_k = f^-k(U0)`` for ``k < q`` and a disjointness verdict.

    Returns ``(ok, curves, gap)``: curves are ``(samples, 2)`` lifted
    polygons, ``gap`` the smallest torus distance between samples of
    different curves. Curves count as disjoint when ``gap`` exceeds twice the
    largest spacing between consecutive samples and neither contains the
    other.
    """
    finv = inverse(fmap)
    cur = disk.boundary(samples)
    curves = [cur]
    for _ in range(1, q):
        cur = finv(cur)
        curves.append(cur)
    spacing = max(float(np.max(np.hypot(*(np.roll(c, -1, 0) - c).T))) for c in curves)
    margin = 2.0 * spacing
    gap = np.inf
    ok = True
    for i, j in itertools.combinations(range(q), 2):
        a, b = curves[i], curves[j]
        d = a[:, None, :] - b[None, :, :]
        d -= np.round(d)
        gap = min(gap, float(np.min(np.hypot(d[..., 0], d[..., 1]))))
        if gap <= margin:
            ok = False
            break
        # shift each probe to the image nearest the other polygon
        for poly, probe in ((a, b[0]), (b, a[0])):
            shift = probe - poly[0]
            pt = poly[0] + shift - np.round(shift)
            if _inside(poly, pt[None, :])[0]:
                ok = False
        if not ok:
            break
    return ok, curves, (float(gap) if np.isfinite(gap) else None)


@dataclass
class ScanReport:
    t_star: float | None
    orbit: OrbitRecord | None
    t_grid: list
    disjointness_ok: bool
    action_slope: float
    q: int
    p: tuple
    action_certificate: float
    radius: float
    disk: Disk
    rationalization: dict
    orbits_found: int
    best_residuals: list
    shrinks: int
    mode: str = "single"

    @property
    def found(self):
        return self.orbit is not None


def _perturbation(fam, t, extra):
    if t == 0:
        return TorusMap(())
    chain = [DiskTwist(fam.disk.center, fam.disk.radius, float(t), fam.profile)]
    for d in extra:
        chain.append(DiskTwist(d.center, d.radius, float(t), fam.profile))
    return TorusMap(tuple(chain))


def _inscribed_disks(fmap, disk, curves):
    finv = inverse(fmap)
    c = np.asarray(disk.center)[None, :]
    out = []
    for k in range(1, len(curves)):
        c = finv(c)
        r = float(np.min(np.hypot(*(curves[k] - c).T))) * 0.999
        out.append(Disk(Point2(*project(c[0])), min(r, 0.499)))
    return out


def closing_scan(f, U0, q_max=20, c0_bound=0.05, t_steps=200, seeds_per_axis=64, profile=None,
                 disks="single", refine=True, max_shrinks=6, tol=1e-11, max_iter=40,
                 raise_on_empty=False, grid=FLUX_GRID):
    """Search for a period-q point of ``h_t o f`` in ``U0``.

    Steps: rationalize the flux of ``f`` (denominator ``q``); halve ``U0``
    until ``U0, f^-1(U0), ..., f^-(q-1)(U0)`` are disjoint; build the twist
    family on ``U0``; scan ``t`` over ``t_steps`` equispaced values in
    [0, 1] and return the first ``t`` with a verified orbit in ``U0``.
    If the grid finds nothing, the ``t`` values with the smallest Newton
    residuals are refined locally. ``disks="all"`` also twists inscribed
    disks of the preimages.
    """
    if not isinstance(U0, Disk):
        U0 = Disk.make(*U0)
    rat = rationalize_flux(f, q_max, c0_bound, grid=grid)
    fmap, q = rat.perturbed, rat.q

    disk = U0
    shrinks = 0
    while True:
        ok, curves, gap = pulled_back_disks(fmap, disk, q)
        if ok:
            break
        if shrinks >= max_shrinks:
            raise DisjointnessFailed(
                f"U0..U{q - 1} still overlap after {shrinks} halvings (radius {disk.radius:.3e})")
        disk = Disk(disk.center, disk.radius / 2.0)
        shrinks += 1

    fam = twist_family(disk, profile)
    extra = _inscribed_disks(fmap, disk, curves) if disks == "all" else []
    slopes = [fam.action_slope] + [twist_family(d, fam.profile).action_slope for d in extra]
    certificate = q * float(sum(slopes))

    t_grid, best = [], []
    hits = None

    def probe(t):
        g = compose(_perturbation(fam, t, extra), fmap)
        recs, diag = find_periodic_points(g, q, region=disk, seeds_per_axis=seeds_per_axis,
                                          tol=tol, max_iter=max_iter, return_diagnostics=True)
        t_grid.append(float(t))
        best.append(diag.best_residual)
        return recs

    for t in np.linspace(0.0, 1.0, t_steps):
        recs = probe(t)
        if recs:
            hits = (float(t), recs)
            break

    if hits is None and refine and t_steps > 1:
        h = 1.0 / (t_steps - 1)
        order = np.argsort(best, kind="stable")[:3]
        centers = [t_grid[i] for i in order]
        for level in range(2):
            nxt = []
            for c in centers:
                for t in np.linspace(max(0.0, c - h), min(1.0, c + h), 9)[1:-1]:
                    recs = probe(t)
                    if recs:
                        hits = (float(t), recs)
                        break
                    nxt.append((best[-1], float(t)))
                if hits:
                    break
            if hits:
                break
            h /= 8.0
            centers = [t for _, t in sorted(nxt)[:3]]

    orbit = None
    t_star = None
    count = 0
    if hits is not None:
        t_star, recs = hits
        count = len(recs)
        c = np.asarray(disk.center)
        orbit = min(recs, key=lambda r: (float(torus_distance(r.point, c)), r.point.x, r.point.y))

    report = ScanReport(
        t_star=t_star, orbit=orbit, t_grid=t_grid, disjointness_ok=True,
        action_slope=fam.action_slope, q=q, p=rat.p, action_certificate=certificate,
        radius=disk.radius, disk=disk,
        rationalization={
            "q": q, "p": list(rat.p), "eps_used": list(rat.eps_used),
            "c0_size": rat.c0_size, "c1_size": rat.c1_size,
            "original_flux": list(rat.original_flux), "achieved_flux": list(rat.achieved_flux),
            "flux_residual": rat.flux_residual, "min_gap": gap,
        },
        orbits_found=count, best_residuals=best, shrinks=shrinks, mode=disks,
    )
    report.perturbed_map = fmap
    if orbit is None:
        logger.info("closing scan: no period-%d orbit in %s over %d t values", q, disk, len(t_grid))
        if raise_on_empty:
            raise NoOrbitFound("no periodic orbit found on the t grid", report)
    return report
