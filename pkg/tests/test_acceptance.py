"""Acceptance criteria, one test each.

Every test logs a single ``[PASS]``/``[FAIL]`` line with the measured worst
case, the tolerance and the runtime; the lines are repeated in the pytest
terminal summary. Run this file directly to print them without pytest.
"""
import subprocess
import sys
import time

import numpy as np
import pytest

from builders import random_disk_chain, random_irrational_map
from oracles import twist_total_action
from torus_closing import (
    BumpProfile, Disk, DiskTwist, GridSpec, HorizontalShear, Point2, TorusMap, Translation,
    VerticalShear, action_profile, check_action_additivity, closing_scan, compose, flux_vector,
    iterate, project, random_chain, rationalize_flux, torus_distance,
)
from torus_closing.checks import SHIFTED_POLAR

LINES = []


class Criterion:
    def __init__(self, log, number, title, limit_s=None):
        self.log, self.number, self.title, self.limit = log, number, title, limit_s
        self.parts = []
        self.ok = True

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def check(self, label, value, tol, cmp="<="):
        good = bool(value <= tol) if cmp == "<=" else bool(value != 0)
        self.ok &= good
        shown = f"{value:.2e} {cmp} {tol:.0e}" if cmp == "<=" else f"{value:.3e} != 0"
        self.parts.append(f"{label} {shown}{'' if good else ' (FAIL)'}")

    def require(self, label, good):
        self.ok &= bool(good)
        self.parts.append(f"{label}{'' if good else ' (FAIL)'}")

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        if exc_type is not None:
            self.ok = False
            self.parts.append(f"error {exc_type.__name__}: {exc}")
        if self.limit is not None:
            in_time = elapsed < self.limit
            self.ok &= in_time
            self.parts.append(f"runtime {elapsed:.1f}s < {self.limit:.0f}s{'' if in_time else ' (FAIL)'}")
        line = (f"criterion {self.number} [{'PASS' if self.ok else 'FAIL'}] {self.title}: "
                + "; ".join(self.parts))
        self.log.append(line)
        LINES.append(line)
        print(line)
        return False


def det(j):
    return j[..., 0, 0] * j[..., 1, 1] - j[..., 0, 1] * j[..., 1, 0]


def fd_det(fmap, pts, h=1e-6):
    cols = []
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        cols.append((fmap(pts + e) - fmap(pts - e)) / (2 * h))
    return det(np.stack(cols, axis=-1))


def test_criterion_1_area_preservation(acceptance_log):
    rng = np.random.default_rng(1)
    maps = [TorusMap((g,)) for g in (
        Translation(0.37, 0.18), HorizontalShear(0.05, (0.1, 0.6), BumpProfile(0.2, 0.9)),
        VerticalShear(-0.04, (0.3, 0.8)), DiskTwist(Point2(0.4, 0.6), 0.25, 1.2))]
    maps += [random_chain(rng, 10) for _ in range(50)]
    with Criterion(acceptance_log, 1, "area preservation", 5.0) as c:
        worst_a = worst_fd = 0.0
        for fmap in maps:
            pts = rng.uniform(0, 1, (100, 2))
            worst_a = max(worst_a, float(np.max(np.abs(det(fmap.jacobian(pts)) - 1))))
            worst_fd = max(worst_fd, float(np.max(np.abs(fd_det(fmap, pts) - 1))))
        c.check("analytic |det-1|", worst_a, 1e-12)
        c.check("finite-difference |det-1|", worst_fd, 1e-6)
    assert c.ok


def test_criterion_2_flux_laws(acceptance_log):
    rng = np.random.default_rng(2)
    with Criterion(acceptance_log, 2, "flux laws", 10.0) as c:
        add = 0.0
        for _ in range(5):
            f, g = random_chain(rng, 5), random_chain(rng, 5)
            diff = flux_vector(compose(f, g)).vector - flux_vector(f).vector - flux_vector(g).vector
            add = max(add, float(np.max(np.abs(diff))))
        c.check("additivity", add, 1e-10)
        it = 0.0
        for _ in range(2):
            f = random_chain(rng, 4)
            base = flux_vector(f).vector
            for k in range(1, 9):
                it = max(it, float(np.max(np.abs(flux_vector(iterate(f, k)).vector - k * base))))
        c.check("F(f^k) = k F(f), k<=8", it, 1e-10)
        tr = 0.0
        for a, b in rng.uniform(-1, 1, (10, 2)):
            fv = flux_vector(TorusMap((Translation(a, b),)), GridSpec(128))
            tr = max(tr, abs(fv.vx - a), abs(fv.vy - b))
        c.check("translation flux at n=128", tr, 1e-12)
    assert c.ok


def test_criterion_3_action_machinery(acceptance_log):
    disk = Disk.make(0.5, 0.5, 0.25)
    prof = BumpProfile()
    rng = np.random.default_rng(3)

    def tw(t):
        return TorusMap((DiskTwist(disk.center, disk.radius, t, prof),))

    with Criterion(acceptance_log, 3, "action machinery", 10.0) as c:
        p1 = action_profile(tw(1.0), disk)
        ref = twist_total_action(disk.radius, 1.0, prof.inner, prof.outer)
        c.check("total vs nested quadrature", abs(p1.total - ref), 1e-8)
        ring = np.vstack([disk.boundary(256), disk.boundary(97, 1.0)])
        c.check("|g| on boundary", float(np.max(np.abs(p1.g(ring)))), 1e-9)
        c.check("boundary path residual", p1.boundary_residual, 1e-9)
        rho = disk.radius * np.sqrt(rng.uniform(0, 1, 500))
        th = rng.uniform(0, 2 * np.pi, 500)
        inside = np.column_stack([0.5 + rho * np.cos(th), 0.5 + rho * np.sin(th)])
        gmin = min(float(p1.values.min()), float(p1.g(inside).min()))
        c.check("-min g", -gmin, 1e-10)
        lin = max(abs(action_profile(tw(t), disk).total - t * p1.total) for t in (0.25, 0.5, 0.75))
        c.check("A(h_t) - t A(h_1)", lin, 1e-9)
    assert c.ok


def test_criterion_4_action_additivity(acceptance_log):
    rng = np.random.default_rng(4)
    disk = Disk.make(0.5, 0.5, 0.3)

    def tw(d, t):
        return TorusMap((DiskTwist(d.center, d.radius, t),))

    with Criterion(acceptance_log, 4, "action additivity", 20.0) as c:
        same = check_action_additivity(tw(disk, 0.3), tw(disk, 0.5), disk).residual
        c.check("(a) same disk", same, 1e-8)
        sub = check_action_additivity(tw(Disk.make(0.38, 0.5, 0.1), 0.9),
                                      tw(Disk.make(0.62, 0.5, 0.1), -0.4), disk).residual
        c.check("(b) disjoint sub-disks", sub, 1e-8)
        worst = 0.0
        for _ in range(20):
            f1, f2 = random_disk_chain(rng, disk, 2), random_disk_chain(rng, disk, 2)
            worst = max(worst, check_action_additivity(f1, f2, disk).residual)
        c.check("(c) 20 random pairs", worst, 1e-8)
    assert c.ok


def test_criterion_5_primitive_independence(acceptance_log):
    rng = np.random.default_rng(5)
    disk = Disk.make(0.5, 0.5, 0.3)
    maps = [TorusMap((DiskTwist(disk.center, disk.radius, 1.0),))]
    maps += [random_disk_chain(rng, disk, 3) for _ in range(4)]
    with Criterion(acceptance_log, 5, "primitive-form independence") as c:
        worst = max(abs(action_profile(f, disk, primitive=SHIFTED_POLAR).total
                        - action_profile(f, disk).total) for f in maps)
        c.check("|A' - A|", worst, 1e-8)
    assert c.ok


def test_criterion_6_rationalization(acceptance_log):
    rng = np.random.default_rng(6)
    with Criterion(acceptance_log, 6, "rationalization", 30.0) as c:
        worst_int = worst_c0 = 0.0
        for _ in range(20):
            res = rationalize_flux(random_irrational_map(rng), 50, 0.05)
            reduced = np.asarray(flux_vector(res.perturbed).reduced)
            qf = res.q * reduced
            worst_int = max(worst_int, float(np.max(np.abs(qf - np.round(qf)))))
            worst_c0 = max(worst_c0, res.c0_size)
        c.check("q*flux off Z^2", worst_int, 1e-9)
        c.check("sup displacement", worst_c0, 0.05)
    assert c.ok


def _forward_ok(rep):
    g = compose(TorusMap((DiskTwist(rep.disk.center, rep.disk.radius, rep.t_star),)),
                rep.perturbed_map) if rep.t_star else rep.perturbed_map
    p0 = np.array(rep.orbit.point)
    p = p0
    for _ in range(rep.q):
        p = project(g(p))
    return float(torus_distance(p, p0)) <= max(10 * rep.orbit.residual, 1e-12)


def test_criterion_7_closing_scan(acceptance_log):
    u0 = Disk.make(0.5, 0.5, 0.05)
    with Criterion(acceptance_log, 7, "closing scan witness", 120.0) as c:
        triv = closing_scan(TorusMap((Translation(1 / 3, 0.0),)), u0)
        c.require("t_star = 0 for (1/3, 0)", triv.t_star == 0.0 and triv.orbit is not None)
        rep = closing_scan(TorusMap((Translation(0.37, 0.18),)), u0, q_max=20)
        c.require(f"orbit found (q={rep.q}, t*={rep.t_star})", rep.orbit is not None)
        if rep.orbit is not None:
            c.check("residual", rep.orbit.residual, 1e-10)
            c.require("point in disk", bool(u0.contains(rep.orbit.point)))
        c.check("certificate q A(h_1)", rep.action_certificate, 0, cmp="!=")
        orbits = [r for r in (triv, rep) if r.orbit is not None]
        c.require("forward-iteration oracle", all(_forward_ok(r) for r in orbits))
    assert c.ok


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "torus_closing", *args], capture_output=True,
                          check=False).stdout


def test_criterion_8_determinism(acceptance_log):
    with Criterion(acceptance_log, 8, "determinism") as c:
        v1 = _cli("--seed", "11", "verify", "--random-depth", "10")
        v2 = _cli("--seed", "11", "verify", "--random-depth", "10")
        c.require("verify byte-identical", v1 == v2 and len(v1) > 0)
        s1 = _cli("--seed", "11", "scan", "builtin:irrational_translation")
        s2 = _cli("--seed", "11", "scan", "builtin:irrational_translation")
        c.require("scan byte-identical", s1 == s2 and len(s1) > 0)
    assert c.ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
