import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import bump as ref_bump
from torus_closing import (
    BumpProfile, Disk, DiskTooLarge, DiskTwist, HorizontalShear, Point2, TorusMap, Translation,
    VerticalShear, compose, inverse, iterate, project, random_chain, torus_distance,
)
from torus_closing.core import SHEAR_PROFILE

GENERATORS = [
    Translation(0.37, -0.18),
    HorizontalShear(0.07, (0.2, 0.7), BumpProfile(0.25, 0.9)),
    VerticalShear(-0.05, (0.1, 0.6)),
    DiskTwist(Point2(0.4, 0.6), 0.3, 1.3),
]


def fd_jacobian(fmap, pts, h=1e-6):
    cols = []
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        cols.append((fmap(pts + e) - fmap(pts - e)) / (2 * h))
    return np.stack(cols, axis=-1)


def det(j):
    return j[..., 0, 0] * j[..., 1, 1] - j[..., 0, 1] * j[..., 1, 0]


class TestBumpProfile:
    def test_matches_reference_formula(self):
        prof = BumpProfile(0.3, 0.8)
        s = np.linspace(0, 1, 401)
        ref = np.array([ref_bump(v, 0.3, 0.8) for v in s])
        assert np.max(np.abs(prof(s) - ref)) < 1e-15

    def test_plateaus_and_monotone(self):
        prof = BumpProfile()
        s = np.linspace(0, 1, 1001)
        v = prof(s)
        assert np.all(v[s <= prof.inner] == 1.0)
        assert np.all(v[s >= prof.outer] == 0.0)
        assert np.all(np.diff(v) <= 0.0)

    def test_derivative_against_finite_differences(self):
        prof = BumpProfile(0.2, 0.9)
        s = np.linspace(0.21, 0.89, 50)
        h = 1e-6
        fd = (prof(s + h) - prof(s - h)) / (2 * h)
        assert np.max(np.abs(fd - prof.derivative(s))) < 1e-6

    def test_integral_closed_form(self):
        from scipy.integrate import quad

        prof = BumpProfile(0.15, 0.7)
        val, _ = quad(lambda s: ref_bump(s, 0.15, 0.7), 0, 1, points=[0.15, 0.7], epsabs=1e-14)
        assert prof.integral() == pytest.approx(val, abs=1e-13)

    @pytest.mark.parametrize("inner,outer", [(0.0, 0.5), (0.5, 0.5), (0.6, 0.4), (0.2, 1.2)])
    def test_rejects_bad_parameters(self, inner, outer):
        with pytest.raises(ValueError):
            BumpProfile(inner, outer)


class TestGenerators:
    @pytest.mark.parametrize("gen", GENERATORS, ids=lambda g: g.kind)
    def test_area_preserving(self, gen, rng):
        fmap = TorusMap((gen,))
        pts = rng.uniform(-1, 2, size=(200, 2))
        jac = fmap.jacobian(pts)
        assert np.max(np.abs(det(jac) - 1.0)) < 1e-12
        assert np.max(np.abs(fd_jacobian(fmap, pts) - jac)) < 1e-6

    @pytest.mark.parametrize("gen", GENERATORS, ids=lambda g: g.kind)
    def test_equivariant_lift(self, gen, rng):
        fmap = TorusMap((gen,))
        pts = rng.uniform(0, 1, size=(100, 2))
        k = rng.integers(-5, 6, size=(100, 2)).astype(float)
        assert np.max(np.abs(fmap(pts + k) - fmap(pts) - k)) < 1e-13

    @pytest.mark.parametrize("gen", GENERATORS, ids=lambda g: g.kind)
    def test_inverse(self, gen, rng):
        fmap = TorusMap((gen,))
        pts = rng.uniform(0, 1, size=(100, 2))
        assert np.max(np.abs(inverse(fmap)(fmap(pts)) - pts)) < 1e-14

    def test_horizontal_shear_formula(self):
        g = HorizontalShear(0.1, (0.2, 0.6), BumpProfile(0.3, 0.8))
        y = np.linspace(0, 1, 57)
        pts = np.column_stack([np.full_like(y, 0.3), y])
        img = TorusMap((g,))(pts)
        # band function: profile of the distance to the band middle, scaled by the half width
        beta = np.array([ref_bump(abs(v - 0.4) / 0.2, 0.3, 0.8) if 0.2 <= v <= 0.6 else 0.0
                         for v in y])
        assert np.allclose(img[:, 0], 0.3 + 0.1 * beta, atol=1e-15)
        assert np.array_equal(img[:, 1], y)

    def test_vertical_shear_moves_only_y(self):
        g = VerticalShear(0.05, (0.45, 0.55), SHEAR_PROFILE)
        pts = np.array([[0.5, 0.1], [0.9, 0.1]])
        img = TorusMap((g,))(pts)
        assert img[0].tolist() == [0.5, 0.1 + 0.05]
        assert img[1].tolist() == [0.9, 0.1]

    def test_twist_rotates_plateau_rigidly(self):
        g = DiskTwist(Point2(0.5, 0.5), 0.2, 0.7)
        r = 0.05  # inside the plateau r/R <= 1/3
        pts = np.array([[0.5 + r * math.cos(a), 0.5 + r * math.sin(a)] for a in (0.0, 1.0, 2.5)])
        img = TorusMap((g,))(pts)
        expect = np.array([[0.5 + r * math.cos(a + 0.7), 0.5 + r * math.sin(a + 0.7)]
                           for a in (0.0, 1.0, 2.5)])
        assert np.max(np.abs(img - expect)) < 1e-15

    def test_twist_fixes_outside_and_wraps(self):
        g = DiskTwist(Point2(0.95, 0.05), 0.1, 2.0)
        fmap = TorusMap((g,))
        outside = np.array([[0.5, 0.5], [0.8, 0.05], [0.95, 0.2]])
        assert np.array_equal(fmap(outside), outside)
        # a point across the seam is still inside the disk
        p = np.array([[0.0, 0.05]])
        assert not np.array_equal(fmap(p), p)
        assert torus_distance(fmap(p)[0], (0.95, 0.05)) == pytest.approx(0.05, abs=1e-14)

    def test_radius_and_band_validation(self):
        with pytest.raises(DiskTooLarge):
            DiskTwist(Point2(0.5, 0.5), 0.5, 1.0)
        with pytest.raises(DiskTooLarge):
            Disk.make(0.5, 0.5, 0.0)
        with pytest.raises(ValueError):
            HorizontalShear(0.1, (0.6, 0.2))


class TestComposition:
    def test_right_to_left_order(self):
        shear = HorizontalShear(0.1, (0.0, 0.5), BumpProfile(0.3, 0.6))
        move = Translation(0.0, 0.25)
        p = np.array([[0.3, 0.25]])  # centre of the band, beta = 1
        # translation first: lands at y = 0.5, outside the band
        assert compose(TorusMap((shear,)), TorusMap((move,)))(p).tolist() == [[0.3, 0.5]]
        assert TorusMap((shear, move))(p).tolist() == [[0.3, 0.5]]
        # shear first: moved by the full amplitude, then translated
        assert TorusMap((move, shear))(p).tolist() == [[0.4, 0.5]]

    def test_compose_and_iterate_match_manual(self, rng):
        f, g = random_chain(rng, 3), random_chain(rng, 2)
        pts = rng.uniform(0, 1, size=(50, 2))
        assert np.array_equal(compose(f, g)(pts), f(g(pts)))
        assert np.array_equal((f @ g)(pts), f(g(pts)))
        assert np.array_equal(iterate(f, 3)(pts), f(f(f(pts))))
        with pytest.raises(ValueError):
            iterate(f, 0)

    def test_project_and_distance(self):
        p = project(np.array([[-1e-18, 1.25], [2.0, -0.75]]))
        assert np.all((p >= 0) & (p < 1))
        assert p.tolist() == [[0.0, 0.25], [0.0, 0.25]]
        assert torus_distance((0.01, 0.5), (0.99, 0.5)) == pytest.approx(0.02)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), depth=st.integers(1, 10))
def test_random_chains_area_preserving(seed, depth):
    rng = np.random.default_rng(seed)
    fmap = random_chain(rng, depth)
    pts = rng.uniform(0, 1, size=(64, 2))
    img, jac = fmap.evaluate(pts, want_jac=True)
    assert np.max(np.abs(det(jac) - 1.0)) < 1e-12
    assert np.max(np.abs(inverse(fmap)(img) - pts)) < 1e-12
