import math
import warnings

import numpy as np
import pytest

from builders import random_irrational_map
from oracles import band_weight, best_rational
from torus_closing import (
    Disk, DiskTwist, HorizontalShear, TorusMap, Translation, VerticalShear, action_profile,
    compose, flux_vector, rationalize_flux, twist_family,
)
from torus_closing.core import SHEAR_PROFILE
from torus_closing.errors import DiskTooLarge, TargetUnreachable
from torus_closing.perturb import DEFAULT_H_BAND, DEFAULT_V_BAND, best_rational_pair

FAM_DISK = Disk.make(0.5, 0.5, 0.2)


class TestTwistFamily:
    def setup_method(self):
        self.fam = twist_family(FAM_DISK)

    def test_member_zero_is_identity(self, rng):
        pts = rng.uniform(0, 1, (100, 2))
        assert np.max(np.abs(self.fam.member(0)(pts) - pts)) <= 1e-14

    def test_flow_property(self, rng):
        pts = rng.uniform(0, 1, (100, 2))
        back = compose(self.fam.member(-1.0), self.fam.member(1.0))
        assert np.max(np.abs(back(pts) - pts)) < 1e-12
        two = compose(self.fam.member(0.3), self.fam.member(0.4))
        assert np.max(np.abs(two(pts) - self.fam.member(0.7)(pts))) < 1e-14

    @pytest.mark.parametrize("t", [0.25, 0.5, 1.0])
    def test_action_linear(self, t):
        total = action_profile(self.fam.member(t), FAM_DISK).total
        assert total == pytest.approx(self.fam.action(t), abs=1e-8)
        assert self.fam.action_slope > 0

    def test_rejects_large_disk(self):
        with pytest.raises(DiskTooLarge):
            twist_family((0.5, 0.5, 0.5))


class TestBestRational:
    @pytest.mark.parametrize("v,q_max", [((0.37, 0.18), 20), ((math.pi % 1, math.e % 1), 50),
                                         ((0.5, 0.25), 4), ((0.999, 0.001), 7)])
    def test_matches_brute_force(self, v, q_max):
        q, p, delta = best_rational_pair(v, q_max)
        dist, q_ref, p_ref = best_rational(v, q_max)
        assert math.hypot(*delta) == pytest.approx(dist, abs=1e-15)
        assert (q, p) == (q_ref, p_ref)
        assert math.gcd(math.gcd(*p), q) == 1

    def test_reach_filter(self):
        v = (0.37, 0.18)
        q, p, delta = best_rational_pair(v, 20, reach=lambda d: math.hypot(*d) >= 0.02)
        dist, q_ref, p_ref = best_rational(
            v, 20, lambda p1, p2, q: math.hypot(p1 / q - v[0], p2 / q - v[1]) >= 0.02)
        assert (q, p) == (q_ref, p_ref)
        assert best_rational_pair(v, 20, reach=lambda d: False) is None


class TestRationalize:
    def test_shear_flux_matches_weight(self):
        for cls, band, axis in ((HorizontalShear, DEFAULT_H_BAND, 0), (VerticalShear, DEFAULT_V_BAND, 1)):
            fv = flux_vector(TorusMap((cls(0.02, band, SHEAR_PROFILE),))).vector
            w = band_weight(*band, SHEAR_PROFILE.inner, SHEAR_PROFILE.outer)
            assert fv[axis] == pytest.approx(0.02 * w, abs=1e-10)
            assert abs(fv[1 - axis]) < 1e-14

    def test_already_rational(self):
        res = rationalize_flux(TorusMap((Translation(0.25, 0.5),)), 4, 0.05)
        assert res.eps_used == (0.0, 0.0)
        assert (res.q, res.p) == (4, (1, 2))
        assert res.achieved_flux == pytest.approx((0.25, 0.5), abs=1e-12)
        assert res.c0_size == 0.0

    def test_irrational_translation_selection(self):
        c0 = 0.05
        res = rationalize_flux(TorusMap((Translation(0.37, 0.18),)), 20, c0)
        wh = band_weight(*DEFAULT_H_BAND, SHEAR_PROFILE.inner, SHEAR_PROFILE.outer)
        wv = band_weight(*DEFAULT_V_BAND, SHEAR_PROFILE.inner, SHEAR_PROFILE.outer)

        def admissible(p1, p2, q):
            return math.hypot((p1 / q - 0.37) / wh, (p2 / q - 0.18) / wv) <= c0

        dist, q_ref, p_ref = best_rational((0.37, 0.18), 20, admissible)
        assert (res.q, res.p) == (q_ref, p_ref)
        assert res.target == pytest.approx((p_ref[0] / q_ref, p_ref[1] / q_ref))
        assert res.flux_residual < 1e-10
        assert res.c0_size <= c0
        assert np.max(np.abs(np.array(flux_vector(res.perturbed).reduced) * res.q
                             - np.round(np.array(flux_vector(res.perturbed).reduced) * res.q))) < 1e-9

    def test_random_maps(self, rng):
        for _ in range(3):
            res = rationalize_flux(random_irrational_map(rng), 30, 0.05)
            q_flux = res.q * np.array(res.achieved_flux)
            assert np.max(np.abs(q_flux - np.round(q_flux))) < 1e-9
            assert res.c0_size <= 0.05

    def test_monotone_in_q_max(self):
        f = TorusMap((Translation(0.4142, 0.7321),))
        errs = []
        for q_max in (5, 10, 20, 40):
            res = rationalize_flux(f, q_max, 0.5)
            errs.append(math.hypot(res.original_flux[0] - res.target[0],
                                   res.original_flux[1] - res.target[1]))
        assert all(b <= a + 1e-15 for a, b in zip(errs, errs[1:]))

    def test_unreachable(self):
        with pytest.raises(TargetUnreachable):
            rationalize_flux(TorusMap((Translation(0.37, 0.18),)), 2, 1e-4)
        with pytest.raises(ValueError):
            rationalize_flux(TorusMap(()), 0, 0.05)

    def test_disjoint_support_keeps_disk_action(self):
        disk = Disk.make(0.25, 0.75, 0.1)
        tw = TorusMap((DiskTwist(disk.center, disk.radius, 1.0),))
        f = compose(TorusMap((Translation(0.37, 0.18),)), tw)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            res = rationalize_flux(f, 20, 0.05, avoid=[disk])
        before = action_profile(tw, disk).total
        shears = TorusMap(res.perturbed.chain[:len(res.perturbed.chain) - len(f.chain)])
        after = action_profile(compose(shears, tw), disk).total
        assert after == pytest.approx(before, abs=1e-9)

    def test_overlap_warns(self):
        with pytest.warns(UserWarning, match="band"):
            rationalize_flux(TorusMap((Translation(0.37, 0.18),)), 20, 0.05,
                             avoid=[Disk.make(0.5, 0.25, 0.05)])
