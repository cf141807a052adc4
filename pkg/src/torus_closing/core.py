"""Area-preserving torus maps built from closed-form generators.

A :class:`TorusMap` is a finite composition of four generator kinds, each a
translation or a shear in suitable coordinates, so every map is exactly
area-preserving and exactly invertible. Maps are evaluated on the universal
cover R^2 (the *lift*); the lift commutes with integer translations.

Composition order follows function notation: ``TorusMap((f, g, h))`` is
``f o g o h``, so ``h`` acts first.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import kernels
from ._pykernels import DISKTWIST, HSHEAR, TRANSLATE, VSHEAR, bump, band_profile
from .errors import DiskTooLarge

__all__ = [
    "Point2", "BumpProfile", "Disk", "Translation", "HorizontalShear",
    "VerticalShear", "DiskTwist", "TorusMap", "lift_eval", "project",
    "compose", "iterate", "jacobian", "inverse", "torus_distance",
    "random_chain", "IDENTITY",
]


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class BumpProfile:
    """C-infinity plateau function on [0, 1].

    Equal to 1 on ``[0, inner]``, 0 on ``[outer, 1]`` and strictly
    decreasing in between. The transition is the logistic of
    ``1/u - 1/(1-u)``, i.e. the usual ratio of ``exp(-1/u)`` factors, so all
    one-sided derivatives vanish at both junctions.
    """

    inner: float = 1.0 / 3.0
    outer: float = 2.0 / 3.0

    def __post_init__(self):
        if not (0.0 < self.inner < self.outer <= 1.0):
            raise ValueError(f"need 0 < inner < outer <= 1, got {self.inner}, {self.outer}")

    def __call__(self, s):
        return bump(s, self.inner, self.outer)[0]

    def derivative(self, s):
        return bump(s, self.inner, self.outer)[1]

    def integral(self):
        """Exact value of the integral of b over [0, 1].

        The transition is point-symmetric about its midpoint, hence
        ``(inner + outer) / 2``.
        """
        return 0.5 * (self.inner + self.outer)


SHEAR_PROFILE = BumpProfile(0.2, 0.95)


class Disk(NamedTuple):
    """Closed Euclidean disk on the torus, radius below 1/2."""

    center: Point2
    radius: float

    @classmethod
    def make(cls, cx, cy, radius):
        if not (0.0 < radius < 0.5):
            raise DiskTooLarge(f"disk radius must lie in (0, 1/2), got {radius}")
        return cls(Point2(float(cx), float(cy)), float(radius))

    def local(self, points):
        """Chart coordinates (nearest-image offset from the center)."""
        d = np.asarray(points, dtype=np.float64) - np.asarray(self.center)
        return d - np.floor(d + 0.5)

    def contains(self, points, margin=0.0):
        d = self.local(points)
        return np.hypot(d[..., 0], d[..., 1]) <= self.radius + margin

    def boundary(self, n=256, scale=1.0):
        theta = 2.0 * np.pi * np.arange(n) / n
        r = self.radius * scale
        return np.column_stack([self.center[0] + r * np.cos(theta),
                                self.center[1] + r * np.sin(theta)])


@dataclass(frozen=True)
class Translation:
    a: float
    b: float

    kind = "translate"

    def inverse(self):
        return Translation(-self.a, -self.b)

    def encode(self):
        return TRANSLATE, (self.a, self.b, 0.0, 0.0, 0.0, 0.0)

    def support_contains(self, points):
        return np.ones(np.shape(points)[:-1], dtype=bool)


def _check_band(band):
    lo, hi = (float(v) for v in band)
    if not (0.0 <= lo < hi <= 1.0):
        raise ValueError(f"band must satisfy 0 <= lo < hi <= 1, got {band}")
    return lo, hi


@dataclass(frozen=True)
class HorizontalShear:
    """``(x, y) -> (x + eps * beta(y), y)`` with beta supported in ``band``."""

    eps: float
    band: tuple = (0.0, 0.1)
    profile: BumpProfile = field(default=SHEAR_PROFILE)

    kind = "hshear"

    def __post_init__(self):
        object.__setattr__(self, "band", _check_band(self.band))

    def inverse(self):
        return HorizontalShear(-self.eps, self.band, self.profile)

    def encode(self):
        lo, hi = self.band
        return HSHEAR, (self.eps, lo, hi, self.profile.inner, self.profile.outer, 0.0)

    def shape(self, coord):
        """The band function beta and its derivative at ``coord``."""
        lo, hi = self.band
        return band_profile(np.asarray(coord, dtype=np.float64), lo, hi,
                            self.profile.inner, self.profile.outer)

    def weight(self):
        """Integral of beta over the circle."""
        lo, hi = self.band
        return (hi - lo) * self.profile.integral()

    def support_contains(self, points):
        y = np.asarray(points, dtype=np.float64)[..., 1]
        return self.shape(y)[0] != 0.0


@dataclass(frozen=True)
class VerticalShear:
    """``(x, y) -> (x, y + eps * beta(x))`` with beta supported in ``band``."""

    eps: float
    band: tuple = (0.45, 0.55)
    profile: BumpProfile = field(default=SHEAR_PROFILE)

    kind = "vshear"

    def __post_init__(self):
        object.__setattr__(self, "band", _check_band(self.band))

    def inverse(self):
        return VerticalShear(-self.eps, self.band, self.profile)

    def encode(self):
        lo, hi = self.band
        return VSHEAR, (self.eps, lo, hi, self.profile.inner, self.profile.outer, 0.0)

    shape = HorizontalShear.shape
    weight = HorizontalShear.weight

    def support_contains(self, points):
        x = np.asarray(points, dtype=np.float64)[..., 0]
        return self.shape(x)[0] != 0.0


@dataclass(frozen=True)
class DiskTwist:
    """Radial twist ``(r, theta) -> (r, theta + t * b(r / radius))`` about ``center``."""

    center: Point2
    radius: float
    t: float
    profile: BumpProfile = field(default_factory=BumpProfile)

    kind = "disktwist"

    def __post_init__(self):
        object.__setattr__(self, "center", Point2(float(self.center[0]), float(self.center[1])))
        if not (0.0 < self.radius < 0.5):
            raise DiskTooLarge(f"twist radius must lie in (0, 1/2), got {self.radius}")

    @property
    def disk(self):
        return Disk(self.center, self.radius)

    def inverse(self):
        return DiskTwist(self.center, self.radius, -self.t, self.profile)

    def encode(self):
        return DISKTWIST, (self.center[0], self.center[1], self.radius, self.t,
                           self.profile.inner, self.profile.outer)

    def support_contains(self, points):
        return self.disk.contains(points, margin=-self.radius * (1.0 - self.profile.outer))


GENERATOR_TYPES = (Translation, HorizontalShear, VerticalShear, DiskTwist)


@dataclass(frozen=True)
class TorusMap:
    """Composition ``chain[0] o chain[1] o ... o chain[-1]``; immutable."""

    chain: tuple = ()

    def __post_init__(self):
        chain = tuple(self.chain)
        for g in chain:
            if not isinstance(g, GENERATOR_TYPES):
                raise TypeError(f"not a generator: {g!r}")
        object.__setattr__(self, "chain", chain)

    @cached_property
    def encoded(self):
        """``(kinds, params)`` in application order, for the kernels."""
        rows = [g.encode() for g in reversed(self.chain)]
        kinds = np.array([r[0] for r in rows], dtype=np.intc)
        params = np.array([r[1] for r in rows], dtype=np.float64).reshape(-1, 6)
        return kinds, params

    def evaluate(self, points, want_jac=False):
        """Lift and (optionally) Jacobian at an ``(..., 2)`` array of points."""
        pts = np.asarray(points, dtype=np.float64)
        shape = pts.shape
        kinds, params = self.encoded
        out, jac = kernels.eval_chain(kinds, params, pts.reshape(-1, 2), want_jac)
        out = out.reshape(shape)
        if want_jac:
            jac = jac.reshape(shape[:-1] + (2, 2))
        return out, jac

    def __call__(self, points):
        return self.evaluate(points)[0]

    def jacobian(self, points):
        return self.evaluate(points, want_jac=True)[1]

    def __matmul__(self, other):
        return compose(self, other)

    def __len__(self):
        return len(self.chain)

    def inverse(self):
        return inverse(self)

    def iterate(self, q):
        return iterate(self, q)


IDENTITY = TorusMap(())


def lift_eval(fmap, p):
    """Evaluate the lift of ``fmap`` at a point or an ``(N, 2)`` array."""
    return fmap(p)


def project(p):
    """Reduce lift coordinates into [0, 1)^2."""
    p = np.asarray(p, dtype=np.float64)
    out = p - np.floor(p)
    # tiny negatives round up to exactly 1.0
    return np.where(out >= 1.0, 0.0, out)


def compose(f, g):
    """Map whose lift is ``lift(f) o lift(g)``."""
    return TorusMap(f.chain + g.chain)


def iterate(fmap, q):
    if int(q) != q or q < 1:
        raise ValueError(f"iterate needs a positive integer, got {q}")
    return TorusMap(fmap.chain * int(q))


def jacobian(fmap, p):
    return fmap.jacobian(p)


def inverse(fmap):
    return TorusMap(tuple(g.inverse() for g in reversed(fmap.chain)))


def torus_distance(p, q):
    d = np.asarray(p, dtype=np.float64) - np.asarray(q, dtype=np.float64)
    d = d - np.round(d)
    return np.hypot(d[..., 0], d[..., 1])


def random_generator(rng, kind=None):
    """One generator with moderate parameters, drawn from ``rng``.

    Shears and twists get wide transitions so that torus quadratures at the
    default grid resolve them to near machine precision.
    """
    if kind is None:
        kind = ("translate", "hshear", "vshear", "disktwist")[rng.integers(4)]
    if kind == "translate":
        return Translation(*rng.uniform(-0.5, 0.5, size=2))
    if kind in ("hshear", "vshear"):
        lo = rng.uniform(0.0, 0.4)
        hi = lo + rng.uniform(0.35, 0.6)
        profile = BumpProfile(rng.uniform(0.1, 0.3), rng.uniform(0.8, 0.95))
        cls = HorizontalShear if kind == "hshear" else VerticalShear
        return cls(rng.uniform(-0.04, 0.04), (lo, hi), profile)
    if kind == "disktwist":
        center = rng.uniform(0.0, 1.0, size=2)
        profile = BumpProfile(rng.uniform(0.2, 0.3), rng.uniform(0.85, 0.95))
        return DiskTwist(Point2(*center), rng.uniform(0.15, 0.3), rng.uniform(-0.4, 0.4), profile)
    raise ValueError(kind)


def random_chain(rng, depth):
    """A ``depth``-long random composition; ``rng`` is a numpy Generator."""
    return TorusMap(tuple(random_generator(rng) for _ in range(depth)))
