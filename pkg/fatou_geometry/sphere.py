"""
Riemann Sphere Arithmetic

Extended complex points, the chordal metric δ used by every measurement in the
package, and spherical derivatives.

The chordal metric is the Euclidean distance between the images of two points
on the unit sphere under inverse stereographic projection, so δ ∈ [0, 2] and
the sphere has diameter 2:

    δ(a, b) = 2|a - b| / sqrt((1 + |a|^2)(1 + |b|^2)),   δ(a, ∞) = 2 / sqrt(1 + |a|^2)

Array helpers use plain complex ndarrays in which any infinite entry stands for
the point at infinity.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .data import CHART_SWITCH_RADIUS, SPHERE_DIAMETER
from .errors import ConfigError, NonConvergence

COMPLEX_INF = complex(np.inf, 0.0)


@dataclass(frozen=True)
class SpherePoint:
    """
    A point of the Riemann sphere.

    `value` is meaningful only when `at_infinity` is False. Construction
    canonicalizes: infinite values become the single point at infinity and
    NaN coordinates are rejected.
    """

    value: complex = 0j
    at_infinity: bool = False

    def __post_init__(self):
        value = complex(self.value)
        if self.at_infinity:
            object.__setattr__(self, "value", 0j)
            return
        if math.isnan(value.real) or math.isnan(value.imag):
            raise NonConvergence("SpherePoint coordinates must not be NaN")
        if math.isinf(value.real) or math.isinf(value.imag):
            object.__setattr__(self, "value", 0j)
            object.__setattr__(self, "at_infinity", True)
            return
        object.__setattr__(self, "value", value)

    @classmethod
    def of(cls, z):
        if isinstance(z, SpherePoint):
            return z
        if z is None:
            return INFINITY
        return cls(complex(z))

    @property
    def is_finite(self):
        return not self.at_infinity

    def to_complex(self):
        return COMPLEX_INF if self.at_infinity else self.value

    def __complex__(self):
        return self.to_complex()

    def __repr__(self):
        return "SpherePoint(inf)" if self.at_infinity else "SpherePoint(%r)" % (self.value,)


INFINITY = SpherePoint(0j, True)
ZERO = SpherePoint(0j)


def as_point(z):
    return SpherePoint.of(z)


def invert_chart(z):
    """1/z on the sphere, exchanging 0 and ∞."""
    z = as_point(z)
    if z.at_infinity:
        return ZERO
    if z.value == 0:
        return INFINITY
    return SpherePoint(1.0 / z.value)


def chordal_distance(a, b):
    a = as_point(a)
    b = as_point(b)
    if a.at_infinity and b.at_infinity:
        return 0.0
    if a.at_infinity:
        a, b = b, a
    if b.at_infinity:
        return min(SPHERE_DIAMETER, 2.0 / math.hypot(1.0, abs(a.value)))

    za, zb = a.value, b.value
    if abs(za) > CHART_SWITCH_RADIUS and abs(zb) > CHART_SWITCH_RADIUS:
        za, zb = 1.0 / za, 1.0 / zb
    d = 2.0 * abs(za - zb) / (math.hypot(1.0, abs(za)) * math.hypot(1.0, abs(zb)))
    return min(SPHERE_DIAMETER, d)


def chordal_array(a, b):
    """Broadcasting chordal distance on complex arrays (infinite entries = ∞)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    a, b = np.broadcast_arrays(a, b)
    ia = np.isinf(a)
    ib = np.isinf(b)

    with np.errstate(all="ignore"):
        both_far = (np.abs(a) > CHART_SWITCH_RADIUS) & (np.abs(b) > CHART_SWITCH_RADIUS) & ~ia & ~ib
        a2 = np.where(both_far, 1.0 / a, a)
        b2 = np.where(both_far, 1.0 / b, b)
        fa = np.where(ia, 0.0, a2)
        fb = np.where(ib, 0.0, b2)
        finite = 2.0 * np.abs(fa - fb) / (np.hypot(1.0, np.abs(fa)) * np.hypot(1.0, np.abs(fb)))
        to_inf_a = 2.0 / np.hypot(1.0, np.abs(fb))
        to_inf_b = 2.0 / np.hypot(1.0, np.abs(fa))

    d = np.where(ia & ib, 0.0, np.where(ia, to_inf_a, np.where(ib, to_inf_b, finite)))
    return np.minimum(d, SPHERE_DIAMETER)


def to_sphere_xyz(z):
    """Inverse stereographic projection onto the unit sphere, shape (..., 3)."""
    z = np.asarray(z, dtype=complex)
    xyz = np.empty(z.shape + (3,), dtype=float)
    with np.errstate(all="ignore"):
        near = np.abs(z) <= 1.0
        # |z| <= 1 : direct formula; otherwise in the w = 1/z chart
        s = 1.0 + np.abs(z) ** 2
        w = np.where(np.isinf(z), 0.0, 1.0 / np.where(near, 1.0, z))
        t = 1.0 + np.abs(w) ** 2
        xyz[..., 0] = np.where(near, 2.0 * z.real / s, 2.0 * w.real / t)
        xyz[..., 1] = np.where(near, 2.0 * z.imag / s, -2.0 * w.imag / t)
        xyz[..., 2] = np.where(near, (np.abs(z) ** 2 - 1.0) / s, (1.0 - np.abs(w) ** 2) / t)
    return xyz


def from_sphere_xyz(xyz):
    """Stereographic projection of unit vectors back to the plane (north pole → ∞)."""
    xyz = np.asarray(xyz, dtype=float)
    x, y, h = xyz[..., 0], xyz[..., 1], xyz[..., 2]
    with np.errstate(all="ignore"):
        south = (x + 1j * y) / (1.0 - h)
        north_den = x - 1j * y
        north = np.where(north_den == 0, COMPLEX_INF, (1.0 + h) / north_den)
    return np.where(h <= 0.0, south, north)


class ChordalCircle:
    """
    The circle ∂B(center, r) of the chordal metric, parametrized by angle.

    Chordal circles are round circles in every chart; the parametrization is
    done on the unit sphere so that every sampled point lies exactly on the
    circle.
    """

    def __init__(self, center, radius):
        if not 0.0 < radius < SPHERE_DIAMETER:
            raise ConfigError("chordal radius must lie in (0, 2), got %r" % radius)
        self.center = as_point(center)
        self.radius = float(radius)

        n = to_sphere_xyz(self.center.to_complex())
        a = np.array([0.0, 0.0, 1.0]) if abs(n[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
        e1 = a - np.dot(a, n) * n
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(n, e1)
        theta = 2.0 * math.asin(self.radius / 2.0)

        self._n = n
        self._e1 = e1
        self._e2 = e2
        self._cos = math.cos(theta)
        self._sin = math.sin(theta)

    @property
    def angle(self):
        """Central angle between the center and the circle."""
        return math.atan2(self._sin, self._cos)

    def point_at(self, theta, t):
        """Point at central angle `theta` from the center in direction `t`."""
        theta = np.asarray(theta, dtype=float)
        t = np.asarray(t, dtype=float)
        theta, t = np.broadcast_arrays(theta, t)
        xyz = (
            np.cos(theta)[..., None] * self._n
            + (np.sin(theta) * np.cos(t))[..., None] * self._e1
            + (np.sin(theta) * np.sin(t))[..., None] * self._e2
        )
        return from_sphere_xyz(xyz)

    def polar(self, z):
        """(theta, t) of a point relative to the center; t = 0 at the center itself."""
        x = to_sphere_xyz(as_point(z).to_complex())
        theta = math.acos(max(-1.0, min(1.0, float(np.dot(x, self._n)))))
        t = math.atan2(float(np.dot(x, self._e2)), float(np.dot(x, self._e1)))
        return theta, t

    def at(self, t):
        return self.point_at(self.angle, t)

    def sample(self, count):
        return self.at(np.linspace(0.0, 2.0 * math.pi, count, endpoint=False))

    def contains(self, z):
        return chordal_distance(self.center, z) < self.radius


class ChartData(NamedTuple):
    """Chart-local values of a rational map: u is z or 1/z, P/Q the chart polynomials."""

    inverted: bool
    u: complex
    P: complex
    Q: complex
    dP: complex
    dQ: complex


def spherical_derivative_factor(f, z):
    """
    |f'(z)| (1 + |z|^2) / (1 + |f(z)|^2), evaluated in whichever chart keeps the
    numbers bounded. Zero exactly at critical points.

    With homogeneous coordinates the factor is |P'Q - PQ'| (1 + |u|^2) / (|P|^2 + |Q|^2)
    in both charts, so no chart transition is needed.
    """
    cd = f.chart_data(z)
    wronskian = cd.dP * cd.Q - cd.P * cd.dQ
    norm = abs(cd.P) ** 2 + abs(cd.Q) ** 2
    return abs(wronskian) * (1.0 + abs(cd.u) ** 2) / norm
