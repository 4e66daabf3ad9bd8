import math

import numpy as np
import pytest

from fatou_geometry.errors import ConfigError, NonConvergence
from fatou_geometry.ratmap import RationalMap
from fatou_geometry.sphere import (
    INFINITY,
    ChordalCircle,
    SpherePoint,
    chordal_array,
    chordal_distance,
    from_sphere_xyz,
    invert_chart,
    spherical_derivative_factor,
    to_sphere_xyz,
)


def test_infinity_is_canonical():
    assert SpherePoint(complex(math.inf, 5.0)) == INFINITY
    assert SpherePoint(complex(-math.inf, 0.0)) == INFINITY
    assert SpherePoint.of(None) == INFINITY
    assert INFINITY.value == 0j


def test_nan_rejected():
    with pytest.raises(NonConvergence):
        SpherePoint(complex(math.nan, 0.0))


@pytest.mark.parametrize(
    "a, b, expected",
    [
        (1, 1, 0.0),
        (0, INFINITY, 2.0),
        (0, 1, math.sqrt(2.0)),
        (1, -1, 2.0),
    ],
)
def test_chordal_distance(a, b, expected):
    assert chordal_distance(a, b) == pytest.approx(expected, abs=1e-12)
    assert chordal_distance(b, a) == pytest.approx(expected, abs=1e-12)


def test_chordal_array_matches_scalar():
    a = np.array([0, 1, 2 + 3j, 1e9, complex(math.inf, 0)])
    b = np.array([1j, complex(math.inf, 0), -0.5, 1e9 + 1, complex(math.inf, 0)])
    expected = [chordal_distance(x, y) for x, y in zip(a, b)]
    np.testing.assert_allclose(chordal_array(a, b), expected, atol=1e-12)


def test_chordal_equals_embedding_distance():
    z = np.array([0, 0.5 - 2j, 3j, 40, complex(math.inf, 0)])
    xyz = to_sphere_xyz(z)
    np.testing.assert_allclose(np.linalg.norm(xyz, axis=-1), 1.0, atol=1e-14)
    euclid = np.linalg.norm(xyz[:, None, :] - xyz[None, :, :], axis=-1)
    np.testing.assert_allclose(euclid, chordal_array(z[:, None], z[None, :]), atol=1e-12)


def test_from_sphere_xyz_inverts_projection():
    z = np.array([0, 0.3 + 0.1j, -4j, 1e5])
    np.testing.assert_allclose(from_sphere_xyz(to_sphere_xyz(z)), z, rtol=1e-10, atol=1e-14)
    assert np.isinf(from_sphere_xyz(to_sphere_xyz(complex(math.inf, 0))))


@pytest.mark.parametrize("z, expected", [(0, INFINITY), (INFINITY, SpherePoint(0)), (2, SpherePoint(0.5))])
def test_invert_chart(z, expected):
    assert invert_chart(z) == expected


@pytest.mark.parametrize(
    "num, z, expected",
    [
        ([0, 0, 1], 1, 2.0),
        ([0, 0, 1], 0, 0.0),
        ([-2, 0, 1], -2, 4.0),
        ([-2, 0, 1], 2, 4.0),
    ],
)
def test_spherical_derivative_factor(num, z, expected):
    assert spherical_derivative_factor(RationalMap(num), z) == pytest.approx(expected, abs=1e-12)


def test_spherical_derivative_vanishes_at_infinity_for_polynomials():
    assert spherical_derivative_factor(RationalMap([-2, 0, 1]), INFINITY) == 0.0


@pytest.mark.parametrize("center", [0.3 - 0.2j, INFINITY, 1e3])
def test_chordal_circle_points_lie_on_circle(center):
    circle = ChordalCircle(center, 0.4)
    points = circle.sample(32)
    np.testing.assert_allclose(chordal_array(points, complex(circle.center)), 0.4, atol=1e-12)


def test_chordal_circle_radius_range():
    with pytest.raises(ConfigError):
        ChordalCircle(0, 2.0)


def random_points(rng, count):
    radius = np.exp(rng.normal(0.0, 3.0, count))
    return radius * np.exp(2j * np.pi * rng.random(count))


def test_chordal_triangle_inequality():
    rng = np.random.default_rng(11)
    a, b, c = (random_points(rng, 100_000) for _ in range(3))
    assert np.all(chordal_array(a, c) <= chordal_array(a, b) + chordal_array(b, c) + 1e-12)


def test_chordal_invariant_under_inversion():
    rng = np.random.default_rng(12)
    a, b = random_points(rng, 2000), random_points(rng, 2000)
    np.testing.assert_allclose(chordal_array(1.0 / a, 1.0 / b), chordal_array(a, b), atol=1e-12)
    assert chordal_distance(invert_chart(0.5j), invert_chart(INFINITY)) == pytest.approx(
        chordal_distance(0.5j, INFINITY), abs=1e-12
    )


@pytest.mark.parametrize("z", [0.3 + 0.4j, -2.5 + 0.1j, 1e3j, 0.05])
def test_spherical_derivative_chain_rule(z):
    f = RationalMap([-1, 0, 1])
    g = RationalMap([1, 0, 1], [0, 1])
    h = f.compose(g)
    expected = spherical_derivative_factor(f, g(z)) * spherical_derivative_factor(g, z)
    assert spherical_derivative_factor(h, z) == pytest.approx(expected, rel=1e-8)
