import numpy as np
import pytest

from fatou_geometry.errors import InvalidMap, MapSyntaxError
from fatou_geometry.ratmap import (
    Polynomial,
    RationalMap,
    critical_points,
    fixed_points,
    map_to_text,
    evaluate,
    parse_map,
    poly_roots,
    preimages,
    preset_catalog,
    preset_map,
    rabbit_parameter,
)
from fatou_geometry.sphere import INFINITY, SpherePoint, chordal_distance, invert_chart


def roots_of(coeffs):
    return sorted(
        ((round(r.point.value.real, 8), round(r.point.value.imag, 8), r.multiplicity) for r in poly_roots(coeffs)),
    )


def test_poly_roots_simple():
    assert roots_of([1, 0, 1]) == [(0.0, -1.0, 1), (0.0, 1.0, 1)]
    assert roots_of([-1, 0, 0, 0, 1]) == [(-1.0, 0.0, 1), (0.0, -1.0, 1), (0.0, 1.0, 1), (1.0, 0.0, 1)]


def test_poly_roots_double_root_merged():
    assert roots_of([1, -2, 1]) == [(1.0, 0.0, 2)]


def test_poly_roots_zero_roots():
    assert roots_of([0, 0, 2, 2]) == [(-1.0, 0.0, 1), (0.0, 0.0, 2)]


def test_poly_roots_residuals():
    rng = np.random.default_rng(3)
    coeffs = rng.normal(size=13) + 1j * rng.normal(size=13)
    roots = poly_roots(coeffs)
    assert sum(r.multiplicity for r in roots) == 12
    for r in roots:
        z = r.point.value
        scale = np.sum(np.abs(coeffs) * np.abs(z) ** np.arange(13))
        assert abs(Polynomial(coeffs)(z)) <= 1e-10 * scale


def test_poly_roots_rejects_constants():
    with pytest.raises(InvalidMap):
        poly_roots([3])


def test_evaluation():
    f = preset_map("chebyshev")
    assert f(0) == SpherePoint(-2)
    assert f(INFINITY) == INFINITY
    g = RationalMap([1, 0, 1], [0, 1])
    assert g(0) == INFINITY
    assert g(INFINITY) == INFINITY
    assert evaluate(f, SpherePoint(2)) == SpherePoint(2)


def test_eval_array_matches_scalar():
    g = RationalMap([1, 0, 1], [0, 1])
    z = np.array([0.5, -2 + 1j, 0, complex(np.inf, 0), 1e6j])
    values = g.eval_array(z)
    for zk, wk in zip(z, values):
        assert chordal_distance(g(zk), wk) < 1e-12


def critical_set(f):
    crits = critical_points(f)
    finite = sorted(
        ((round(c.location.value.real, 8), round(c.location.value.imag, 8)), c.multiplicity)
        for c in crits
        if c.location.is_finite
    )
    return finite, [c.multiplicity for c in crits if c.location.at_infinity]


def test_critical_points_quadratic_polynomial():
    finite, at_inf = critical_set(RationalMap([0.25, 0, 1]))
    assert finite == [((0.0, 0.0), 1)]
    assert at_inf == [1]


def test_critical_points_rational():
    finite, at_inf = critical_set(RationalMap([1, 0, 1], [0, 1]))
    assert finite == [((-1.0, 0.0), 1), ((1.0, 0.0), 1)]
    assert at_inf == []


def test_critical_points_cube():
    finite, at_inf = critical_set(RationalMap([0, 0, 0, 1]))
    assert finite == [((0.0, 0.0), 2)]
    assert at_inf == [2]


def test_critical_count_is_2d_minus_2():
    for name, (_, f) in preset_catalog().items():
        assert sum(c.multiplicity for c in critical_points(f)) == 2 * f.degree - 2, name


def test_preimages():
    f = preset_map("chebyshev")
    values = sorted(p.value.real for p in preimages(f, 0))
    assert values == pytest.approx([-np.sqrt(2.0), np.sqrt(2.0)], abs=1e-12)

    assert preimages(preset_map("squaring"), INFINITY) == [INFINITY, INFINITY]

    pre = preimages(RationalMap([1, 0, 1], [0, 1]), INFINITY)
    assert INFINITY in pre
    assert any(not p.at_infinity and abs(p.value) < 1e-12 for p in pre)


def test_fixed_points_of_squaring():
    fixed = fixed_points(preset_map("squaring"))
    finite = sorted(round(p.value.real, 8) for p in fixed if not p.at_infinity)
    assert finite == [0.0, 1.0]
    assert INFINITY in fixed


def test_parse_map():
    f = parse_map("num = -1, 0, 1; den = 1")
    assert f.degree == 2
    assert list(f.num.coeffs) == [-1, 0, 1]

    g = parse_map(" num = 1+2i, 0, 1 ")
    assert g.num.coeffs[0] == 1 + 2j
    assert g.is_polynomial()


@pytest.mark.parametrize(
    "text",
    [
        "num = 1, , 2",
        "foo = 1, 2, 3",
        "den = 1",
        "num = 1, 0, 1; num = 1, 0, 1",
        "num = 1, 0, x",
        "num 1, 0, 1",
    ],
)
def test_parse_map_syntax_errors(text):
    with pytest.raises(MapSyntaxError):
        parse_map(text)


@pytest.mark.parametrize(
    "text",
    [
        "num = 1, 2",
        "num = 0, 0, 1; den = 0, 1",
        "num = 1, 0, 1; den = 0",
        "num = 0",
    ],
)
def test_parse_map_invalid_maps(text):
    with pytest.raises(InvalidMap):
        parse_map(text)


def test_map_text_reparses():
    f = preset_map("rabbit")
    g = parse_map(map_to_text(f))
    np.testing.assert_allclose(g.num.coeffs, f.num.coeffs, rtol=1e-15)
    np.testing.assert_allclose(g.den.coeffs, f.den.coeffs, rtol=1e-15)


def test_rabbit_parameter():
    c = rabbit_parameter()
    assert c.imag > 0
    assert abs(c**3 + 2 * c**2 + c + 1) < 1e-12
    assert c == pytest.approx(-0.1225611668766536 + 0.7448617666197442j, abs=1e-9)


def test_preset_catalog():
    catalog = preset_catalog()
    assert list(catalog) == ["squaring", "chebyshev", "basilica", "dendrite", "cauliflower", "rabbit"]
    assert catalog["dendrite"][1].num.coeffs[0] == 1j
    assert catalog["basilica"][0] == "z^2 - 1"


def test_unknown_preset():
    with pytest.raises(InvalidMap):
        preset_map("mandelbrot")


def test_compose_degree():
    f = preset_map("basilica")
    g = f.compose(f)
    assert g.degree == 4
    assert chordal_distance(g(0.3), f(f(0.3))) < 1e-12


ROUND_TRIP_MAPS = [
    preset_map("basilica"),
    preset_map("rabbit"),
    RationalMap([1, 0, 1], [0, 1]),
    RationalMap([0, -3, 0, 4]),
    RationalMap([1, 2j, 0, 1], [0.5, 0, 1]),
]


@pytest.mark.parametrize("f", ROUND_TRIP_MAPS)
@pytest.mark.parametrize("w", [0.3 + 2j, -5, 1e4, 0.01j, INFINITY])
def test_preimages_map_back(f, w):
    pre = preimages(f, w)
    assert len(pre) == f.degree
    for x in pre:
        assert chordal_distance(f(x), w) <= 1e-8


@pytest.mark.parametrize("f", ROUND_TRIP_MAPS)
def test_inverted_chart_agrees(f):
    g = f.conjugate_by_inversion()
    for z in [0.2 - 0.1j, 3 + 4j, -0.9, 50j]:
        assert chordal_distance(invert_chart(g(invert_chart(z))), f(z)) <= 1e-10


def test_critical_count_on_random_maps():
    rng = np.random.default_rng(7)
    for _ in range(50):
        d = int(rng.integers(2, 6))
        num = rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)
        den = rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)
        f = RationalMap(num, den)
        assert sum(c.multiplicity for c in critical_points(f)) == 2 * d - 2
