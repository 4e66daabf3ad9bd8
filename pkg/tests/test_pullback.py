import math

import numpy as np
import pytest

from fatou_geometry.errors import ConfigError, CriticalValueOnPath, InsufficientData
from fatou_geometry.pullback import (
    Polyline,
    ball_component,
    chordal_diameter,
    fit_lambda,
    lift_path,
    mod_bound_check,
    mod_bound_ratio,
    random_mod_cases,
    round_trip_error,
    shrink_experiment,
    shrink_verdict,
    winding_number,
)
from fatou_geometry.grid import JuliaSample
from fatou_geometry.ratmap import preset_map
from fatou_geometry.sphere import INFINITY, chordal_array


def test_polyline_drops_repeated_points():
    line = Polyline(np.array([0, 0, 1, 1, 2j]))
    assert list(line.points) == [0, 1, 2j]
    assert line.length() == pytest.approx(math.sqrt(2.0) + chordal_array(1, 2j), abs=1e-12)


def test_chordal_diameter():
    assert chordal_diameter([0, 1]) == pytest.approx(math.sqrt(2.0))
    assert chordal_diameter([0, complex(math.inf, 0), 0.5]) == pytest.approx(2.0)
    assert chordal_diameter([3j]) == 0.0


def test_chordal_diameter_blocks_agree():
    z = np.exp(2j * np.pi * np.linspace(0, 0.3, 500)) * np.linspace(0.5, 2.0, 500)
    assert chordal_diameter(z, block=64) == pytest.approx(chordal_diameter(z), abs=1e-12)


def test_winding_number():
    circle = np.exp(2j * np.pi * np.arange(64) / 64)
    assert winding_number(circle, 0) == 1
    assert winding_number(circle[::-1], 0) == -1
    assert winding_number(circle, 3) == 0


@pytest.mark.parametrize("w0, end", [(2, 3), (-2, -3)])
def test_lift_real_segment(squaring, w0, end):
    lifted = lift_path(squaring, Polyline.segment(4, 9, 11), w0)
    pts = lifted.points
    assert pts[0] == pytest.approx(w0)
    assert pts[-1] == pytest.approx(end, abs=1e-8)
    np.testing.assert_allclose(pts.imag, 0.0, atol=1e-8)
    np.testing.assert_allclose(pts**2, pts.real**2, atol=1e-7)
    assert np.all(np.diff(np.abs(pts)) > 0)


def test_lift_loop_around_critical_value_is_open(squaring):
    loop = Polyline(np.exp(2j * np.pi * np.arange(64) / 64), closed=True)
    lifted = lift_path(squaring, loop, 1)
    assert not lifted.closed
    assert lifted.points[-1] == pytest.approx(-1, abs=1e-7)


def test_lift_through_critical_value_raises(squaring):
    with pytest.raises(CriticalValueOnPath):
        lift_path(squaring, Polyline.segment(-1, 1, 5), 1j)


def test_lift_start_must_map_to_path(squaring):
    with pytest.raises(ConfigError):
        lift_path(squaring, Polyline.segment(4, 9, 3), 1)


def test_component_near_repelling_point(squaring):
    comp = ball_component(squaring, 1, 0.1, 1, 1)
    assert comp.covering_degree == 1
    assert comp.level_degrees == [1]
    assert 0.09 < comp.diameter < 0.11
    assert round_trip_error(squaring, comp) < 1e-6
    assert not comp.contains_critical


def test_two_disjoint_preimage_components(squaring):
    right = ball_component(squaring, 1, 0.5, 1, 1)
    left = ball_component(squaring, 1, 0.5, 1, -1)
    assert right.covering_degree == left.covering_degree == 1
    gap = np.min(chordal_array(right.boundary.points[:, None], left.boundary.points[None, :]))
    assert gap > 0.1


def test_component_around_critical_value_doubly_covered(squaring):
    # B(0.3, 1) contains the critical value 0 but not ∞
    comp = ball_component(squaring, 0.3, 1.0, 1, math.sqrt(0.3))
    assert comp.covering_degree == 2
    assert comp.contains_critical
    assert round_trip_error(squaring, comp) < 1e-6
    assert comp.diameter == pytest.approx(chordal_diameter(comp.boundary.points))


def test_component_depth_bounds(squaring):
    w = np.exp(2j * np.pi / 8)
    comp = ball_component(squaring, 1, 0.2, 3, w)
    assert 1 <= comp.covering_degree <= 2**3
    assert round_trip_error(squaring, comp) < 1e-6
    assert comp.diameter < 0.2


def test_component_rejects_bad_seed(squaring):
    with pytest.raises(ConfigError):
        ball_component(squaring, 1, 0.1, 1, 2)
    with pytest.raises(ConfigError):
        ball_component(squaring, 1, 0.1, 0, 1)


def test_fit_lambda_geometric():
    depths = [1, 2, 3, 4, 5, 6]
    lam, window, residual = fit_lambda(depths, [0.3 * 2.0**-n for n in depths])
    assert lam == pytest.approx(2.0, rel=1e-9)
    assert window == (1, 6)
    assert residual < 1e-9


@pytest.mark.parametrize(
    "lam, depths, diameters, n_max, expected",
    [
        (2.0, [1, 2], [0.2, 0.1], 2, "expshrink_consistent"),
        (1.0, [1, 2], [0.2, 0.15], 2, "shrinking_fails"),
        (1.01, [1, 2], [0.2, 0.05], 2, "sumshrink_only_consistent"),
        # depth 1 unmeasured: 0.15 at depth 2 is not compared with depth 1
        (1.0, [2, 3], [0.2, 0.15], 3, "sumshrink_only_consistent"),
        # depth 1 and n_max = 3 measured, depth 2 skipped
        (1.0, [1, 3], [0.2, 0.15], 3, "shrinking_fails"),
        (1.0, [1, 3], [0.4, 0.15], 3, "sumshrink_only_consistent"),
    ],
)
def test_shrink_verdict(lam, depths, diameters, n_max, expected):
    assert shrink_verdict(lam, depths, diameters, n_max) == expected


def test_mod_bound_equal_radii(squaring):
    ratio, outer, inner = mod_bound_ratio(squaring, 1, 0.4, 0.4, 1, 1)
    assert inner is outer
    assert ratio == pytest.approx(1 / 64)


def test_mod_bound_nested(squaring):
    w = np.exp(2j * np.pi / 8)
    ratio, _, _ = mod_bound_ratio(squaring, 1, 0.4, 0.1, 3, w)
    assert ratio < 1


def test_mod_bound_doubly_covered(squaring):
    ratio, outer, _ = mod_bound_ratio(squaring, 0.3, 1.0, 0.8, 1, math.sqrt(0.3))
    assert outer.covering_degree == 2
    assert ratio < 1


def test_mod_bound_check(squaring):
    w = np.exp(2j * np.pi / 8)
    assert mod_bound_check(squaring, [(1, 0.4, 0.1, 3, w), (1, 0.4, 0.4, 1, 1)]) < 1


@pytest.mark.slow
def test_mod_bound_random_cases(squaring, circle_sample):
    cases = random_mod_cases(squaring, circle_sample, 100, seed=5)
    assert all(1 <= n <= 5 for _, _, _, n, _ in cases)
    assert mod_bound_check(squaring, cases) < 1


def test_mod_bound_radii_order(squaring):
    with pytest.raises(ConfigError):
        mod_bound_ratio(squaring, 1, 0.1, 0.4, 1, 1)


def test_shrink_radius_range(squaring, circle_sample):
    with pytest.raises(ConfigError):
        shrink_experiment(squaring, circle_sample, 0.6, 3, 2, seed=0)


@pytest.mark.slow
def test_shrink_rate_on_circle(squaring, circle_sample):
    report = shrink_experiment(squaring, circle_sample, 0.2, 8, 4, seed=1)
    assert 1.7 <= report.fitted_lambda <= 2.3
    assert report.verdict == "expshrink_consistent"
    assert report.depths[-1] == 8


def test_shrink_near_ball_without_points(squaring, circle_sample):
    with pytest.raises(InsufficientData):
        shrink_experiment(squaring, circle_sample, 0.2, 2, 2, seed=0, near=(INFINITY, 0.1))


def test_component_diameter_grows_with_radius(squaring):
    # f²(i) = 1
    diameters = [ball_component(squaring, 1, r, 2, 1j).diameter for r in [0.05, 0.1, 0.2, 0.3]]
    assert diameters == sorted(diameters)
    assert diameters[0] < diameters[-1]


@pytest.mark.slow
def test_shrink_slow_at_parabolic_point():
    f = preset_map("cauliflower")
    sample = JuliaSample(points=np.array([0.5 + 0j]), method="inverse_iteration")
    report = shrink_experiment(f, sample, 0.1, 20, 2, seed=0, near=(0.5, 0.05))
    assert report.fitted_lambda <= 1.15
    assert report.verdict != "expshrink_consistent"
