import numpy as np
import pytest

from fatou_geometry.errors import ConfigError
from fatou_geometry.grid import GridSpec, JuliaSample, classify_and_label, distance_field, julia_sample
from fatou_geometry.orbits import detect_cycles
from fatou_geometry.ratmap import preset_map
from fatou_geometry.sphere import chordal_array, chordal_distance


def test_grid_spec_validation():
    with pytest.raises(ConfigError):
        GridSpec(chart="polar")
    with pytest.raises(ConfigError):
        GridSpec(half_width=0.0)
    with pytest.raises(ConfigError):
        GridSpec(resolution=8)


def test_cell_of_and_centers():
    spec = GridSpec(center=0.5, half_width=0.5, resolution=17)
    assert spec.cell_of(0.5) == (8, 8)
    assert spec.centers()[8, 8] == pytest.approx(0.5)
    assert spec.cell_of(3.0) is None
    rows, cols, valid = spec.cells_of(np.array([0.5, 3.0, 0.01 + 0.49j]))
    assert list(valid) == [True, False, True]
    assert (rows[0], cols[0]) == (8, 8)
    assert (rows[2], cols[2]) == (0, 0)


def test_inverted_chart_puts_infinity_at_the_center():
    spec = GridSpec(chart="inverted", half_width=1.0, resolution=17)
    assert chordal_distance(spec.centers()[8, 8], complex(np.inf, 0)) < 1e-10
    assert spec.cell_of(complex(np.inf, 0)) == (8, 8)


def test_squaring_basins(squaring_field):
    spec = squaring_field.spec
    z = spec.centers()
    diag = spec.cell_diagonal
    inner = np.abs(z) < 1 - diag
    outer = np.abs(z) > 1 + diag
    # cycles are [0, ∞] in that order
    assert np.all(squaring_field.basin[inner] == 0)
    assert np.all(squaring_field.basin[outer] == 1)
    assert squaring_field.n_components == 2


def test_component_iff_basin(squaring_field):
    assert np.array_equal(squaring_field.component < 0, squaring_field.basin < 0)
    assert np.all(squaring_field.delta_hat <= 2.0)


def test_coarse_grid_still_separates(squaring, squaring_cycles):
    field = classify_and_label(squaring, GridSpec(half_width=2.0, resolution=16), squaring_cycles)
    assert field.n_components == 2
    assert sorted(np.unique(field.component[field.component >= 0])) == [0, 1]


def test_threads_do_not_change_labels(squaring, squaring_cycles):
    spec = GridSpec(half_width=1.5, resolution=32)
    one = classify_and_label(squaring, spec, squaring_cycles, threads=1)
    four = classify_and_label(squaring, spec, squaring_cycles, threads=4)
    assert np.array_equal(one.component, four.component)
    assert np.array_equal(one.iter_count, four.iter_count)


def test_no_attractors_means_all_julia(squaring):
    field = classify_and_label(squaring, GridSpec(resolution=16), cycles=[])
    assert np.all(field.basin == -1)
    assert field.n_components == 0


def test_basilica_has_many_components():
    f = preset_map("basilica")
    field = classify_and_label(f, GridSpec(half_width=1.8, resolution=512), detect_cycles(f))
    assert field.n_components >= 10


def test_julia_sample_squaring(squaring):
    sample = julia_sample(squaring, 1000, seed=11)
    assert len(sample) == 1000
    assert np.all(np.abs(np.abs(sample.points) - 1.0) <= 1e-6)


def test_julia_sample_chebyshev(chebyshev):
    sample = julia_sample(chebyshev, 1000, seed=5)
    assert np.all(np.abs(sample.points.imag) <= 1e-3)
    assert np.all(np.abs(sample.points.real) <= 2.0 + 1e-3)


def test_julia_sample_is_deterministic(chebyshev):
    a = julia_sample(chebyshev, 200, seed=42)
    b = julia_sample(chebyshev, 200, seed=42)
    c = julia_sample(chebyshev, 200, seed=43)
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, c.points)


def test_julia_sample_boundary_cells(squaring, squaring_field):
    sample = julia_sample(squaring, 10, seed=0, method="boundary_cells", field=squaring_field)
    assert len(sample) == int(squaring_field.boundary_mask().sum())
    assert np.all(np.abs(np.abs(sample.points) - 1.0) <= 2 * squaring_field.spec.cell_diagonal)


def test_julia_sample_needs_field_for_boundary_cells(squaring):
    with pytest.raises(ConfigError):
        julia_sample(squaring, 10, seed=0, method="mixed")


def test_distance_at_half(squaring, squaring_cycles, circle_sample):
    spec = GridSpec(center=0.5, half_width=0.5, resolution=17)
    field = distance_field(classify_and_label(squaring, spec, squaring_cycles), circle_sample)
    assert field.delta_hat[8, 8] == pytest.approx(chordal_distance(0.5, 1.0), abs=1e-2)
    assert field.delta_hat[8, 8] == pytest.approx(1 / np.sqrt(2.5), abs=1e-2)


def test_distance_matches_brute_force(squaring_field, circle_sample):
    centers = squaring_field.centers()
    for cell in [(64, 64), (10, 100), (64, 110)]:
        brute = np.min(chordal_array(circle_sample.points, centers[cell]))
        assert squaring_field.delta_hat[cell] == pytest.approx(brute, abs=1e-12)


def test_distance_zero_on_sample_points(squaring_field):
    centers = squaring_field.centers()
    sample = JuliaSample(points=centers[5, :10].copy(), method="boundary_cells")
    field = distance_field(squaring_field, sample)
    assert np.all(field.delta_hat[5, :10] == 0.0)


def test_more_points_never_increase_distance(squaring_field, circle_sample):
    half = JuliaSample(points=circle_sample.points[::2], method="inverse_iteration")
    coarse = distance_field(squaring_field, half)
    assert np.all(squaring_field.delta_hat <= coarse.delta_hat)


def test_distance_is_one_lipschitz(squaring_field):
    centers = squaring_field.centers()
    delta = squaring_field.delta_hat
    across = chordal_array(centers[:, 1:], centers[:, :-1])
    down = chordal_array(centers[1:, :], centers[:-1, :])
    assert np.all(np.abs(delta[:, 1:] - delta[:, :-1]) <= across + 1e-12)
    assert np.all(np.abs(delta[1:, :] - delta[:-1, :]) <= down + 1e-12)


def test_distance_error_shrinks_with_sample_size(squaring, squaring_cycles):
    labeled = classify_and_label(squaring, GridSpec(half_width=1.25, resolution=64), squaring_cycles)
    centers = labeled.centers()
    disk = np.abs(centers) < 1.0
    exact = chordal_array(centers[disk], centers[disk] / np.abs(centers[disk]))

    errors = []
    for count in [1000, 10000]:
        field = distance_field(labeled, julia_sample(squaring, count, seed=3))
        error = field.delta_hat[disk] - exact
        assert np.all(error >= -1e-5)
        errors.append(error.max())
    assert errors[1] < errors[0]
