import numpy as np
import yaml

from fatou_geometry.renderer import field_image, hsv_to_rgb, read_ppm, render_field, write_csv, write_ppm


def test_ppm_round_trip(tmp_path):
    image = np.random.default_rng(0).integers(0, 256, size=(5, 7, 3), dtype=np.uint8)
    path = str(tmp_path / "x.ppm")
    write_ppm(path, image)
    assert np.array_equal(read_ppm(path), image)


def test_hsv_primaries():
    rgb = hsv_to_rgb(np.array([0.0, 1 / 3, 2 / 3]), 1.0, 1.0)
    np.testing.assert_allclose(rgb, np.eye(3), atol=1e-12)


def test_julia_cells_are_black(squaring_field):
    image = field_image(squaring_field)
    assert image.shape == squaring_field.component.shape + (3,)
    assert np.all(image[squaring_field.component < 0] == 0)
    assert np.all(image[squaring_field.component >= 0].max(axis=-1) > 0)


def test_render_field_with_overlay(tmp_path, squaring_field):
    ppm = render_field(str(tmp_path), squaring_field, overlays=[("path", np.array([0j]))])
    image = read_ppm(ppm)
    assert tuple(image[squaring_field.spec.cell_of(0)]) == (255, 40, 40)
    with open(tmp_path / "field.yml") as f:
        meta = yaml.safe_load(f)
    assert meta["resolution"] == 128
    assert meta["components"] == 2
    assert meta["overlays"] == ["path"]


def test_write_csv(tmp_path):
    path = tmp_path / "p.csv"
    write_csv(str(path), [1 - 0.5j, complex(np.inf, 0)])
    assert path.read_text().splitlines() == ["1.0,-0.5", "inf,inf"]
