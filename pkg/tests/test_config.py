import pytest
import yaml

from fatou_geometry.data import CONFIG_DEFAULTS
from fatou_geometry.errors import ConfigError
from fatou_geometry.tools.common import (
    cli_overrides,
    deep_merge,
    load_config,
    out_dir_from_template,
    resolve_config,
)


def write(path, data):
    path.write_text(yaml.safe_dump(data))
    return str(path)


def test_defaults_resolve():
    cfg = resolve_config({})
    assert isinstance(cfg["seed"], int)
    assert cfg["grid"] == CONFIG_DEFAULTS["grid"]
    assert cfg["map"]["preset"] == "chebyshev"


def test_deep_merge_keeps_siblings():
    merged = deep_merge({"grid": {"resolution": 256, "chart": "standard"}}, {"grid": {"resolution": 64}})
    assert merged == {"grid": {"resolution": 64, "chart": "standard"}}


def test_include_is_merged_underneath(tmp_path):
    write(tmp_path / "base.yml", {"threads": 4, "grid": {"resolution": 128, "half_width": 1.5}})
    path = write(tmp_path / "john.yml", {"__include__": "base.yml", "grid": {"resolution": 64}})
    cfg = load_config(path)
    assert cfg == {"threads": 4, "grid": {"resolution": 64, "half_width": 1.5}}


def test_include_loop(tmp_path):
    write(tmp_path / "a.yml", {"__include__": "b.yml"})
    write(tmp_path / "b.yml", {"__include__": "a.yml"})
    with pytest.raises(ConfigError, match="loop"):
        load_config(str(tmp_path / "a.yml"))


def test_missing_config(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "nope.yml"))
    assert load_config(str(tmp_path / "nope.yml"), required=False) == {}


def test_malformed_config(tmp_path):
    path = tmp_path / "bad.yml"
    path.write_text("grid: [1, 2\n")
    with pytest.raises(ConfigError):
        load_config(str(path))
    path.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_config(str(path))


@pytest.mark.parametrize(
    "user",
    [
        {"gird": {"resolution": 64}},
        {"grid": {"resolutoin": 64}},
        {"grid": 64},
    ],
)
def test_unknown_keys(user):
    with pytest.raises(ConfigError):
        resolve_config(user)


@pytest.mark.parametrize(
    "user",
    [
        {"grid": {"resolution": 4}},
        {"grid": {"chart": "polar"}},
        {"grid": {"center": [0.0]}},
        {"threads": -1},
        {"threads": True},
        {"summability": {"N": 0}},
        {"summability": {"convention": "degree"}},
        {"shrink": {"radii": [0.7]}},
        {"shrink": {"radii": []}},
        {"shrink": {"near_center": [0.0, 0.0]}},
        {"map": {"preset": "mandelbrot"}},
        {"seed": "seven"},
    ],
)
def test_invalid_values(user):
    with pytest.raises(ConfigError):
        resolve_config(user)


def test_coercion():
    cfg = resolve_config({"grid": {"half_width": 1, "resolution": 64.0}, "shrink": {"near_center": [1, 0], "near_radius": 0.1}})
    assert cfg["grid"]["half_width"] == 1.0 and isinstance(cfg["grid"]["half_width"], float)
    assert cfg["grid"]["resolution"] == 64 and isinstance(cfg["grid"]["resolution"], int)
    assert cfg["shrink"]["near_center"] == [1.0, 0.0]


def test_explicit_seed_kept():
    assert resolve_config({"seed": 17})["seed"] == 17


def test_cli_overrides_win():
    user = {"map": {"preset": "basilica", "text": "num = -1, 0, 1"}, "seed": 3}
    cfg = resolve_config(user, cli_overrides(preset="dendrite", seed=5, threads=2, out="x"))
    assert cfg["map"] == {"preset": "dendrite", "text": None}
    assert (cfg["seed"], cfg["threads"], cfg["out_dir"]) == (5, 2, "x")


def test_cli_map_text_keeps_preset():
    cfg = resolve_config({}, cli_overrides(map_text="num = 0, 0, 1"))
    assert cfg["map"] == {"preset": "chebyshev", "text": "num = 0, 0, 1"}


def test_out_dir_template():
    assert out_dir_from_template("out/{action}-{seed}", "john", 7) == "out/john-7"
    with pytest.raises(ConfigError):
        out_dir_from_template("out/{date}", "john", 7)
    with pytest.raises(ConfigError):
        out_dir_from_template("out", "train", 7)
