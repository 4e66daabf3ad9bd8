import json
import os

import pytest
import yaml

from fatou_geometry.tools.main import REPORT_FILE, main


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def last_json(capsys):
    return json.loads(capsys.readouterr().out)


def read_report(out_dir):
    with open(os.path.join(out_dir, REPORT_FILE)) as f:
        return json.load(f)


def test_catalog(capsys):
    assert main(["--out", "cat", "catalog"]) == 0
    entries = last_json(capsys)
    assert [e["name"] for e in entries] == ["squaring", "chebyshev", "basilica", "dendrite", "cauliflower", "rabbit"]
    assert os.path.exists(os.path.join("cat", REPORT_FILE))
    with open(os.path.join("cat", "metadata.yml")) as f:
        metadata = yaml.safe_load(f)
    assert metadata["action"] == "catalog"
    assert metadata["config_hash"] == read_report("cat")["config_hash"]


def test_bootstrap(workdir):
    assert main(["bootstrap"]) == 0
    assert sorted(os.listdir(workdir / "config"))[:2] == ["analyze.yml", "base.yml"]
    # the shipped templates resolve as they are
    assert main(["-q", "--out", "cat", "catalog"]) == 0


def test_map_syntax_error(capsys):
    assert main(["--map", "num = 1, , 2", "--out", "bad", "summability"]) == 2
    assert last_json(capsys)["error"] == "MapSyntaxError"
    assert not os.path.exists("bad")


def test_invalid_map(capsys):
    assert main(["--map", "num = 1, 2", "--out", "bad", "summability"]) == 2
    assert last_json(capsys)["error"] == "InvalidMap"


def test_unknown_config_key(capsys, workdir):
    (workdir / "c.yml").write_text("grid:\n  resolutoin: 64\n")
    assert main(["-c", "c.yml", "john"]) == 2
    assert last_json(capsys)["error"] == "ConfigError"


def test_missing_config_file(capsys):
    assert main(["-c", "missing.yml", "john"]) == 2
    assert last_json(capsys)["error"] == "ConfigError"


def test_resolution_out_of_range(capsys, workdir):
    (workdir / "c.yml").write_text("grid:\n  resolution: 4\n")
    assert main(["-c", "c.yml", "render"]) == 2
    assert "resolution" in last_json(capsys)["message"]


def test_unknown_action(capsys):
    assert main(["train"]) == 2
    assert last_json(capsys)["error"] == "ConfigError"


def test_summability_chebyshev():
    assert main(["--preset", "chebyshev", "--seed", "3", "--out", "s", "summability"]) == 0
    report = read_report("s")
    assert report["action"] == "summability"
    assert report["verdict"]["verdict"] == "semi_hyperbolic"
    assert report["summability"]["trend"] == "converging_trend"
    assert report["summability"]["alpha"] == 0.5
    assert report["config"]["seed"] == 3


def test_numerical_failure_exit_code(capsys):
    # every critical point of z^2 is attracted, so the summability condition is vacuous
    assert main(["--preset", "squaring", "--seed", "1", "--out", "s", "summability"]) == 3
    assert last_json(capsys)["error"] == "NoJuliaCriticalPoints"


def test_render(workdir):
    (workdir / "c.yml").write_text("grid:\n  resolution: 64\njulia:\n  count: 2000\n")
    assert main(["-c", "c.yml", "--preset", "basilica", "--seed", "1", "--out", "r", "render"]) == 0
    report = read_report("r")
    assert report["images"]["field"] == "field.ppm"
    assert report["grid"]["n_components"] >= 1
    assert os.path.exists(os.path.join("r", "field.ppm"))
    assert os.path.exists(os.path.join("r", "field.yml"))


@pytest.mark.slow
def test_analyze_is_deterministic(workdir):
    (workdir / "c.yml").write_text(
        "grid:\n  resolution: 128\njulia:\n  count: 4000\nshrink:\n  n_max: 5\n  samples: 2\n  mod_cases: 4\n"
        "john:\n  samples: 40\nholder:\n  samples: 200\nlc:\n  pairs: 3\n"
    )
    args = ["-c", "c.yml", "--preset", "basilica", "--seed", "7", "--no-timings"]
    assert main(args + ["--out", "a", "analyze"]) == 0
    assert main(args + ["--out", "b", "analyze"]) == 0
    with open(os.path.join("a", REPORT_FILE), "rb") as fa, open(os.path.join("b", REPORT_FILE), "rb") as fb:
        assert fa.read() == fb.read()
    assert "timings" not in read_report("a")


def test_empty_julia_sample_exit_code(capsys, workdir):
    # a grid inside the unit disk has no boundary cells to sample
    (workdir / "c.yml").write_text("grid:\n  half_width: 0.3\n  resolution: 16\njulia:\n  method: boundary_cells\n")
    assert main(["-c", "c.yml", "--preset", "squaring", "--seed", "1", "--out", "r", "render"]) == 3
    assert last_json(capsys)["error"] == "InsufficientData"
