import json
import math

import jsonschema
import numpy as np
import pytest

from fatou_geometry.errors import InsufficientData
from fatou_geometry.reports import (
    config_hash,
    dumps,
    error_entry,
    format_float,
    make_bundle,
    to_jsonable,
    validate_bundle,
)
from fatou_geometry.sphere import INFINITY, SpherePoint
from fatou_geometry.tools.catalog import catalog
from fatou_geometry.tools.common import resolve_config


@pytest.fixture
def cfg():
    return resolve_config({}, {"seed": 1})


@pytest.mark.parametrize(
    "x, expected",
    [
        (1 / 3, 0.333333333333),
        (123456789.123456789, 123456789.123),
        (0.0, 0.0),
        (-2.5e-20, -2.5e-20),
        (math.nan, None),
        (math.inf, None),
        (-math.inf, None),
    ],
)
def test_format_float(x, expected):
    assert format_float(x) == expected


def test_to_jsonable_points():
    assert to_jsonable(INFINITY) == "inf"
    assert to_jsonable(SpherePoint(1 - 2j)) == [1.0, -2.0]
    assert to_jsonable(complex(math.inf, 0)) == "inf"
    assert to_jsonable(np.array([1.5, math.nan])) == [1.5, None]
    assert to_jsonable({"a": (np.int64(3), np.bool_(True))}) == {"a": [3, True]}


def test_to_jsonable_rejects_unknown_types():
    with pytest.raises(TypeError):
        to_jsonable(object())


def test_dumps_sorted_and_nan_free():
    text = dumps({"b": math.nan, "a": 1})
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": 1, "b": None}


def test_config_hash(cfg):
    digest = config_hash(cfg)
    assert len(digest) == 16
    assert all(c in "0123456789abcdef" for c in digest)
    assert config_hash(dict(reversed(list(cfg.items())))) == digest
    assert config_hash(resolve_config({}, {"seed": 2})) != digest


def test_catalog_bundle_validates(cfg):
    bundle = make_bundle("catalog", cfg, None, {"catalog": catalog()})
    validate_bundle(json.loads(dumps(bundle)))
    assert bundle["config_hash"] == config_hash(cfg)
    assert "timings" not in bundle


def test_error_entries_validate(cfg):
    entry = error_entry(InsufficientData("only 3 arcs"))
    assert entry == {"error": "InsufficientData", "message": "only 3 arcs"}
    bundle = make_bundle("summability", cfg, None, {"summability": entry, "john": [entry]}, timings={"grid": 0.5})
    validate_bundle(json.loads(dumps(bundle)))
    assert bundle["john"][0]["config_hash"] == bundle["config_hash"]
    assert bundle["timings"] == {"grid": 0.5}


def test_unknown_section_rejected(cfg):
    bundle = make_bundle("catalog", cfg, None, {"catalog": catalog()})
    bundle["extra"] = 1
    with pytest.raises(jsonschema.ValidationError):
        validate_bundle(bundle)
