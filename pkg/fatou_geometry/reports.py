"""
Report bundles and their JSON form.

Serialization rules, shared by every report:

    float       12 significant digits; NaN and ±inf become null
    complex     [re, im]; a complex infinity becomes "inf"
    SpherePoint as complex; the point at infinity is "inf"
    keys        sorted

Bundles are validated against the schema shipped with the package before
they are written.
"""

import hashlib
import importlib.resources
import json
import logging
import math

import jsonschema
import numpy as np

from .data import JSON_SIGNIFICANT_DIGITS, SCHEMA_FILE, TOOL_NAME, TOOL_VERSION
from .sphere import SpherePoint

logger = logging.getLogger(__name__)


def format_float(x):
    x = float(x)
    if not math.isfinite(x):
        return None
    if x == 0:
        return 0.0
    return float("%.*g" % (JSON_SIGNIFICANT_DIGITS, x))


def _complex(z):
    z = complex(z)
    if math.isinf(z.real) or math.isinf(z.imag):
        return "inf"
    return [format_float(z.real), format_float(z.imag)]


def to_jsonable(obj):
    """Recursively convert report objects to JSON-ready values."""
    if obj is None or isinstance(obj, (str, bool)):
        return obj
    if isinstance(obj, SpherePoint):
        return "inf" if obj.at_infinity else _complex(obj.value)
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return _complex(obj)
    raise TypeError("cannot serialize %r" % type(obj).__name__)


def dumps(obj):
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def config_hash(cfg):
    """First 16 hex digits of SHA-256 over the canonical JSON of a resolved config."""
    canonical = json.dumps(to_jsonable(cfg), sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def error_entry(exc):
    return {"error": type(exc).__name__, "message": str(exc)}


def stamp(report, digest):
    """JSON form of a report (or error entry) carrying the config hash."""
    data = to_jsonable(report)
    if isinstance(data, dict):
        data["config_hash"] = digest
    return data


def make_bundle(action, cfg, map_info, sections, timings=None):
    """
    Assemble a bundle: tool and map echo, the resolved config with its hash,
    and one entry per experiment section (a report, a list of reports, or an
    error entry).
    """
    digest = config_hash(cfg)
    bundle = {
        "tool": {"name": TOOL_NAME, "version": TOOL_VERSION},
        "action": action,
        "config": to_jsonable(cfg),
        "config_hash": digest,
        "map": to_jsonable(map_info),
    }
    for name, value in sections.items():
        if isinstance(value, list):
            bundle[name] = [stamp(v, digest) for v in value]
        else:
            bundle[name] = stamp(value, digest)
    if timings is not None:
        bundle["timings"] = {k: format_float(v) for k, v in timings.items()}
    return bundle


def load_schema():
    text = importlib.resources.files("fatou_geometry").joinpath(SCHEMA_FILE).read_text()
    return json.loads(text)


def validate_bundle(bundle, schema=None):
    """Raises jsonschema.ValidationError when the bundle does not match the published schema."""
    jsonschema.validate(instance=bundle, schema=schema or load_schema())
