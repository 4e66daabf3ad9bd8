# =============================================================================
# Copyright 2023 Simeon Manolov <s.manolloff@gmail.com>.  All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# =============================================================================

import logging
import os
import time
from copy import deepcopy

import numpy as np
import yaml

from ..data import ACTIONS, CONFIG_CHOICES, CONFIG_DEFAULTS, CONFIG_RANGES, PRESETS
from ..errors import ConfigError

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# keys whose default is null, and the type they take when set
NULLABLE_TYPES = {
    ("", "seed"): int,
    ("map", "text"): str,
    ("shrink", "near_center"): list,
    ("shrink", "near_radius"): float,
    ("summability", "alpha"): float,
}


def setup_logging(verbose=False, quiet=False):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)


def gen_seed():
    return int(np.random.default_rng().integers(2**31))


# =============================================================================
# CONFIG FILES
# =============================================================================


def deep_merge(base, override):
    """Nested-dict merge; values in `override` win."""
    out = deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = deepcopy(v)
    return out


def _include_path(include, including_file):
    if os.path.isabs(include) or os.path.exists(include) or including_file is None:
        return include
    return os.path.join(os.path.dirname(including_file), include)


def expand_includes(cfg, including_file=None, _seen=()):
    """Merge the file named by a top-level `__include__` underneath `cfg` (recursively)."""
    include = cfg.pop("__include__", None)
    if not include:
        return cfg

    path = _include_path(include, including_file)
    if os.path.abspath(path) in _seen:
        raise ConfigError("config include loop at %s" % path)
    base = read_yaml(path)
    base = expand_includes(base, path, _seen + (os.path.abspath(path),))
    return deep_merge(base, cfg)


def read_yaml(path):
    if not os.path.exists(path):
        raise ConfigError("config not found: %s" % path)
    with open(path, "r") as f:
        try:
            cfg = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError("malformed YAML in %s: %s" % (path, e)) from None
    if not isinstance(cfg, dict):
        raise ConfigError("%s must hold a mapping, got %s" % (path, type(cfg).__name__))
    return cfg


def load_config(path, required=True):
    """
    User config from `path`, includes expanded. A missing file is an error
    only when `required` (an explicit --config); otherwise it yields {}.
    """
    if not required and not os.path.exists(path):
        logging.getLogger(__name__).info("no config at %s, using defaults", path)
        return {}
    return expand_includes(read_yaml(path), path)


# =============================================================================
# VALIDATION
# =============================================================================


def _check_unknown(cfg, defaults, prefix=""):
    for k, v in cfg.items():
        where = "%s.%s" % (prefix, k) if prefix else str(k)
        if k not in defaults:
            raise ConfigError("unknown config key: %s" % where)
        if isinstance(defaults[k], dict):
            if not isinstance(v, dict):
                raise ConfigError("config key %s must be a mapping" % where)
            _check_unknown(v, defaults[k], where)


def _coerce(where, value, default, nullable_type):
    if value is None:
        if default is None:
            return None
        raise ConfigError("config key %s must not be null" % where)

    expected = nullable_type or type(default)
    if expected is bool:
        if not isinstance(value, bool):
            raise ConfigError("config key %s must be true or false" % where)
        return value
    if isinstance(value, bool):
        raise ConfigError("config key %s must be %s, got a boolean" % (where, expected.__name__))
    if expected is int:
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int):
            raise ConfigError("config key %s must be an integer" % where)
        return value
    if expected is float:
        if not isinstance(value, (int, float)):
            raise ConfigError("config key %s must be a number" % where)
        return float(value)
    if expected is list:
        if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ConfigError("config key %s must be a list of numbers" % where)
        return [float(v) for v in value]
    if not isinstance(value, expected):
        raise ConfigError("config key %s must be %s" % (where, expected.__name__))
    return value


def _check_range(where, value, bounds):
    lo, hi = bounds
    if value is None:
        return
    if (lo is not None and value < lo) or (hi is not None and value > hi):
        raise ConfigError("config key %s = %r outside [%s, %s]" % (where, value, lo, hi))


def resolve_config(user_cfg, overrides=None):
    """
    Defaults + user config + CLI overrides, type- and range-checked.

    A blank seed is generated here, so the returned config fully determines
    the run (and its hash).
    """
    user_cfg = deep_merge(user_cfg or {}, overrides or {})
    _check_unknown(user_cfg, CONFIG_DEFAULTS)
    cfg = deep_merge(CONFIG_DEFAULTS, user_cfg)

    def walk(section, defaults, values):
        for k, default in defaults.items():
            if isinstance(default, dict):
                walk(k, default, values[k])
                continue
            where = "%s.%s" % (section, k) if section else k
            values[k] = _coerce(where, values[k], default, NULLABLE_TYPES.get((section, k)))
            if (section, k) in CONFIG_RANGES:
                _check_range(where, values[k], CONFIG_RANGES[(section, k)])
            if (section, k) in CONFIG_CHOICES and values[k] not in CONFIG_CHOICES[(section, k)]:
                raise ConfigError("config key %s must be one of %s, got %r" % (where, CONFIG_CHOICES[(section, k)], values[k]))

    walk("", CONFIG_DEFAULTS, cfg)

    if cfg["map"]["text"] is None and cfg["map"]["preset"] not in PRESETS:
        raise ConfigError("unknown preset %r (known: %s)" % (cfg["map"]["preset"], ", ".join(PRESETS)))
    if len(cfg["grid"]["center"]) != 2:
        raise ConfigError("grid.center must be [re, im]")
    if not cfg["shrink"]["radii"] or any(not 0 < r < 0.5 for r in cfg["shrink"]["radii"]):
        raise ConfigError("shrink.radii must be a nonempty list of radii in (0, 0.5)")
    near = (cfg["shrink"]["near_center"], cfg["shrink"]["near_radius"])
    if (near[0] is None) != (near[1] is None):
        raise ConfigError("shrink.near_center and shrink.near_radius must be set together")
    if near[0] is not None and len(near[0]) != 2:
        raise ConfigError("shrink.near_center must be [re, im]")

    if cfg["seed"] is None:
        cfg["seed"] = gen_seed()
    return cfg


def cli_overrides(preset=None, map_text=None, seed=None, threads=None, out=None):
    """Nested config fragment for the CLI flags that were given."""
    overrides = {}
    if preset is not None:
        overrides["map"] = {"preset": preset, "text": None}
    if map_text is not None:
        overrides.setdefault("map", {})["text"] = map_text
    if seed is not None:
        overrides["seed"] = seed
    if threads is not None:
        overrides["threads"] = threads
    if out is not None:
        overrides["out_dir"] = out
    return overrides


# =============================================================================
# RUN OUTPUT
# =============================================================================


def out_dir_from_template(tmpl, action, seed):
    if action not in ACTIONS:
        raise ConfigError("unknown action: %s" % action)
    try:
        return tmpl.format(action=action, seed=seed)
    except (KeyError, IndexError) as e:
        raise ConfigError("out_dir template %r: unknown field %s" % (tmpl, e)) from None


def measure(func, kwargs):
    t1 = time.time()
    retval = func(**kwargs)
    t2 = time.time()

    return t2 - t1, retval


def save_run_metadata(out_dir, action, cfg, duration, values=None):
    metadata = dict(values or {}, action=action, config=cfg, duration=duration)

    os.makedirs(out_dir, exist_ok=True)
    md_file = os.path.join(out_dir, "metadata.yml")

    with open(md_file, "w") as f:
        f.write(yaml.safe_dump(metadata))
    return md_file
