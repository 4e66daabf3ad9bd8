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

import argparse
import importlib.resources
import json
import logging
import os
import sys

from ..data import ACTIONS
from ..errors import ConfigError, FatouGeometryError
from ..reports import dumps, make_bundle, validate_bundle
from . import common

logger = logging.getLogger(__name__)

REPORT_FILE = "report.json"

TEMPLATES = ("base.yml",) + tuple("%s.yml" % a for a in ACTIONS)


def run(action, cfg, timings=True, progress=False):
    """
    Run one action under a resolved config.

    Returns:
        (bundle, out_dir); the bundle is schema-valid and has been written
        to <out_dir>/report.json.
    """
    out_dir = common.out_dir_from_template(cfg["out_dir"], action, cfg["seed"])

    if action == "catalog":
        from .catalog import catalog

        sections = {"catalog": catalog()}
        info, run_timings = None, {}
    else:
        from .analyze import EXPERIMENTS, Session, map_info

        if action not in EXPERIMENTS:
            raise ConfigError("unknown action: %s" % action)
        session = Session(cfg, progress=progress)
        info = map_info(session.f)
        sections = EXPERIMENTS[action](session, out_dir)
        run_timings = session.timings

    bundle = make_bundle(action, cfg, info, sections, timings=run_timings if timings else None)
    validate_bundle(bundle)

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, REPORT_FILE), "w") as f:
        f.write(dumps(bundle))
    logger.info("wrote %s", os.path.join(out_dir, REPORT_FILE))
    return bundle, out_dir


def run_bootstrap():
    """Create config/ in CWD with templates from the package."""
    config_dir = os.path.join(os.getcwd(), "config")
    os.makedirs(config_dir, exist_ok=True)
    pkg = importlib.resources.files("fatou_geometry.tools.templates")
    for name in TEMPLATES:
        content = (pkg / name).read_text()
        path = os.path.join(config_dir, name)
        with open(path, "w") as f:
            f.write(content)
    print("Created config/ with %s" % ", ".join(TEMPLATES))


def build_parser():
    parser = argparse.ArgumentParser(prog="fatou-geometry")
    parser.add_argument("action", help=argparse.SUPPRESS)
    parser.add_argument(
        "-c",
        "--config",
        metavar="FILE",
        dest="config_file",
        type=str,
        default=None,
        help="config file, defaults to config/<action>.yml",
    )
    parser.add_argument("--preset", metavar="NAME", help="preset map (see `catalog`)")
    parser.add_argument("--map", metavar="TEXT", dest="map_text", help='map as "num = a0, a1, ...; den = b0, ..."')
    parser.add_argument("--out", metavar="DIR", help="output directory (overrides out_dir)")
    parser.add_argument("--seed", metavar="U64", type=int, help="PRNG seed (overrides seed)")
    parser.add_argument("--threads", metavar="N", type=int, help="worker cap, 0 = all cores")
    parser.add_argument("--no-timings", dest="timings", action="store_false", help="omit wall-clock timings from the report")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="warnings only, no progress bars")

    parser.formatter_class = argparse.RawDescriptionHelpFormatter
    parser.usage = "%(prog)s [options] <action>"
    parser.epilog = """
action:
  bootstrap         create config/ with templates
  analyze           full bundle: verdict, shrinking, John, Hölder, continua, summability, image
  render            field image (PPM) only
  shrink            pullback shrinking and modulus bound
  john              John constant per Fatou component
  holder            Hölder regression per Fatou component
  lc                crosscut continua between Julia points
  summability       critical-orbit derivative growth
  catalog           list the preset maps

exit codes:
  0 success, 2 invalid config or map, 3 numerical failure

examples:
  %(prog)s bootstrap
  %(prog)s analyze
  %(prog)s --preset basilica john
  %(prog)s --map "num = -1, 0, 1" --seed 7 --no-timings analyze
  %(prog)s -c config/lc.yml --threads 8 lc
"""
    return parser


def report_error(e):
    print(json.dumps(e.to_dict(), sort_keys=True))
    return e.exit_code


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    common.setup_logging(verbose=args.verbose, quiet=args.quiet)

    if args.action == "bootstrap":
        run_bootstrap()
        return 0

    try:
        if args.action not in ACTIONS:
            raise ConfigError("unknown action: %s" % args.action)

        if args.config_file is not None:
            user_cfg = common.load_config(args.config_file, required=True)
        else:
            user_cfg = common.load_config(os.path.join("config", "%s.yml" % args.action), required=False)

        overrides = common.cli_overrides(
            preset=args.preset,
            map_text=args.map_text,
            seed=args.seed,
            threads=args.threads,
            out=args.out,
        )
        cfg = common.resolve_config(user_cfg, overrides)
        duration, (bundle, out_dir) = common.measure(
            run,
            dict(action=args.action, cfg=cfg, timings=args.timings, progress=not args.quiet and sys.stderr.isatty()),
        )
    except FatouGeometryError as e:
        return report_error(e)

    if args.action == "catalog":
        print(dumps(bundle["catalog"]), end="")

    common.save_run_metadata(
        out_dir,
        action=args.action,
        cfg=cfg,
        duration=duration if args.timings else None,
        values={"report": REPORT_FILE, "config_hash": bundle["config_hash"]},
    )
    logger.info("output directory: %s", out_dir)
    return 0


if __name__ == "__main__":
    sys.exit(main())
