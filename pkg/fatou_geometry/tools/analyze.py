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
from functools import cached_property

import numpy as np

from .. import renderer
from ..data import LC_MIN_SEPARATION_CELLS
from ..errors import FatouGeometryError, InsufficientData
from ..grid import GridSpec, classify_and_label, distance_field, julia_sample, julia_tree
from ..orbits import detect_cycles, semi_hyperbolicity_verdict
from ..pullback import mod_bound_report, random_mod_cases, shrink_experiment
from ..ratmap import map_to_text, parse_map, preset_map
from ..regularity import (
    DeltaOracle,
    component_diameters,
    crosscut_continuum,
    dilation_bound,
    holder_check,
    john_estimate,
)
from ..reports import error_entry
from ..sphere import to_sphere_xyz
from ..summability import summability_report
from . import common

logger = logging.getLogger(__name__)

# tries per requested pair before giving up on finding separated endpoints
LC_PAIR_ATTEMPTS = 20

# derived seeds, so experiments sharing the config seed stay independent
SEED_OFFSETS = {"julia": 0, "shrink": 1, "mod_bound": 2, "john": 3, "holder": 4, "lc": 5}


def load_map(map_cfg):
    if map_cfg.get("text"):
        return parse_map(map_cfg["text"])
    return preset_map(map_cfg["preset"])


def map_info(f):
    return {
        "name": f.name,
        "text": map_to_text(f),
        "degree": f.degree,
        "num": list(f.num.coeffs),
        "den": list(f.den.coeffs),
    }


class Session:
    """
    One map under one resolved config. Shared inputs (cycles, verdict, grid,
    Julia sample) are computed on first use and timed.
    """

    def __init__(self, cfg, progress=False):
        self.cfg = cfg
        self.threads = cfg["threads"]
        self.seed = cfg["seed"]
        self.progress = progress
        self.timings = {}
        self.f = load_map(cfg["map"])

    def seed_for(self, name):
        return self.seed + SEED_OFFSETS[name]

    def timed(self, name, func, **kwargs):
        duration, retval = common.measure(func, kwargs)
        self.timings[name] = self.timings.get(name, 0.0) + duration
        return retval

    # -------------------------------------------------------------------------
    # shared inputs
    # -------------------------------------------------------------------------

    @cached_property
    def cycles(self):
        o = self.cfg["orbits"]
        return self.timed(
            "cycles",
            detect_cycles,
            f=self.f,
            max_period=o["max_period"],
            seeds_per_axis=o["seeds_per_axis"],
            threads=self.threads,
        )

    @cached_property
    def verdict(self):
        o = self.cfg["orbits"]
        return self.timed(
            "verdict",
            semi_hyperbolicity_verdict,
            f=self.f,
            cycles=self.cycles,
            rho_rec=o["rho_rec"],
            burn_in=o["burn_in"],
            sample=o["sample"],
            threads=self.threads,
        )

    @cached_property
    def spec(self):
        g = self.cfg["grid"]
        return GridSpec(
            chart=g["chart"],
            center=complex(*g["center"]),
            half_width=g["half_width"],
            resolution=g["resolution"],
        )

    @cached_property
    def labeled(self):
        return self.timed(
            "grid",
            classify_and_label,
            f=self.f,
            spec=self.spec,
            cycles=self.cycles,
            max_iter=self.cfg["grid"]["max_iter"],
            threads=self.threads,
        )

    @cached_property
    def sample(self):
        j = self.cfg["julia"]
        return self.timed(
            "julia",
            julia_sample,
            f=self.f,
            count=j["count"],
            seed=self.seed_for("julia"),
            method=j["method"],
            field=self.labeled if j["method"] != "inverse_iteration" else None,
            burn_in=j["burn_in"],
            cycles=self.cycles,
        )

    @cached_property
    def tree(self):
        return julia_tree(self.sample)

    @cached_property
    def field(self):
        return self.timed("distance", distance_field, field=self.labeled, sample=self.sample, threads=self.threads, tree=self.tree)

    @cached_property
    def oracle(self):
        return DeltaOracle.from_sample(self.sample, tree=self.tree, threads=self.threads)

    def largest_components(self, k):
        """Ids of the k largest components (all of them for k = 0)."""
        sizes = self.field.component_sizes()
        order = np.argsort(-sizes, kind="stable")
        return [int(c) for c in (order if k == 0 else order[:k])]

    # -------------------------------------------------------------------------
    # sections
    # -------------------------------------------------------------------------

    def grid_section(self):
        return self.field.summary()

    def julia_section(self):
        s = self.sample
        return {"method": s.method, "count": len(s), "seed": s.seed, "proximity_test": s.proximity_test}

    def shrink_section(self):
        s = self.cfg["shrink"]
        near = None
        if s["near_center"] is not None:
            near = (complex(*s["near_center"]), s["near_radius"])
        return [
            lambda r=r, k=k: self.timed(
                "shrink",
                shrink_experiment,
                f=self.f,
                sample=self.sample,
                r=r,
                n_max=s["n_max"],
                per_depth_samples=s["samples"],
                seed=self.seed_for("shrink") + k,
                near=near,
                threads=self.threads,
                progress=self.progress,
            )
            for k, r in enumerate(s["radii"])
        ]

    def mod_bound_section(self):
        s = self.cfg["shrink"]
        cases = random_mod_cases(self.f, self.sample, s["mod_cases"], self.seed_for("mod_bound"), n_max=s["mod_n_max"])
        return self.timed("mod_bound", mod_bound_report, f=self.f, cases=cases, threads=self.threads)

    def john_section(self):
        j = self.cfg["john"]
        return [
            lambda cid=cid: self.timed(
                "john",
                john_estimate,
                f=self.f,
                grid_field=self.field,
                component=cid,
                samples=j["samples"],
                seed=self.seed_for("john") + cid,
                oracle=self.oracle,
                builder=j["builder"],
                threads=self.threads,
                progress=self.progress,
            )
            for cid in self.largest_components(j["components"])
        ]

    def holder_section(self):
        h = self.cfg["holder"]
        return [
            lambda cid=cid: self.timed(
                "holder",
                holder_check,
                grid_field=self.field,
                component=cid,
                samples=h["samples"],
                seed=self.seed_for("holder") + cid,
                f=self.f,
                slope_max=h["slope_max"],
            )
            for cid in self.largest_components(h["components"])
        ]

    def lc_pairs(self):
        """Seeded Julia-sample pairs (a, b) with 4 cells < δ(a, b) ≤ max_theta."""
        lc = self.cfg["lc"]
        points = np.asarray(self.sample.points, dtype=complex)
        xyz = to_sphere_xyz(points)
        rng = np.random.default_rng(self.seed_for("lc"))
        pairs = []
        for _ in range(lc["pairs"] * LC_PAIR_ATTEMPTS):
            if len(pairs) == lc["pairs"]:
                break
            i = int(rng.integers(len(points)))
            if not np.isfinite(points[i]):
                continue
            near = np.array(self.tree.query_ball_point(xyz[i], lc["max_theta"]), dtype=int)
            gap = np.linalg.norm(xyz[near] - xyz[i], axis=1)
            near = near[gap > LC_MIN_SEPARATION_CELLS * float(self.spec.chordal_cell_at(points[i]))]
            if len(near):
                pairs.append((points[i], points[int(rng.choice(near))]))
        if len(pairs) < lc["pairs"]:
            logger.info("lc: found %d of %d endpoint pairs", len(pairs), lc["pairs"])
        return pairs

    def lc_section(self):
        return [
            lambda a=a, b=b: self.timed(
                "lc",
                crosscut_continuum,
                f=self.f,
                grid_field=self.field,
                sample=self.sample,
                a=a,
                b=b,
                oracle=self.oracle,
            )
            for a, b in self.lc_pairs()
        ]

    def components_section(self):
        return self.timed("components", component_diameters, grid_field=self.field)

    def summability_section(self):
        s = self.cfg["summability"]
        return self.timed(
            "summability",
            summability_report,
            f=self.f,
            verdict=self.verdict,
            N=s["N"],
            alpha_override=s["alpha"],
            convention=s["convention"],
            threads=self.threads,
        )

    def render(self, out_dir, continua=(), paths=()):
        """Field image plus optional overlays; returns {name: file name}."""
        r = self.cfg["render"]
        overlays = []
        if r["overlays"]:
            overlays.append(("boundary", self.sample.points))
            overlays.extend(("continuum", c.continuum_points) for c in continua)
            overlays.extend(("path", p.polyline.points) for p in paths)
        ppm = self.timed("render", renderer.render_field, out_dir=out_dir, grid_field=self.field, overlays=overlays)
        images = {"field": os.path.basename(ppm)}
        if r["csv"]:
            renderer.write_csv(os.path.join(out_dir, "julia.csv"), self.sample.points)
            images["julia_csv"] = "julia.csv"
            for k, c in enumerate(continua):
                name = "continuum-%d.csv" % k
                renderer.write_csv(os.path.join(out_dir, name), c.continuum_points)
                images["continuum_%d_csv" % k] = name
        return images


# =============================================================================
# RUNNERS
# =============================================================================


def run_guarded(task):
    """Result of `task()`, or an error entry when it raises a FatouGeometryError."""
    try:
        return task()
    except FatouGeometryError as e:
        logger.warning("%s: %s", type(e).__name__, e)
        return error_entry(e)


def run_items(tasks, strict):
    """
    Run a list section. Failed items become error entries; with `strict`, a
    section whose items all fail raises the first error instead.
    """
    results, first_error = [], None
    for task in tasks:
        try:
            results.append(task())
        except FatouGeometryError as e:
            logger.warning("%s: %s", type(e).__name__, e)
            first_error = first_error or e
            results.append(error_entry(e))
    if strict and first_error is not None and all(isinstance(r, dict) and "error" in r for r in results):
        raise first_error
    if strict and not results:
        raise InsufficientData("no experiment items to run")
    return results


def _successes(results):
    return [r for r in results if not (isinstance(r, dict) and "error" in r)]


def analyze(session, out_dir):
    """Every experiment; a failing experiment becomes an error entry in its slot."""
    sections = {}
    sections["grid"] = run_guarded(session.grid_section)
    sections["julia"] = run_guarded(session.julia_section)
    sections["cycles"] = run_guarded(lambda: session.cycles)
    sections["verdict"] = run_guarded(lambda: session.verdict)
    sections["shrink"] = run_guarded(lambda: run_items(session.shrink_section(), strict=False))
    if session.cfg["shrink"]["mod_cases"] > 0:
        sections["mod_bound"] = run_guarded(session.mod_bound_section)
    sections["john"] = run_guarded(lambda: run_items(session.john_section(), strict=False))
    sections["holder"] = run_guarded(lambda: run_items(session.holder_section(), strict=False))
    sections["continuum"] = run_guarded(lambda: run_items(session.lc_section(), strict=False))
    sections["components"] = run_guarded(session.components_section)
    sections["summability"] = run_guarded(session.summability_section)

    # list-valued slots hold an error entry only when the whole section failed
    for name in ("cycles", "shrink", "john", "holder", "continuum"):
        if isinstance(sections[name], dict):
            sections[name] = [sections[name]]

    continua = _successes(sections["continuum"])
    epsilons = [r.epsilon_hat for r in _successes(sections["john"])]
    if epsilons:
        bound = dilation_bound(min(epsilons))
        for c in continua:
            c.ratio_bound = bound
    paths = [p for r in _successes(sections["john"]) for p in r.paths[:1]]
    images = run_guarded(lambda: session.render(out_dir, continua, paths))
    if "error" not in images:
        sections["images"] = images
    return sections


def render(session, out_dir):
    return {"grid": session.grid_section(), "images": session.render(out_dir)}


def shrink(session, out_dir):
    sections = {"julia": session.julia_section(), "shrink": run_items(session.shrink_section(), strict=True)}
    if session.cfg["shrink"]["mod_cases"] > 0:
        sections["mod_bound"] = session.mod_bound_section()
    return sections


def john(session, out_dir):
    return {"grid": session.grid_section(), "john": run_items(session.john_section(), strict=True)}


def holder(session, out_dir):
    return {"grid": session.grid_section(), "holder": run_items(session.holder_section(), strict=True)}


def lc(session, out_dir):
    continua = run_items(session.lc_section(), strict=True)
    sections = {"grid": session.grid_section(), "continuum": continua}
    if session.cfg["render"]["overlays"]:
        sections["images"] = session.render(out_dir, _successes(continua))
    return sections


def summability(session, out_dir):
    return {"verdict": session.verdict, "summability": session.summability_section()}


EXPERIMENTS = {
    "analyze": analyze,
    "render": render,
    "shrink": shrink,
    "john": john,
    "holder": holder,
    "lc": lc,
    "summability": summability,
}
