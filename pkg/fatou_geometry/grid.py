"""
Discretized phase space.

A GridSpec lays an N×N grid over one chart of the sphere (the standard chart
z, or the inverted chart u = 1/z for neighbourhoods of ∞). Cell (i, j) has
chart-center

    x_j = cx - hw + (j + 1/2) · 2hw/N        (columns, left to right)
    y_i = cy + hw - (i + 1/2) · 2hw/N        (rows, top to bottom)

Classification iterates every cell center until it comes within 1e-6 of an
attracting cycle, labels connected same-basin cells as Fatou components, and
`distance_field` attaches δ̂, the chordal distance to a Julia sample.
"""

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .data import (
    GRID_CONVERGENCE_RADIUS,
    GRID_MAX_ITER,
    GRID_MIN_RESOLUTION,
    JULIA_BURN_IN,
    JULIA_METHODS,
    NEUTRAL_BAND,
)
from .errors import ConfigError, InsufficientData, NonConvergence
from .orbits import attracting_cycles, detect_cycles
from .parallel import pmap, resolve_threads
from .ratmap import fixed_points, preimages
from .sphere import COMPLEX_INF, SpherePoint, chordal_array, spherical_derivative_factor, to_sphere_xyz

logger = logging.getLogger(__name__)

CHARTS = ("standard", "inverted")

# 4-connectivity
CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


@dataclass(frozen=True)
class GridSpec:
    chart: str = "standard"
    center: complex = 0j
    half_width: float = 2.0
    resolution: int = 256

    def __post_init__(self):
        if self.chart not in CHARTS:
            raise ConfigError("grid chart must be one of %s, got %r" % (CHARTS, self.chart))
        if not self.half_width > 0:
            raise ConfigError("grid half_width must be positive")
        if int(self.resolution) < GRID_MIN_RESOLUTION:
            raise ConfigError("grid resolution must be at least %d" % GRID_MIN_RESOLUTION)
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "resolution", int(self.resolution))

    @property
    def cell_size(self):
        return 2.0 * self.half_width / self.resolution

    @property
    def cell_diagonal(self):
        return self.cell_size * math.sqrt(2.0)

    def chart_coords(self):
        N, h = self.resolution, self.cell_size
        cx, cy = self.center.real, self.center.imag
        xs = cx - self.half_width + (np.arange(N) + 0.5) * h
        ys = cy + self.half_width - (np.arange(N) + 0.5) * h
        return xs[None, :] + 1j * ys[:, None]

    def to_chart(self, z):
        z = np.asarray(z, dtype=complex)
        if self.chart == "standard":
            return z
        with np.errstate(all="ignore"):
            return np.where(np.isinf(z), 0j, np.where(z == 0, COMPLEX_INF, 1.0 / np.where(z == 0, 1.0, z)))

    def from_chart(self, u):
        # inversion is an involution
        return self.to_chart(u)

    def centers(self):
        """Cell centers on the sphere, as complex values (inf = ∞)."""
        return self.from_chart(self.chart_coords())

    def cell_of(self, z):
        """(row, col) of the cell containing z, or None when z is off the grid."""
        u = complex(self.to_chart(complex(SpherePoint.of(z))))
        if not np.isfinite(u):
            return None
        h = self.cell_size
        j = math.floor((u.real - (self.center.real - self.half_width)) / h)
        i = math.floor((self.center.imag + self.half_width - u.imag) / h)
        if 0 <= i < self.resolution and 0 <= j < self.resolution:
            return i, j
        return None

    def cells_of(self, z):
        """Vectorized cell_of: (rows, cols, valid); invalid entries get index 0."""
        u = self.to_chart(np.asarray(z, dtype=complex))
        h = self.cell_size
        with np.errstate(invalid="ignore"):
            j = np.floor((u.real - (self.center.real - self.half_width)) / h)
            i = np.floor((self.center.imag + self.half_width - u.imag) / h)
            valid = np.isfinite(u) & (i >= 0) & (i < self.resolution) & (j >= 0) & (j < self.resolution)
        rows = np.where(valid, i, 0).astype(np.intp)
        cols = np.where(valid, j, 0).astype(np.intp)
        return rows, cols, valid

    def chordal_cell_at(self, z):
        """Chordal side length of the cell at z."""
        u = self.to_chart(np.asarray(z, dtype=complex))
        with np.errstate(all="ignore"):
            return self.cell_size * 2.0 / (1.0 + np.abs(u) ** 2)

    def to_dict(self):
        return {
            "chart": self.chart,
            "center": self.center,
            "half_width": self.half_width,
            "resolution": self.resolution,
        }


@dataclass
class GridField:
    """
    Per-cell classification results.

    basin is the index of the attracting cycle (into `cycles`) or -1 for
    Julia-suspect cells; component is -1 exactly where basin is -1.
    delta_hat stays at the sphere diameter until `distance_field` fills it.
    """

    spec: GridSpec
    basin: np.ndarray
    component: np.ndarray
    iter_count: np.ndarray
    delta_hat: np.ndarray
    cycles: list = field(default_factory=list)
    has_distance: bool = False

    @property
    def shape(self):
        return self.basin.shape

    @property
    def n_components(self):
        return int(self.component.max()) + 1 if self.component.size else 0

    def centers(self):
        return self.spec.centers()

    def component_mask(self, cid):
        return self.component == cid

    def component_sizes(self):
        labels = self.component[self.component >= 0]
        return np.bincount(labels, minlength=self.n_components)

    def boundary_mask(self):
        """Cells whose 4-neighbourhood leaves their own component (or that are Julia-suspect)."""
        c = self.component
        edge = c < 0
        edge[:-1, :] |= c[:-1, :] != c[1:, :]
        edge[1:, :] |= c[1:, :] != c[:-1, :]
        edge[:, :-1] |= c[:, :-1] != c[:, 1:]
        edge[:, 1:] |= c[:, 1:] != c[:, :-1]
        return edge

    def summary(self):
        return {
            "spec": self.spec.to_dict(),
            "n_components": self.n_components,
            "julia_suspect_cells": int(np.sum(self.basin < 0)),
            "basins": len(self.cycles),
        }


@dataclass
class JuliaSample:
    """Point cloud near J; `points` is a complex array (inf = ∞)."""

    points: np.ndarray
    method: str
    seed: int = 0
    proximity_test: str = ""

    def __len__(self):
        return len(self.points)


# =============================================================================
# CLASSIFICATION
# =============================================================================


def _classify_chunk(f, z, targets, max_iter, radius):
    n = len(z)
    basin = np.full(n, -1, dtype=np.int32)
    iters = np.full(n, max_iter, dtype=np.int32)
    active = np.ones(n, dtype=bool)
    z = z.copy()

    for k in range(max_iter + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        zi = z[idx]
        for bid, pts in targets:
            d = np.min(chordal_array(zi[:, None], pts[None, :]), axis=1)
            hit = (d <= radius) & (basin[idx] < 0)
            basin[idx[hit]] = bid
            iters[idx[hit]] = k
        active[idx[basin[idx] >= 0]] = False
        if k == max_iter:
            break
        idx = np.flatnonzero(active)
        z[idx] = f.eval_array(z[idx])

    return basin, iters


def label_components(basin):
    """4-connected same-basin labels, renumbered by first raster occurrence."""
    component = np.full(basin.shape, -1, dtype=np.int32)
    offset = 0
    for bid in np.unique(basin[basin >= 0]):
        lab, n = ndimage.label(basin == bid, structure=CROSS)
        mask = lab > 0
        component[mask] = lab[mask] - 1 + offset
        offset += n

    flat = component.ravel()
    labeled = flat >= 0
    if labeled.any():
        first_ids, first_pos = np.unique(flat[labeled], return_index=True)
        order = np.argsort(first_pos)
        remap = np.empty(offset, dtype=np.int32)
        remap[first_ids[order]] = np.arange(len(order), dtype=np.int32)
        flat = flat.copy()
        flat[labeled] = remap[flat[labeled]]
    return flat.reshape(basin.shape)


def classify_and_label(
    f,
    spec,
    cycles,
    max_iter=GRID_MAX_ITER,
    radius=GRID_CONVERGENCE_RADIUS,
    threads=1,
):
    """
    Basin classification of every cell plus Fatou-component labeling.

    Cells are iterated until they come within `radius` of an attracting cycle
    or `max_iter` is reached. With no attracting cycles every cell is
    Julia-suspect (the J = C̄ situation).
    """
    attractors = attracting_cycles(cycles)
    targets = [(bid, np.array([p.to_complex() for p in cyc.points])) for bid, cyc in enumerate(attractors)]
    z = spec.centers().ravel()

    if targets:
        chunks = np.array_split(np.arange(z.size), resolve_threads(threads) * 4)
        parts = pmap(
            lambda ix: _classify_chunk(f, z[ix], targets, max_iter, radius),
            [c for c in chunks if c.size],
            threads,
        )
        basin = np.concatenate([p[0] for p in parts])
        iters = np.concatenate([p[1] for p in parts])
    else:
        logger.info("no attracting cycles: every cell is Julia-suspect")
        basin = np.full(z.size, -1, dtype=np.int32)
        iters = np.full(z.size, max_iter, dtype=np.int32)

    shape = (spec.resolution, spec.resolution)
    basin = basin.reshape(shape)
    component = label_components(basin)

    result = GridField(
        spec=spec,
        basin=basin,
        component=component,
        iter_count=iters.reshape(shape),
        delta_hat=np.full(shape, 2.0),
        cycles=attractors,
    )
    logger.info(
        "grid %dx%d (%s chart): %d components, %d Julia-suspect cells",
        spec.resolution,
        spec.resolution,
        spec.chart,
        result.n_components,
        int(np.sum(basin < 0)),
    )
    return result


# =============================================================================
# JULIA SAMPLE
# =============================================================================


def repelling_start(f, cycles=None):
    """
    A point of J to start backward orbits from.

    The first repelling fixed point; failing that a repelling cycle point, then
    a parabolic point.
    """
    fixed = sorted(fixed_points(f), key=lambda p: (p.at_infinity, round(p.value.real, 9), round(p.value.imag, 9)))
    for p in fixed:
        if spherical_derivative_factor(f, p) > 1.0 + NEUTRAL_BAND:
            return p

    if cycles is None:
        cycles = detect_cycles(f)
    for cls in ("repelling", "parabolic_suspect", "neutral_irrational_suspect"):
        for cyc in cycles:
            if cyc.cycle_class == cls:
                return cyc.points[0]
    for p in fixed:
        if abs(spherical_derivative_factor(f, p) - 1.0) <= NEUTRAL_BAND:
            return p
    raise NonConvergence("no repelling or neutral periodic point found to seed the Julia sample")


def _inverse_iteration(f, count, seed, burn_in, cycles):
    rng = np.random.default_rng(seed)
    z = repelling_start(f, cycles)
    out = np.empty(count, dtype=complex)
    for k in range(burn_in + count):
        pre = preimages(f, z)
        z = pre[int(rng.integers(len(pre)))]
        if k >= burn_in:
            out[k - burn_in] = z.to_complex()
    return out


def julia_sample(f, count, seed, method="inverse_iteration", field=None, burn_in=JULIA_BURN_IN, cycles=None):
    """
    Point cloud approximating J.

    Args:
        f: the map.
        count: number of backward-orbit points (inverse_iteration, mixed).
        seed: PRNG seed; equal seeds give identical samples.
        method: inverse_iteration | boundary_cells | mixed.
        field: labeled GridField, needed by boundary_cells and mixed.
        burn_in: backward steps discarded before collecting.
        cycles: detect_cycles output, used only to find a starting point when
            f has no repelling fixed point.
    """
    if method not in JULIA_METHODS:
        raise ConfigError("julia method must be one of %s, got %r" % (JULIA_METHODS, method))
    if count < 1:
        raise ConfigError("julia sample count must be >= 1")
    if method != "inverse_iteration" and field is None:
        raise ConfigError("julia method %r needs a labeled grid field" % method)

    parts = []
    tests = []
    if method in ("inverse_iteration", "mixed"):
        parts.append(_inverse_iteration(f, count, seed, burn_in, cycles))
        tests.append("backward orbit of a repelling periodic point after %d burn-in steps" % burn_in)
    if method in ("boundary_cells", "mixed"):
        parts.append(field.centers()[field.boundary_mask()])
        tests.append("cell center with a 4-neighbour outside its Fatou component")

    points = np.concatenate(parts)
    logger.info("julia sample: %d points (%s, seed %d)", len(points), method, seed)
    return JuliaSample(points=points, method=method, seed=seed, proximity_test="; ".join(tests))


# =============================================================================
# DISTANCE FIELD
# =============================================================================


def julia_tree(sample):
    return cKDTree(to_sphere_xyz(sample.points))


def distance_field(field, sample, threads=1, tree=None):
    """δ̂(cell) = chordal distance from the cell center to the nearest sample point."""
    if len(sample) == 0:
        raise InsufficientData("distance_field needs a nonempty Julia sample")
    tree = tree or julia_tree(sample)
    d, _ = tree.query(to_sphere_xyz(field.centers().ravel()), workers=resolve_threads(threads))
    delta = np.minimum(d, 2.0).reshape(field.shape)
    return replace(field, delta_hat=delta, has_distance=True)
