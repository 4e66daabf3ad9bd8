"""
Quasi-hyperbolic geometry of Fatou components.

Distance to the boundary is always δ̂, the chordal distance to a Julia
sample (or, for a grid-only run, the δ̂ of the cell a point falls in). On
top of it this module measures

  * quasi-hyperbolic length   l_qh(γ) = ∫ |dσ| / δ̂
  * quasi-hyperbolic distance on the 8-neighbour cell graph of a component
  * the John constant, from arcs built from sampled points z₁ to a base point
  * the Hölder regression of d_qh(z, z₀) against -log δ̂(z)
  * the crosscut continuum joining two Julia points a, b

All verdicts are qualified by the grid resolution and sample density that
produced them.
"""

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage, sparse
from scipy.sparse.csgraph import dijkstra

from .data import (
    COMPOSE_MAX_DEGREE,
    DELTA_WEIGHT_FLOOR,
    ENTRY_MAX_STEPS,
    HOLDER_MIN_POINTS,
    HOLDER_RESIDUAL_IQR,
    HOLDER_SLOPE_MAX,
    JOHN_BUILDERS,
    JOHN_MAX_LEVELS,
    JOHN_MIN_PATHS,
    JOHN_NEAR_BOUNDARY_SHARE,
    JOHN_TAIL_CELLS,
    LC_DILATION_SLACK,
    LC_ENDPOINT_TOL,
    LC_JULIA_NEAR_CELLS,
    LC_MIN_COMPONENT_CELLS,
    LC_MIN_SEPARATION_CELLS,
    QH_SUBDIVISION,
    SPHERE_DIAMETER,
    V_CIRCLE_POINTS,
    V_RADIUS_CANDIDATES,
)
from .errors import (
    ComponentUnresolved,
    ConfigError,
    DegenerateEndpoints,
    Disconnected,
    EndpointOffJulia,
    InsufficientData,
    LiftDiverged,
    NoAttractor,
    NonConvergence,
    NumericalError,
    PathTouchesBoundary,
)
from .grid import CROSS, julia_tree
from .parallel import pmap, resolve_threads
from .pullback import Polyline, chordal_diameter, interpolate, lift_path
from .sphere import ChordalCircle, as_point, chordal_array, chordal_distance, to_sphere_xyz

logger = logging.getLogger(__name__)

# row-major, so steepest-ascent ties go to the first neighbour in raster order
NEIGHBOURS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))

# each undirected 8-neighbour edge once
EDGE_OFFSETS = ((0, 1), (1, -1), (1, 0), (1, 1))


class DeltaOracle:
    """
    δ̂ at arbitrary points of the sphere.

    Wraps a vectorized function of complex arrays. Values at or below `floor`
    make quasi-hyperbolic lengths unreliable and raise PathTouchesBoundary.
    """

    def __init__(self, fn, floor=0.0):
        self._fn = fn
        self.floor = float(floor)

    @classmethod
    def from_sample(cls, sample, tree=None, floor=0.0, threads=1):
        tree = tree if tree is not None else julia_tree(sample)
        workers = resolve_threads(threads)

        def query(z):
            d, _ = tree.query(to_sphere_xyz(z), workers=workers)
            return np.minimum(d, SPHERE_DIAMETER)

        return cls(query, floor)

    @classmethod
    def from_field(cls, grid_field, floor=0.0):
        """Piecewise-constant δ̂ read off the cells; 0 off the grid."""
        spec = grid_field.spec
        values = grid_field.delta_hat

        def lookup(z):
            rows, cols, valid = spec.cells_of(z)
            return np.where(valid, values[rows, cols], 0.0)

        return cls(lookup, floor)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.asarray(self._fn(z), dtype=float).reshape(z.shape)


@dataclass
class QhPath:
    polyline: Polyline
    qh_length: float
    min_delta_on_path: float
    builder: str = ""
    min_ratio: float = 1.0
    witness: object = None
    halving_qh_length: float = 0.0
    note: str = ""

    @property
    def start(self):
        return self.polyline.points[0]

    def to_dict(self):
        return {
            "builder": self.builder,
            "qh_length": self.qh_length,
            "min_delta_on_path": self.min_delta_on_path,
            "min_ratio": self.min_ratio,
            "start": self.start,
            "end": self.polyline.points[-1],
            "witness": self.witness,
            "halving_qh_length": self.halving_qh_length,
            "points": len(self.polyline),
            "note": self.note,
        }


@dataclass
class JohnReport:
    component_id: int
    base_point: object
    samples: int
    epsilon_hat: float
    path_builder: str
    worst_witness: tuple
    paths_built: int = 0
    failures: int = 0
    builder_counts: dict = field(default_factory=dict)
    halving_qh_length: float = 0.0
    implied_epsilon: float = 1.0
    seed: int = 0
    paths: list = field(default_factory=list, repr=False)

    def reaudit(self, oracle):
        """Recompute ε̂ from the stored paths."""
        return min(audit_path(p.polyline, oracle)[0] for p in self.paths)

    def to_dict(self):
        z1, z, ratio = self.worst_witness
        return {
            "component_id": self.component_id,
            "base_point": self.base_point,
            "samples": self.samples,
            "epsilon_hat": self.epsilon_hat,
            "path_builder": self.path_builder,
            "worst_witness": {"z1": z1, "z": z, "ratio": ratio},
            "paths_built": self.paths_built,
            "failures": self.failures,
            "builder_counts": dict(sorted(self.builder_counts.items())),
            "halving_qh_length": self.halving_qh_length,
            "implied_epsilon": self.implied_epsilon,
            "seed": self.seed,
        }


@dataclass
class HolderReport:
    component_id: int
    base_point: object
    slope: float
    intercept: float
    max_residual: float
    verdict: str
    points_used: int
    slope_max: float = HOLDER_SLOPE_MAX
    residual_iqr: float = 0.0
    entry_slope: float = None
    entry_intercept: float = None
    seed: int = 0

    def to_dict(self):
        return {
            "component_id": self.component_id,
            "base_point": self.base_point,
            "slope": self.slope,
            "intercept": self.intercept,
            "max_residual": self.max_residual,
            "verdict": self.verdict,
            "points_used": self.points_used,
            "slope_max": self.slope_max,
            "residual_iqr": self.residual_iqr,
            "entry_slope": self.entry_slope,
            "entry_intercept": self.entry_intercept,
            "seed": self.seed,
        }


@dataclass
class ContinuumReport:
    a: object
    b: object
    theta: float
    continuum_points: np.ndarray
    continuum_diameter: float
    ratio: float
    crossings: int
    intervals: list = field(default_factory=list)
    ratio_bound: float = None

    def to_dict(self):
        return {
            "a": self.a,
            "b": self.b,
            "theta": self.theta,
            "continuum_diameter": self.continuum_diameter,
            "ratio": self.ratio,
            "crossings": self.crossings,
            "continuum_size": len(self.continuum_points),
            "intervals": self.intervals,
            "ratio_bound": self.ratio_bound,
            "within_bound": None if self.ratio_bound is None else bool(self.ratio <= self.ratio_bound),
        }


@dataclass
class ComponentDiameters:
    ids: list
    diameters: list
    dyadic_counts: list

    def to_dict(self):
        return {
            "count": len(self.ids),
            "ids": self.ids,
            "diameters": self.diameters,
            "dyadic_counts": self.dyadic_counts,
        }


# =============================================================================
# QUASI-HYPERBOLIC LENGTH
# =============================================================================


def _lerp(a, b, s):
    out = a + s * (b - a)
    far = ~(np.isfinite(a) & np.isfinite(b) & (np.maximum(np.abs(a), np.abs(b)) <= 1e4))
    for k in np.flatnonzero(far):
        out[k] = interpolate(a[k], b[k], s[k])
    return out


def _floor_of(delta, floor):
    return getattr(delta, "floor", 0.0) if floor is None else float(floor)


def _check_floor(values, floor, where):
    bad = values <= max(floor, 0.0)
    if np.any(bad):
        raise PathTouchesBoundary(
            "δ̂ = %.3g at a path %s is at or below the resolution floor %.3g" % (float(np.min(values)), where, floor)
        )


def segment_qh_lengths(a, b, delta, floor=None):
    """
    Quasi-hyperbolic length of every segment a[k] → b[k].

    Each segment is cut into pieces no longer than QH_SUBDIVISION times its
    smaller endpoint δ̂; a piece contributes its chordal length over δ̂ at its
    midpoint.
    """
    floor = _floor_of(delta, floor)
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.size == 0:
        return np.zeros(0)
    da, db = delta(a), delta(b)
    _check_floor(np.minimum(da, db), floor, "vertex")

    length = chordal_array(a, b)
    pieces = np.maximum(1, np.ceil(length / (QH_SUBDIVISION * np.minimum(da, db)))).astype(np.int64)
    seg = np.repeat(np.arange(len(a)), pieces)
    local = np.arange(seg.size) - np.repeat(np.cumsum(pieces) - pieces, pieces)
    count = pieces[seg]
    p0 = _lerp(a[seg], b[seg], local / count)
    p1 = _lerp(a[seg], b[seg], (local + 1) / count)
    pm = _lerp(a[seg], b[seg], (local + 0.5) / count)
    dm = delta(pm)
    _check_floor(dm, floor, "midpoint")
    return np.bincount(seg, weights=chordal_array(p0, p1) / dm, minlength=len(a))


def qh_length(polyline, delta, floor=None):
    """
    l_qh of a polyline under a δ̂ oracle.

    Additive over concatenation at shared vertices, since every segment is
    measured on its own.

    Raises:
        PathTouchesBoundary: δ̂ at or below `floor` (default: the oracle's
            floor) somewhere on the path.
    """
    if len(polyline) < 2:
        return 0.0
    a, b = polyline.segments()
    return math.fsum(segment_qh_lengths(a, b, delta, floor))


def qh_halving_constant(deltas, increments):
    """
    Longest qh stretch between consecutive halvings of δ̂, walking from the
    end of the path (the base point) back to its start.
    """
    d = np.asarray(deltas)[::-1]
    inc = np.asarray(increments)[::-1]
    best = run = 0.0
    ref = d[0] if len(d) else 0.0
    for k in range(1, len(d)):
        run += inc[k - 1]
        if d[k] <= 0.5 * ref:
            best = max(best, run)
            run = 0.0
            ref = d[k]
    return max(best, run)


def implied_epsilon(m):
    """John constant e^(-2M)/(2M) guaranteed by the halving criterion with constant M."""
    if m <= 0:
        return 1.0
    return min(1.0, math.exp(-2.0 * m) / (2.0 * m))


def audit_path(polyline, delta):
    """(min over vertices z ≠ z₁ of δ̂(z)/δ(z, z₁) capped at 1, witness z)."""
    pts = polyline.points
    if len(pts) < 2:
        return 1.0, None
    d = chordal_array(pts, pts[0])
    off = d > 0
    if not off.any():
        return 1.0, None
    ratios = delta(pts[off]) / d[off]
    k = int(np.argmin(ratios))
    return float(min(1.0, ratios[k])), pts[off][k]


def make_qh_path(polyline, delta, builder="", note=""):
    """QhPath with its audit; lengths use floor 0 so that paths may start next to J."""
    pts = polyline.points
    deltas = delta(pts)
    if len(pts) > 1:
        a, b = polyline.segments()
        increments = segment_qh_lengths(a, b, delta, floor=0.0)
    else:
        _check_floor(deltas, 0.0, "vertex")
        increments = np.zeros(0)
    ratio, witness = audit_path(polyline, delta)
    return QhPath(
        polyline=polyline,
        qh_length=math.fsum(increments),
        min_delta_on_path=float(np.min(deltas)),
        builder=builder,
        min_ratio=ratio,
        witness=witness,
        halving_qh_length=qh_halving_constant(deltas, increments),
        note=note,
    )


# =============================================================================
# QUASI-HYPERBOLIC DISTANCE ON THE GRID
# =============================================================================


class ComponentGraph:
    """
    The cells of one component with δ̂ > 0, joined to their 8 neighbours.

    Edge weight: chordal distance of the cell centers over the smaller of the
    two δ̂ values. Shortest-path runs are cached per source node.
    """

    def __init__(self, grid_field, cid):
        mask = grid_field.component_mask(cid) & (grid_field.delta_hat > 0)
        if not mask.any():
            raise Disconnected("component %d has no cells away from the Julia sample" % cid)
        self.field = grid_field
        self.cid = cid
        self.mask = mask
        self.cells = np.argwhere(mask)
        self.index = np.full(mask.shape, -1, dtype=np.int64)
        self.index[mask] = np.arange(len(self.cells))
        self._runs = {}

        centers = grid_field.centers()
        delta = grid_field.delta_hat
        H, W = mask.shape
        src, dst, weight = [], [], []
        for di, dj in EDGE_OFFSETS:
            c0 = max(0, -dj)
            both = mask[0 : H - di, c0 : W - max(0, dj)] & mask[di:H, c0 + dj : W - max(0, dj) + dj]
            ia, ja = np.nonzero(both)
            ja = ja + c0
            ib, jb = ia + di, ja + dj
            length = chordal_array(centers[ia, ja], centers[ib, jb])
            weight.append(length / np.maximum(np.minimum(delta[ia, ja], delta[ib, jb]), DELTA_WEIGHT_FLOOR))
            src.append(self.index[ia, ja])
            dst.append(self.index[ib, jb])

        m = len(self.cells)
        self.graph = sparse.csr_matrix(
            (np.concatenate(weight), (np.concatenate(src), np.concatenate(dst))),
            shape=(m, m),
        )

    def __len__(self):
        return len(self.cells)

    def node(self, cell):
        k = self.index[int(cell[0]), int(cell[1])]
        if k < 0:
            raise Disconnected("cell %r is not a usable cell of component %d" % (tuple(cell), self.cid))
        return int(k)

    def from_source(self, cell):
        k = self.node(cell)
        if k not in self._runs:
            self._runs[k] = dijkstra(self.graph, directed=False, indices=k, return_predecessors=True)
        return self._runs[k]

    def distance(self, a, b):
        ka, kb = self.node(a), self.node(b)
        if ka == kb:
            return 0.0
        # one canonical source per pair keeps d(a, b) == d(b, a) bit for bit
        src, dst = (a, b) if ka < kb else (b, a)
        dist, _ = self.from_source(src)
        d = dist[self.node(dst)]
        if not np.isfinite(d):
            raise Disconnected("no grid path between %r and %r" % (tuple(a), tuple(b)))
        return float(d)

    def path(self, cell, source):
        """Cells of a shortest path from `cell` to `source`, shape (k, 2)."""
        dist, pred = self.from_source(source)
        k, ks = self.node(cell), self.node(source)
        if not np.isfinite(dist[k]):
            raise Disconnected("no grid path between %r and %r" % (tuple(cell), tuple(source)))
        out = [k]
        while out[-1] != ks:
            out.append(int(pred[out[-1]]))
        return self.cells[out]


def qh_distance(grid_field, z, z0, graph=None):
    """
    Grid quasi-hyperbolic distance between two cells of the same component.

    Raises:
        Disconnected: the cells lie in different components or no grid path
            joins them.
    """
    z, z0 = (int(z[0]), int(z[1])), (int(z0[0]), int(z0[1]))
    cz, c0 = int(grid_field.component[z]), int(grid_field.component[z0])
    if cz < 0 or cz != c0:
        raise Disconnected("cells %r and %r are not in one Fatou component" % (z, z0))
    if graph is None:
        graph = ComponentGraph(grid_field, cz)
    return graph.distance(z, z0)


# =============================================================================
# ATTRACTING NEIGHBOURHOODS AND ENTRY TIMES
# =============================================================================


def _iterate_array(f, z, n):
    for _ in range(n):
        z = f.eval_array(z)
    return z


def attracting_radius(f, p, period, inside=None):
    """
    Largest candidate radius r with f^period(∂B(p, r)) ⊂ B(p, r), checked on a
    circle sample; `inside`, if given, must accept every sample point too.
    """
    p = as_point(p)
    for r in V_RADIUS_CANDIDATES:
        pts = ChordalCircle(p, r).sample(V_CIRCLE_POINTS)
        image = _iterate_array(f, pts, period)
        if not np.all(chordal_array(image, p.to_complex()) < r):
            continue
        if inside is not None and not inside(pts):
            continue
        return r
    return None


def attracting_neighbourhoods(f, cycles):
    """(point, radius) for every point of every attracting cycle."""
    out = []
    for cyc in cycles:
        if not cyc.is_attracting:
            continue
        for p in cyc.points:
            r = attracting_radius(f, p, cyc.period) or V_RADIUS_CANDIDATES[-1]
            out.append((p.to_complex(), r))
    return out


def entry_times(f, points, neighbourhoods, max_steps=ENTRY_MAX_STEPS):
    """First n with f^n(z) inside one of the neighbourhoods; -1 if never within max_steps."""
    z = np.array(points, dtype=complex).ravel()
    n = np.full(z.size, -1, dtype=np.int64)
    active = np.ones(z.size, dtype=bool)
    for k in range(max_steps + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        zi = z[idx]
        inside = np.zeros(idx.size, dtype=bool)
        for q, r in neighbourhoods:
            inside |= chordal_array(zi, q) < r
        n[idx[inside]] = k
        active[idx[inside]] = False
        if k < max_steps:
            idx = np.flatnonzero(active)
            z[idx] = f.eval_array(z[idx])
    return n


# =============================================================================
# JOHN PATHS
# =============================================================================


@dataclass
class JohnContext:
    """Per-component data shared by all John paths of one estimate."""

    field: object
    cid: int
    oracle: DeltaOracle
    graph: ComponentGraph
    base: tuple
    point: object = None
    period: int = 0
    g: object = None
    r_v: float = None
    centers: np.ndarray = None

    def __post_init__(self):
        if self.centers is None:
            self.centers = self.field.centers()


def base_cell(grid_field, cid):
    """
    (cell, attracting point) of the component: the cell of an attracting
    cycle point inside it, else the cell of largest δ̂ with no point.
    """
    usable = grid_field.component_mask(cid) & (grid_field.delta_hat > 0)
    for cyc in grid_field.cycles:
        for p in cyc.points:
            cell = grid_field.spec.cell_of(p)
            if cell is not None and usable[cell]:
                return cell, p
    if not usable.any():
        raise Disconnected("component %d has no cells away from the Julia sample" % cid)
    flat = np.where(usable, grid_field.delta_hat, -1.0)
    i, j = np.unravel_index(int(np.argmax(flat)), flat.shape)
    return (int(i), int(j)), None


def _compose_power(f, period):
    if f.degree ** period > COMPOSE_MAX_DEGREE:
        return None
    g = f
    for _ in range(period - 1):
        g = g.compose(f)
    return g


def john_context(f, grid_field, cid, oracle=None, graph=None, dynamic=True):
    basin = int(grid_field.basin[grid_field.component == cid].max(initial=-1))
    if basin < 0 or basin >= len(grid_field.cycles):
        raise NoAttractor("component %d is not attached to an attracting cycle" % cid)
    oracle = oracle or DeltaOracle.from_field(grid_field)
    graph = graph or ComponentGraph(grid_field, cid)
    base, point = base_cell(grid_field, cid)
    graph.from_source(base)
    ctx = JohnContext(field=grid_field, cid=cid, oracle=oracle, graph=graph, base=base, point=point)
    if not (dynamic and point is not None):
        return ctx

    period = next(c.period for c in grid_field.cycles if point in c.points)
    spec = grid_field.spec

    def inside(pts):
        rows, cols, valid = spec.cells_of(pts)
        return bool(np.all(valid & graph.mask[rows, cols]))

    ctx.period = period
    ctx.g = _compose_power(f, period)
    ctx.r_v = attracting_radius(f, point, period, inside)
    if ctx.g is None or ctx.r_v is None:
        logger.debug("component %d: no dynamic John builder (period %d, r_V %s)", cid, period, ctx.r_v)
        ctx.g = None
    return ctx


def _ascent_cells(grid_field, mask, start):
    delta = grid_field.delta_hat
    H, W = mask.shape
    i, j = start
    cells = [start]
    while True:
        best, step = delta[i, j], None
        for di, dj in NEIGHBOURS:
            a, b = i + di, j + dj
            if 0 <= a < H and 0 <= b < W and mask[a, b] and delta[a, b] > best:
                best, step = delta[a, b], (a, b)
        if step is None:
            return cells
        i, j = step
        cells.append(step)


def delta_ascent_path(ctx, z1):
    """Steepest ascent of δ̂ from z1, then the grid shortest path to the base cell."""
    ascent = _ascent_cells(ctx.field, ctx.graph.mask, z1)
    tail = ctx.graph.path(ascent[-1], ctx.base)
    cells = np.concatenate([np.array(ascent[:-1], dtype=np.int64).reshape(-1, 2), tail])
    pts = ctx.centers[cells[:, 0], cells[:, 1]]
    if ctx.point is not None:
        pts = np.append(pts, ctx.point.to_complex())
    return Polyline(pts)


def _straight(spec, a, b):
    cell = max(float(spec.chordal_cell_at(a)), float(spec.chordal_cell_at(b))) or spec.cell_size
    step = JOHN_TAIL_CELLS * cell
    count = max(2, int(math.ceil(chordal_distance(a, b) / max(step, 1e-12))) + 1)
    return Polyline.segment(a, b, count)


def dynamic_lift_path(ctx, z1):
    """
    Arc from z1 to the attracting point p built by pulling back.

    z1 is pushed forward by g = f^period until it lands in V = B(p, r_V). The
    straight arc from the landing point to p is then lifted back one level at
    a time: each lift stops where the arc enters B(p, r_V / 2) and is
    continued by a straight piece to p.
    """
    if ctx.g is None:
        raise NoAttractor("no attracting neighbourhood for the dynamic builder in component %d" % ctx.cid)
    spec = ctx.field.spec
    p = ctx.point.to_complex()
    orbit = [complex(ctx.centers[z1])]
    while chordal_distance(orbit[-1], p) >= ctx.r_v:
        if len(orbit) > JOHN_MAX_LEVELS:
            raise NonConvergence("orbit does not enter V within %d steps" % JOHN_MAX_LEVELS)
        orbit.append(complex(ctx.g(orbit[-1])))

    path = _straight(spec, orbit[-1], p)
    for w in reversed(orbit[:-1]):
        pts = path.points
        cut = int(np.argmax(chordal_array(pts, p) <= 0.5 * ctx.r_v))
        lifted = lift_path(ctx.g, Polyline(pts[: cut + 1]), w)
        end = lifted.points[-1]
        path = Polyline(np.concatenate([lifted.points, _straight(spec, end, p).points[1:]]))

    rows, cols, valid = spec.cells_of(path.points)
    if not np.all(valid & ctx.graph.mask[rows, cols]):
        raise LiftDiverged("lifted arc leaves the cells of component %d" % ctx.cid)
    return path


def john_path(f, grid_field, z1, component=None, cycles=None, oracle=None, builder="best_of_both", ctx=None):
    """
    A John arc from the cell z1 to the component's base point.

    With best_of_both, both builders run and the arc with the larger minimum of
    δ̂(z)/δ(z, z₁) wins (ties go to delta_ascent); a failing dynamic builder
    leaves delta_ascent alone, recorded in the path's note.

    Raises:
        NoAttractor: the component has no attracting cycle, or dynamic_lift
            was requested for a component without an attracting point.
    """
    if builder not in JOHN_BUILDERS:
        raise ConfigError("john builder must be one of %s, got %r" % (JOHN_BUILDERS, builder))
    z1 = (int(z1[0]), int(z1[1]))
    if ctx is None:
        if cycles is not None:
            grid_field = replace(grid_field, cycles=[c for c in cycles if c.is_attracting])
        cid = int(grid_field.component[z1]) if component is None else int(component)
        ctx = john_context(f, grid_field, cid, oracle, dynamic=builder != "delta_ascent")
    if ctx.graph.node(z1) == ctx.graph.node(ctx.base):
        start = ctx.centers[z1]
        return make_qh_path(Polyline(np.array([start])), ctx.oracle, builder="trivial")

    candidates = []
    note = ""
    if builder in ("dynamic_lift", "best_of_both"):
        try:
            candidates.append(make_qh_path(dynamic_lift_path(ctx, z1), ctx.oracle, "dynamic_lift"))
        except NumericalError as e:
            if builder == "dynamic_lift":
                raise
            note = "dynamic_lift failed: %s" % e
            logger.debug("cell %r: %s", z1, note)
    if builder in ("delta_ascent", "best_of_both"):
        candidates.append(make_qh_path(delta_ascent_path(ctx, z1), ctx.oracle, "delta_ascent", note))

    return max(reversed(candidates), key=lambda p: p.min_ratio)


def _sample_cells(graph, grid_field, samples, rng):
    cells = graph.cells
    deltas = grid_field.delta_hat[cells[:, 0], cells[:, 1]]
    decile = np.argsort(deltas, kind="stable")[: max(1, len(cells) // 10)]
    n_near = int(round(JOHN_NEAR_BOUNDARY_SHARE * samples))
    n_rest = samples - n_near
    near = rng.choice(decile, size=n_near, replace=n_near > len(decile))
    rest = rng.choice(len(cells), size=n_rest, replace=n_rest > len(cells))
    return [tuple(int(v) for v in cells[k]) for k in np.concatenate([near, rest])]


def john_estimate(
    f,
    grid_field,
    component,
    samples,
    seed,
    oracle=None,
    builder="best_of_both",
    threads=1,
    progress=False,
):
    """
    ε̂ for one component: the smallest δ̂(z)/δ(z, z₁) seen along John arcs from
    sampled cells z₁.

    70% of the z₁ come from the decile of component cells with the smallest
    δ̂, the rest uniformly from the component. Deterministic for a fixed seed.

    Raises:
        InsufficientData: fewer than 10 arcs could be built.
    """
    if samples < 1:
        raise ConfigError("john samples must be >= 1")
    ctx = john_context(f, grid_field, component, oracle, dynamic=builder != "delta_ascent")
    rng = np.random.default_rng(seed)
    starts = _sample_cells(ctx.graph, grid_field, samples, rng)

    def build(z1):
        try:
            return john_path(f, grid_field, z1, builder=builder, ctx=ctx)
        except NumericalError as e:
            logger.debug("John arc from %r skipped: %s", z1, e)
            return None

    results = pmap(build, starts, threads, desc="john %d" % component, progress=progress)
    paths = [p for p in results if p is not None]
    if len(paths) < JOHN_MIN_PATHS:
        raise InsufficientData(
            "only %d of %d John arcs succeeded in component %d (need %d)"
            % (len(paths), len(starts), component, JOHN_MIN_PATHS)
        )

    worst = min(paths, key=lambda p: p.min_ratio)
    counts = {}
    for p in paths:
        counts[p.builder] = counts.get(p.builder, 0) + 1
    halving = max(p.halving_qh_length for p in paths)

    report = JohnReport(
        component_id=component,
        base_point=ctx.point if ctx.point is not None else ctx.centers[ctx.base],
        samples=len(starts),
        epsilon_hat=worst.min_ratio,
        path_builder=builder,
        worst_witness=(worst.start, worst.witness, worst.min_ratio),
        paths_built=len(paths),
        failures=len(starts) - len(paths),
        builder_counts=counts,
        halving_qh_length=halving,
        implied_epsilon=implied_epsilon(halving),
        seed=seed,
        paths=paths,
    )
    logger.info(
        "component %d: epsilon_hat %.4g from %d arcs (%d failed)",
        component,
        report.epsilon_hat,
        report.paths_built,
        report.failures,
    )
    return report


# =============================================================================
# HÖLDER REGRESSION
# =============================================================================


def holder_check(grid_field, component, samples, seed, f=None, slope_max=HOLDER_SLOPE_MAX, graph=None):
    """
    Least-squares fit d_qh(z, z₀) ≈ slope · (-log δ̂(z)) + intercept over
    sampled cells.

    holder_consistent iff slope ≤ slope_max and the largest absolute residual
    is at most 3 interquartile ranges of the sampled distances. Cells with δ̂
    at or below their chordal cell diagonal are below the resolution floor and
    are not sampled. With `f`, the entry time into the attracting
    neighbourhoods is regressed on -log δ̂ too.
    """
    graph = graph or ComponentGraph(grid_field, component)
    base, point = base_cell(grid_field, component)
    dist, _ = graph.from_source(base)

    centers = grid_field.centers()[graph.cells[:, 0], graph.cells[:, 1]]
    floor = math.sqrt(2.0) * grid_field.spec.chordal_cell_at(centers)
    resolved = np.flatnonzero(grid_field.delta_hat[graph.cells[:, 0], graph.cells[:, 1]] > floor)

    rng = np.random.default_rng(seed)
    pick = resolved[rng.choice(len(resolved), size=min(samples, len(resolved)), replace=False)]
    cells = graph.cells[pick]
    d = dist[pick]
    x = -np.log(grid_field.delta_hat[cells[:, 0], cells[:, 1]])
    ok = np.isfinite(d) & np.isfinite(x)
    d, x, cells = d[ok], x[ok], cells[ok]
    if len(d) < HOLDER_MIN_POINTS or np.ptp(x) == 0:
        raise InsufficientData("%d usable Hölder points in component %d (need %d)" % (len(d), component, HOLDER_MIN_POINTS))

    slope, intercept = np.polyfit(x, d, 1)
    max_residual = float(np.max(np.abs(d - (slope * x + intercept))))
    q75, q25 = np.percentile(d, [75, 25])
    iqr = float(q75 - q25)
    consistent = bool(np.isfinite(slope) and slope <= slope_max and max_residual <= HOLDER_RESIDUAL_IQR * iqr)

    entry_slope = entry_intercept = None
    if f is not None:
        n = entry_times(f, grid_field.centers()[cells[:, 0], cells[:, 1]], attracting_neighbourhoods(f, grid_field.cycles))
        entered = n >= 0
        if entered.sum() >= 2 and np.ptp(x[entered]) > 0:
            entry_slope, entry_intercept = (float(v) for v in np.polyfit(x[entered], n[entered], 1))

    report = HolderReport(
        component_id=component,
        base_point=point if point is not None else grid_field.centers()[base],
        slope=float(slope),
        intercept=float(intercept),
        max_residual=max_residual,
        verdict="holder_consistent" if consistent else "holder_violated_at_resolution",
        points_used=len(d),
        slope_max=slope_max,
        residual_iqr=iqr,
        entry_slope=entry_slope,
        entry_intercept=entry_intercept,
        seed=seed,
    )
    logger.info("component %d: Hölder slope %.3g (%s)", component, report.slope, report.verdict)
    return report


# =============================================================================
# CROSSCUTS AND LOCAL CONNECTIVITY
# =============================================================================


def _mask_diameter(centers, mask):
    """Chordal diameter of the cell centers of a mask, measured on its outline."""
    outline = mask & ~ndimage.binary_erosion(mask, structure=CROSS, border_value=0)
    return chordal_diameter(centers[outline])


def _fatou_runs(labels):
    """Maximal runs [s, e] of equal labels ≥ 0."""
    runs = []
    s = None
    for k, lab in enumerate(labels):
        if s is not None and lab != labels[s]:
            runs.append((s, k - 1))
            s = None
        if s is None and lab >= 0:
            s = k
    if s is not None:
        runs.append((s, len(labels) - 1))
    return runs


def _replace_interval(grid_field, centers, cid, run_cells):
    U = grid_field.component == cid
    if U.sum() < LC_MIN_COMPONENT_CELLS:
        raise ComponentUnresolved("component %d has fewer than %d cells; refine the grid" % (cid, LC_MIN_COMPONENT_CELLS))
    cut = np.zeros_like(U)
    cut[run_cells[:, 0], run_cells[:, 1]] = True
    rest = U & ~cut
    labels, _ = ndimage.label(rest, structure=CROSS)
    touching = np.unique(labels[ndimage.binary_dilation(cut, structure=CROSS) & rest])
    touching = touching[touching > 0]
    if len(touching) < 2:
        raise ComponentUnresolved("crosscut does not separate component %d at this resolution" % cid)

    sizes = ndimage.sum(np.ones_like(labels), labels, touching)
    sides = touching[np.argsort(-sizes, kind="stable")[:2]]
    diameters = [_mask_diameter(centers, labels == s) for s in sides]
    D = labels == sides[int(np.argmin(diameters))]
    crosscut = D & ndimage.binary_dilation(~U, structure=CROSS)
    if not crosscut.any():
        crosscut = D & ~ndimage.binary_erosion(D, structure=CROSS, border_value=0)
    return centers[crosscut]


def crosscut_continuum(f, grid_field, sample, a, b, oracle=None):
    """
    A continuum in J joining a and b, built from the segment [a, b].

    The segment is walked at half-cell spacing. Points within 1.5 cells of the
    Julia sample are kept; every maximal stretch inside one Fatou component U
    is a crosscut of U and is replaced by the Julia-adjacent outline of the
    side of smaller diameter.

    Raises:
        DegenerateEndpoints: δ(a, b) is at most 4 cells.
        EndpointOffJulia: a or b is farther than 1e-4 from the sample.
        ComponentUnresolved: the segment leaves the grid or crosses a
            component the grid does not resolve.
    """
    a, b = as_point(a), as_point(b)
    spec = grid_field.spec
    za, zb = a.to_complex(), b.to_complex()
    theta = chordal_distance(a, b)
    cell_a = float(spec.chordal_cell_at(za))
    if not theta > LC_MIN_SEPARATION_CELLS * cell_a:
        raise DegenerateEndpoints("δ(a, b) = %.3g is within %d cells" % (theta, LC_MIN_SEPARATION_CELLS))

    oracle = oracle or DeltaOracle.from_sample(sample)
    for name, z in (("a", za), ("b", zb)):
        off = float(oracle(z))
        if off > LC_ENDPOINT_TOL:
            raise EndpointOffJulia("%s is %.3g from the Julia sample" % (name, off))

    ua, ub = complex(spec.to_chart(za)), complex(spec.to_chart(zb))
    if not (np.isfinite(ua) and np.isfinite(ub)):
        raise ComponentUnresolved("segment endpoint at the pole of the grid chart")
    count = int(math.ceil(abs(ub - ua) / (0.5 * spec.cell_size))) + 1
    pts = spec.from_chart(np.linspace(ua, ub, count))
    rows, cols, valid = spec.cells_of(pts)
    if not valid.all():
        raise ComponentUnresolved("segment [a, b] leaves the grid")

    near = oracle(pts) < LC_JULIA_NEAR_CELLS * spec.chordal_cell_at(pts)
    labels = np.where(near, -1, grid_field.component[rows, cols])
    centers = grid_field.centers()

    pieces = [pts[labels < 0], np.array([za, zb])]
    intervals = []
    for s, e in _fatou_runs(labels):
        run_cells = np.unique(np.stack([rows[s : e + 1], cols[s : e + 1]], axis=1), axis=0)
        replacement = _replace_interval(grid_field, centers, int(labels[s]), run_cells)
        ends = pts[[max(s - 1, 0), min(e + 1, count - 1)]]
        pieces.append(replacement)
        intervals.append(
            {
                "component_id": int(labels[s]),
                "interval_diameter": float(chordal_distance(ends[0], ends[1])),
                "replacement_diameter": chordal_diameter(np.concatenate([replacement, ends])),
                "cells": len(replacement),
            }
        )

    points = np.concatenate(pieces)
    diameter = chordal_diameter(points)
    report = ContinuumReport(
        a=a,
        b=b,
        theta=theta,
        continuum_points=points,
        continuum_diameter=diameter,
        ratio=diameter / theta,
        crossings=len(intervals),
        intervals=intervals,
    )
    logger.debug("continuum %r-%r: ratio %.4g, %d crossings", za, zb, report.ratio, report.crossings)
    return report


def dilation_bound(epsilon_hat, slack=LC_DILATION_SLACK):
    """Largest continuum ratio expected where the Fatou components are ε̂-John."""
    return (1.0 + slack) / epsilon_hat


def component_diameters(grid_field):
    """Chordal diameters of all labeled components, decreasing, with counts per dyadic scale."""
    centers = grid_field.centers()
    labels = grid_field.component + 1
    diameters = []
    for k, box in enumerate(ndimage.find_objects(labels)):
        if box is None:
            continue
        mask = labels[box] == k + 1
        diameters.append((_mask_diameter(centers[box], mask), k))
    diameters.sort(key=lambda t: (-t[0], t[1]))

    counts = {}
    for d, _ in diameters:
        scale = int(math.floor(-math.log2(d))) if d > 0 else None
        counts[scale] = counts.get(scale, 0) + 1
    dyadic = [
        {"scale": None if s is None else 2.0 ** -s, "count": counts[s]}
        for s in sorted(counts, key=lambda s: (s is None, s if s is not None else 0))
    ]
    return ComponentDiameters(
        ids=[k for _, k in diameters],
        diameters=[d for d, _ in diameters],
        dyadic_counts=dyadic,
    )
