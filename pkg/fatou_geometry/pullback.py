"""
Inverse-iterate pullbacks.

Branch-tracked lifting of paths through f⁻¹, connected components of
f⁻ⁿ(B(z, r)) with their covering degree, and the shrinking experiments built
on them.

A component of f⁻ⁿ(B) is traced through its whole chain of intermediate
levels: level 0 is the base circle ∂B, level k a boundary curve of the
component of f⁻ᵏ(B) containing f^(n-k)(w). Every level is a continuous
function of the base circle angle t, so the march around the circle moves all
n levels together, each one by a Newton step seeded at its previous value.
The march stops when the deepest level returns to its starting point; the
number of base circuits needed is the covering degree.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .data import (
    CIRCLE_POINTS,
    CRITICAL_VALUE_MARGIN,
    EXPSHRINK_LAMBDA_MIN,
    FIT_RESIDUAL_MAX,
    LIFT_MAX_BISECTIONS,
    LIFT_MAX_POINTS,
    LIFT_NEWTON_STEPS,
    LIFT_ROUND_TRIP_TOL,
    MAX_SKIP_FRACTION,
    MOD_BOUND_CONSTANT,
    RADIUS_ATTEMPTS,
    RADIUS_PERTURBATION,
    REFINE_FRACTION,
    SHRINK_FAIL_RATIO,
)
from .errors import ConfigError, CriticalValueOnPath, InsufficientData, LiftDiverged, NumericalError
from .orbits import critical_values_forward
from .parallel import pmap
from .ratmap import horner, critical_points, preimages
from .sphere import (
    COMPLEX_INF,
    ChordalCircle,
    as_point,
    chordal_array,
    chordal_distance,
    from_sphere_xyz,
    to_sphere_xyz,
)

logger = logging.getLogger(__name__)

SPOKE_POINTS = 48
SPOKE_ROTATIONS = (0.0, 0.45, -0.45, 0.9, -0.9, 1.6, -1.6, 3.1)


@dataclass
class Polyline:
    """
    Points on the sphere as a complex array (inf = ∞).

    A closed polyline does not repeat its first point; the closing segment is
    implied.
    """

    points: np.ndarray
    closed: bool = False

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).ravel()
        if len(pts) > 1:
            keep = np.ones(len(pts), dtype=bool)
            keep[1:] = chordal_array(pts[1:], pts[:-1]) > 0
            pts = pts[keep]
        self.points = pts

    def __len__(self):
        return len(self.points)

    def segments(self):
        a = self.points
        b = np.roll(a, -1) if self.closed else a[1:]
        return (a, b) if self.closed else (a[:-1], b)

    def length(self):
        a, b = self.segments()
        return float(math.fsum(chordal_array(a, b)))

    def diameter(self):
        return chordal_diameter(self.points)

    @classmethod
    def segment(cls, a, b, count=2):
        """Chart-linear segment from a to b with `count` points."""
        s = np.linspace(0.0, 1.0, count)
        return cls(np.array([interpolate(complex(as_point(a)), complex(as_point(b)), x) for x in s]))


@dataclass
class PullbackComponent:
    base_center: object
    base_radius: float
    depth: int
    boundary: Polyline
    diameter: float
    covering_degree: int
    level_degrees: list = field(default_factory=list)
    seed_point: object = None
    contains_critical: bool = False

    def to_dict(self):
        return {
            "base_center": self.base_center,
            "base_radius": self.base_radius,
            "depth": self.depth,
            "diameter": self.diameter,
            "covering_degree": self.covering_degree,
            "level_degrees": self.level_degrees,
            "seed_point": self.seed_point,
            "contains_critical": self.contains_critical,
            "boundary_points": len(self.boundary),
        }


@dataclass
class ShrinkReport:
    radius: float
    depths: list
    max_diameter: list
    fitted_lambda: float
    omega: list
    partial_sums: list
    verdict: str
    fit_window: tuple = (1, 1)
    fit_residual: float = 0.0
    samples_per_depth: list = field(default_factory=list)
    skipped: int = 0
    attempted: int = 0
    near: object = None

    def to_dict(self):
        return {
            "radius": self.radius,
            "depths": self.depths,
            "max_diameter": self.max_diameter,
            "fitted_lambda": self.fitted_lambda,
            "fit_window": list(self.fit_window),
            "fit_residual": self.fit_residual,
            "omega": self.omega,
            "partial_sums": self.partial_sums,
            "verdict": self.verdict,
            "samples_per_depth": self.samples_per_depth,
            "skipped": self.skipped,
            "attempted": self.attempted,
            "near": self.near,
        }


# =============================================================================
# GEOMETRY HELPERS
# =============================================================================


def chordal_diameter(points, block=2048):
    """Max pairwise chordal distance (Euclidean distance of the sphere embedding)."""
    xyz = to_sphere_xyz(np.asarray(points, dtype=complex))
    n = len(xyz)
    if n < 2:
        return 0.0
    if n <= block:
        return float(np.max(pdist(xyz)))
    best = 0.0
    for i in range(0, n, block):
        best = max(best, float(np.max(cdist(xyz[i : i + block], xyz[i:]))))
    return best


def interpolate(a, b, s):
    """Point at fraction s from a to b: linear in a chart, geodesic when ∞ is involved."""
    if np.isfinite(a) and np.isfinite(b):
        if max(abs(a), abs(b)) <= 1e4:
            return a + s * (b - a)
        if a != 0 and b != 0 and min(abs(a), abs(b)) > 1e-4:
            ua, ub = 1.0 / a, 1.0 / b
            u = ua + s * (ub - ua)
            return COMPLEX_INF if u == 0 else 1.0 / u
    xa, xb = to_sphere_xyz(a), to_sphere_xyz(b)
    x = (1 - s) * xa + s * xb
    norm = np.linalg.norm(x)
    if norm == 0:
        raise LiftDiverged("cannot interpolate between antipodal points")
    return complex(from_sphere_xyz(x / norm))


def distance_to_polyline(points, closed, v):
    """Chordal distance from v to a chart-linear polyline (segments through ∞ use endpoints)."""
    pts = np.asarray(points, dtype=complex)
    a = pts
    b = np.roll(pts, -1) if closed else pts[1:]
    if not closed:
        a = pts[:-1]
    if len(a) == 0:
        return float(chordal_array(pts, v).min())

    v = complex(as_point(v))
    best = float(np.min(chordal_array(pts, v)))
    finite = np.isfinite(a) & np.isfinite(b)
    if np.isfinite(v) and finite.any():
        af, bf = a[finite], b[finite]
        ab = bf - af
        denom = np.abs(ab) ** 2
        with np.errstate(all="ignore"):
            s = np.where(denom > 0, ((v - af) * np.conj(ab)).real / denom, 0.0)
        proj = af + np.clip(s, 0.0, 1.0) * ab
        best = min(best, float(np.min(chordal_array(proj, v))))
    return best


def winding_number(curve, point):
    """Winding number of a closed polyline of finite points around a finite point."""
    rel = curve - point
    if np.any(rel == 0):
        return None
    steps = np.angle(np.roll(rel, -1) / rel)
    return int(round(float(np.sum(steps)) / (2 * math.pi)))


def _same_side(curve, ref, point):
    """True when `point` lies on the same side of a closed curve as `ref`."""
    curve = np.asarray(curve, dtype=complex)
    ref = complex(as_point(ref))
    point = complex(as_point(point))
    if not np.all(np.isfinite(curve)) or np.max(np.abs(curve)) > 1e6:
        with np.errstate(all="ignore"):
            curve = np.where(np.isinf(curve), 0j, 1.0 / curve)
            ref = 0j if not np.isfinite(ref) else (COMPLEX_INF if ref == 0 else 1.0 / ref)
            point = 0j if not np.isfinite(point) else (COMPLEX_INF if point == 0 else 1.0 / point)
        if not np.all(np.isfinite(curve)):
            return False
    w_ref = 0 if not np.isfinite(ref) else winding_number(curve, ref)
    w_pt = 0 if not np.isfinite(point) else winding_number(curve, point)
    return w_ref is not None and w_pt is not None and w_ref == w_pt


# =============================================================================
# LIFTING
# =============================================================================


def solve_preimage(f, seed, target, max_steps=LIFT_NEWTON_STEPS):
    """
    Newton's method for f(w) = target started at `seed`, in charts adapted to both.

    Returns the solution, or None when Newton does not behave like it does
    inside the basin of the branch through the seed: it must converge, contract
    from the first step on, and stay within twice the first step of the seed.
    """
    seed = complex(seed)
    target = complex(target)
    inverted = not abs(seed) <= 1.0
    u0 = (0j if not np.isfinite(seed) else 1.0 / seed) if inverted else seed
    p, q, dp, dq = f.chart_polynomials(inverted)
    if abs(target) <= 1.0:
        A, B, dA, dB, beta = p, q, dp, dq, target
    else:
        A, B, dA, dB, beta = q, p, dq, dp, (0j if not np.isfinite(target) else 1.0 / target)

    u = u0
    steps = []
    for _ in range(max_steps):
        H = horner(A, u) - beta * horner(B, u)
        dH = horner(dA, u) - beta * horner(dB, u)
        if dH == 0:
            return None
        s = H / dH
        u -= s
        steps.append(abs(s))
        scale = 1.0 + abs(u)
        if abs(s) <= 1e-12 * scale:
            break
        # rounding floor: steps stop shrinking at a tiny size
        if len(steps) >= 3 and steps[-1] > 0.5 * steps[-2] and steps[-1] <= 1e-9 * scale:
            break
    else:
        return None

    if not np.isfinite(u):
        return None
    if steps[0] > 1e-10 and len(steps) > 1 and steps[1] > 0.5 * steps[0]:
        return None
    if abs(u - u0) > 2.0 * steps[0] + 1e-13:
        return None

    if inverted:
        return COMPLEX_INF if u == 0 else 1.0 / u
    return u


def _lift_segment(f, w, a, b, depth, max_depth):
    z = solve_preimage(f, w, b)
    if z is not None:
        return [z]
    if depth >= max_depth:
        raise LiftDiverged("segment bisection exceeded depth %d" % max_depth)
    mid = interpolate(a, b, 0.5)
    first = _lift_segment(f, w, a, mid, depth + 1, max_depth)
    return first + _lift_segment(f, first[-1], mid, b, depth + 1, max_depth)


def check_critical_values(f, gamma, margin=CRITICAL_VALUE_MARGIN):
    for cp in critical_points(f):
        v = f(cp.location)
        d = distance_to_polyline(gamma.points, gamma.closed, v)
        if d < margin:
            raise CriticalValueOnPath("path passes within %.3g of the critical value %r" % (d, v))


def lift_path(f, gamma, w0, margin=CRITICAL_VALUE_MARGIN, max_bisections=LIFT_MAX_BISECTIONS):
    """
    The continuous lift of `gamma` through f⁻¹ starting at w0.

    Every segment is lifted by Newton seeded at the previous lift point and
    bisected (in the base) until Newton converges from the seed. A closed
    `gamma` whose lift does not return to w0 (monodromy around a critical
    value) gives an open polyline ending at the other preimage.

    Raises:
        CriticalValueOnPath: gamma comes within `margin` of a critical value.
        LiftDiverged: a segment needs more than `max_bisections` halvings.
    """
    w0 = complex(as_point(w0))
    pts = gamma.points
    if chordal_distance(f(w0), pts[0]) > 1e-8:
        raise ConfigError("lift start does not map to the first path point")
    check_critical_values(f, gamma, margin)

    targets = list(pts[1:]) + ([pts[0]] if gamma.closed else [])
    sources = list(pts[:-1]) + ([pts[-1]] if gamma.closed else [])
    out = [w0]
    for a, b in zip(sources, targets):
        out.extend(_lift_segment(f, out[-1], a, b, 0, max_bisections))
        if len(out) > LIFT_MAX_POINTS:
            raise LiftDiverged("lift exceeded %d points" % LIFT_MAX_POINTS)

    if not gamma.closed:
        return Polyline(np.array(out))
    if chordal_distance(out[-1], w0) <= LIFT_ROUND_TRIP_TOL:
        return Polyline(np.array(out[:-1]), closed=True)
    logger.debug("closed path lifted to an open one (monodromy): %r -> %r", w0, out[-1])
    return Polyline(np.array(out), closed=False)


# =============================================================================
# COMPONENTS OF f⁻ⁿ(B(z, r))
# =============================================================================


def _forward_chain(f, w, n):
    chain = [as_point(w)]
    for _ in range(n):
        chain.append(f(chain[-1]))
    # chain[k] = f^k(w); level k of the component holds f^(n-k)(w)
    return [chain[n - k].to_complex() for k in range(n + 1)]


def _chain_at_start(f, circle, centers, n):
    """Lifts a spoke from f^n(w) out to the base circle; returns (t0, chain)."""
    theta_w, t_w = circle.polar(centers[0])
    last_error = None
    for rot in SPOKE_ROTATIONS:
        t0 = t_w + rot
        arc = circle.point_at(np.full(SPOKE_POINTS, theta_w), np.linspace(t_w, t0, SPOKE_POINTS))
        ray = circle.point_at(np.linspace(theta_w, circle.angle, SPOKE_POINTS), np.full(SPOKE_POINTS, t0))
        legs = [centers[0]] + (list(arc[1:]) if rot != 0.0 and theta_w > 0 else []) + list(ray[1:])
        curve = Polyline(np.array(legs))
        chain = [complex(circle.at(t0))]
        try:
            for k in range(1, n + 1):
                curve = lift_path(f, curve, centers[k])
                chain.append(curve.points[-1])
        except (CriticalValueOnPath, LiftDiverged) as e:
            logger.debug("spoke at rotation %.2f failed: %s", rot, e)
            last_error = e
            continue
        return t0, np.array(chain)
    raise last_error


def _step_chain(f, chain, base_point):
    new = np.empty_like(chain)
    new[0] = base_point
    for k in range(1, len(chain)):
        z = solve_preimage(f, chain[k], new[k - 1])
        if z is None:
            return None
        new[k] = z
    return new


def _check_base_circle(f, center, r, n, margin):
    for v in critical_values_forward(f, n, include_critical=False):
        if abs(chordal_distance(v, center) - r) < margin:
            raise CriticalValueOnPath("base circle passes within %.3g of the critical orbit point %r" % (margin, v))


def _critical_inside(f, chains, seeds):
    n = chains.shape[1] - 1
    crits = [cp.location for cp in critical_points(f)]
    for k in range(1, n + 1):
        curve = chains[:, k]
        for c in crits:
            if _same_side(curve, seeds[k], c):
                return True
    return False


def ball_component(f, z, r, n, w, margin=CRITICAL_VALUE_MARGIN):
    """
    The component of f⁻ⁿ(B(z, r)) containing w.

    Args:
        f: the map.
        z: base center.
        r: base chordal radius, 0 < r < 2.
        n: depth ≥ 1.
        w: a point with fⁿ(w) inside B(z, r).
        margin: minimal distance between ∂B and critical orbit points f^j(c), j ≤ n.

    Returns:
        PullbackComponent whose boundary is the deepest level of the traced chain.

    Raises:
        CriticalValueOnPath: ∂B passes within `margin` of some f^j(c).
        LiftDiverged: the march needed more than 24 step halvings, or too many points.
    """
    if n < 1:
        raise ConfigError("pullback depth must be >= 1, got %d" % n)
    z = as_point(z)
    centers = _forward_chain(f, w, n)
    if chordal_distance(centers[0], z) >= r:
        raise ConfigError("f^n(w) does not lie in the base ball")
    _check_base_circle(f, z, r, n, margin)

    circle = ChordalCircle(z, r)
    t0, start = _chain_at_start(f, circle, centers, n)

    dt_max = 2 * math.pi / CIRCLE_POINTS
    d = f.degree
    max_circuits = d**n
    rho = max(chordal_distance(centers[n], start[n]), 1e-12)

    chains = [start]
    level_closed = [1] + [0] * n
    t = t0
    chain = start
    dt = dt_max
    circuits = 0

    while True:
        circuit_end = t0 + 2 * math.pi * (circuits + 1)
        while t < circuit_end - 1e-15:
            halvings = 0
            while True:
                step = min(dt, circuit_end - t)
                t_new = circuit_end if step == circuit_end - t else t + step
                new = _step_chain(f, chain, complex(circle.at(t_new)))
                if new is not None:
                    spacing = chordal_distance(new[n], chain[n])
                    if spacing <= REFINE_FRACTION * rho or halvings >= LIFT_MAX_BISECTIONS:
                        break
                if halvings >= LIFT_MAX_BISECTIONS:
                    raise LiftDiverged("step halving exceeded %d at t = %.6f" % (LIFT_MAX_BISECTIONS, t))
                dt = step / 2
                halvings += 1

            t = t_new
            chain = new
            chains.append(chain)
            rho = max(rho, chordal_distance(centers[n], chain[n]))
            if spacing < REFINE_FRACTION * rho / 4:
                dt = min(2 * dt, dt_max)
            if len(chains) > LIFT_MAX_POINTS:
                raise LiftDiverged("component boundary exceeded %d points" % LIFT_MAX_POINTS)

        circuits += 1
        for k in range(1, n + 1):
            if not level_closed[k] and chordal_distance(chain[k], start[k]) <= LIFT_ROUND_TRIP_TOL:
                level_closed[k] = circuits
        if level_closed[n]:
            break
        if circuits >= max_circuits:
            raise LiftDiverged("boundary did not close after %d circuits" % circuits)

    chains = np.array(chains[:-1])
    level_degrees = [level_closed[k] // level_closed[k - 1] for k in range(1, n + 1)]
    boundary = Polyline(chains[:, n], closed=True)
    component = PullbackComponent(
        base_center=z,
        base_radius=r,
        depth=n,
        boundary=boundary,
        diameter=boundary.diameter(),
        covering_degree=level_closed[n],
        level_degrees=level_degrees,
        seed_point=as_point(w),
        contains_critical=_critical_inside(f, chains, centers),
    )
    logger.debug(
        "component depth %d: diameter %.4g, degree %d, %d boundary points",
        n,
        component.diameter,
        component.covering_degree,
        len(boundary),
    )
    return component


def ball_component_retry(f, z, r, n, w, attempts=RADIUS_ATTEMPTS, margin=CRITICAL_VALUE_MARGIN):
    """ball_component, perturbing r → r(1 ± k·1e-3) when ∂B meets a critical orbit point."""
    factors = [1.0]
    k = 1
    while len(factors) < attempts:
        factors += [1.0 + k * RADIUS_PERTURBATION, 1.0 - k * RADIUS_PERTURBATION]
        k += 1
    last = None
    for factor in factors[:attempts]:
        try:
            return ball_component(f, z, r * factor, n, w, margin)
        except CriticalValueOnPath as e:
            logger.debug("radius %.6g hits a critical value; perturbing", r * factor)
            last = e
    raise last


def round_trip_error(f, component):
    """max |δ(fⁿ(p), z) - r| over boundary points, relative to r."""
    worst = 0.0
    for p in component.boundary.points:
        q = as_point(p)
        for _ in range(component.depth):
            q = f(q)
        worst = max(worst, abs(chordal_distance(q, component.base_center) - component.base_radius))
    return worst / component.base_radius


# =============================================================================
# SHRINKING EXPERIMENTS
# =============================================================================


def _random_chain(f, z, n, rng):
    chain = [as_point(z)]
    for _ in range(n):
        pre = preimages(f, chain[-1])
        chain.append(pre[int(rng.integers(len(pre)))])
    return chain


def _sticky_chain(f, z, n):
    """Always the preimage closest to the previous point: follows the branch fixing nearby periodic points."""
    chain = [as_point(z)]
    for _ in range(n):
        pre = preimages(f, chain[-1])
        chain.append(min(pre, key=lambda p: chordal_distance(p, chain[-1])))
    return chain


def fit_lambda(depths, diameters):
    """
    λ̂ = exp(-slope) of log(diameter) against depth over the largest suffix
    window (≥ 3 points) whose residuals stay below 0.1; the last three points
    when no window qualifies.

    Returns:
        (lambda_hat, (first_depth, last_depth), max_abs_residual)
    """
    n = np.asarray(depths, dtype=float)
    y = np.log(np.asarray(diameters, dtype=float))
    if len(n) < 2:
        return 1.0, (int(n[0]) if len(n) else 0, int(n[-1]) if len(n) else 0), 0.0
    if len(n) < 3:
        slope, _ = np.polyfit(n, y, 1)
        return float(math.exp(-slope)), (int(n[0]), int(n[-1])), 0.0

    for start in range(0, len(n) - 2):
        slope, intercept = np.polyfit(n[start:], y[start:], 1)
        residual = float(np.max(np.abs(y[start:] - (slope * n[start:] + intercept))))
        if residual < FIT_RESIDUAL_MAX:
            break
    # falls through with the last three points
    return float(math.exp(-slope)), (int(n[start]), int(n[-1])), residual


def shrink_verdict(lambda_hat, depths, max_diameter, n_max):
    """
    The failure test compares the recorded depths 1 and n_max; when either
    depth has no measured component it is not applied.
    """
    if lambda_hat >= EXPSHRINK_LAMBDA_MIN:
        return "expshrink_consistent"
    by_depth = dict(zip(depths, max_diameter))
    if 1 in by_depth and n_max in by_depth:
        if by_depth[n_max] > SHRINK_FAIL_RATIO * by_depth[1]:
            return "shrinking_fails"
    else:
        logger.debug("shrink failure test skipped: depth 1 or %d not measured", n_max)
    return "sumshrink_only_consistent"



def shrink_experiment(f, sample, r, n_max, per_depth_samples, seed, near=None, threads=1, progress=False):
    """
    Maximal component diameters of f⁻ⁿ(B(z, r)) over sampled bases z ∈ J, n ≤ n_max.

    Each sampled base contributes two branches per depth: a uniformly random
    backward chain and the chain that always takes the preimage closest to the
    previous point. Failed components are skipped and counted.

    Args:
        near: optional (center, radius) restricting bases to a chordal ball.

    Raises:
        InsufficientData: more than half of the attempted components failed.
    """
    if not 0 < r < 0.5:
        raise ConfigError("shrink radius must lie in (0, 0.5)")
    if n_max < 1 or per_depth_samples < 1:
        raise ConfigError("n_max and per_depth_samples must be >= 1")

    points = np.asarray(sample.points, dtype=complex)
    if near is not None:
        center, radius = near
        points = points[chordal_array(points, complex(as_point(center))) < radius]
    if len(points) == 0:
        raise InsufficientData("no Julia sample points available as bases")

    rng = np.random.default_rng(seed)
    bases = points[rng.choice(len(points), size=min(per_depth_samples, len(points)), replace=False)]
    chains = []
    for z in bases:
        chains.append(_random_chain(f, z, n_max, rng))
        chains.append(_sticky_chain(f, z, n_max))

    tasks = [(n, chain) for n in range(1, n_max + 1) for chain in chains]

    def measure(task):
        n, chain = task
        try:
            return n, ball_component_retry(f, chain[0], r, n, chain[n]).diameter
        except NumericalError as e:
            logger.debug("depth %d base %r skipped: %s", n, chain[0], e)
            return n, None

    results = pmap(measure, tasks, threads, desc="shrink", progress=progress)
    skipped = sum(1 for _, dval in results if dval is None)
    if skipped > MAX_SKIP_FRACTION * len(results):
        raise InsufficientData("%d of %d components failed" % (skipped, len(results)))

    depths, maxd, counts = [], [], []
    for n in range(1, n_max + 1):
        values = [dval for m, dval in results if m == n and dval is not None]
        if values:
            depths.append(n)
            maxd.append(max(values))
            counts.append(len(values))
    if not depths:
        raise InsufficientData("no component could be measured")

    lam, window, residual = fit_lambda(depths, np.maximum(maxd, 1e-300))
    report = ShrinkReport(
        radius=r,
        depths=depths,
        max_diameter=maxd,
        fitted_lambda=lam,
        omega=list(maxd),
        partial_sums=list(np.cumsum(maxd)),
        verdict=shrink_verdict(lam, depths, maxd, n_max),
        fit_window=window,
        fit_residual=residual,
        samples_per_depth=counts,
        skipped=skipped,
        attempted=len(results),
        near=near,
    )
    logger.info("shrink r=%.3g: lambda %.4g (%s), %d/%d skipped", r, lam, report.verdict, skipped, len(results))
    return report


def mod_bound_ratio(f, z, R, r, n, w):
    """(diam W'/diam W) / (64 (r/R)^(1/μ)) for W ⊃ W' around the same w."""
    if not 0 < r <= R:
        raise ConfigError("mod bound cases need 0 < r <= R")
    outer = ball_component_retry(f, z, R, n, w)
    inner = outer if r == R else ball_component_retry(f, z, r, n, w)
    mu = outer.covering_degree
    bound = MOD_BOUND_CONSTANT * (r / R) ** (1.0 / mu)
    return (inner.diameter / outer.diameter) / bound, outer, inner


def mod_bound_check(f, cases, threads=1):
    """Max over cases (z, R, r, n, w) of the modulus ratio; < 1 is expected."""
    ratios = pmap(lambda c: mod_bound_ratio(f, *c)[0], cases, threads)
    return max(ratios)


@dataclass
class ModBoundReport:
    cases: int
    max_ratio: float
    passed: bool
    skipped: int = 0
    worst_case: dict = None

    def to_dict(self):
        return {
            "cases": self.cases,
            "max_ratio": self.max_ratio,
            "passed": self.passed,
            "skipped": self.skipped,
            "worst_case": self.worst_case,
        }


def random_mod_cases(f, sample, count, seed, n_max=5, radii=(0.05, 0.4)):
    """Seeded (z, R, r, n, w): z from the Julia sample, r ≤ R, w a random depth-n preimage of z."""
    rng = np.random.default_rng(seed)
    points = np.asarray(sample.points, dtype=complex)
    cases = []
    for _ in range(count):
        z = points[int(rng.integers(len(points)))]
        R = float(rng.uniform(*radii))
        r = R * float(rng.uniform(0.05, 1.0))
        n = int(rng.integers(1, n_max + 1))
        cases.append((z, R, r, n, _random_chain(f, z, n, rng)[n]))
    return cases


def mod_bound_report(f, cases, threads=1):
    """mod_bound_check over cases, skipping (and counting) those whose components fail."""

    def ratio(case):
        try:
            return mod_bound_ratio(f, *case)[0]
        except NumericalError as e:
            logger.debug("mod bound case %r skipped: %s", case[:4], e)
            return None

    ratios = pmap(ratio, cases, threads)
    measured = [(q, c) for q, c in zip(ratios, cases) if q is not None]
    if not measured:
        raise InsufficientData("no modulus-bound case could be measured")
    worst, case = max(measured, key=lambda t: t[0])
    z, R, r, n, w = case
    report = ModBoundReport(
        cases=len(measured),
        max_ratio=worst,
        passed=worst < 1.0,
        skipped=len(cases) - len(measured),
        worst_case={"z": z, "R": R, "r": r, "n": n, "w": w},
    )
    logger.info("mod bound: max ratio %.4g over %d cases", worst, report.cases)
    return report
