"""
Forward-orbit analytics: ω-limit estimation, cycle detection and
classification, and the semi-hyperbolicity verdict.

Cycles come from two sources:
    - critical orbits followed until they close up into a loop (this finds
      every attracting cycle, since each one attracts a critical point);
    - Newton's method on f^k(z) = z for k ≤ 6 from a grid of seeds, run in both
      charts, which finds low-period repelling and neutral cycles.

A verdict is numerical evidence, never a proof: non-recurrence of a critical
point is a statement about its exact orbit, and only a finite sample of it is
ever looked at.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .data import (
    ATTRACTION_RADIUS,
    CRITICAL_FOLLOW_STEPS,
    CYCLE_CHECK_TOL,
    CYCLE_DETECT_TOL,
    CYCLE_MAX_PERIOD,
    NEUTRAL_BAND,
    OMEGA_BURN_IN,
    OMEGA_MERGE_RADIUS,
    OMEGA_SAMPLE,
    ORBIT_MAX,
    PARABOLIC_ANGLE_TOL,
    PARABOLIC_MAX_DENOMINATOR,
    RHO_REC,
    RHO_RECURRENT,
    SOLVE_MAX_PERIOD,
    SOLVE_NEWTON_STEPS,
    SOLVE_SEEDS_PER_AXIS,
    SUPERATTRACTING_MAX,
)
from .errors import ConfigError
from .parallel import pmap
from .ratmap import critical_points
from .sphere import (
    COMPLEX_INF,
    INFINITY,
    SpherePoint,
    as_point,
    chordal_array,
    chordal_distance,
    spherical_derivative_factor,
    to_sphere_xyz,
)

logger = logging.getLogger(__name__)

VERDICT_NOTE = "numerical evidence from finite orbit samples; not a proof"


@dataclass
class OrbitRecord:
    """
    z, f(z), ..., f^n(z) and |(f^k)'(z)| for k = 1..n (spherical).

    log_products holds the same products as running sums of logs; it stays
    finite where deriv_products overflows and is -inf after a critical point.
    """

    points: list
    deriv_products: np.ndarray
    log_products: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __len__(self):
        return len(self.points)


@dataclass
class CycleInfo:
    points: list
    period: int
    multiplier: float
    cycle_class: str
    complex_multiplier: complex = 0j

    @property
    def is_attracting(self):
        return self.cycle_class in ("superattracting", "attracting")

    def to_dict(self):
        return {
            "points": self.points,
            "period": self.period,
            "multiplier": self.multiplier,
            "class": self.cycle_class,
            "complex_multiplier": self.complex_multiplier,
        }


@dataclass
class CriticalEvidence:
    point: SpherePoint
    multiplicity: int
    in_julia: bool
    recurrence_distance: Optional[float] = None
    attracted_cycle: Optional[CycleInfo] = None

    def to_dict(self):
        return {
            "point": self.point,
            "multiplicity": self.multiplicity,
            "in_julia": self.in_julia,
            "recurrence_distance": self.recurrence_distance,
            "attracted_cycle": self.attracted_cycle.to_dict() if self.attracted_cycle else None,
        }


@dataclass
class SemiHypVerdict:
    verdict: str
    evidence: list = field(default_factory=list)
    parabolic_found: bool = False
    neutral_found: bool = False
    rho_rec: float = RHO_REC
    note: str = VERDICT_NOTE

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "evidence": [e.to_dict() for e in self.evidence],
            "parabolic_found": self.parabolic_found,
            "neutral_found": self.neutral_found,
            "rho_rec": self.rho_rec,
            "note": self.note,
        }


# =============================================================================
# ORBITS
# =============================================================================


def forward_orbit(f, z, n):
    if n < 0 or n > ORBIT_MAX:
        raise ConfigError("orbit length must lie in [0, %d], got %d" % (ORBIT_MAX, n))

    points = [as_point(z)]
    factors = np.empty(n, dtype=float)
    for k in range(n):
        factors[k] = spherical_derivative_factor(f, points[-1])
        points.append(f(points[-1]))
    with np.errstate(divide="ignore", over="ignore"):
        logs = np.cumsum(np.log(factors))
        products = np.exp(logs)
    return OrbitRecord(points, products, logs)


def _orbit_values(f, z, steps):
    """Complex values (inf = ∞) of z, f(z), ..., f^steps(z)."""
    out = np.empty(steps + 1, dtype=complex)
    p = as_point(z)
    out[0] = p.to_complex()
    for k in range(1, steps + 1):
        p = f(p)
        out[k] = p.to_complex()
    return out


def cluster_points(values, radius):
    """
    Greedy chordal clustering; each cluster is represented by its first member.

    Returns the representatives sorted deterministically.
    """
    values = np.asarray(values, dtype=complex)
    if values.size == 0:
        return []
    xyz = to_sphere_xyz(values)
    tree = cKDTree(xyz)
    assigned = np.zeros(len(values), dtype=bool)
    reps = []
    for i in range(len(values)):
        if assigned[i]:
            continue
        assigned[tree.query_ball_point(xyz[i], radius)] = True
        assigned[i] = True
        reps.append(SpherePoint(values[i]))
    return sorted(reps, key=point_sort_key)


def point_sort_key(p):
    if p.at_infinity:
        return (1, 0.0, 0.0)
    return (0, round(p.value.real, 9), round(p.value.imag, 9))


def omega_limit_estimate(f, x, burn_in=OMEGA_BURN_IN, sample=OMEGA_SAMPLE, radius=OMEGA_MERGE_RADIUS):
    """The points f^k(x), burn_in < k ≤ burn_in + sample, merged at `radius`."""
    if burn_in + sample > ORBIT_MAX:
        raise ConfigError("burn_in + sample exceeds the orbit maximum %d" % ORBIT_MAX)
    values = _orbit_values(f, x, burn_in + sample)
    return cluster_points(values[burn_in + 1 :], radius)


# =============================================================================
# CYCLES
# =============================================================================


def classify_multiplier(m, complex_multiplier=None):
    if m < SUPERATTRACTING_MAX:
        return "superattracting"
    if m < 1.0 - NEUTRAL_BAND:
        return "attracting"
    if m > 1.0 + NEUTRAL_BAND:
        return "repelling"

    if complex_multiplier is None or complex_multiplier == 0:
        return "parabolic_suspect"
    turn = (math.atan2(complex_multiplier.imag, complex_multiplier.real) / (2 * math.pi)) % 1.0
    for q in range(1, PARABOLIC_MAX_DENOMINATOR + 1):
        if abs(turn * q - round(turn * q)) * 2 * math.pi / q <= PARABOLIC_ANGLE_TOL:
            return "parabolic_suspect"
    return "neutral_irrational_suspect"


def _canonical_rotation(points):
    start = min(range(len(points)), key=lambda i: point_sort_key(points[i]))
    return points[start:] + points[:start]


def make_cycle(f, start, period):
    """Builds a CycleInfo from one (already converged) cycle point."""
    points = [as_point(start)]
    for _ in range(period - 1):
        points.append(f(points[-1]))

    m = 1.0
    lam = 1.0 + 0j
    for p in points:
        m *= spherical_derivative_factor(f, p)
        lam *= f.local_derivative(p)

    return CycleInfo(
        points=_canonical_rotation(points),
        period=period,
        multiplier=float(m),
        cycle_class=classify_multiplier(m, lam),
        complex_multiplier=complex(lam),
    )


def minimal_period(f, z, max_period, tol=CYCLE_CHECK_TOL):
    p = as_point(z)
    w = p
    for k in range(1, max_period + 1):
        w = f(w)
        if chordal_distance(w, p) <= tol:
            return k
    return None


def _follow_to_loop(f, c, steps=CRITICAL_FOLLOW_STEPS, max_period=CYCLE_MAX_PERIOD, tol=CYCLE_DETECT_TOL):
    """Follows the orbit of c until it closes a loop; returns (cycle start, period) or None."""
    window = 2 * max_period
    buf = np.empty(steps + 1, dtype=complex)
    p = as_point(c)
    buf[0] = p.to_complex()
    lags = np.arange(1, max_period + 1)

    for k in range(1, steps + 1):
        p = f(p)
        buf[k] = p.to_complex()
        if k % 8 and k != steps:
            continue
        avail = lags[lags <= k]
        d = chordal_array(buf[k], buf[k - avail])
        hits = avail[d <= tol]
        for lag in hits:
            seg = buf[max(0, k - window) : k + 1]
            if len(seg) <= lag:
                continue
            if np.max(chordal_array(seg[lag:], seg[:-lag])[-lag:]) <= tol:
                return SpherePoint(buf[k]), int(lag)
    return None


def _newton_periodic(g, k, seeds):
    """Vectorized Newton on g^k(z) - z; returns converged roots (finite chart values)."""
    z = seeds.astype(complex)
    alive = np.ones(z.shape, dtype=bool)
    for _ in range(SOLVE_NEWTON_STEPS):
        w = z.copy()
        dw = np.ones_like(z)
        with np.errstate(all="ignore"):
            for _ in range(k):
                dw = dw * g.derivative_array(w)
                w = g.eval_array(w)
            F = w - z
            step = F / (dw - 1.0)
            step = np.where(np.abs(step) > 1.0, step / np.abs(step), step)
        alive &= np.isfinite(step) & np.isfinite(z)
        z = np.where(alive, z - step, z)
    with np.errstate(all="ignore"):
        w = z.copy()
        for _ in range(k):
            w = g.eval_array(w)
        ok = alive & np.isfinite(z) & (chordal_array(w, z) <= CYCLE_CHECK_TOL)
    return z[ok]


def _same_cycle(a, b):
    if a.period != b.period:
        return False
    first = a.points[0]
    return any(chordal_distance(first, q) <= 1e-7 for q in b.points)


def _add_cycle(cycles, cyc):
    if not any(_same_cycle(cyc, c) for c in cycles):
        cycles.append(cyc)


def _cycle_through_infinity(f, max_period):
    w = f(INFINITY)
    for k in range(1, max_period + 1):
        if w.at_infinity:
            return k
        w = f(w)
    return None


def detect_cycles(f, max_period=SOLVE_MAX_PERIOD, seeds_per_axis=SOLVE_SEEDS_PER_AXIS, threads=1):
    """
    Attracting cycles via critical orbits plus low-period cycles via Newton.

    Returns:
        list of CycleInfo sorted by (period, first point); every cycle point
        satisfies δ(f^period(p), p) ≤ 1e-8.
    """
    cycles = []

    crits = critical_points(f)
    loops = pmap(lambda cp: _follow_to_loop(f, cp.location), crits, threads)
    for found in loops:
        if found is None:
            continue
        start, lag = found
        period = minimal_period(f, start, lag) or lag
        _add_cycle(cycles, make_cycle(f, start, period))

    k_inf = _cycle_through_infinity(f, max_period)
    if k_inf is not None:
        _add_cycle(cycles, make_cycle(f, INFINITY, k_inf))

    axis = np.linspace(-1.5, 1.5, seeds_per_axis)
    seeds = (axis[None, :] + 1j * axis[:, None]).ravel()
    inverted = f.conjugate_by_inversion()

    def solve(k):
        roots = list(_newton_periodic(f, k, seeds))
        with np.errstate(all="ignore"):
            roots += [1.0 / u if u != 0 else COMPLEX_INF for u in _newton_periodic(inverted, k, seeds)]
        return roots

    for k, roots in zip(range(1, max_period + 1), pmap(solve, range(1, max_period + 1), threads)):
        for z in cluster_points(roots, 1e-7):
            period = minimal_period(f, z, k)
            if period is None:
                continue
            _add_cycle(cycles, make_cycle(f, z, period))

    cycles.sort(key=lambda c: (c.period, point_sort_key(c.points[0])))
    logger.info(
        "cycles: %d found (%s)",
        len(cycles),
        ", ".join("%s/%d" % (c.cycle_class, c.period) for c in cycles) or "none",
    )
    return cycles


def attracting_cycles(cycles):
    return [c for c in cycles if c.is_attracting]


# =============================================================================
# SEMI-HYPERBOLICITY
# =============================================================================


def attracted_cycle(f, c, cycles, steps=CRITICAL_FOLLOW_STEPS, radius=ATTRACTION_RADIUS):
    """The attracting cycle whose points the orbit of c comes within `radius` of, if any."""
    targets = [(cyc, np.array([q.to_complex() for q in cyc.points])) for cyc in attracting_cycles(cycles)]
    if not targets:
        return None
    p = as_point(c)
    for _ in range(steps + 1):
        z = p.to_complex()
        for cyc, pts in targets:
            if np.min(chordal_array(z, pts)) <= radius:
                return cyc
        p = f(p)
    return None


def semi_hyperbolicity_verdict(
    f,
    cycles=None,
    rho_rec=RHO_REC,
    burn_in=OMEGA_BURN_IN,
    sample=OMEGA_SAMPLE,
    threads=1,
):
    """
    No parabolic cycles and non-recurrent critical points in J, numerically.

    A critical point whose orbit is not captured by an attracting cycle is
    treated as lying in J; its recurrence distance is δ(c, ω̂(c)).

        semi_hyperbolic      no parabolic suspect and every such distance > rho_rec
        not_semi_hyperbolic  parabolic suspect, or some distance ≤ 1e-6
        inconclusive         otherwise
    """
    if cycles is None:
        cycles = detect_cycles(f, threads=threads)

    def examine(cp):
        cyc = attracted_cycle(f, cp.location, cycles)
        if cyc is not None:
            return CriticalEvidence(cp.location, cp.multiplicity, in_julia=False, attracted_cycle=cyc)
        omega = omega_limit_estimate(f, cp.location, burn_in, sample)
        rec = min(chordal_distance(cp.location, w) for w in omega)
        logger.debug("critical point %r: recurrence distance %.3g", cp.location, rec)
        return CriticalEvidence(cp.location, cp.multiplicity, in_julia=True, recurrence_distance=rec)

    evidence = pmap(examine, critical_points(f), threads)
    parabolic = any(c.cycle_class == "parabolic_suspect" for c in cycles)
    neutral = any(c.cycle_class == "neutral_irrational_suspect" for c in cycles)
    distances = [e.recurrence_distance for e in evidence if e.in_julia]

    if parabolic or any(d <= RHO_RECURRENT for d in distances):
        verdict = "not_semi_hyperbolic"
    elif all(d > rho_rec for d in distances):
        verdict = "semi_hyperbolic"
    else:
        verdict = "inconclusive"

    logger.info("semi-hyperbolicity: %s (%d critical points in J)", verdict, len(distances))
    return SemiHypVerdict(
        verdict=verdict,
        evidence=evidence,
        parabolic_found=parabolic,
        neutral_found=neutral,
        rho_rec=rho_rec,
    )


def critical_values_forward(f, n, include_critical=True):
    """Forward critical orbit points f^j(c), 0 ≤ j ≤ n (j ≥ 1 unless include_critical)."""
    out = []
    for cp in critical_points(f):
        p = cp.location
        if include_critical:
            out.append(p)
        for _ in range(n):
            p = f(p)
            out.append(p)
    return out
