"""
Derivative growth along critical orbits in J.

    σ_n = min over critical points c in J of |(fⁿ)'(f(c))|     (spherical)

The Collet-Eckmann slope is the least-squares slope of log σ_n against n;
the summability partial sums are Σ_{n≤k} σ_n^(-α) with α = 1/(1 + μ_max).
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .data import CRITICAL_HIT_TOL, MULTIPLICITY_CONVENTIONS, TREND_DECAY_RATIO
from .errors import ConfigError, CriticalOrbitHitsCritical, NoJuliaCriticalPoints
from .orbits import forward_orbit
from .parallel import pmap
from .ratmap import critical_points
from .sphere import chordal_distance

logger = logging.getLogger(__name__)


@dataclass
class SummabilityReport:
    sigma: list
    log_sigma: list
    ce_slope: float
    ce_residual: float
    alpha: float
    partial_sums: list
    mu_max: int
    trend: str
    multiplicity_convention: str = "order"
    alpha_overridden: bool = False
    critical_points: list = field(default_factory=list)

    def to_dict(self):
        return {
            "sigma": self.sigma,
            "log_sigma": self.log_sigma,
            "ce_slope": self.ce_slope,
            "ce_residual": self.ce_residual,
            "alpha": self.alpha,
            "alpha_overridden": self.alpha_overridden,
            "partial_sums": self.partial_sums,
            "mu_max": self.mu_max,
            "multiplicity_convention": self.multiplicity_convention,
            "trend": self.trend,
            "critical_points": self.critical_points,
        }


def julia_critical_points(verdict):
    points = [e for e in verdict.evidence if e.in_julia]
    if not points:
        raise NoJuliaCriticalPoints("no critical point lies in J; the summability condition is vacuous")
    return points


def _check_orbit_avoids_critical(f, c, orbit, tol=CRITICAL_HIT_TOL):
    crits = [cp.location for cp in critical_points(f)]
    for k, p in enumerate(orbit.points):
        for q in crits:
            if chordal_distance(p, q) <= tol:
                raise CriticalOrbitHitsCritical(
                    "f^%d(%r) lies within %.3g of the critical point %r" % (k + 1, c.to_complex(), tol, q.to_complex())
                )


def log_sigma_sequence(f, verdict, N, threads=1):
    """
    log σ_1..log σ_N, min-combined over the in-J critical points.

    Raises:
        NoJuliaCriticalPoints: the verdict puts no critical point in J.
        CriticalOrbitHitsCritical: some f^j(c), 1 ≤ j ≤ N, is within 1e-6 of
            a critical point.
    """
    if N < 1:
        raise ConfigError("summability N must be >= 1")
    in_j = julia_critical_points(verdict)

    def products(evidence):
        c = evidence.point
        orbit = forward_orbit(f, f(c), N)
        _check_orbit_avoids_critical(f, c, orbit)
        return orbit.log_products

    rows = pmap(products, in_j, threads)
    return np.min(np.vstack(rows), axis=0)


def sigma_sequence(f, verdict, N, threads=1):
    """σ_1..σ_N from the cumulative spherical derivatives along f(c), f²(c), ..."""
    with np.errstate(over="ignore"):
        return np.exp(log_sigma_sequence(f, verdict, N, threads))


def log_terms(log_sigma, alpha):
    """log σ_n^(-α); finite wherever log σ_n is."""
    return -alpha * np.asarray(log_sigma, dtype=float)


def partial_sums(sigma, alpha):
    with np.errstate(divide="ignore"):
        return partial_sums_from_logs(np.log(np.asarray(sigma, dtype=float)), alpha)


def partial_sums_from_logs(log_sigma, alpha):
    return np.cumsum(np.exp(log_terms(log_sigma, alpha)))


def classify_trend(logs):
    """
    Heuristic label from the last quartile of the summands, given as logs
    (log σ_n^(-α)): converging_trend when they decay geometrically (mean ratio
    < 0.9), diverging_trend when they never decrease, flat otherwise.    """
    logs = np.asarray(logs, dtype=float)
    tail = logs[-max(2, len(logs) // 4) :]
    if len(tail) < 2 or not np.all(np.isfinite(tail)):
        return "flat"
    steps = np.diff(tail)
    if np.all(steps >= 0.0):
        return "diverging_trend"
    if float(np.mean(steps)) < math.log(TREND_DECAY_RATIO):
        return "converging_trend"
    return "flat"


def ce_fit(log_sigma):
    """(slope, rms residual) of the least-squares line through (n, log σ_n)."""
    y = np.asarray(log_sigma, dtype=float)
    n = np.arange(1, len(y) + 1, dtype=float)
    if len(y) < 2:
        return float(y[0]) if len(y) else 0.0, 0.0
    slope, intercept = np.polyfit(n, y, 1)
    residual = math.sqrt(float(np.mean((y - (slope * n + intercept)) ** 2)))
    return float(slope), residual


def mu_max(verdict, convention="order"):
    if convention not in MULTIPLICITY_CONVENTIONS:
        raise ConfigError("multiplicity convention must be one of %s, got %r" % (MULTIPLICITY_CONVENTIONS, convention))
    orders = [e.multiplicity for e in julia_critical_points(verdict)]
    m = max(orders)
    return m + 1 if convention == "local_degree" else m


def summability_report(f, verdict, N, alpha_override=None, convention="order", threads=1):
    log_sigma = log_sigma_sequence(f, verdict, N, threads)
    mu = mu_max(verdict, convention)
    alpha = 1.0 / (1.0 + mu) if alpha_override is None else float(alpha_override)
    if alpha < 0:
        raise ConfigError("summability alpha must be >= 0")

    with np.errstate(over="ignore"):
        sigma = np.exp(log_sigma)
    slope, residual = ce_fit(log_sigma)
    report = SummabilityReport(
        sigma=sigma.tolist(),
        log_sigma=log_sigma.tolist(),
        ce_slope=slope,
        ce_residual=residual,
        alpha=alpha,
        partial_sums=partial_sums_from_logs(log_sigma, alpha).tolist(),
        mu_max=mu,
        trend=classify_trend(log_terms(log_sigma, alpha)),
        multiplicity_convention=convention,
        alpha_overridden=alpha_override is not None,
        critical_points=[e.point for e in julia_critical_points(verdict)],
    )
    logger.info("summability: alpha %.4g, CE slope %.4g, %s", alpha, slope, report.trend)
    return report
