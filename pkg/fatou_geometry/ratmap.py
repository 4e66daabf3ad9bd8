"""
Rational Maps

Rational maps as data: chart-correct evaluation, derivatives, critical points
and preimages, plus the polynomial root finder everything else relies on.

A map f = p/q of degree d is stored through its homogeneous form: in the
standard chart u = z the chart polynomials are p and q padded to d + 1
coefficients, in the inverted chart u = 1/z they are the same coefficient
vectors reversed. Points with |z| ≤ 1 use the standard chart, all others the
inverted one, so no evaluation ever sees a coordinate larger than 1.
"""

import logging
import re
from typing import NamedTuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from .data import (
    ABERTH_MAX_ITER,
    ABERTH_RETRIES,
    ABERTH_TOL,
    COEFF_TRIM_TOL,
    COPRIME_TOL,
    NEWTON_POLISH_STEPS,
    PRESETS,
    RABBIT_CENTER_POLY,
    ROOT_CLUSTER_RADIUS,
    ROOT_RESIDUAL_TOL,
)
from .errors import InvalidMap, MapSyntaxError, NonConvergence
from .sphere import INFINITY, ChartData, SpherePoint, as_point

logger = logging.getLogger(__name__)


# =============================================================================
# POLYNOMIALS
# =============================================================================


class Polynomial:
    """Complex polynomial, ascending coefficients, trailing zeros trimmed."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex)).copy()
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else c[:1]
        c.setflags(write=False)
        self.coeffs = c

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def is_zero(self):
        return not np.any(self.coeffs)

    def norm(self):
        return float(np.sum(np.abs(self.coeffs)))

    def derivative(self):
        if self.degree == 0:
            return Polynomial([0])
        return Polynomial(npoly.polyder(self.coeffs))

    def padded(self, length):
        out = np.zeros(length, dtype=complex)
        out[: len(self.coeffs)] = self.coeffs
        return out

    def __call__(self, z):
        return npoly.polyval(z, self.coeffs)

    def __eq__(self, other):
        return isinstance(other, Polynomial) and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None

    def __repr__(self):
        return "Polynomial(%s)" % list(self.coeffs)


class Root(NamedTuple):
    point: SpherePoint
    multiplicity: int


def horner(coeffs, z):
    acc = 0j
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def _trim_relative(coeffs, tol=COEFF_TRIM_TOL):
    """Drop leading (highest-order) coefficients negligible against the largest one."""
    coeffs = np.asarray(coeffs, dtype=complex)
    scale = np.max(np.abs(coeffs)) if coeffs.size else 0.0
    if scale == 0:
        return coeffs[:1]
    n = len(coeffs)
    while n > 1 and abs(coeffs[n - 1]) <= tol * scale:
        n -= 1
    return coeffs[:n]


def _aberth(a, rotation):
    """Simultaneous Aberth iteration on the monic polynomial with ascending coeffs `a`."""
    n = len(a) - 1
    da = npoly.polyder(a)
    radius = abs(a[0]) ** (1.0 / n) if a[0] != 0 else 1.0
    radius = min(max(radius, 1e-3), 1.0 + float(np.max(np.abs(a[:-1]))))
    angles = 2 * np.pi * np.arange(n) / n + 0.4 + rotation
    z = radius * np.exp(1j * angles)

    for _ in range(ABERTH_MAX_ITER):
        with np.errstate(all="ignore"):
            pz = npoly.polyval(z, a)
            dpz = npoly.polyval(z, da)
            ratio = np.where(dpz == 0, pz / 1e-300, pz / dpz)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            w = ratio / (1.0 - ratio * inv.sum(axis=1))
        if not np.all(np.isfinite(w)):
            return z, False
        z = z - w
        if np.max(np.abs(w) / (1.0 + np.abs(z))) <= ABERTH_TOL:
            return z, True

    return z, False


def _polish(a, z):
    da = npoly.polyder(a)
    for _ in range(NEWTON_POLISH_STEPS):
        with np.errstate(all="ignore"):
            pz = npoly.polyval(z, a)
            dpz = npoly.polyval(z, da)
            step = np.where(dpz == 0, 0.0, pz / dpz)
            cand = z - step
            better = np.abs(npoly.polyval(cand, a)) < np.abs(pz)
        z = np.where(better & np.isfinite(cand), cand, z)
    return z


def _quadratic(a):
    """Roots of the monic a0 + a1 z + z^2 without cancellation."""
    c, b = complex(a[0]), complex(a[1])
    disc = np.sqrt(b * b - 4 * c)
    q = -0.5 * (b + disc if (b.conjugate() * disc).real >= 0 else b - disc)
    if q == 0:
        return np.array([0j, 0j])
    return np.array([q, c / q])


def _residual_ok(a, z):
    scale = npoly.polyval(np.abs(z), np.abs(a))
    return np.abs(npoly.polyval(z, a)) <= ROOT_RESIDUAL_TOL * np.maximum(scale, 1e-300)


def _cluster(z):
    """Merge roots within the cluster radius; deterministic order."""
    z = np.asarray(z, dtype=complex)
    order = np.lexsort((z.imag, z.real))
    z = z[order]
    used = np.zeros(len(z), dtype=bool)
    roots = []
    for i in range(len(z)):
        if used[i]:
            continue
        members = [i]
        used[i] = True
        frontier = [i]
        while frontier:
            j = frontier.pop()
            tol = ROOT_CLUSTER_RADIUS * max(1.0, abs(z[j]))
            near = np.flatnonzero(~used & (np.abs(z - z[j]) <= tol))
            used[near] = True
            members.extend(near.tolist())
            frontier.extend(near.tolist())
        roots.append(Root(SpherePoint(complex(np.mean(z[members]))), len(members)))

    roots.sort(key=lambda r: (round(r.point.value.real, 9), round(r.point.value.imag, 9)))
    return roots


def poly_roots(P):
    """
    All roots of a polynomial with multiplicities.

    Aberth iteration from a few rotated starting circles, then the companion
    matrix if all of them fail; every root is Newton-polished and must meet the
    residual bound |P(z)| ≤ 1e-10 · Σ|a_k||z|^k. Roots closer than 1e-7
    (relative to max(1, |z|)) are merged.

    Args:
        P: a `Polynomial` (or ascending coefficient sequence) of degree ≥ 1.

    Returns:
        list of `Root(point, multiplicity)`; multiplicities sum to deg P.

    Raises:
        NonConvergence: no strategy produced roots meeting the residual bound.
    """
    if not isinstance(P, Polynomial):
        P = Polynomial(P)
    if P.degree < 1:
        raise InvalidMap("poly_roots needs a polynomial of degree >= 1")

    c = P.coeffs
    zeros = int(np.flatnonzero(c)[0])
    core = c[zeros:] / c[-1]
    n = len(core) - 1

    if n == 0:
        found = np.zeros(0, dtype=complex)
    elif n == 1:
        found = np.array([-core[0]])
    elif n == 2:
        found = _polish(core, _quadratic(core))
    else:
        found = None
        for attempt in range(ABERTH_RETRIES):
            # multiple roots converge linearly, so an unconverged run still counts if the residual test passes
            z, _ = _aberth(core, rotation=attempt * 0.7)
            z = _polish(core, z)
            if np.all(np.isfinite(z)) and np.all(_residual_ok(core, z)):
                found = z
                break
            logger.debug("aberth attempt %d failed (degree %d)", attempt, n)

        if found is None:
            z = _polish(core, npoly.polyroots(core).astype(complex))
            if not (np.all(np.isfinite(z)) and np.all(_residual_ok(core, z))):
                raise NonConvergence("root finding failed for a degree-%d polynomial" % n)
            logger.debug("companion fallback used (degree %d)", n)
            found = z

    all_roots = np.concatenate([np.zeros(zeros, dtype=complex), found])
    return _cluster(all_roots)


def expand_roots(roots):
    return [r.point for r in roots for _ in range(r.multiplicity)]


# =============================================================================
# RATIONAL MAPS
# =============================================================================


class CriticalPoint(NamedTuple):
    location: SpherePoint
    multiplicity: int

    @property
    def local_degree(self):
        return self.multiplicity + 1


class RationalMap:
    """
    f = p/q, degree d = max(deg p, deg q) ≥ 2, numerically coprime.

    Immutable after construction. Calling the map evaluates it on a point of
    the sphere; `eval_array` evaluates a complex ndarray (infinite entries stand
    for ∞).
    """

    def __init__(self, num, den=(1,), name=None):
        self.num = num if isinstance(num, Polynomial) else Polynomial(num)
        self.den = den if isinstance(den, Polynomial) else Polynomial(den)
        self.name = name

        if self.den.is_zero():
            raise InvalidMap("denominator is the zero polynomial")
        if self.num.is_zero():
            raise InvalidMap("numerator is the zero polynomial")

        self.degree = max(self.num.degree, self.den.degree)
        if self.degree < 2:
            raise InvalidMap("degree must be at least 2 (got %d)" % self.degree)

        self._check_coprime()

        d1 = self.degree + 1
        p = self.num.padded(d1)
        q = self.den.padded(d1)
        self._std = (p, q, npoly.polyder(p), npoly.polyder(q))
        self._inv = (p[::-1].copy(), q[::-1].copy())
        self._inv = self._inv + (npoly.polyder(self._inv[0]), npoly.polyder(self._inv[1]))
        self._std_list = tuple([complex(c) for c in a] for a in self._std)
        self._inv_list = tuple([complex(c) for c in a] for a in self._inv)

    def _check_coprime(self):
        if self.num.degree < 1 or self.den.degree < 1:
            return
        pr = np.array([r.point.value for r in poly_roots(self.num)])
        qr = np.array([r.point.value for r in poly_roots(self.den)])
        gap = np.min(np.abs(pr[:, None] - qr[None, :]))
        if gap < COPRIME_TOL:
            raise InvalidMap("numerator and denominator share a root (gap %.3g)" % gap)

    # -------------------------------------------------------------------------
    # construction helpers
    # -------------------------------------------------------------------------

    def conjugate_by_inversion(self):
        """f̃(w) = 1/f(1/w): swaps the roles of the two charts."""
        p, q = self._std[0], self._std[1]
        return RationalMap(q[::-1], p[::-1], name=(self.name + "~") if self.name else None)

    def compose(self, inner):
        """Coefficient form of self ∘ inner. Only meant for low degrees."""
        P_in, Q_in = inner.num.padded(inner.degree + 1), inner.den.padded(inner.degree + 1)
        d = self.degree

        def homogeneous(coeffs):
            total = np.zeros(1, dtype=complex)
            for k, a in enumerate(coeffs):
                if a == 0:
                    continue
                term = npoly.polymul(npoly.polypow(P_in, k), npoly.polypow(Q_in, d - k))
                total = npoly.polyadd(total, a * term)
            return total

        return RationalMap(homogeneous(self._std[0]), homogeneous(self._std[1]))

    # -------------------------------------------------------------------------
    # evaluation
    # -------------------------------------------------------------------------

    def chart_polynomials(self, inverted):
        """(P, Q, P', Q') coefficient lists of one chart."""
        return self._inv_list if inverted else self._std_list

    def chart_data(self, z):
        z = as_point(z)
        if z.at_infinity or abs(z.value) > 1.0:
            u = 0j if z.at_infinity else 1.0 / z.value
            p, q, dp, dq = self._inv_list
            inverted = True
        else:
            u = z.value
            p, q, dp, dq = self._std_list
            inverted = False
        return ChartData(inverted, u, horner(p, u), horner(q, u), horner(dp, u), horner(dq, u))

    def __call__(self, z):
        z = as_point(z)
        if z.at_infinity or abs(z.value) > 1.0:
            u = 0j if z.at_infinity else 1.0 / z.value
            p, q = self._inv_list[0], self._inv_list[1]
        else:
            u = z.value
            p, q = self._std_list[0], self._std_list[1]
        Q = horner(q, u)
        if Q == 0:
            return INFINITY
        return SpherePoint(horner(p, u) / Q)

    def eval_array(self, z):
        z = np.asarray(z, dtype=complex)
        P = np.empty(z.shape, dtype=complex)
        Q = np.empty(z.shape, dtype=complex)
        with np.errstate(all="ignore"):
            std = np.abs(z) <= 1.0
            inv = ~std
            P[std] = npoly.polyval(z[std], self._std[0])
            Q[std] = npoly.polyval(z[std], self._std[1])
            zi = z[inv]
            u = np.where(np.isinf(zi), 0.0, 1.0 / np.where(np.isinf(zi), 1.0, zi))
            P[inv] = npoly.polyval(u, self._inv[0])
            Q[inv] = npoly.polyval(u, self._inv[1])
            out = P / Q
        out[(Q == 0) | ~np.isfinite(out)] = complex(np.inf, 0.0)
        return out

    def derivative(self, z):
        """Euclidean f'(z) at a finite, non-pole point."""
        z = complex(z)
        p, q, dp, dq = self._std_list
        qz = horner(q, z)
        return (horner(dp, z) * qz - horner(p, z) * horner(dq, z)) / (qz * qz)

    def derivative_array(self, z):
        p, q, dp, dq = self._std
        with np.errstate(all="ignore"):
            qz = npoly.polyval(z, q)
            return (npoly.polyval(z, dp) * qz - npoly.polyval(z, p) * npoly.polyval(z, dq)) / (qz * qz)

    def local_derivative(self, z):
        """
        Derivative of f read in the charts of z and of f(z) (dv/du).

        The product of these along a cycle is the cycle's complex multiplier,
        independent of the charts used.
        """
        cd = self.chart_data(z)
        wronskian = cd.dP * cd.Q - cd.P * cd.dQ
        if abs(cd.P) <= abs(cd.Q):
            value = wronskian / (cd.Q * cd.Q)
        else:
            value = -wronskian / (cd.P * cd.P)
        return value

    def is_polynomial(self):
        return self.den.degree == 0

    def coefficients(self):
        return {"num": list(self.num.coeffs), "den": list(self.den.coeffs)}

    def __repr__(self):
        return "RationalMap(num=%s, den=%s)" % (list(self.num.coeffs), list(self.den.coeffs))


def evaluate(f, z):
    return f(z)


def critical_points(f):
    """
    Critical points with multiplicity (order of vanishing of f').

    Finite ones are the roots of W = p'q - pq'; the multiplicity at ∞ is the
    order of vanishing at w = 0 of the same Wronskian in the inverted chart.
    """
    p, q = f.num.coeffs, f.den.coeffs
    W = npoly.polysub(npoly.polymul(npoly.polyder(p), q), npoly.polymul(p, npoly.polyder(q)))
    W = _trim_relative(W)

    points = []
    if len(W) > 1 and np.any(W[1:]):
        points.extend(CriticalPoint(r.point, r.multiplicity) for r in poly_roots(Polynomial(W)))

    ip, iq, idp, idq = f._inv
    W_inf = npoly.polysub(npoly.polymul(idp, iq), npoly.polymul(ip, idq))
    scale = np.max(np.abs(W_inf))
    order = 0
    while order < len(W_inf) and abs(W_inf[order]) <= COEFF_TRIM_TOL * scale:
        order += 1

    expected = 2 * f.degree - 2
    finite_total = sum(c.multiplicity for c in points)
    if finite_total + order != expected:
        logger.warning(
            "critical multiplicity mismatch (finite %d, at inf %d, expected %d); using degree deficiency",
            finite_total,
            order,
            expected,
        )
        order = expected - finite_total
    if order > 0:
        points.append(CriticalPoint(INFINITY, order))

    return points


def preimages(f, w):
    """
    The d solutions of f(z) = w, repeated by multiplicity.

    Solved as roots of p - w q (scaled to p/w - q when |w| > 1). A degree drop
    of that polynomial below d means the missing solutions sit at ∞.
    """
    w = as_point(w)
    d = f.degree
    p = f.num.padded(d + 1)
    q = f.den.padded(d + 1)

    if w.at_infinity:
        R = f.den.coeffs
        n_inf = d - f.den.degree
    else:
        if abs(w.value) <= 1.0:
            R = p - w.value * q
        else:
            R = p / w.value - q
        R = _trim_relative(R)
        n_inf = d - (len(R) - 1)

    out = []
    if len(R) > 1:
        out.extend(expand_roots(poly_roots(Polynomial(R))))
    out.extend([INFINITY] * n_inf)
    return out


def fixed_points(f):
    """Roots of p - z q together with ∞ when f(∞) = ∞."""
    d = f.degree
    z_q = np.concatenate([[0], f.den.padded(d + 1)])
    R = _trim_relative(npoly.polysub(f.num.padded(d + 2), z_q))
    out = []
    if len(R) > 1:
        out.extend(r.point for r in poly_roots(Polynomial(R)))
    if f(INFINITY).at_infinity:
        out.append(INFINITY)
    return out


# =============================================================================
# TEXT FORMAT AND PRESETS
# =============================================================================

_LITERAL_RE = re.compile(r"^[0-9eE.+\-ij]+$")


def parse_complex(token):
    """Parses `x`, `x+yi`, `x-yi`, `yi`, `i`, `-i` (j is accepted for i)."""
    text = token.replace(" ", "").replace("\t", "")
    if not text or not _LITERAL_RE.match(text):
        raise MapSyntaxError("not a complex literal: %r" % token)
    try:
        value = complex(text.replace("i", "j"))
    except ValueError:
        raise MapSyntaxError("not a complex literal: %r" % token) from None
    return value


def parse_map(text):
    """
    Parses `num = a0, a1, ...; den = b0, ...` (ascending coefficients).

    `den` may be omitted (polynomial map). Raises MapSyntaxError on malformed
    text and InvalidMap when the coefficients do not define a valid map.
    """
    parts = {}
    for chunk in filter(None, (c.strip() for c in text.split(";"))):
        key, sep, value = chunk.partition("=")
        key = key.strip()
        if not sep or key not in ("num", "den"):
            raise MapSyntaxError("expected `num = ...` or `den = ...`, got %r" % chunk)
        if key in parts:
            raise MapSyntaxError("duplicate %r section" % key)
        tokens = [t for t in value.split(",")]
        if not tokens or any(not t.strip() for t in tokens):
            raise MapSyntaxError("empty coefficient in %r" % chunk)
        parts[key] = [parse_complex(t) for t in tokens]

    if "num" not in parts:
        raise MapSyntaxError("missing `num = ...`")
    return RationalMap(parts["num"], parts.get("den", [1]))


def rabbit_parameter():
    """The center c3 of the period-3 hyperbolic component with Im c3 > 0."""
    roots = [r.point.value for r in poly_roots(Polynomial(RABBIT_CENTER_POLY))]
    return max(roots, key=lambda c: c.imag)


def preset_map(name):
    if name not in PRESETS:
        raise InvalidMap("unknown preset %r (known: %s)" % (name, ", ".join(sorted(PRESETS))))
    entry = PRESETS[name]
    num = entry["num"]
    if num is None:
        num = [rabbit_parameter(), 0, 1]
    return RationalMap(num, entry["den"], name=name)


def preset_catalog():
    """Name → (formula, map) for every preset, in catalog order."""
    return {name: (entry["formula"], preset_map(name)) for name, entry in PRESETS.items()}


def map_to_text(f):
    def fmt(c):
        c = complex(c)
        if c.imag == 0:
            return repr(c.real)
        return "%r%+ri" % (c.real, c.imag)

    return "num = %s; den = %s" % (
        ", ".join(fmt(c) for c in f.num.coeffs),
        ", ".join(fmt(c) for c in f.den.coeffs),
    )
