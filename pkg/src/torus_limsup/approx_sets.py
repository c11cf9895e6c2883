"""Approximation sets A(q, r) = {X in T^{nm} : qX in B(0, r) + P(q)}.

Here ``X`` is an n-by-m matrix, ``qX`` the row vector of length m, and P(q)
the lift of P(gcd q) to R^m.  Since P(d) lives in (R/dZ)^m, qX is reduced
modulo d, not modulo 1.  The map X -> q'X (q' the primitive part) is
measure preserving, which turns every measure question into one about the
1-by-m region with balls of radius r/d centred at p/d.
"""
from dataclasses import dataclass
from fractions import Fraction
from math import ceil

import numpy as np

from ._validation import as_fraction, check_dimension, check_int_vector, check_positive_int
from .arith import primitive_part
from .errors import DomainError, UnsupportedExact
from .targets import coordinate_sets, enumerate_targets, lift_gap
from .torus_geom import (
    EXACT_MAX_DIM, TorusBall, TorusRegion, region_intersect_measure, region_measure,
)

PARALLEL, INDEPENDENT, FALLBACK = "parallel", "independent", "overlapping_fallback"


@dataclass(frozen=True)
class ApproxSet:
    q: tuple
    radius: Fraction
    family: object

    def __post_init__(self):
        q = check_int_vector(self.q, "q", allow_zero=False)
        r = as_fraction(self.radius, "radius")
        if r < 0:
            raise DomainError("radius must be nonnegative")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "radius", r)

    @property
    def n(self):
        return len(self.q)

    @property
    def m(self):
        return self.family.m

    @property
    def d(self):
        return primitive_part(self.q)[0]

    @property
    def qprime(self):
        return primitive_part(self.q)[1]


def _as_matrix(X, n, m):
    """Accept X as n rows of m entries or as a flat row-major list."""
    rows = list(X)
    if len(rows) == n and all(isinstance(r, (list, tuple)) for r in rows):
        mat = [list(r) for r in rows]
    elif len(rows) == n * m:
        mat = [rows[i * m:(i + 1) * m] for i in range(n)]
    else:
        raise DomainError(f"X must be {n}x{m} (or flat of length {n * m})")
    if any(len(r) != m for r in mat):
        raise DomainError(f"X rows must have {m} entries")
    return mat


def _periodic_dist(x, p, period):
    delta = (x - p) % period
    return min(delta, period - delta)


def contains(A, X):
    """Exact membership test for the closed set A (rational X stays exact).

    >>> from .targets import TargetFamily
    >>> contains(ApproxSet((2,), 0, TargetFamily("inhomogeneous", shift=("1/4",))), [["5/8"]])
    True
    """
    n, m, d = A.n, A.m, A.d
    mat = _as_matrix(X, n, m)
    conv = (lambda v: v) if any(isinstance(v, float) for r in mat for v in r) else as_fraction
    mat = [[conv(v) for v in r] for r in mat]
    y = [sum(A.q[i] * mat[i][j] for i in range(n)) for j in range(m)]
    return any(max(_periodic_dist(y[j], p[j], d) for j in range(m)) <= A.radius
               for p in enumerate_targets(A.family, d))


def to_one_by_m(A):
    """The 1-by-m region on T^m: balls of radius r/d at p/d, p in P(d)."""
    d = A.d
    rad = A.radius / d
    balls = tuple(TorusBall(tuple(c / d for c in p), rad) for p in enumerate_targets(A.family, d))
    return TorusRegion(balls, A.m)


def eq11_holds(A):
    """True when r is at most half the minimal gap of the lift of P(d)."""
    return 2 * A.radius <= lift_gap(enumerate_targets(A.family, A.d), A.d)


def disjoint_formula(A):
    """#P(d) (2r/d)^m, the measure whenever the target balls are disjoint."""
    return len(enumerate_targets(A.family, A.d)) * (2 * A.radius / A.d) ** A.m


def set_measure(A):
    """Exact Lebesgue measure of A.

    For m <= 2 the reduced region is measured directly; for larger m the
    disjoint-ball formula is returned when it is valid, otherwise
    :class:`UnsupportedExact` is raised.
    """
    if A.radius == 0:
        return Fraction(0)
    if A.m <= EXACT_MAX_DIM:
        return region_measure(to_one_by_m(A))
    if eq11_holds(A):
        return disjoint_formula(A)
    raise UnsupportedExact(f"overlapping target balls with m = {A.m}; use Monte Carlo")


def pair_kind(A1, A2):
    return PARALLEL if A1.qprime == A2.qprime else INDEPENDENT


def pair_intersection_measure(A1, A2):
    """Exact measure of A1 and A2 together with the pair tag.

    Returns ``(None, "overlapping_fallback")`` for non-parallel pairs whose
    target balls overlap, since the product formula is then unjustified.
    """
    if A1.n != A2.n or A1.m != A2.m:
        raise DomainError("sets live on tori of different dimensions")
    if A1.family != A2.family:
        raise DomainError("sets must share the same target family")
    if pair_kind(A1, A2) == PARALLEL:
        if A1.m > EXACT_MAX_DIM:
            raise UnsupportedExact("parallel intersections need m <= 2")
        return region_intersect_measure(to_one_by_m(A1), to_one_by_m(A2)), PARALLEL
    if eq11_holds(A1) and eq11_holds(A2):
        return set_measure(A1) * set_measure(A2), INDEPENDENT
    return None, FALLBACK


# ---------------------------------------------------------------- equidistribution


def _as_shift(v, m):
    if isinstance(v, (list, tuple)):
        out = tuple(as_fraction(c, "shift") for c in v)
    else:
        out = (as_fraction(v, "shift"),)
    if len(out) != m:
        raise DomainError(f"shift needs {m} coordinates")
    return out


def grid_box_count(q, ell, v):
    """Number of p in {0..q-1} with p/q in [v, v + ell) on R/Z."""
    return ceil(q * (v + ell)) - ceil(q * v)


def equidist_discrepancy(q, m, ell, shifts):
    """max over shifts of |mu_q(V + v) - ell^m| for the half-open cube V of side ell.

    ``mu_q`` is the uniform probability on the grid (1/q) Z^m / Z^m.

    >>> equidist_discrepancy(4, 1, Fraction(3, 10), [0])
    Fraction(1, 5)
    """
    check_positive_int(q, "q")
    check_dimension(m)
    ell = as_fraction(ell, "ell")
    if not 0 < ell <= 1:
        raise DomainError("box side must lie in (0, 1]")
    worst = Fraction(0)
    for v in shifts:
        v = _as_shift(v, m)
        mass = Fraction(1)
        for c in v:
            mass *= Fraction(grid_box_count(q, ell, c), q)
        worst = max(worst, abs(mass - ell**m))
    return worst


def discrepancy_bound(q, m, ell):
    """(ell + 1/q)^m - ell^m; equals 1/q for m = 1 and 2 ell/q + 1/q^2 for m = 2."""
    ell = as_fraction(ell, "ell")
    return (ell + Fraction(1, q)) ** m - ell**m


# ---------------------------------------------------------------- vectorised membership


def membership_kernel(A):
    """Return a function mapping float samples of shape (N, n, m) to a bool mask."""
    d = A.d
    q = np.asarray(A.q, dtype=np.float64)
    r = float(A.radius)
    axes = coordinate_sets(A.family, d)
    if axes is not None:
        axes = [np.asarray(sorted(float(c) for c in ax)) for ax in axes]

        def kernel(X):
            y = np.mod(np.einsum("i,nij->nj", q, X), d)
            hit = np.ones(len(y), dtype=bool)
            for j, pts in enumerate(axes):
                hit &= _nearest_periodic(y[:, j], pts, d) <= r
            return hit
        return kernel

    pts = np.asarray([[float(c) for c in p] for p in enumerate_targets(A.family, d)])

    def kernel(X):
        y = np.mod(np.einsum("i,nij->nj", q, X), d)
        hit = np.zeros(len(y), dtype=bool)
        for p in pts:
            delta = np.abs(y - p)
            delta = np.minimum(delta, d - delta).max(axis=1)
            hit |= delta <= r
        return hit
    return kernel


def _nearest_periodic(vals, pts, period):
    """Distance from each value to the nearest sorted point on R/(period Z)."""
    idx = np.searchsorted(pts, vals)
    right = pts[idx % len(pts)]
    left = pts[idx - 1]
    dr = np.abs(right - vals)
    dl = np.abs(vals - left)
    dist = np.minimum(np.minimum(dr, period - dr), np.minimum(dl, period - dl))
    return dist


# ---------------------------------------------------------------- regularity


def box_measure(box):
    out = Fraction(1)
    for lo, hi in box:
        lo, hi = as_fraction(lo, "box"), as_fraction(hi, "box")
        if not 0 <= lo < hi <= 1:
            raise DomainError("box sides must satisfy 0 <= lo < hi <= 1")
        out *= hi - lo
    return out


def regularity_probe(A, box, samples=100_000, seed=0, workers=1):
    """Estimate Leb(A and U) / (Leb(A) Leb(U)) for a product box U in T^{nm}.

    ``box`` lists ``(lo, hi)`` for each of the nm coordinates (row-major).
    Returns ``(ratio, half_width)``; the full torus gives exactly ``(1, 0)``.
    """
    from .montecarlo import estimate_fraction

    if len(box) != A.n * A.m:
        raise DomainError(f"box needs {A.n * A.m} sides")
    vol = box_measure(box)
    mu = set_measure(A) if A.m <= EXACT_MAX_DIM or eq11_holds(A) else None
    if mu is None:
        raise UnsupportedExact("Leb(A) is needed exactly")
    if mu == 0:
        raise DomainError("A has measure zero")
    if vol == 1:
        return Fraction(1), 0.0
    kernel = membership_kernel(A)
    lows = np.array([float(lo) for lo, _ in box])
    widths = np.array([float(as_fraction(hi) - as_fraction(lo)) for lo, hi in box])

    def hits(u):
        X = (lows + widths * u).reshape(len(u), A.n, A.m)
        return kernel(X)

    est = estimate_fraction(hits, A.n * A.m, samples, seed, workers)
    return est.estimate / float(mu), est.half_width / float(mu)


def regularity_q0_search(family, n, r, box, d=1, cap=256, samples=20_000, seed=0):
    """Double |q'| along q' = (Q, 1, 0, ...) until the ratio reaches 1/3.

    Returns ``(Q0 or None, [(Q, ratio, half_width), ...])``.
    """
    if n < 2:
        raise DomainError("the search needs n >= 2")
    trail = []
    Q = 1
    while Q <= cap:
        qp = (Q, 1) + (0,) * (n - 2)
        A = ApproxSet(tuple(d * c for c in qp), r, family)
        ratio, hw = regularity_probe(A, box, samples, seed)
        trail.append((Q, float(ratio), hw))
        if ratio >= 1 / 3:
            return Q, trail
        Q *= 2
    return None, trail
