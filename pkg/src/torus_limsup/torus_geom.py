"""Exact measures of finite unions of sup-norm balls on the torus T^m.

Balls are closed; boundaries have measure zero so this never changes a
measure, only membership tests.  Exact computation covers m = 1 (endpoint
sweep) and m = 2 (vertical slabs at every distinct x-breakpoint, then a 1-D
sweep per slab).  Higher dimensions raise :class:`UnsupportedExact`.

Internally every endpoint is put over a common denominator so that sweeps
run on Python ints rather than Fractions.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor

from ._validation import as_fraction
from .arith import lcm
from .errors import DomainError, UnsupportedExact

EXACT_MAX_DIM = 2


def _mod1(x):
    return x - floor(x)


def circle_dist(a, b):
    """Distance between ``a`` and ``b`` on R/Z."""
    delta = _mod1(a - b)
    return min(delta, 1 - delta)


@dataclass(frozen=True)
class TorusBall:
    """Closed sup-norm ball on T^m; centre entries are reduced into [0, 1)."""

    center: tuple
    radius: Fraction

    def __post_init__(self):
        center = tuple(_mod1(as_fraction(c, "center")) for c in self.center)
        if not center:
            raise DomainError("ball centre must have at least one coordinate")
        radius = as_fraction(self.radius, "radius")
        if radius < 0:
            raise DomainError(f"radius must be nonnegative, got {radius}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", radius)

    @property
    def m(self):
        return len(self.center)

    def dilate(self, factor):
        return TorusBall(self.center, self.radius * as_fraction(factor, "factor"))

    def contains(self, point):
        return all(circle_dist(c, as_fraction(x)) <= self.radius
                   for c, x in zip(self.center, point))

    def sup_dist(self, other):
        return max(circle_dist(a, b) for a, b in zip(self.center, other.center))


@dataclass(frozen=True)
class TorusRegion:
    """Finite union of :class:`TorusBall` on a common T^m."""

    balls: tuple = ()
    m: int = field(default=None)

    def __post_init__(self):
        balls = tuple(b if isinstance(b, TorusBall) else TorusBall(*b) for b in self.balls)
        m = self.m
        if m is None:
            if not balls:
                raise DomainError("an empty region needs an explicit dimension m")
            m = balls[0].m
        if any(b.m != m for b in balls):
            raise DomainError("all balls in a region must share the same dimension")
        object.__setattr__(self, "balls", balls)
        object.__setattr__(self, "m", m)

    @classmethod
    def full(cls, m):
        """The whole torus, as a single ball of radius 1/2."""
        return cls((TorusBall((0,) * m, Fraction(1, 2)),), m)

    def __len__(self):
        return len(self.balls)

    def __or__(self, other):
        _check_same_dim(self, other)
        return TorusRegion(self.balls + other.balls, self.m)

    def contains(self, point):
        return any(b.contains(point) for b in self.balls)


def _check_same_dim(r1, r2):
    if r1.m != r2.m:
        raise DomainError(f"dimension mismatch: T^{r1.m} vs T^{r2.m}")


def _check_exact(m):
    if m > EXACT_MAX_DIM:
        raise UnsupportedExact(
            f"exact measure is implemented for m <= {EXACT_MAX_DIM}; "
            f"got m = {m}, use the Monte Carlo estimators"
        )


def _common_denominator(*regions):
    dens = [1]
    for region in regions:
        for b in region.balls:
            dens.append(b.radius.denominator)
            dens.extend(c.denominator for c in b.center)
    return lcm(*set(dens))


def _arcs(center, radius, den):
    """Integer arcs in [0, den) covering the closed interval center +- radius."""
    c = center.numerator * (den // center.denominator)
    r = radius.numerator * (den // radius.denominator)
    if 2 * r >= den:
        return ((0, den),)
    lo, hi = c - r, c + r
    if lo < 0:
        return ((lo + den, den), (0, hi))
    if hi > den:
        return ((lo, den), (0, hi - den))
    return ((lo, hi),)


def _boxes(region, den):
    """Axis-parallel integer boxes in [0, den)^m whose union is the region."""
    out = []
    for b in region.balls:
        per_coord = [_arcs(c, b.radius, den) for c in b.center]
        if region.m == 1:
            out.extend((a,) for a in per_coord[0])
        else:
            out.extend((a, y) for a in per_coord[0] for y in per_coord[1])
    return out


def _merge(intervals):
    """Sort and merge integer intervals into a disjoint list."""
    merged = []
    for lo, hi in sorted(intervals):
        if hi <= lo:
            continue
        if merged and lo <= merged[-1][1]:
            if hi > merged[-1][1]:
                merged[-1][1] = hi
        else:
            merged.append([lo, hi])
    return merged


def _length(merged):
    return sum(hi - lo for lo, hi in merged)


def _overlap(a, b):
    """Total overlap length of two merged interval lists (two-pointer walk)."""
    i = j = total = 0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if hi > lo:
            total += hi - lo
        if a[i][1] < b[j][1]:
            i += 1
        else:
            j += 1
    return total


def _slabs(boxes_a, boxes_b=None):
    """Yield ``(width, merged_a, merged_b)`` per vertical slab for m = 2."""
    xs = sorted({x for box in boxes_a for x in box[0]}
                | ({x for box in boxes_b for x in box[0]} if boxes_b is not None else set()))
    for x0, x1 in zip(xs, xs[1:]):
        ya = _merge(box[1] for box in boxes_a if box[0][0] <= x0 and box[0][1] >= x1)
        if boxes_b is None:
            yield x1 - x0, ya, None
        else:
            if not ya:
                continue
            yb = _merge(box[1] for box in boxes_b if box[0][0] <= x0 and box[0][1] >= x1)
            yield x1 - x0, ya, yb


def region_measure(region):
    """Exact Lebesgue measure of a region, wrap-around included.

    >>> from fractions import Fraction as F
    >>> r = TorusRegion([TorusBall((0,), F(1, 10)), TorusBall((F(3, 20),), F(1, 10))])
    >>> region_measure(r)
    Fraction(7, 20)
    """
    _check_exact(region.m)
    if not region.balls:
        return Fraction(0)
    den = _common_denominator(region)
    boxes = _boxes(region, den)
    if region.m == 1:
        total = _length(_merge(box[0] for box in boxes))
    else:
        total = sum(w * _length(ya) for w, ya, _ in _slabs(boxes))
    return Fraction(total, den**region.m)


def region_intersect_measure(r1, r2):
    """Exact measure of the intersection of two regions on the same torus."""
    _check_same_dim(r1, r2)
    _check_exact(r1.m)
    if not r1.balls or not r2.balls:
        return Fraction(0)
    den = _common_denominator(r1, r2)
    b1, b2 = _boxes(r1, den), _boxes(r2, den)
    if r1.m == 1:
        total = _overlap(_merge(b[0] for b in b1), _merge(b[0] for b in b2))
    else:
        total = sum(w * _overlap(ya, yb) for w, ya, yb in _slabs(b1, b2))
    return Fraction(total, den**r1.m)


def balls_disjoint(b1, b2):
    """True when two closed balls share no point."""
    return b1.sup_dist(b2) > b1.radius + b2.radius


def is_pairwise_disjoint(region):
    balls = region.balls
    return all(balls_disjoint(balls[i], balls[j])
               for i in range(len(balls)) for j in range(i + 1, len(balls)))


def vitali_refine(region):
    """Disjoint subcollection whose threefold dilates cover the region.

    Greedy selection, largest radius first, ties broken by the
    lexicographic order of the centres, so the output is deterministic.
    """
    order = sorted(region.balls, key=lambda b: (-b.radius, b.center))
    kept = []
    for ball in order:
        if all(balls_disjoint(ball, k) for k in kept):
            kept.append(ball)
    return TorusRegion(tuple(kept), region.m)


def dilate_region(region, factor):
    """Concentric dilation by any positive factor (no upper limit)."""
    factor = as_fraction(factor, "factor")
    if factor <= 0:
        raise DomainError("dilation factor must be positive")
    return TorusRegion(tuple(b.dilate(factor) for b in region.balls), region.m)


def scale_region(region, factor):
    """Concentric contraction of every ball by ``factor`` in (0, 1]."""
    factor = as_fraction(factor, "factor")
    if not 0 < factor <= 1:
        raise DomainError(f"contraction factor must lie in (0, 1], got {factor}")
    return dilate_region(region, factor)


def covers(cover, region):
    """Exact check that ``region`` is contained in ``cover`` up to a null set."""
    return region_measure(cover | region) == region_measure(cover)
