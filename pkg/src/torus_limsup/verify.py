"""Randomised property-check suites with exact (or pinned statistical) pass criteria.

Each suite draws its cases from ``random.Random(seed)`` and returns a
:class:`SuiteResult`.  The exact suites compare rationals, so a single
mismatch is a genuine failure.
"""
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .approx_sets import (
    ApproxSet, disjoint_formula, discrepancy_bound, eq11_holds, equidist_discrepancy,
    membership_kernel, set_measure, to_one_by_m,
)
from .arith import lcm, primitive_part
from .targets import TargetFamily, enumerate_targets, lift_gap
from .torus_geom import (
    TorusBall, TorusRegion, covers, dilate_region, is_pairwise_disjoint,
    region_intersect_measure, scale_region, vitali_refine,
)


@dataclass
class SuiteResult:
    name: str
    passed: int
    total: int
    label: str = "checks passed"
    failures: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.passed == self.total if "min_pass" not in self.extra else self.passed >= self.extra["min_pass"]

    def line(self):
        return f"{self.name}: {self.passed}/{self.total} {self.label}"

    def to_dict(self):
        return {"suite": self.name, "passed": self.passed, "total": self.total, "ok": self.ok,
                "failures": [str(f) for f in self.failures[:20]],
                **{k: v for k, v in self.extra.items()}}


def random_fraction(rng, lo=0, hi=1, max_den=64):
    den = rng.randint(2, max_den)
    return Fraction(rng.randint(lo * den, hi * den - 1), den)


# ---------------------------------------------------------------- oracle


def raster_measure(region, other=None):
    """Independent exact oracle: rasterise on the compressed breakpoint grid.

    All box edges are collected per axis; every cell of the resulting grid is
    either inside or outside each ball, so marking cells and summing their
    areas is exact.  Works for m in {1, 2}.
    """
    regions = [region] if other is None else [region, other]
    m = region.m
    edges = [set([Fraction(0), Fraction(1)]) for _ in range(m)]
    pieces = []
    for reg in regions:
        boxes = []
        for b in reg.balls:
            per = []
            for j, c in enumerate(b.center):
                if 2 * b.radius >= 1:
                    arcs = [(Fraction(0), Fraction(1))]
                else:
                    lo, hi = c - b.radius, c + b.radius
                    if lo < 0:
                        arcs = [(lo + 1, Fraction(1)), (Fraction(0), hi)]
                    elif hi > 1:
                        arcs = [(lo, Fraction(1)), (Fraction(0), hi - 1)]
                    else:
                        arcs = [(lo, hi)]
                for a in arcs:
                    edges[j].update(a)
                per.append(arcs)
            boxes.append(per)
        pieces.append(boxes)
    axes = [sorted(e) for e in edges]
    index = [{v: i for i, v in enumerate(ax)} for ax in axes]
    den = lcm(*{v.denominator for ax in axes for v in ax})
    widths = [np.array([int((b - a) * den) for a, b in zip(ax, ax[1:])], dtype=object) for ax in axes]
    masks = []
    for boxes in pieces:
        mask = np.zeros([len(ax) - 1 for ax in axes], dtype=bool)
        for per in boxes:
            if m == 1:
                for a, b in per[0]:
                    mask[index[0][a]:index[0][b]] = True
            else:
                for a, b in per[0]:
                    for c, e in per[1]:
                        mask[index[0][a]:index[0][b], index[1][c]:index[1][e]] = True
        masks.append(mask)
    mask = masks[0] if other is None else masks[0] & masks[1]
    if m == 1:
        total = int(sum(widths[0][mask]))
    else:
        total = int(sum(widths[0][i] * sum(widths[1][mask[i]]) for i in range(mask.shape[0])))
    return Fraction(total, den**m)


# ---------------------------------------------------------------- suites

MEASURE_FAMILIES = ("full_lattice", "reduced", "half_cube", "inhomogeneous")


def random_measure_case(rng):
    kind = rng.choice(MEASURE_FAMILIES)
    m = rng.choice((1, 2))
    d = rng.randint(1, 50)
    if kind == "inhomogeneous":
        fam = TargetFamily(kind, m=m, shift=tuple(random_fraction(rng, 0, 1, 12) for _ in range(m)))
    else:
        fam = TargetFamily(kind, m=m)
    n = rng.randint(1, 3)
    qp = _random_primitive(rng, n, 6)
    gap = lift_gap(enumerate_targets(fam, d), d)
    r = gap / 2 * Fraction(rng.randint(1, 24), 24)
    return ApproxSet(tuple(d * c for c in qp), r, fam)


def _random_primitive(rng, n, bound):
    while True:
        q = tuple(rng.randint(0, bound) for _ in range(n))
        if any(q) and primitive_part(q)[0] == 1:
            return q


def suite_measures(cases=100, seed=2024):
    """Disjoint-ball formula against set_measure and the raster oracle."""
    rng = random.Random(seed)
    passed, failures = 0, []
    for _ in range(cases):
        A = random_measure_case(rng)
        assert eq11_holds(A)
        got = set_measure(A)
        formula = disjoint_formula(A)
        oracle = raster_measure(to_one_by_m(A))
        if got == formula == oracle:
            passed += 1
        else:
            failures.append((A, got, formula, oracle))
    return SuiteResult("measures", passed, cases, "exact matches", failures)


def suite_independence(pairs=20, samples=200_000, seed=2024, z=4.0):
    """Monte Carlo check that independent pairs intersect in the product measure."""
    from .montecarlo import estimate_fraction

    rng = random.Random(seed)
    fam = TargetFamily("full_lattice")
    passed, failures, rows = 0, [], []
    for i in range(pairs):
        while True:
            q1 = tuple(rng.randint(0, 8) for _ in range(2))
            q2 = tuple(rng.randint(0, 8) for _ in range(2))
            if any(q1) and any(q2) and q1[0] * q2[1] != q1[1] * q2[0]:
                break
        A1 = ApproxSet(q1, Fraction(rng.randint(2, 10), 20), fam)
        A2 = ApproxSet(q2, Fraction(rng.randint(2, 10), 20), fam)
        exact = set_measure(A1) * set_measure(A2)
        k1, k2 = membership_kernel(A1), membership_kernel(A2)

        def hits(u):
            X = u.reshape(len(u), 2, 1)
            return k1(X) & k2(X)

        est = estimate_fraction(hits, 2, samples, seed * 1000 + i)
        p = float(exact)
        se = math.sqrt(p * (1 - p) / samples)
        ok = abs(est.estimate - p) <= z * se
        rows.append((q1, q2, str(exact), est.estimate, se))
        if ok:
            passed += 1
        else:
            failures.append(rows[-1])
    return SuiteResult("independence", passed, pairs, f"pairs within {z:g} standard errors",
                       failures, {"min_pass": pairs - 1, "rows": rows})


def suite_discrepancy(cases_m1=1000, cases_m2=300, seed=2024):
    """Grid discrepancy bounds 1/q (m = 1) and 2 ell/q + 1/q^2 (m = 2)."""
    rng = random.Random(seed)
    passed, failures = 0, []
    total = cases_m1 + cases_m2
    for i in range(total):
        m = 1 if i < cases_m1 else 2
        q = rng.randint(1, 1000)
        ell = random_fraction(rng, 0, 1, 200) or Fraction(1, 200)
        shifts = [tuple(random_fraction(rng, 0, 1, 500) for _ in range(m)) for _ in range(5)]
        disc = equidist_discrepancy(q, m, ell, shifts)
        bound = Fraction(1, q) if m == 1 else 2 * ell / q + Fraction(1, q * q)
        assert bound == discrepancy_bound(q, m, ell)
        if disc <= bound:
            passed += 1
        else:
            failures.append((q, m, ell, disc, bound))
    return SuiteResult("discrepancy", passed, total, "cases within bound", failures)


def random_region(rng, m, max_balls=12, max_den=40):
    k = rng.randint(1, max_balls)
    balls = []
    for _ in range(k):
        c = tuple(random_fraction(rng, 0, 1, max_den) for _ in range(m))
        balls.append(TorusBall(c, Fraction(rng.randint(1, 8), rng.randint(20, 80))))
    return TorusRegion(tuple(balls), m)


def suite_vitali(cases=200, seed=2024):
    """Greedy subcollection is disjoint and its threefold dilates cover the input."""
    rng = random.Random(seed)
    passed, failures = 0, []
    for _ in range(cases):
        reg = random_region(rng, rng.choice((1, 2)))
        out = vitali_refine(reg)
        ok = (set(out.balls) <= set(reg.balls) and is_pairwise_disjoint(out)
              and covers(dilate_region(out, 3), reg))
        if ok:
            passed += 1
        else:
            failures.append(reg)
    return SuiteResult("vitali", passed, cases, "refinements valid", failures)


def suite_dilation(cases=200, seed=2024):
    """Contracting disjoint-ball regions by s shrinks intersections by at least s^m."""
    rng = random.Random(seed)
    passed, failures = 0, []
    for _ in range(cases):
        m = rng.choice((1, 2))
        I = vitali_refine(random_region(rng, m))
        J = vitali_refine(random_region(rng, m))
        s = rng.choice((Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)))
        lhs = region_intersect_measure(scale_region(I, s), scale_region(J, s))
        rhs = s**m * region_intersect_measure(I, J)
        if lhs <= rhs:
            passed += 1
        else:
            failures.append((I, J, s, lhs, rhs))
    return SuiteResult("dilation", passed, cases, "inequalities hold", failures)


SUITES = {
    "measures": suite_measures,
    "independence": suite_independence,
    "discrepancy": suite_discrepancy,
    "vitali": suite_vitali,
    "dilation": suite_dilation,
}


def run_suites(names, seed=2024):
    if "all" in names:
        names = list(SUITES)
    return [SUITES[name](seed=seed) for name in names]
