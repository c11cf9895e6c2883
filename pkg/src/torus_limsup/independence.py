"""Stochastic-independence diagnostics for families of approximation sets.

Pair sums are always truncated at ``|q| <= H``; the reports say so.
"""
import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._validation import as_fraction, check_positive_int
from .approx_sets import (
    ApproxSet, eq11_holds, membership_kernel, pair_intersection_measure, set_measure,
    to_one_by_m,
)
from .arith import gcd_vec, primitive_part, rational_root_floor, int_root_exact
from .errors import DomainError
from .torus_geom import region_intersect_measure


def _fractions(measures):
    return [as_fraction(x, "measure") for x in measures]


def _check_matrix(measures, matrix):
    k = len(measures)
    if len(matrix) != k or any(len(row) != k for row in matrix):
        raise DomainError("intersection matrix must be square and match the measures")
    for i in range(k):
        if matrix[i][i] != measures[i]:
            raise DomainError(f"diagonal entry {i} differs from the measure")
        for j in range(i):
            if matrix[i][j] != matrix[j][i]:
                raise DomainError("intersection matrix must be symmetric")


def chung_erdos_bound(measures, intersections):
    """(sum mu)^2 / (sum of all pairwise intersection measures).

    >>> h = Fraction(1, 2)
    >>> chung_erdos_bound([h, h], [[h, h * h], [h * h, h]])
    Fraction(2, 3)
    """
    measures = _fractions(measures)
    matrix = [[as_fraction(x, "intersection") for x in row] for row in intersections]
    _check_matrix(measures, matrix)
    total = sum(measures, Fraction(0))
    pairs = sum((sum(row, Fraction(0)) for row in matrix), Fraction(0))
    if total <= 0 or pairs == 0:
        raise DomainError("need a positive measure sum")
    return total * total / pairs


@dataclass
class ErdosRenyiReport:
    ratios: dict
    C_min: object

    @property
    def limsup_lower_bound(self):
        return None if self.C_min is None else 1 / self.C_min


def erdos_renyi_constant(measures, intersections, D_grid):
    """Ratio of pair sum to squared measure sum over the first D sets, per D."""
    measures = _fractions(measures)
    matrix = [[as_fraction(x, "intersection") for x in row] for row in intersections]
    _check_matrix(measures, matrix)
    ratios = {}
    for D in D_grid:
        if not 1 <= D <= len(measures):
            raise DomainError(f"cutoff {D} outside 1..{len(measures)}")
        S = sum(measures[:D], Fraction(0))
        pair = sum((sum(row[:D], Fraction(0)) for row in matrix[:D]), Fraction(0))
        ratios[D] = pair / (S * S) if S else None
    finite = [r for r in ratios.values() if r is not None]
    return ErdosRenyiReport(ratios, min(finite) if finite else None)


# ---------------------------------------------------------------- QIA scan


@dataclass
class QiaReport:
    H: int
    D_grid: list
    rows: list = field(default_factory=list)
    truncated: bool = True
    mc_samples: int = 0
    seed: int = 0

    @property
    def C_min(self):
        vals = [r["ratio"] for r in self.rows if r["ratio"] is not None]
        return min(vals) if vals else None

    def to_dict(self):
        def enc(v):
            return None if v is None else (str(v) if isinstance(v, Fraction) else float(v))
        return {
            "H": self.H, "D_grid": list(self.D_grid), "truncated": self.truncated,
            "mc_samples": self.mc_samples, "seed": self.seed,
            "C_min": enc(self.C_min),
            "rows": [{k: (enc(v) if k not in ("D", "sets", "fallback_pairs") else v)
                      for k, v in row.items()} for row in self.rows],
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["D", "S", "nonpar", "par", "ratio"])
        for row in self.rows:
            w.writerow([row["D"]] + [("" if row[k] is None else str(row[k]))
                                     for k in ("S", "nonpar", "par", "ratio")])
        return buf.getvalue()


def _collect_sets(f, family, H, D):
    sets = []
    for q, v in f.support(1, H):
        if gcd_vec(q) <= D:
            sets.append(ApproxSet(q, v, family))
    return sets


def qia_scan(f, family, n, m, D, H, D_grid=None, mc_samples=20_000, seed=0):
    """Split the truncated pair sum into non-parallel and parallel parts.

    Non-parallel pairs whose balls are disjoint contribute the product of
    their measures.  Parallel pairs are intersected exactly on T^m.  Any
    remaining non-parallel pair is estimated by Monte Carlo and counted in
    ``fallback_pairs``; its row values then become floats.
    """
    check_positive_int(D, "D")
    check_positive_int(H, "H")
    if f.n != n or family.m != m:
        raise DomainError("n and m must match the function and the family")
    D_grid = sorted(set(D_grid or [D]))
    report = QiaReport(H, D_grid, mc_samples=mc_samples, seed=seed)
    all_sets = _collect_sets(f, family, H, max(D_grid))
    mu = {A.q: set_measure(A) for A in all_sets}
    good = {A.q: eq11_holds(A) for A in all_sets}
    masks = None
    for Dc in D_grid:
        sets = [A for A in all_sets if A.d <= Dc]
        if not sets:
            report.rows.append({"D": Dc, "sets": 0, "S": Fraction(0), "nonpar": Fraction(0),
                                "par": Fraction(0), "pair_sum": Fraction(0), "ratio": None,
                                "fallback_pairs": 0})
            continue
        groups = {}
        for A in sets:
            groups.setdefault(A.qprime, []).append(A)
        S = sum((mu[A.q] for A in sets), Fraction(0))
        par = Fraction(0)
        for members in groups.values():
            for A1 in members:
                for A2 in members:
                    par += pair_intersection_measure(A1, A2)[0]
        # non-parallel, both sides disjoint-ball: sum of products
        S_good = sum((mu[A.q] for A in sets if good[A.q]), Fraction(0))
        dir_good = sum((sum((mu[A.q] for A in g if good[A.q]), Fraction(0)) ** 2
                        for g in groups.values()), Fraction(0))
        nonpar = S_good * S_good - dir_good
        bad = [A for A in sets if not good[A.q]]
        fallback = 0
        if bad:
            if masks is None:
                masks = _sample_masks(all_sets, n, m, mc_samples, seed)
            est = 0.0
            bad_keys = {A.q for A in bad}
            for A1 in sets:
                for A2 in sets:
                    if A1.qprime == A2.qprime:
                        continue
                    if A1.q in bad_keys or A2.q in bad_keys:
                        fallback += 1
                        est += float(np.mean(masks[A1.q] & masks[A2.q]))
            nonpar = float(nonpar) + est
        pair_sum = nonpar + par
        report.rows.append({
            "D": Dc, "sets": len(sets), "S": S, "nonpar": nonpar, "par": par,
            "pair_sum": pair_sum, "ratio": (pair_sum / (S * S)) if S else None,
            "fallback_pairs": fallback,
        })
    return report


def _sample_masks(sets, n, m, samples, seed):
    from .montecarlo import uniform_samples

    X = uniform_samples(seed, samples, n * m).reshape(samples, n, m)
    return {A.q: membership_kernel(A)(X) for A in sets}


def _root_ceil(x, m):
    """A rational upper bound for the m-th root of x (exact when possible)."""
    exact = int_root_exact(x, m)
    if exact is not None:
        return exact
    return rational_root_floor(x, m) + Fraction(1, 10**30)


def parallel_bound_check(f, family, n, m, D, H):
    """Compare the parallel pair sum with twice the 1-by-m Psi intersection sum.

    Psi(k) is the class aggregate over ``|q| <= H``.  Returns
    ``(parallel, bound, hypothesis_ok)`` where the hypothesis is that each
    1-by-m region at radius Psi(k) consists of disjoint balls.
    """
    sets = _collect_sets(f, family, H, D)
    report = qia_scan(f, family, n, m, D, H)
    par = report.rows[-1]["par"]
    powers = {}
    for A in sets:
        powers[A.d] = powers.get(A.d, Fraction(0)) + A.radius**m
    big = {k: ApproxSet((k,), _root_ceil(p, m), family) for k, p in powers.items()}
    ok = all(eq11_holds(A) for A in big.values())
    regions = {k: to_one_by_m(A) for k, A in big.items()}
    bound = Fraction(0)
    for k in regions:
        for ell in regions:
            bound += region_intersect_measure(regions[k], regions[ell])
    return par, 2 * bound, ok


def gcd_class_bound(f, family, n, m, d, H):
    """Chung-Erdos bound for the union of one gcd class {gcd(q) = d, |q| <= H}.

    Distinct members of a class are never parallel, so with disjoint balls
    the pair sum is M + M^2 - sum mu^2 and the bound is at least M/(M+1).
    """
    check_positive_int(d, "d")
    sets = [ApproxSet(q, v, family) for q, v in f.support(1, H) if primitive_part(q)[0] == d]
    if any(not eq11_holds(A) for A in sets):
        raise DomainError("class members with overlapping target balls; independence unavailable")
    mus = [set_measure(A) for A in sets]
    M = sum(mus, Fraction(0))
    if M == 0:
        raise DomainError("class measure sum is zero")
    return M * M / (M + M * M - sum((x * x for x in mus), Fraction(0)))
