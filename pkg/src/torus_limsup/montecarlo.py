"""Seeded Monte Carlo estimates of tail unions and limsup proxies on T^{nm}.

Sampling is counter based.  Shard ``j`` of a run always draws from
``Philox(SeedSequence(seed, spawn_key=(j,)))`` with a fixed shard size, so
the sample set depends only on ``(seed, samples)``.  Worker threads only
change who evaluates a shard, and integer hit counts are merged by
summation, so estimates are bit-identical for any worker count.

Every estimate here is a tail-union measure.  Reading a plateau as the
limsup measure is a heuristic, not a certified limit.
"""
import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._validation import check_positive_int
from .approx_sets import ApproxSet, membership_kernel
from .arith import rational_root_floor, int_root_exact
from .errors import DomainError
from .psi import finite_support, psi_transform_window

SHARD_SIZE = 16384
ALPHA = 0.01  # 99% two-sided


def hoeffding_half_width(samples):
    """Two-sided 99% Hoeffding half-width sqrt(ln(2/0.01) / (2N))."""
    return math.sqrt(math.log(2 / ALPHA) / (2 * samples))


@dataclass(frozen=True)
class McEstimate:
    estimate: float
    samples: int
    seed: int
    half_width: float
    hits: int

    def to_dict(self):
        return {"estimate": self.estimate, "half_width": self.half_width,
                "samples": self.samples, "seed": self.seed, "hits": self.hits}


def _shard_rng(seed, j):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(j,))))


def _shards(samples):
    full, rest = divmod(samples, SHARD_SIZE)
    sizes = [SHARD_SIZE] * full + ([rest] if rest else [])
    return list(enumerate(sizes))


def uniform_samples(seed, samples, dim):
    """All samples of a run, concatenated in shard order, shape (samples, dim)."""
    return np.concatenate([_shard_rng(seed, j).random((size, dim)) for j, size in _shards(samples)])


def _map_shards(fn, samples, workers):
    shards = _shards(samples)
    if workers <= 1 or len(shards) == 1:
        return [fn(s) for s in shards]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, shards))


def estimate_fraction(hits_fn, dim, samples, seed, workers=1):
    """Fraction of uniform points in [0,1)^dim for which ``hits_fn`` is true."""
    check_positive_int(samples, "samples")

    def run(shard):
        j, size = shard
        return int(np.count_nonzero(hits_fn(_shard_rng(seed, j).random((size, dim)))))

    hits = sum(_map_shards(run, samples, workers))
    return McEstimate(hits / samples, samples, seed, hoeffding_half_width(samples), hits)


def _window_sets(f, family, Q0, Q1):
    return [ApproxSet(q, v, family) for q, v in f.support(Q0, Q1)]


def tail_union_estimate(f, family, n, m, Q0, Q1, samples, seed, workers=1):
    """Estimate the measure of the union of A(q, psi(q)) over Q0 <= |q| <= Q1."""
    if Q0 > Q1:
        raise DomainError("need Q0 <= Q1")
    if f.n != n or family.m != m:
        raise DomainError("n and m must match the function and the family")
    check_positive_int(samples, "samples")
    sets = _window_sets(f, family, Q0, Q1)
    if not sets:
        return McEstimate(0.0, samples, seed, 0.0, 0)
    kernels = [membership_kernel(A) for A in sets]

    def hits(u):
        X = u.reshape(len(u), n, m)
        hit = np.zeros(len(u), dtype=bool)
        for kernel in kernels:
            idx = np.flatnonzero(~hit)
            if not len(idx):
                break
            hit[idx] = kernel(X[idx])
        return hit

    return estimate_fraction(hits, n * m, samples, seed, workers)


@dataclass
class TailProfile:
    rows: list = field(default_factory=list)  # (Q0, Q1, McEstimate)

    @property
    def plateau(self):
        """Estimate at the last (deepest) window: the limsup proxy."""
        return self.rows[-1][2] if self.rows else None

    def to_dict(self):
        return [{"Q0": a, "Q1": b, **e.to_dict()} for a, b, e in self.rows]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["Q0", "Q1", "estimate", "half_width", "samples", "seed"])
        for a, b, e in self.rows:
            w.writerow([a, b, repr(e.estimate), repr(e.half_width), e.samples, e.seed])
        return buf.getvalue()


def nested_windows(Q0_list, Q1):
    """Windows (Q0, Q1) with a shared cap, sorted by increasing Q0."""
    starts = sorted(set(Q0_list))
    if not starts or starts[-1] > Q1:
        raise DomainError("need nonempty Q0 values not exceeding Q1")
    return [(a, Q1) for a in starts]


def limsup_profile(f, family, n, m, windows, samples, seed, workers=1):
    """Tail-union estimates on nested windows with common random numbers.

    All windows reuse the same samples.  When they share Q1, one pass records
    for each sample the largest |q| whose set contains it; the sample lies in
    the window union iff that norm is at least Q0.
    """
    windows = [(int(a), int(b)) for a, b in windows]
    if any(a > b for a, b in windows) or any(w2[0] < w1[0] for w1, w2 in zip(windows, windows[1:])):
        raise DomainError("windows must satisfy Q0 <= Q1 with nondecreasing Q0")
    if f.n != n or family.m != m:
        raise DomainError("n and m must match the function and the family")
    profile = TailProfile()
    if len({b for _, b in windows}) != 1:
        for a, b in windows:
            profile.rows.append((a, b, tail_union_estimate(f, family, n, m, a, b, samples, seed, workers)))
        return profile
    Q1 = windows[0][1]
    lo = windows[0][0]
    sets = sorted(_window_sets(f, family, lo, Q1), key=lambda A: -max(A.q))
    kernels = [(max(A.q), membership_kernel(A)) for A in sets]
    starts = [a for a, _ in windows]

    def run(shard):
        j, size = shard
        X = _shard_rng(seed, j).random((size, n * m)).reshape(size, n, m)
        best = np.zeros(size, dtype=np.int64)
        for norm, kernel in kernels:
            idx = np.flatnonzero(best == 0)
            if not len(idx):
                break
            best[idx[kernel(X[idx])]] = norm
        return [int(np.count_nonzero(best >= a)) for a in starts]

    counts = np.sum(np.array(_map_shards(run, samples, workers), dtype=np.int64), axis=0)
    hw = hoeffding_half_width(samples)
    for (a, b), c in zip(windows, counts):
        c = int(c)
        profile.rows.append((a, b, McEstimate(c / samples, samples, seed, hw if sets else 0.0, c)))
    return profile


# ---------------------------------------------------------------- Cassels


@dataclass
class CasselsReport:
    profiles: dict
    plateau_gap: float

    def to_dict(self):
        return {"plateau_gap": self.plateau_gap,
                "profiles": {str(c): p.to_dict() for c, p in self.profiles.items()}}


def cassels_scaling_probe(f, family, n, m, factors, windows, samples, seed, workers=1):
    """Profiles of c*psi for each factor c; the plateau gap should shrink as Q0 grows."""
    profiles = {}
    for c in factors:
        c = Fraction(c)
        if c <= 0:
            raise DomainError("scaling factors must be positive")
        profiles[c] = limsup_profile(f.scaled(c), family, n, m, windows, samples, seed, workers)
    plateaus = [p.plateau.estimate for p in profiles.values()]
    return CasselsReport(profiles, max(plateaus) - min(plateaus) if plateaus else 0.0)


# ---------------------------------------------------------------- bootstrap pipeline


def _root_floor(x, m):
    exact = int_root_exact(x, m)
    return exact if exact is not None else rational_root_floor(x, m)


@dataclass
class BootstrapReport:
    Q_list: list
    windows: list
    transforms: dict
    one_by_m: dict
    n_by_m: TailProfile
    qia: object

    def table(self):
        """Side-by-side rows: Q, 1-by-m plateau, n-by-m plateau."""
        nm = self.n_by_m.plateau
        out = []
        for Q in self.Q_list:
            p = self.one_by_m[Q].plateau
            out.append({"Q": Q, "one_by_m": p.estimate if p else 0.0,
                        "n_by_m": nm.estimate if nm else 0.0,
                        "half_width": nm.half_width if nm else 0.0})
        return out

    def to_dict(self):
        return {
            "Q_list": self.Q_list, "windows": self.windows,
            "transforms": {str(Q): rows for Q, rows in self.transforms.items()},
            "one_by_m": {str(Q): p.to_dict() for Q, p in self.one_by_m.items()},
            "n_by_m": self.n_by_m.to_dict(),
            "qia": self.qia.to_dict() if self.qia is not None else None,
            "table": self.table(),
        }


def bootstrap_demo(f, family, n, m, Q_list, windows, samples, seed, qia_D=None, qia_H=None, workers=1):
    """Run the 1-by-m and n-by-m sides of the bootstrap next to each other.

    Psi_Q(d) is the window-truncated transform, summing psi over the q with
    gcd d, |q/d| >= Q and |q| <= Q1.  Without the truncation Psi_Q can be
    infinite, and the 1-by-m set would then be the whole torus.
    """
    from .independence import qia_scan

    Q1 = max(b for _, b in windows)
    transforms, one_by_m = {}, {}
    for Q in Q_list:
        table, rows = {}, []
        for d in range(1, Q1 + 1):
            power = psi_transform_window(f, m, Q, d, Q1)
            rows.append({"d": d, "Psi_pow_m": str(power)})
            if power > 0:
                table[(d,)] = _root_floor(power, m)
        transforms[Q] = rows
        if table:
            g = finite_support(table, 1)
            one_by_m[Q] = limsup_profile(g, family, 1, m, windows, samples, seed, workers)
        else:
            one_by_m[Q] = TailProfile([(a, b, McEstimate(0.0, samples, seed, 0.0, 0)) for a, b in windows])
    nm = limsup_profile(f, family, n, m, windows, samples, seed, workers)
    qia = None
    if qia_D and qia_H:
        qia = qia_scan(f, family, n, m, qia_D, qia_H)
    return BootstrapReport(list(Q_list), windows, transforms, one_by_m, nm, qia)


__all__ = [
    "McEstimate", "TailProfile", "CasselsReport", "BootstrapReport", "hoeffding_half_width",
    "uniform_samples", "estimate_fraction", "tail_union_estimate", "nested_windows",
    "limsup_profile", "cassels_scaling_probe", "bootstrap_demo",
]
