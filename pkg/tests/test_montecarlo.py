import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from torus_limsup.approx_sets import ApproxSet, set_measure
from torus_limsup.errors import DomainError
from torus_limsup.montecarlo import (
    SHARD_SIZE, bootstrap_demo, cassels_scaling_probe, estimate_fraction, hoeffding_half_width,
    limsup_profile, nested_windows, tail_union_estimate, uniform_samples,
)
from torus_limsup.psi import PowerLaw, ResidueRule, finite_support, psi_sum, ray, univariate
from torus_limsup.targets import TargetFamily

FULL = TargetFamily("full_lattice")
HALF = TargetFamily("half_cube")
RAY = ray((1, 0), PowerLaw("1/20", 0))


def test_half_width_formula():
    assert hoeffding_half_width(10**5) == math.sqrt(math.log(2 / 0.01) / 2e5)


def test_samples_split_into_shards_deterministically():
    a = uniform_samples(3, SHARD_SIZE + 10, 2)
    b = uniform_samples(3, SHARD_SIZE + 10, 2)
    assert a.shape == (SHARD_SIZE + 10, 2) and np.array_equal(a, b)
    assert not np.array_equal(a, uniform_samples(4, SHARD_SIZE + 10, 2))


def test_single_set_estimate():
    f = finite_support({(2,): "1/4"})
    assert set_measure(ApproxSet((2,), "1/4", FULL)) == F(1, 2)
    est = tail_union_estimate(f, FULL, 1, 1, 1, 5, 50_000, 1)
    assert abs(est.estimate - 0.5) <= est.half_width


def test_empty_range_and_full_cover():
    f = finite_support({(2,): "1/4"})
    est = tail_union_estimate(f, FULL, 1, 1, 3, 9, 1000, 1)
    assert est.estimate == 0 and est.half_width == 0
    full = finite_support({(1,): "1/2"})
    assert tail_union_estimate(full, FULL, 1, 1, 1, 1, 5000, 2).estimate == 1.0
    prof = limsup_profile(full, FULL, 1, 1, [(1, 3), (1, 4)], 3000, 2)
    assert [row[2].estimate for row in prof.rows] == [1.0, 1.0]


def test_tail_union_validation():
    with pytest.raises(DomainError):
        tail_union_estimate(RAY, HALF, 2, 1, 5, 4, 100, 0)
    with pytest.raises(DomainError):
        tail_union_estimate(RAY, HALF, 3, 1, 1, 4, 100, 0)
    with pytest.raises(DomainError):
        tail_union_estimate(RAY, HALF, 2, 1, 1, 4, 0, 0)


def test_consistency_with_exact_measure():
    # Hoeffding at 99%: at most a couple of misses in 100 seeds
    A = ApproxSet((3, 1), "1/8", FULL)
    f = finite_support({A.q: A.radius})
    mu = float(set_measure(A))
    misses = 0
    for seed in range(100):
        est = tail_union_estimate(f, FULL, 2, 1, 1, 3, 4000, seed)
        misses += abs(est.estimate - mu) > est.half_width
    assert misses <= 1


def test_worker_count_does_not_change_results():
    windows = [(1, 60), (11, 60), (31, 60)]
    a = limsup_profile(RAY, HALF, 2, 1, windows, 40_000, 9, workers=1)
    b = limsup_profile(RAY, HALF, 2, 1, windows, 40_000, 9, workers=4)
    assert a.to_dict() == b.to_dict()
    x = tail_union_estimate(RAY, HALF, 2, 1, 11, 60, 40_000, 9, workers=3)
    assert x == tail_union_estimate(RAY, HALF, 2, 1, 11, 60, 40_000, 9)
    assert x.hits == a.rows[1][2].hits


def test_shared_cap_profile_matches_separate_windows():
    windows = [(1, 40), (5, 40), (20, 40)]
    prof = limsup_profile(RAY, HALF, 2, 1, windows, 20_000, 4)
    for (a, b, est) in prof.rows:
        assert est == tail_union_estimate(RAY, HALF, 2, 1, a, b, 20_000, 4)


def test_profile_nonincreasing_in_q0():
    prof = limsup_profile(univariate(PowerLaw("1/3", 1), 2), FULL, 2, 1,
                          nested_windows([1, 4, 8, 16], 24), 20_000, 2)
    est = [row[2].estimate for row in prof.rows]
    assert all(b <= a for a, b in zip(est, est[1:]))


def test_growing_cap_increases_estimate():
    f = univariate(PowerLaw("1/3", 1), 2)
    for seed in range(5):
        small = tail_union_estimate(f, FULL, 2, 1, 4, 10, 10_000, seed)
        big = tail_union_estimate(f, FULL, 2, 1, 4, 20, 10_000, seed)
        assert small.estimate <= big.estimate + 2 * small.half_width


def test_window_validation():
    with pytest.raises(DomainError):
        limsup_profile(RAY, HALF, 2, 1, [(10, 20), (5, 20)], 100, 0)
    with pytest.raises(DomainError):
        nested_windows([50], 20)


def test_profile_csv():
    prof = limsup_profile(RAY, HALF, 2, 1, [(1, 10)], 1000, 0)
    lines = prof.to_csv().splitlines()
    assert lines[0] == "Q0,Q1,estimate,half_width,samples,seed"
    assert lines[1].startswith("1,10,") and lines[1].endswith(",1000,0")


def test_postopos_plateau_near_half():
    prof = limsup_profile(RAY, HALF, 2, 1, [(1, 150), (51, 150)], 50_000, 7)
    assert 0.45 <= prof.plateau.estimate <= 0.51


def test_fulltopos_plateau_below_three_quarters():
    c = PowerLaw("1/20", 0)
    f = psi_sum(ray((1, 0), ResidueRule(c, 2, 1)), ray((0, 1), ResidueRule(c, 2, 0)))
    prof = limsup_profile(f, TargetFamily("alternating_half"), 2, 1, [(51, 150)], 50_000, 7)
    assert prof.plateau.estimate <= 0.75 + 3 * prof.plateau.half_width


def test_cassels_probe():
    rep = cassels_scaling_probe(RAY, HALF, 2, 1, [1, 1], [(1, 40)], 5000, 3)
    assert rep.plateau_gap == 0
    # disjoint regime: one set per norm, measure scales linearly in c
    f = finite_support({(7, 0): "1/40"})
    rep = cassels_scaling_probe(f, FULL, 2, 1, ["1/2", 1], [(1, 10)], 40_000, 1)
    half, one = (rep.profiles[F(c)].plateau for c in ("1/2", "1"))
    assert abs(half.estimate - one.estimate / 2) <= 2 * half.half_width
    with pytest.raises(DomainError):
        cassels_scaling_probe(RAY, HALF, 2, 1, [0], [(1, 4)], 100, 0)


def test_bootstrap_positive_copositive_to_full():
    f = univariate(PowerLaw("1/2", 1), 2)
    rep = bootstrap_demo(f, HALF, 2, 1, [1], [(1, 40), (20, 40)], 20_000, 3)
    row = rep.table()[0]
    assert 0.40 <= row["one_by_m"] <= 0.55
    assert row["n_by_m"] >= 0.97


def test_bootstrap_ray_has_no_full_measure_step():
    rep = bootstrap_demo(RAY, HALF, 2, 1, [1, 2], [(51, 150)], 20_000, 5, qia_D=3, qia_H=10)
    rows = {r["Q"]: r for r in rep.table()}
    assert abs(rows[1]["one_by_m"] - 0.5) < 0.05
    assert rows[2]["one_by_m"] == 0
    assert abs(rows[1]["n_by_m"] - 0.5) < 0.05
    assert rep.qia.rows[-1]["nonpar"] == 0
    assert set(rep.to_dict()) >= {"table", "transforms", "qia"}


def test_bootstrap_empty_psi():
    rep = bootstrap_demo(finite_support({(1, 1): 0}), HALF, 2, 1, [1], [(1, 5)], 1000, 0)
    assert rep.table() == [{"Q": 1, "one_by_m": 0.0, "n_by_m": 0.0, "half_width": 0.0}]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**63), st.integers(1, 3 * SHARD_SIZE))
def test_estimate_fraction_counts_hits(seed, samples):
    est = estimate_fraction(lambda u: u[:, 0] < 0.25, 1, samples, seed)
    u = uniform_samples(seed, samples, 1)
    assert est.hits == int(np.count_nonzero(u[:, 0] < 0.25))
    assert est.estimate == est.hits / samples
