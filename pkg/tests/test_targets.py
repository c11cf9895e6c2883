import json
from fractions import Fraction as F
from itertools import product
from math import gcd

import pytest
from hypothesis import given, strategies as st

from torus_limsup.arith import totient
from torus_limsup.errors import DomainError
from torus_limsup.targets import (
    INF, TargetFamily, coordinate_sets, enumerate_targets, lift_gap, min_torus_gap,
    spread_constants,
)


def values(kind, d, **kw):
    return [p[0] for p in enumerate_targets(TargetFamily(kind, **kw), d)]


def test_enumeration_examples():
    assert values("full_lattice", 3) == [0, 1, 2]
    assert values("reduced", 6) == [1, 5]
    assert values("half_cube", 4) == [0, 1, 2]
    assert values("inhomogeneous", 2, shift=("1/4",)) == [F(1, 4), F(5, 4)]


def test_congruence_family():
    assert values("congruence", 3, residue=(1,), modulus=2) == [F(1, 2), F(3, 2), F(5, 2)]


def test_alternating_half():
    assert values("alternating_half", 5) == [0, 1, 2]
    assert values("alternating_half", 6) == [0, 3, 4, 5]


@pytest.mark.parametrize("m", [1, 2])
def test_counts(m):
    for d in range(1, 201 if m == 1 else 41):
        assert len(enumerate_targets(TargetFamily("full_lattice", m=m), d)) == d**m
        assert len(enumerate_targets(TargetFamily("reduced", m=m), d)) == totient(d) ** m


def test_reduced_excludes_zero_unless_d_is_one():
    assert values("reduced", 1) == [0]
    assert 0 not in values("reduced", 7)


def test_custom_family_from_json(tmp_path):
    path = tmp_path / "fam.json"
    path.write_text(json.dumps({"m": 1, "table": {"3": [["4"], ["1/2"]]}}))
    fam = TargetFamily.from_json(str(path))
    assert [p[0] for p in fam.points(3)] == [F(1, 2), F(1)]
    with pytest.raises(DomainError):
        fam.points(2)


def test_invalid_families():
    with pytest.raises(DomainError):
        TargetFamily("bogus")
    with pytest.raises(DomainError):
        TargetFamily("inhomogeneous", m=2, shift=("1/3",))
    with pytest.raises(DomainError):
        TargetFamily.from_json({"m": 1})


def test_spread_examples():
    rep = spread_constants(TargetFamily("full_lattice"), range(1, 21))
    assert rep.b_min == 1 and rep.a_max == 1
    single = TargetFamily("custom", m=1, table={d: [[0]] for d in range(1, 6)})
    rep = spread_constants(single, range(1, 6))
    assert rep.b_min == INF and set(rep.verdict.values()) == {"vacuous"}
    assert rep.to_dict()["b_min"] == "inf"
    rep = spread_constants(TargetFamily("reduced"), range(1, 31))
    assert rep.b_min == 1 and rep.gaps[5] == 1


def brute_gap(points, d):
    best = INF
    for i, p in enumerate(points):
        for q in points[i + 1:]:
            delta = max(min((a - b) % d, (b - a) % d) for a, b in zip(p, q))
            best = min(best, delta)
    return best


@pytest.mark.parametrize("kind", ["full_lattice", "reduced", "half_cube", "alternating_half"])
@pytest.mark.parametrize("m", [1, 2])
def test_gaps_match_brute_force(kind, m):
    fam = TargetFamily(kind, m=m)
    rep = spread_constants(fam, range(1, 16))
    for d in range(1, 16):
        assert rep.gaps[d] == brute_gap(enumerate_targets(fam, d), d)
        if rep.verdict[d] == "discrete":
            pts = len(enumerate_targets(fam, d))
            assert (rep.a_max * d) ** m <= rep.gaps[d] ** m * pts


def test_lift_gap_caps_at_period():
    assert lift_gap(enumerate_targets(TargetFamily("full_lattice"), 1), 1) == 1
    assert min_torus_gap(enumerate_targets(TargetFamily("full_lattice"), 1), 1) == INF


shifts = st.fractions(min_value=-3, max_value=3, max_denominator=20)


@given(st.integers(1, 30), st.sampled_from(["full_lattice", "reduced", "half_cube",
                                            "alternating_half", "inhomogeneous"]),
       st.integers(1, 2), st.data())
def test_points_in_range_and_distinct(d, kind, m, data):
    kw = {"shift": tuple(data.draw(shifts) for _ in range(m))} if kind == "inhomogeneous" else {}
    fam = TargetFamily(kind, m=m, **kw)
    pts = enumerate_targets(fam, d)
    assert pts and len(set(pts)) == len(pts)
    assert all(0 <= c < d for p in pts for c in p)
    axes = coordinate_sets(fam, d)
    assert sorted(product(*axes)) == sorted(pts)


def test_reduced_m2_is_coordinatewise():
    pts = enumerate_targets(TargetFamily("reduced", m=2), 4)
    assert all(gcd(int(a), 4) == 1 and gcd(int(b), 4) == 1 for a, b in pts)
