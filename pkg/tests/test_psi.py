import json
import random
from fractions import Fraction as F
from itertools import product
from math import gcd

import pytest
from hypothesis import given, settings, strategies as st

from torus_limsup.arith import totient
from torus_limsup.errors import DomainError, SingularityError, UnsupportedError
from torus_limsup.psi import (
    EXACT, INFINITE, LOWER_BOUND, TAIL_BOUNDED, CallableRule, PowerLaw, ResidueRule, TableRule,
    catlin_phi, catlin_sup_term, chow_technau, eval_psi, finite_support, load_psi_json,
    nrs_masked, nrs_reduce, psi_from_dict, psi_sum, psi_transform, psi_transform_window, ray,
    series_partial_sum, univariate,
)


def random_table(rng, n, size=8, bound=9):
    table = {}
    while len(table) < size:
        q = tuple(rng.randint(0, bound) for _ in range(n))
        if any(q):
            table[q] = F(rng.randint(0, 10), rng.randint(1, 12))
    return table


def brute_transform(table, n, m, Q, d, bound):
    """Sum psi(d q')^m over primitive q' in a box, by direct enumeration."""
    total = F(0)
    for qp in product(range(bound // d + 1), repeat=n):
        if any(qp) and gcd(*qp) == 1 and max(qp) >= Q:
            total += table.get(tuple(d * c for c in qp), F(0)) ** m
    return total


# -- evaluation


def test_eval_examples():
    assert eval_psi(finite_support({(2, 4): "3/10"}), (2, 4)) == F(3, 10)
    assert eval_psi(finite_support({(2, 4): "3/10"}), (1, 2)) == 0
    ct = chow_technau(univariate(PowerLaw(1, 1), 1), ["7/10"])
    assert eval_psi(ct, (3,)) == F(10, 3)
    with pytest.raises(SingularityError):
        eval_psi(chow_technau(univariate(PowerLaw(1, 1), 1), ["1/2"]), (2,))


def test_eval_rejects_bad_input():
    f = finite_support({(1, 2): 1})
    with pytest.raises(DomainError):
        eval_psi(f, (0, 0))
    with pytest.raises(DomainError):
        eval_psi(f, (1, 2, 3))
    with pytest.raises(DomainError):
        finite_support({(1,): "-1/2"})
    with pytest.raises(DomainError):
        ray((2, 4), PowerLaw(1, 0))


def test_nrs_mask_zero_off_class():
    f = nrs_masked(univariate(PowerLaw(1, 1), 2), 3, 2)
    assert eval_psi(f, (2, 4)) == F(1, 4)
    assert eval_psi(f, (3, 3)) == 0


def test_ray_and_sum():
    f = psi_sum(ray((1, 0), ResidueRule(PowerLaw("1/20", 0), 2, 1)),
                ray((0, 1), ResidueRule(PowerLaw("1/20", 0), 2, 0)))
    assert eval_psi(f, (3, 0)) == F(1, 20)
    assert eval_psi(f, (2, 0)) == 0
    assert eval_psi(f, (0, 2)) == F(1, 20)
    assert eval_psi(f, (1, 1)) == 0
    assert [q for q, _ in f.support(1, 4)] == [(1, 0), (0, 2), (3, 0), (0, 4)]


# -- transform


def test_transform_examples():
    f = finite_support({(1, 2): "1/10", (2, 4): "3/10"})
    r = psi_transform(f, 1, 1)
    assert (r.value(1), r.value(2), r.status) == (F(1, 10), F(3, 10), EXACT)
    r = psi_transform(f, 1, 3)
    assert r.value(1) == r.value(2) == 0


@pytest.mark.parametrize("m", [1, 2, 3])
def test_transform_n1_identities(m):
    g = TableRule({1: "1/2", 2: "1/3", 5: "1/7"})
    for f in (univariate(g, 1), univariate(PowerLaw("1/2", 1), 1),
              finite_support({(k,): g(k) for k in (1, 2, 5)})):
        r1 = psi_transform(f, m, 1, range(1, 8))
        r2 = psi_transform(f, m, 2, range(1, 8))
        for d in range(1, 8):
            assert r1.value(d) == eval_psi(f, (d,))
            assert r2.value(d) == 0


@pytest.mark.parametrize("n", [2, 3])
def test_transform_brute_force(n):
    rng = random.Random(n)
    for _ in range(25):
        table = random_table(rng, n, bound=9 if n == 2 else 6)
        f = finite_support(table)
        m = rng.choice((1, 2))
        Q = rng.randint(1, 3)
        r = psi_transform(f, m, Q, range(1, 10))
        for d in range(1, 10):
            assert r.powers[d] == brute_transform(table, n, m, Q, d, 9)


def test_transform_monotone_and_partition():
    rng = random.Random(3)
    for _ in range(20):
        n = rng.choice((2, 3))
        f = finite_support(random_table(rng, n, bound=8))
        m = rng.choice((1, 2))
        base = psi_transform(f, m, 1, range(1, 9))
        prev = base
        for Q in range(2, 10):
            cur = psi_transform(f, m, Q, range(1, 9))
            for d in range(1, 9):
                assert cur.powers[d] <= prev.powers[d]
                excluded = sum((v**m for q, v in f.table
                                if gcd(*q) == d and max(q) // d < Q), F(0))
                assert base.powers[d] == cur.powers[d] + excluded
            prev = cur


def test_transform_univariate_statuses():
    r = psi_transform(univariate(PowerLaw(1, 2), 2), 1, 1, [1])
    assert r.status == INFINITE and r.value(1) == float("inf")
    r = psi_transform(univariate(PowerLaw(1, 3), 2), 1, 1, [1, 2])
    assert r.status == TAIL_BOUNDED
    assert r.tail_bounds[1] == F(1, 16)
    r = psi_transform(univariate(TableRule({1: 1, 2: "1/2"}), 2), 1, 1, [1, 2])
    assert r.status == EXACT and r.powers[1] == 3 + 2 * F(1, 2) and r.powers[2] == 3 * F(1, 2)
    fn = univariate(CallableRule(lambda k: F(1, k * k * k)), 2)
    assert psi_transform(fn, 1, 1, [1]).status == LOWER_BOUND


def test_tail_bound_certifies_the_remainder():
    f = univariate(PowerLaw(1, 3), 2)
    r = psi_transform(f, 1, 1, [1], shell_cap=8)
    far = psi_transform(f, 1, 1, [1], shell_cap=400)
    assert r.powers[1] <= far.powers[1] <= r.powers[1] + r.tail_bounds[1]


def test_transform_window_matches_enumeration():
    f = univariate(PowerLaw("1/2", 1), 2)
    for Q in (1, 2, 3):
        for d in range(1, 6):
            brute = sum((v for q, v in f.support(1, 30) if gcd(*q) == d and max(q) // d >= Q), F(0))
            assert psi_transform_window(f, 1, Q, d, 30) == brute


def test_transform_ray_and_sum_exact():
    c = PowerLaw("1/20", 0)
    f = psi_sum(ray((1, 0), ResidueRule(c, 2, 1)), ray((0, 1), ResidueRule(c, 2, 0)))
    r = psi_transform(f, 1, 1, range(1, 5))
    assert r.status == EXACT
    assert [r.value(d) for d in range(1, 5)] == [F(1, 20)] * 4
    assert psi_transform(f, 1, 2, [1]).value(1) == 0


# -- series


def test_series_examples():
    inv = univariate(PowerLaw(1, 1), 1)
    assert series_partial_sum("kg", inv, 1, 3).value == F(11, 6)
    assert series_partial_sum("ds", inv, 1, 3).value == F(53, 36)
    assert series_partial_sum("orthant", univariate(PowerLaw(1, 2), 2), 1, 2).value == F(17, 4)


def test_series_tags():
    assert series_partial_sum("kg", univariate(PowerLaw(1, 1), 1), 1, 3).tag == "diverges"
    assert series_partial_sum("kg", univariate(PowerLaw(1, 1), 1), 2, 3).tag == "converges"
    assert series_partial_sum("orthant", finite_support({(1, 1): 1}), 1, 3).tag is None


def test_series_unknown_kind():
    with pytest.raises(DomainError):
        series_partial_sum("bogus", univariate(PowerLaw(1, 1), 1), 1, 3)


def test_ds_reduces_to_orthant_without_totient_weight():
    rng = random.Random(9)
    for _ in range(20):
        n = rng.choice((1, 2, 3))
        table = random_table(rng, n, size=6, bound=7)
        f = finite_support(table)
        m = rng.choice((1, 2))
        ds = series_partial_sum("ds", f, m, 7).value
        manual = sum(((totient(gcd(*q)) * v / gcd(*q)) ** m for q, v in table.items()), F(0))
        assert ds == manual
        # replacing phi(g)/g by 1 gives the plain sum
        assert series_partial_sum("orthant", f, m, 7).value == sum((v**m for v in table.values()), F(0))
        assert ds <= series_partial_sum("orthant", f, m, 7).value


def test_univariate_series_match_enumeration():
    f = univariate(PowerLaw(1, 2), 2)
    brute = finite_support({q: v for q, v in f.support(1, 6)}, 2)
    for kind in ("orthant", "ds"):
        assert series_partial_sum(kind, f, 2, 6).value == series_partial_sum(kind, brute, 2, 6).value


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(0, 12), st.sampled_from(["orthant", "ds", "catlin"]))
def test_series_monotone_in_limit(n, limit, kind):
    f = univariate(PowerLaw(1, 1), n)
    assert series_partial_sum(kind, f, 1, limit).value <= series_partial_sum(kind, f, 1, limit + 1).value


def test_catlin_examples():
    assert catlin_phi((2, 4), 1) == 4
    assert catlin_phi((1, 0), 1) == 3
    assert catlin_phi((1,), 1) == 3
    assert catlin_sup_term(univariate(PowerLaw(1, 2), 2), (1, 1), 1) == 1
    ind = univariate(TableRule({4: 1}), 2)
    assert catlin_sup_term(ind, (2, 2), 1) == F(1, 4)
    assert catlin_sup_term(univariate(TableRule({}), 2), (1, 1), 1) == 0


def test_catlin_phi_brute_force():
    for q in [(1,), (6,), (2, 4), (3, 9), (4, 6, 10)]:
        for m in (1, 2):
            N = max(q)
            brute = sum(1 for p in product(range(-N, N + 1), repeat=m) if gcd(*p, *q) == 1)
            assert catlin_phi(q, m) == brute


def test_catlin_needs_certificate():
    f = chow_technau(univariate(CallableRule(lambda k: F(1, k)), 1), ["1/3"])
    with pytest.raises(UnsupportedError):
        catlin_sup_term(f, (1,), 1)


# -- NRS reduction


def test_nrs_reduce_example():
    red = nrs_reduce((2,), (3,), (1,), (2,), PowerLaw(1, 1))
    assert red.shift == (F(1, 2),)
    assert eval_psi(red.psi_bar, (2,)) == F(1, 4)
    assert eval_psi(red.psi_bar, (3,)) == 0
    assert red.family.points(1) == [(F(1, 2),)]


def test_nrs_reduce_trivial_modulus():
    red = nrs_reduce((1,), (2,), (0,), (1,), PowerLaw(1, 1))
    assert red.shift == (0,)
    assert eval_psi(red.psi_bar, (3,)) == F(1, 3)


def test_nrs_parts_partition():
    red = nrs_reduce((2, 3), (2, 3), (1, 2), (0, 1), PowerLaw(1, 1))
    for q in product(range(8), repeat=2):
        if any(q):
            assert sum(eval_psi(p, q) for p in red.parts) == eval_psi(red.psi_bar, q)


def test_nrs_reduce_validation():
    with pytest.raises(DomainError):
        nrs_reduce((2,), (3,), (2,), (0,), PowerLaw(1, 1))


# -- serialisation


def test_load_psi_json(tmp_path):
    path = tmp_path / "psi.json"
    path.write_text(json.dumps({"n": 2, "entries": [{"q": [1, 2], "value": "1/10"}]}))
    f = load_psi_json(str(path))
    assert eval_psi(f, (1, 2)) == F(1, 10)


@pytest.mark.parametrize("f", [
    finite_support({(1, 2): "1/10"}),
    univariate(PowerLaw("1/2", 1), 2),
    ray((1, 2), TableRule({1: 1, 3: "1/3"})),
    nrs_masked(univariate(PowerLaw(1, 2), 2), 3, 1),
    chow_technau(univariate(PowerLaw(1, 1), 1), ["7/10"], ["1/3"]),
    psi_sum(ray((1, 0), ResidueRule(PowerLaw(1, 0), 2, 1)), ray((0, 1), PowerLaw(1, 1))),
    univariate(PowerLaw(1, 1), 2).scaled("2/3"),
])
def test_dict_roundtrip(f):
    g = psi_from_dict(json.loads(json.dumps(f.to_dict())))
    for q in product(range(5), repeat=f.n):
        if any(q):
            try:
                assert eval_psi(g, q) == eval_psi(f, q)
            except SingularityError:
                pass


def test_malformed_dict():
    with pytest.raises(DomainError):
        psi_from_dict({"kind": "univariate", "n": 2})
    with pytest.raises(DomainError):
        psi_from_dict({"kind": "nope", "n": 2})


@given(st.lists(st.integers(0, 9), min_size=2, max_size=3).filter(any), st.integers(1, 4))
def test_values_nonnegative(q, k):
    f = nrs_masked(univariate(PowerLaw(1, 1), len(q)), k, 1)
    assert eval_psi(f, q) >= 0
