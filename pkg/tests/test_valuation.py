import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from maxmin_alloc.instances import gen_gap_instance, gen_random
from maxmin_alloc.valuation import (Additive, Augmented, Coverage, DisjointSum, Restricted,
                                    Table, Truncated, check_submodular_monotone, evaluate,
                                    from_mask, iter_bits, marginal, marginal_set, parse_value,
                                    remove_marginal, render_value, to_mask, value_table)

GAP = gen_gap_instance().valuation
J1, J2, J3, K1, K2, K3 = range(6)


def brute_submodular(f):
    """Diminishing returns over every pair S <= T, straight from the definition."""
    n = f.n
    t = value_table(f)
    for T in range(1 << n):
        S = T
        while True:
            for j in range(n):
                if not T >> j & 1:
                    if t[S | 1 << j] - t[S] < t[T | 1 << j] - t[T]:
                        return False
            if S == 0:
                break
            S = (S - 1) & T
    return True


def brute_monotone(f):
    t = value_table(f)
    return all(t[s] <= t[s | 1 << j] for s in range(1 << f.n) for j in range(f.n))


# -- values -----------------------------------------------------------------

@pytest.mark.parametrize("text,value", [("3", F(3)), ("-4/6", F(-2, 3)), (" 7 / 14 ", F(1, 2))])
def test_parse_value(text, value):
    assert parse_value(text) == value


@pytest.mark.parametrize("text", ["0.5", "1e3", "1/0", "a/b", "", "2/-3"])
def test_parse_value_rejects(text):
    with pytest.raises(ValueError):
        parse_value(text)


def test_render_value():
    assert render_value(F(6, 3)) == "2"
    assert render_value(F(-3, 9)) == "-1/3"


@given(st.fractions())
def test_render_parse_round_trip(v):
    assert parse_value(render_value(v)) == v


@given(st.sets(st.integers(0, 300), max_size=80))
def test_mask_round_trip(items):
    mask = to_mask(items)
    assert from_mask(mask) == frozenset(items)
    assert list(iter_bits(mask)) == sorted(items)


# -- evaluate / marginals ---------------------------------------------------------

def test_evaluate_examples():
    assert evaluate(Additive((2, 3)), {0, 1}) == 5
    assert evaluate(GAP, {J1, K2}) == 3
    cov = Coverage((1, 1), (frozenset({0, 1}), frozenset({1})))
    assert evaluate(cov, {0, 1}) == 2


def test_evaluate_out_of_range():
    with pytest.raises(IndexError):
        evaluate(Additive((1, 2)), {2})


def test_marginal_examples():
    assert marginal(GAP, K2, {J1}) == 1
    assert marginal(GAP, J1, {J1, K3}) == 0
    assert marginal(Additive((2, 3)), 1, {0}) == 3


def test_marginal_set_examples():
    assert marginal_set(GAP, {J1, J2}, set()) == 4
    assert marginal_set(GAP, {J1}, {J1, K1}) == 0


def test_remove_marginal_examples():
    assert remove_marginal(GAP, J1, {J1, J2}) == 2
    assert remove_marginal(GAP, K3, {K3}) == GAP.value(1 << K3)
    assert remove_marginal(Additive((F(1, 3), 5, 7)), 0, {0, 2}) == F(1, 3)
    with pytest.raises(ValueError):
        remove_marginal(GAP, J1, {J2})


@pytest.mark.parametrize("seed", range(5))
def test_telescoping_along_every_order(seed):
    f = gen_random("coverage", 6, 1, seed).valuation
    rng = random.Random(seed)
    for _ in range(10):
        s = rng.getrandbits(6)
        t = rng.getrandbits(6)
        extra = sorted(from_mask(s & ~t))
        for order in itertools.permutations(extra):
            acc, cur = F(0), t
            for j in order:
                acc += f.value(cur | 1 << j) - f.value(cur)
                cur |= 1 << j
            assert acc == marginal_set(f, from_mask(s), from_mask(t))


# -- checker --------------------------------------------------------------------

def test_checker_gap_function():
    rep = check_submodular_monotone(GAP)
    assert rep.submodular and rep.monotone and rep.witness is None


def test_checker_supermodular_witness():
    f = Table((0, 0, 0, 1))
    rep = check_submodular_monotone(f)
    assert not rep.submodular
    assert rep.witness == (1, frozenset(), frozenset({0}))


def test_checker_non_monotone():
    rep = check_submodular_monotone(Table((0, 2, 1, 1)))
    assert not rep.monotone


def test_checker_needs_samples_for_large_ground_sets():
    with pytest.raises(ValueError):
        check_submodular_monotone(Additive((1,) * 25))
    rep = check_submodular_monotone(Additive((1,) * 25), samples=50, seed=3)
    assert rep.ok and rep.mode == "sampled"


def test_sampled_checker_is_reproducible():
    f = Table.from_function(4, lambda s: len(s) ** 2)
    a = check_submodular_monotone(f, samples=200, seed=9)
    b = check_submodular_monotone(f, samples=200, seed=9)
    assert a == b and not a.submodular


small_tables = st.integers(1, 4).flatmap(
    lambda n: st.lists(st.integers(0, 6), min_size=1 << n, max_size=1 << n))


@given(small_tables)
def test_checker_agrees_with_definition(values):
    f = Table(tuple([0] + values[1:]))
    rep = check_submodular_monotone(f)
    assert rep.submodular == brute_submodular(f)
    assert rep.monotone == brute_monotone(f)
    if rep.witness is not None:
        j, s, t = rep.witness
        assert s <= t and j not in t
        assert marginal(f, j, s) < marginal(f, j, t)


@pytest.mark.parametrize("seed", range(8))
def test_augmented_random_submodular(seed):
    base = gen_random("coverage", 5, 1, seed).valuation
    t = F(seed, 3)
    rep = check_submodular_monotone(Augmented(base, t))
    assert rep.submodular and rep.monotone


# -- variants -------------------------------------------------------------------

def test_table_normalises_and_rejects():
    f = Table((2, 3, 4, 5))
    assert f.values[0] == 0 and f.value(3) == 3
    with pytest.raises(ValueError):
        Table((0, 1, -1, 2))
    with pytest.raises(ValueError):
        Table((0, 1, 2))


def test_truncated_is_pointwise_min():
    f = gen_random("coverage", 6, 1, 2).valuation
    tf = Truncated(f, 4)
    assert all(tf.value(s) == min(4, f.value(s)) for s in range(64))


def test_augmented_does_not_change_other_marginals():
    f = gen_random("coverage", 5, 1, 4).valuation
    g = Augmented(f, F(7, 2))
    z = g.new_item
    for s in range(1 << 5):
        assert g.value(s | 1 << z) == f.value(s) + F(7, 2)
        for j in range(5):
            assert marginal(g, j, from_mask(s)) == marginal(g, j, from_mask(s) | {z})


def test_disjoint_sum_evaluates_parts():
    a = Additive((1, 2))
    c = gen_random("coverage", 3, 1, 1).valuation
    f = DisjointSum((a, c))
    assert f.n == 5
    for s in range(32):
        assert f.value(s) == a.value(s & 3) + c.value(s >> 2)
    assert check_submodular_monotone(f).ok


def test_restricted_reindexes():
    f = Additive((1, 2, 4, 8))
    r = Restricted(f, (3, 1))
    assert r.value(0b01) == 8 and r.value(0b11) == 10


def test_empty_set_is_zero_for_every_variant():
    base = gen_random("coverage", 4, 1, 0).valuation
    for f in (base, Additive((1, 2)), Table((0, 1)), Truncated(base, 1), Augmented(base, 3),
              DisjointSum((base, Additive((5,)))), Restricted(base, (2, 0)), GAP):
        assert f.value(0) == 0


@pytest.mark.parametrize("seed", range(6))
def test_monotone_on_ground_sets_up_to_ten(seed):
    kind = "coverage" if seed % 2 else "additive"
    f = gen_random(kind, 10, 1, seed).valuation
    assert brute_monotone(Truncated(f, F(seed + 1, 2)))
    assert brute_monotone(f)


def test_trackers_match_direct_evaluation():
    rng = random.Random(5)
    fs = [gen_random("coverage", 7, 1, 1).valuation, Additive((1, F(1, 2), 3, 0, 2, 2, 1))]
    fs += [Truncated(fs[0], 5), DisjointSum((fs[1], fs[0])), Restricted(fs[0], (6, 2, 4)),
           Augmented(fs[0], 2), GAP]
    for f in fs:
        tr = f.tracker()
        order = list(range(f.n))
        rng.shuffle(order)
        for j in order:
            before = tr.mask
            assert tr.marginal(j) == f.value(before | 1 << j) - f.value(before)
            tr.add(j)
            assert tr.value == f.value(tr.mask)
