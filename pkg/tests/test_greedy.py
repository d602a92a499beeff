from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from maxmin_alloc.exact import opt_maxmin
from maxmin_alloc.greedy import (LEXICOGRAPHIC, ByPermutation, candidate_thresholds,
                                 greedy_cardinality, greedy_diagnostics, greedy_with_threshold,
                                 preprocess_big_items, replay_trace, solve_approx)
from maxmin_alloc.instances import gen_random, gen_sylvester_additive
from maxmin_alloc.model import Instance
from maxmin_alloc.valuation import Additive, iter_bits

SMALL = Instance(Additive((3, 3, 2, 2, 2)), m=2)


def naive_greedy(inst, threshold, policy, limit=None):
    """Plain transcription: seed, then scan every eligible (item, player) pair each round."""
    f = inst.valuation
    n, m = inst.n, inst.m
    limit = n if limit is None else limit
    bundles = [0] * m
    order = sorted(range(n), key=lambda j: (-f.value(1 << j), policy.item_rank(j)))
    free_players = list(range(m))
    count = 0
    for j in order[:min(m, n, limit)]:
        p = min(free_players, key=lambda q: (policy.player_rank(j, q), q))
        free_players.remove(p)
        bundles[p] |= 1 << j
        count += 1
    left = set(order[min(m, n, limit):])
    while left and count < limit:
        best = None
        for p in range(m):
            fp = f.value(bundles[p])
            if fp >= threshold:
                continue
            for j in left:
                key = (-(f.value(bundles[p] | 1 << j) - fp), policy.item_rank(j), policy.player_rank(j, p))
                if best is None or key < best[0]:
                    best = (key, j, p)
        if best is None:
            break
        _, j, p = best
        bundles[p] |= 1 << j
        left.remove(j)
        count += 1
    return tuple(bundles)


# -- worked examples -----------------------------------------------------------------

def test_threshold_example():
    alloc, trace = greedy_with_threshold(SMALL, F(12, 5))
    assert alloc.bundles == (frozenset({0}), frozenset({1}))
    assert alloc.unallocated == frozenset({2, 3, 4})
    assert alloc.min_value(SMALL.valuation) == 3
    assert trace.steps == ()


def test_threshold_zero_only_seeds():
    inst = gen_random("coverage", 7, 3, 4)
    alloc, trace = greedy_with_threshold(inst, 0)
    singles = sorted((inst.valuation.value(1 << j) for j in range(7)), reverse=True)
    assert alloc.allocated_count == 3 and trace.steps == ()
    assert alloc.min_value(inst.valuation) == singles[2]


def test_fewer_items_than_players():
    inst = Instance(Additive((1, 2)), m=4)
    alloc, _ = greedy_with_threshold(inst, 5)
    assert sorted(len(b) for b in alloc.bundles) == [0, 0, 1, 1]


def test_greedy_rejects_bad_input():
    with pytest.raises(ValueError):
        greedy_with_threshold(SMALL, -1)
    with pytest.raises(ValueError):
        greedy_with_threshold(SMALL, 1, ByPermutation((0, 1), (0, 1)))
    with pytest.raises(ValueError):
        ByPermutation((0, 0), (0,))
    from maxmin_alloc.matroids import Uniform
    with pytest.raises(ValueError):
        greedy_with_threshold(SMALL.replace(matroids=(Uniform(5, 2),)), 1)


def test_preprocess_no_big_items():
    red = preprocess_big_items(SMALL, 4)
    assert red.instance is SMALL and red.fixed == ()


def test_preprocess_one_big_item():
    red = preprocess_big_items(Instance(Additive((5, 1, 1)), m=2), 2)
    assert red.fixed == ((0, 0),)
    sub = red.instance
    assert sub.m == 1 and [sub.value({j}) for j in range(sub.n)] == [1, 1]


def test_preprocess_more_big_items_than_players():
    red = preprocess_big_items(Instance(Additive((5, 5, 5)), m=2), 2)
    assert len(red.fixed) == 2 and red.instance is None
    assert red.discarded == (2,)
    with pytest.raises(ValueError):
        preprocess_big_items(SMALL, 0)


def test_cardinality_examples():
    capped = SMALL.replace(cardinality_cap=2)
    alloc, _ = greedy_cardinality(capped, 1)
    assert alloc.bundles == (frozenset({0}), frozenset({1}))
    inst = gen_random("coverage", 6, 2, 2)
    assert greedy_cardinality(inst, 100, k=6)[0] == greedy_with_threshold(inst, 100)[0]
    assert greedy_cardinality(inst, 100, k=2)[0] == greedy_with_threshold(inst, 0)[0]
    with pytest.raises(ValueError):
        greedy_cardinality(inst, 1, k=0)
    with pytest.raises(ValueError):
        greedy_cardinality(inst, 1)


def test_solve_approx_examples():
    res = solve_approx(SMALL, F(2, 5))
    assert res.achieved_min >= F(12, 5)
    one = gen_random("coverage", 5, 1, 0)
    res = solve_approx(one, F(1, 3))
    assert res.achieved_min == one.valuation.value(31)
    res = solve_approx(Instance(Additive((1, 2)), m=3), F(2, 5))
    assert res.achieved_min == 0 and res.guessed_opt == 0
    with pytest.raises(ValueError):
        solve_approx(SMALL, 0)
    with pytest.raises(ValueError):
        solve_approx(SMALL, F(3, 2))


def test_candidate_thresholds_contain_opt():
    for seed in range(5):
        inst = gen_random("coverage", 6, 3, seed)
        opt, _ = opt_maxmin(inst)
        assert opt in candidate_thresholds(inst)


def test_solve_approx_large_ground_set_bisects():
    inst = Instance(Additive(tuple(range(1, 25))), m=3)
    res = solve_approx(inst, F(2, 5))
    assert res.achieved_min >= F(2, 5) * res.guessed_opt > 0
    assert res.guessed_opt.denominator == 1


# -- against the naive transcription ---------------------------------------------------

@st.composite
def instance_and_policy(draw):
    n = draw(st.integers(1, 7))
    m = draw(st.integers(1, 4))
    kind = draw(st.sampled_from(["additive", "coverage"]))
    inst = gen_random(kind, n, m, draw(st.integers(0, 10 ** 6)), weight_bound=3)
    items = draw(st.permutations(range(n)))
    players = draw(st.permutations(range(m)))
    owners = draw(st.dictionaries(st.integers(0, n - 1), st.integers(0, m - 1)))
    return inst, ByPermutation(tuple(items), tuple(players), owners)


@settings(max_examples=150)
@given(instance_and_policy(), st.fractions(min_value=0, max_value=12, max_denominator=6))
def test_greedy_matches_naive(data, threshold):
    inst, policy = data
    for pol in (policy, LEXICOGRAPHIC):
        alloc, trace = greedy_with_threshold(inst, threshold, pol)
        assert alloc.masks == naive_greedy(inst, threshold, pol)
        assert replay_trace(inst, trace, pol) == []


@settings(max_examples=80)
@given(instance_and_policy(), st.fractions(min_value=0, max_value=12, max_denominator=6),
       st.integers(1, 8))
def test_cardinality_matches_naive(data, threshold, k):
    inst, policy = data
    alloc, trace = greedy_cardinality(inst, threshold, policy, k)
    assert alloc.masks == naive_greedy(inst, threshold, policy, k)
    assert alloc.allocated_count <= k
    assert replay_trace(inst, trace, policy, k) == []


@given(instance_and_policy(), st.fractions(min_value=0, max_value=12, max_denominator=6))
def test_trace_shape(data, threshold):
    inst, policy = data
    f = inst.valuation
    alloc, trace = greedy_with_threshold(inst, threshold, policy)
    rebuilt = [0] * inst.m
    for s in trace.seeds + trace.steps:
        rebuilt[s.player] |= 1 << s.item
    assert tuple(rebuilt) == alloc.masks
    big = max(f.value(1 << j) for j in range(inst.n))
    for p in range(inst.m):
        gains = [s.gain for s in trace.player_steps(p)]
        assert gains == sorted(gains, reverse=True)
        assert sum(gains, F(0)) == f.value(alloc.masks[p])
        assert f.value(alloc.masks[p]) <= max(threshold, F(0)) + big
    assert len(trace.seeds) == min(inst.m, inst.n)


def test_replay_detects_tampering():
    inst = gen_random("coverage", 6, 2, 1)
    _, trace = greedy_with_threshold(inst, 100)
    a, b = trace.steps[0], trace.steps[1]
    swapped = type(trace)(trace.seeds, (b, a) + trace.steps[2:], trace.threshold)
    assert replay_trace(inst, swapped)


# -- run-level inequalities -----------------------------------------------------------

@pytest.mark.parametrize("seed", range(10))
def test_diagnostics_hold(seed):
    inst = gen_random(("additive", "coverage")[seed % 2], 6, 3, seed)
    opt, ref = opt_maxmin(inst)
    for tau in (F(2, 5) * opt, opt, 2 * opt):
        if tau <= 0:
            continue
        red = preprocess_big_items(inst, tau)
        if red.instance is None:
            continue
        sub = red.instance
        alloc, _ = greedy_with_threshold(sub, tau)
        _, sub_ref = opt_maxmin(sub)
        diag = greedy_diagnostics(sub, alloc, tau, sub_ref)
        assert diag.ok, diag
        vals = alloc.values(sub.valuation)
        assert diag.q == vals.index(min(vals))


# -- lower-bound family ---------------------------------------------------------------

@pytest.mark.parametrize("N", [1, 2, 3])
def test_sylvester_policy_reproduces_reference(N):
    fam = gen_sylvester_additive(N)
    f = fam.instance.valuation
    for tau in (2 + fam.delta + F(1, 1000), F(3), F(5)):
        alloc, trace = greedy_with_threshold(fam.instance, tau, fam.policy)
        assert alloc == fam.greedy_reference
        assert alloc.unallocated_mask == 0
        assert replay_trace(fam.instance, trace, fam.policy) == []
    assert min(f.value(b) for b in fam.greedy_reference.masks) <= 3


def test_sylvester_three_values():
    fam = gen_sylvester_additive(3)
    f = fam.instance.valuation
    assert fam.delta == F(1, 27) and fam.instance.m == 12 and fam.instance.n == 37
    vals = sorted(fam.greedy_reference.values(f))
    assert vals == sorted([F(95, 27)] * 6 + [F(70, 27)] * 3 + [F(125, 54)] * 2 + [F(115, 54)])
    large_holders = [p for p, b in enumerate(fam.greedy_reference.masks)
                     if any(j in fam.groups["large"] for j in iter_bits(b))]
    assert len(large_holders) == 6
    assert all(f.value(fam.greedy_reference.masks[p]) == 2 + fam.delta + (3 - fam.delta) / 2
               for p in large_holders)
