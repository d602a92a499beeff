import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from maxmin_alloc.exact import (BudgetExceeded, enumerate_configurations, opt_maxmin,
                                opt_truncated_maxsum, search_space)
from maxmin_alloc.instances import gen_gap_instance, gen_random, random_matroids
from maxmin_alloc.matroids import Partition, Uniform
from maxmin_alloc.model import Allocation, Instance
from maxmin_alloc.valuation import Additive, Table


def all_assignments(inst, allow_skip):
    """Every assignment vector, with no symmetry reduction at all."""
    choices = list(range(inst.m)) + ([None] if allow_skip else [])
    for vec in itertools.product(choices, repeat=inst.n):
        masks = [0] * inst.m
        for j, p in enumerate(vec):
            if p is not None:
                masks[p] |= 1 << j
        if not all(inst.independent(b) for b in masks):
            continue
        if inst.cardinality_cap is not None and sum(p is not None for p in vec) > inst.cardinality_cap:
            continue
        yield masks


def naive_opt(inst):
    skip = bool(inst.matroids) or inst.cardinality_cap is not None
    f = inst.valuation
    return max(min(f.value(b) for b in masks) for masks in all_assignments(inst, skip))


def naive_truncated(inst, cap):
    skip = bool(inst.matroids)
    f = inst.valuation
    return max(sum(min(cap, f.value(b)) for b in masks) for masks in all_assignments(inst, skip))


def test_gap_instance_opt():
    opt, alloc = opt_maxmin(gen_gap_instance())
    assert opt == 3
    assert alloc.min_value(gen_gap_instance().valuation) == 3


def test_additive_example():
    inst = Instance(Additive((3, 3, 2, 2, 2)), m=2)
    opt, alloc = opt_maxmin(inst)
    assert opt == 6
    assert alloc.unallocated_mask == 0
    # cross-check against every bipartition
    best = max(min(inst.value(s), inst.value(set(range(5)) - set(s)))
               for r in range(6) for s in itertools.combinations(range(5), r))
    assert best == 6


def test_single_player_gets_everything():
    inst = gen_random("coverage", 6, 1, 3)
    opt, _ = opt_maxmin(inst)
    assert opt == inst.valuation.value(63)


def test_truncated_maxsum_gap_instance():
    inst = gen_gap_instance()
    alloc = opt_truncated_maxsum(inst, 6)
    assert sum(min(6, v) for v in alloc.values(inst.valuation)) == 11
    assert naive_truncated(inst, 6) == 11


def test_truncated_maxsum_trivial_cases():
    inst = gen_random("additive", 5, 2, 1)
    alloc = opt_truncated_maxsum(inst, 0)
    assert alloc.unallocated_mask == 0
    one = gen_random("coverage", 5, 1, 1)
    alloc = opt_truncated_maxsum(one, 1000)
    assert alloc.masks == (31,)


def test_configurations():
    inst = gen_gap_instance()
    confs = list(enumerate_configurations(inst, 4))
    pairs = [c for c in confs if len(c) == 2]
    assert sorted(map(sorted, pairs)) == [[0, 1], [0, 2], [1, 2], [3, 4], [3, 5], [4, 5]]
    assert all(len(c) >= 3 for c in confs if len(c) != 2)
    assert len(confs) == 6 + sum(1 for s in range(64) if bin(s).count("1") >= 3)
    assert len(list(enumerate_configurations(inst, 0))) == 64
    assert list(enumerate_configurations(inst, 5)) == []
    assert list(enumerate_configurations(inst, 4, strict=True)) == []


def test_configurations_respect_matroids():
    inst = gen_gap_instance().replace(matroids=(Uniform(6, 2),))
    assert all(len(c) <= 2 for c in enumerate_configurations(inst, 3))


def test_budget():
    inst = gen_random("additive", 10, 4, 0)
    assert search_space(inst) == 4 ** 10
    with pytest.raises(BudgetExceeded, match="budget"):
        opt_maxmin(inst, budget=1000)


def test_budget_from_environment(monkeypatch):
    monkeypatch.setenv("MAXMIN_BUDGET", "10")
    with pytest.raises(BudgetExceeded):
        opt_maxmin(gen_random("additive", 5, 2, 0))


@pytest.mark.parametrize("seed", range(12))
def test_opt_matches_naive_enumeration(seed):
    kind = ("additive", "coverage")[seed % 2]
    inst = gen_random(kind, 5 + seed % 2, 2 + seed % 2, seed)
    assert opt_maxmin(inst)[0] == naive_opt(inst)
    cap = F(seed % 4 + 2)
    alloc = opt_truncated_maxsum(inst, cap)
    assert sum(min(cap, v) for v in alloc.values(inst.valuation)) == naive_truncated(inst, cap)


@pytest.mark.parametrize("seed", range(8))
def test_opt_with_matroids_and_caps(seed):
    inst = gen_random("coverage", 5, 2, seed)
    with_m = inst.replace(matroids=random_matroids(5, seed))
    opt, alloc = opt_maxmin(with_m)
    assert opt == naive_opt(with_m)
    assert alloc.feasible_for(with_m)
    capped = inst.replace(cardinality_cap=2 + seed % 3)
    opt, alloc = opt_maxmin(capped)
    assert opt == naive_opt(capped)
    assert alloc.allocated_count <= capped.cardinality_cap


@pytest.mark.parametrize("seed", range(6))
def test_discarding_never_helps(seed):
    inst = gen_random("coverage", 6, 3, seed)
    vacuous = inst.replace(matroids=(Uniform(6, 6),))
    assert opt_maxmin(vacuous)[0] == opt_maxmin(inst)[0]


@given(st.lists(st.integers(0, 5), min_size=16, max_size=16), st.fractions(min_value=F(1, 9), max_value=9))
def test_scaling_equivariance(values, c):
    base = Table.from_function(4, lambda s: 0 if not s else max(values[j] for j in s) + len(s))
    scaled = Table(tuple(c * v for v in base.values))
    a, b = Instance(base, m=2), Instance(scaled, m=2)
    opt_a, alloc_a = opt_maxmin(a)
    opt_b, alloc_b = opt_maxmin(b)
    assert opt_b == c * opt_a
    assert alloc_a == alloc_b


def test_oracle_dominates_any_allocation():
    inst = gen_random("coverage", 6, 3, 11)
    opt, _ = opt_maxmin(inst)
    for masks in itertools.islice(all_assignments(inst, False), 0, 729, 7):
        assert Allocation(tuple(masks), 6).min_value(inst.valuation) <= opt


def test_partition_matroid_singletons():
    inst = Instance(Additive((1, 2, 3)), m=2, matroids=(Partition(3, (frozenset(range(3)),), (1,)),))
    opt, alloc = opt_maxmin(inst)
    assert opt == 2 and alloc.allocated_count == 2
