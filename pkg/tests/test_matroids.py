import itertools

import pytest
from hypothesis import given, strategies as st

from maxmin_alloc.matroids import (DownwardClosed, Explicit, Partition, Uniform, is_common_independent,
                                   is_independent, restrict_matroid)
from maxmin_alloc.valuation import iter_bits

A, B, C, D = range(4)
PART = Partition(4, (frozenset({A, B}), frozenset({C})), (1, 1))


def test_uniform():
    u = Uniform(4, 2)
    assert is_independent(u, {A, B})
    assert not is_independent(u, {A, B, C})


def test_partition():
    assert is_independent(PART, {A, C})
    assert not is_independent(PART, {A, B})
    assert is_independent(PART, {A, C, D})  # D lies in no block


def test_explicit_matches_uniform_everywhere():
    u = Uniform(4, 2)
    e = Explicit.from_oracle(u)
    assert all(e.independent(s) == u.independent(s) for s in range(16))


def test_common_independence():
    assert is_common_independent([], {A, B, C})
    assert is_common_independent([Uniform(4, 2), PART], {A, C})
    assert not is_common_independent([Uniform(4, 1), Uniform(4, 2)], {A, B})
    with pytest.raises(ValueError):
        is_common_independent([Uniform(4, 1), Uniform(5, 2)], {A})


def test_explicit_rejects_non_matroids():
    # {a,b} and {c} as bases: {c} cannot be extended from {a,b}
    with pytest.raises(ValueError, match="exchange"):
        Explicit.from_sets(3, [{0, 1}, {2}])
    with pytest.raises(ValueError, match="subsets"):
        Explicit(2, frozenset({0, 3}))
    with pytest.raises(ValueError, match="empty"):
        Explicit(2, frozenset({1}))
    sys_ = DownwardClosed.from_sets(3, [{0, 1}, {2}])
    assert not sys_.is_matroid and sys_.independent(0b011) and not sys_.independent(0b101)


def test_explicit_size_limit():
    with pytest.raises(ValueError):
        Explicit(17, frozenset({0}))


partitions = st.integers(1, 6).flatmap(lambda n: st.tuples(
    st.just(n), st.lists(st.integers(0, 2), min_size=n, max_size=n),
    st.lists(st.integers(0, 3), min_size=3, max_size=3)))


@given(partitions)
def test_partition_is_a_matroid(data):
    n, assign, caps = data
    blocks = tuple(frozenset(j for j in range(n) if assign[j] == b) for b in range(3))
    m = Partition(n, blocks, tuple(caps))
    Explicit.from_oracle(m)  # construction checks closure and exchange
    for s in range(1 << n):
        if m.independent(s):
            assert all(m.independent(s & ~(1 << j)) for j in iter_bits(s))


@given(st.integers(1, 6), st.integers(0, 6))
def test_uniform_is_downward_closed_and_exchanges(n, r):
    Explicit.from_oracle(Uniform(n, r))


def test_restrict_matroid_keeps_independence():
    items = (3, 0, 2)
    for mat in (Uniform(4, 2), PART, Explicit.from_oracle(PART)):
        sub = restrict_matroid(mat, items)
        for bits in itertools.product((0, 1), repeat=3):
            local = {i for i, b in enumerate(bits) if b}
            assert is_independent(sub, local) == is_independent(mat, {items[i] for i in local})
