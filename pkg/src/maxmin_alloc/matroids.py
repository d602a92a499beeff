"""Independence oracles for per-bundle matroid constraints."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Tuple

from .valuation import from_mask, iter_bits, popcount, to_mask

__all__ = [
    "Matroid", "Uniform", "Partition", "Explicit", "DownwardClosed", "RestrictedMatroid",
    "is_independent", "is_common_independent", "restrict_matroid", "EXPLICIT_LIMIT",
]

EXPLICIT_LIMIT = 16


class Matroid:
    n: int
    is_matroid = True

    def independent(self, mask: int) -> bool:  # pragma: no cover - abstract
        raise NotImplementedError


@dataclass(frozen=True)
class Uniform(Matroid):
    n: int
    rank: int

    def __post_init__(self):
        if self.rank < 0 or self.n < 0:
            raise ValueError("uniform matroid needs n >= 0 and rank >= 0")

    def independent(self, mask: int) -> bool:
        return popcount(mask) <= self.rank


@dataclass(frozen=True)
class Partition(Matroid):
    """At most ``capacities[b]`` items from each block; items outside every block are free."""

    n: int
    blocks: Tuple[frozenset, ...]
    capacities: Tuple[int, ...]
    _masks: Tuple[int, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        blocks = tuple(frozenset(b) for b in self.blocks)
        caps = tuple(int(c) for c in self.capacities)
        if len(blocks) != len(caps):
            raise ValueError("one capacity per block required")
        if any(c < 0 for c in caps):
            raise ValueError("capacities must be non-negative")
        seen: set = set()
        for b in blocks:
            if seen & b:
                raise ValueError("partition blocks must be disjoint")
            seen |= b
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "capacities", caps)
        object.__setattr__(self, "_masks", tuple(to_mask(b, self.n) for b in blocks))

    def independent(self, mask: int) -> bool:
        return all(popcount(mask & b) <= c for b, c in zip(self._masks, self.capacities))


def _downward_closed(family: frozenset) -> bool:
    for s in family:
        for j in iter_bits(s):
            if s & ~(1 << j) not in family:
                return False
    return True


def _exchange_violation(family: frozenset):
    by_size = sorted(family, key=popcount)
    for a in by_size:
        for b in by_size:
            if popcount(a) >= popcount(b):
                continue
            if not any(a | 1 << e in family for e in iter_bits(b & ~a)):
                return a, b
    return None


@dataclass(frozen=True)
class Explicit(Matroid):
    """Matroid given by its full list of independent sets (ground sets up to 16 items)."""

    n: int
    family: frozenset

    def __post_init__(self):
        if self.n > EXPLICIT_LIMIT:
            raise ValueError(f"explicit matroids are limited to {EXPLICIT_LIMIT} items")
        fam = frozenset(s if isinstance(s, int) else to_mask(s, self.n) for s in self.family)
        object.__setattr__(self, "family", fam)
        if 0 not in fam:
            raise ValueError("the empty set must be independent")
        if not _downward_closed(fam):
            raise ValueError("independent sets must be closed under taking subsets")
        if self.is_matroid:
            bad = _exchange_violation(fam)
            if bad is not None:
                a, b = bad
                raise ValueError(f"exchange property fails for {sorted(from_mask(a))} "
                                 f"and {sorted(from_mask(b))}")

    @classmethod
    def from_oracle(cls, m: Matroid):
        return cls(m.n, frozenset(s for s in range(1 << m.n) if m.independent(s)))

    @classmethod
    def from_sets(cls, n: int, sets: Iterable[Iterable[int]]):
        """Downward closure of ``sets`` (so listing the bases is enough)."""
        fam = {0}
        for s in sets:
            mask = to_mask(s, n)
            sub = mask
            while True:
                fam.add(sub)
                if sub == 0:
                    break
                sub = (sub - 1) & mask
        return cls(n, frozenset(fam))

    def independent(self, mask: int) -> bool:
        return mask in self.family


class DownwardClosed(Explicit):
    """Any subset-closed set system; the exchange property is not required."""

    is_matroid = False


@dataclass(frozen=True)
class RestrictedMatroid(Matroid):
    inner: Matroid
    items: Tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def is_matroid(self) -> bool:
        return self.inner.is_matroid

    def independent(self, mask: int) -> bool:
        out = 0
        for i in iter_bits(mask):
            out |= 1 << self.items[i]
        return self.inner.independent(out)


def restrict_matroid(m: Matroid, items: Sequence[int]) -> Matroid:
    items = tuple(items)
    if isinstance(m, Uniform):
        return Uniform(len(items), m.rank)
    if isinstance(m, Partition):
        where = {j: i for i, j in enumerate(items)}
        blocks = tuple(frozenset(where[j] for j in b if j in where) for b in m.blocks)
        return Partition(len(items), blocks, m.capacities)
    return RestrictedMatroid(m, items)


def is_independent(m: Matroid, items: Iterable[int]) -> bool:
    return m.independent(to_mask(items, m.n))


def common_independent_mask(matroids: Sequence[Matroid], mask: int) -> bool:
    return all(m.independent(mask) for m in matroids)


def is_common_independent(matroids: Sequence[Matroid], items: Iterable[int]) -> bool:
    items = list(items)
    if not matroids:
        return True
    n = matroids[0].n
    if any(m.n != n for m in matroids):
        raise ValueError("matroids are defined on different ground sets")
    return common_independent_mask(matroids, to_mask(items, n))
