"""Problem instances and (partial) allocations."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple

from .matroids import Matroid, common_independent_mask, restrict_matroid
from .valuation import Restricted, SetFunction, from_mask, to_mask

__all__ = ["Instance", "Allocation"]


@dataclass(frozen=True)
class Instance:
    valuation: SetFunction
    m: int
    labels: Tuple[str, ...] = ()
    matroids: Tuple[Matroid, ...] = ()
    cardinality_cap: Optional[int] = None

    def __post_init__(self):
        n = self.valuation.n
        labels = tuple(self.labels) or tuple(f"i{j}" for j in range(n))
        if len(labels) != n:
            raise ValueError(f"{len(labels)} labels for {n} items")
        if len(set(labels)) != n:
            raise ValueError("item labels must be unique")
        if self.m < 1:
            raise ValueError("an instance needs at least one player")
        matroids = tuple(self.matroids)
        for mat in matroids:
            if mat.n != n:
                raise ValueError(f"matroid on {mat.n} items, valuation on {n}")
        cap = self.cardinality_cap
        if cap is not None and not 1 <= cap <= n:
            raise ValueError(f"cardinality cap must lie in 1..{n}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "matroids", matroids)

    @property
    def n(self) -> int:
        return self.valuation.n

    def independent(self, mask: int) -> bool:
        return common_independent_mask(self.matroids, mask)

    def value(self, items: Iterable[int]) -> Fraction:
        return self.valuation.value(to_mask(items, self.n))

    def replace(self, **changes) -> "Instance":
        fields = dict(valuation=self.valuation, m=self.m, labels=self.labels,
                      matroids=self.matroids, cardinality_cap=self.cardinality_cap)
        fields.update(changes)
        return Instance(**fields)

    def restrict(self, items: Sequence[int], m: Optional[int] = None,
                 cardinality_cap: Optional[int] = None) -> "Instance":
        """Sub-instance on ``items`` (re-indexed in the given order)."""
        items = tuple(items)
        return Instance(
            valuation=Restricted(self.valuation, items),
            m=self.m if m is None else m,
            labels=tuple(self.labels[j] for j in items),
            matroids=tuple(restrict_matroid(mat, items) for mat in self.matroids),
            cardinality_cap=cardinality_cap,
        )


@dataclass(frozen=True)
class Allocation:
    """Disjoint bundles, one per player, plus the unallocated rest of the ground set."""

    masks: Tuple[int, ...]
    n: int
    _unallocated: int = field(default=0, repr=False, compare=False)

    def __post_init__(self):
        masks = tuple(int(b) for b in self.masks)
        seen = 0
        for b in masks:
            if b < 0 or b >> self.n:
                raise IndexError("bundle uses items outside the ground set")
            if seen & b:
                raise ValueError("bundles overlap")
            seen |= b
        object.__setattr__(self, "masks", masks)
        object.__setattr__(self, "_unallocated", ((1 << self.n) - 1) & ~seen)

    @classmethod
    def from_bundles(cls, bundles: Iterable[Iterable[int]], n: int) -> "Allocation":
        return cls(tuple(to_mask(b, n) for b in bundles), n)

    @property
    def m(self) -> int:
        return len(self.masks)

    @property
    def bundles(self) -> Tuple[frozenset, ...]:
        return tuple(from_mask(b) for b in self.masks)

    @property
    def unallocated(self) -> frozenset:
        return from_mask(self._unallocated)

    @property
    def unallocated_mask(self) -> int:
        return self._unallocated

    @property
    def allocated_count(self) -> int:
        return self.n - bin(self._unallocated).count("1")

    def values(self, f: SetFunction) -> Tuple[Fraction, ...]:
        return tuple(f.value(b) for b in self.masks)

    def min_value(self, f: SetFunction) -> Fraction:
        return min(self.values(f)) if self.masks else Fraction(0)

    def min_player(self, f: SetFunction) -> int:
        """Lowest-indexed player whose bundle attains the minimum."""
        vals = self.values(f)
        return vals.index(min(vals))

    def feasible_for(self, inst: Instance) -> bool:
        if self.n != inst.n or self.m != inst.m:
            return False
        if not all(inst.independent(b) for b in self.masks):
            return False
        cap = inst.cardinality_cap
        return cap is None or self.allocated_count <= cap

    def owner_of(self, j: int) -> Optional[int]:
        for p, b in enumerate(self.masks):
            if b >> j & 1:
                return p
        return None
