"""Exact set-function core.

Every valuation is a monotone set function over a ground set ``0..n-1`` that
returns :class:`fractions.Fraction` values.  Item sets are passed to the
public helpers as iterables of item indices; internally they are bit masks
(bit ``j`` set iff item ``j`` is in the set), which is what
:meth:`SetFunction.value` consumes.

For incremental work (greedy runs, exhaustive scans) each function can hand
out a :class:`Tracker`, a small mutable evaluator for one growing set.
Trackers are local to the caller, so functions themselves stay immutable.
"""
from __future__ import annotations

import math
from collections import Counter
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence, Tuple

__all__ = [
    "Value", "parse_value", "render_value", "as_value",
    "to_mask", "from_mask", "iter_bits", "popcount",
    "SetFunction", "Additive", "Coverage", "Table", "Truncated", "Augmented",
    "DisjointSum", "Restricted", "Tracker",
    "evaluate", "marginal", "marginal_set", "remove_marginal",
    "value_table", "SubmodularityReport", "check_submodular_monotone",
    "EXHAUSTIVE_LIMIT", "TABLE_LIMIT",
]

Value = Fraction

TABLE_LIMIT = 24
EXHAUSTIVE_LIMIT = 24

_VALUE_RE = re.compile(r"^\s*(-?\d+)(?:\s*/\s*(\d+))?\s*$")


def parse_value(text: str) -> Fraction:
    """Parse ``"p/q"`` or ``"p"``; decimals and floats are rejected."""
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"expected a 'p/q' string, got {text!r}")
    match = _VALUE_RE.match(text)
    if match is None:
        raise ValueError(f"not an exact rational: {text!r}")
    num, den = match.groups()
    if den is not None and int(den) == 0:
        raise ValueError(f"zero denominator: {text!r}")
    return Fraction(int(num), int(den) if den else 1)


def render_value(v) -> str:
    v = Fraction(v)
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


def as_value(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, bool):
        raise TypeError("booleans are not values")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return parse_value(v)
    raise TypeError(f"refusing inexact value {v!r}; use int, Fraction or 'p/q'")


# ---------------------------------------------------------------- bit masks

def to_mask(items: Iterable[int], n: Optional[int] = None) -> int:
    mask = 0
    for j in items:
        if j < 0 or (n is not None and j >= n):
            raise IndexError(f"item {j} outside ground set of size {n}")
        mask |= 1 << j
    return mask


def iter_bits(mask: int) -> Iterator[int]:
    """Indices of set bits, ascending."""
    if mask.bit_count() <= 32:
        while mask:
            low = mask & -mask
            yield low.bit_length() - 1
            mask ^= low
        return
    # dense long masks: scanning the binary string is linear, not quadratic
    digits = bin(mask)[:1:-1]
    pos = digits.find("1")
    while pos >= 0:
        yield pos
        pos = digits.find("1", pos + 1)


def from_mask(mask: int) -> frozenset:
    return frozenset(iter_bits(mask))


def popcount(mask: int) -> int:
    return mask.bit_count()


# ---------------------------------------------------------------- trackers

class Tracker:
    """Incremental evaluator for a single growing set.

    The generic version re-evaluates through ``f.value``; variants override
    it where a cheaper incremental rule exists.
    """

    __slots__ = ("f", "mask", "value")

    def __init__(self, f: "SetFunction", mask: int = 0):
        self.f = f
        self.mask = 0
        self.value = Fraction(0)
        if mask:
            self.mask = mask
            self.value = f.value(mask)

    def marginal(self, j: int) -> Fraction:
        bit = 1 << j
        if self.mask & bit:
            return Fraction(0)
        return self.f.value(self.mask | bit) - self.value

    def add(self, j: int) -> Fraction:
        gain = self.marginal(j)
        self.mask |= 1 << j
        self.value += gain
        return gain


class SetFunction:
    """Base class: a monotone set function on ``n`` items with f(empty) = 0."""

    n: int

    def value(self, mask: int) -> Fraction:  # pragma: no cover - abstract
        raise NotImplementedError

    def tracker(self, mask: int = 0) -> Tracker:
        return Tracker(self, mask)

    def denominator(self) -> int:
        """An integer D with D*f(S) integral for every S."""
        raise NotImplementedError

    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def _check_mask(self, mask: int) -> None:
        if mask < 0 or mask >> self.n:
            raise IndexError(f"set uses items outside ground set of size {self.n}")

    def __call__(self, items: Iterable[int]) -> Fraction:
        return evaluate(self, items)


def _lcm_all(values: Iterable[Fraction]) -> int:
    d = 1
    for v in values:
        d = math.lcm(d, Fraction(v).denominator)
    return d


def _mask_weight(weights: Sequence[Fraction], mask: int) -> Fraction:
    if mask.bit_count() <= 32:
        total = Fraction(0)
        for e in iter_bits(mask):
            total += weights[e]
        return total
    counts = Counter(weights[e] for e in iter_bits(mask))
    return sum((w * c for w, c in counts.items()), Fraction(0))


@dataclass(frozen=True)
class Additive(SetFunction):
    weights: Tuple[Fraction, ...]

    def __post_init__(self):
        w = tuple(as_value(x) for x in self.weights)
        if any(x < 0 for x in w):
            raise ValueError("additive weights must be non-negative")
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return len(self.weights)

    def value(self, mask: int) -> Fraction:
        self._check_mask(mask)
        return _mask_weight(self.weights, mask)

    def tracker(self, mask: int = 0) -> Tracker:
        return _AdditiveTracker(self, mask)

    def denominator(self) -> int:
        return _lcm_all(self.weights)


class _AdditiveTracker(Tracker):
    __slots__ = ()

    def marginal(self, j: int) -> Fraction:
        if self.mask >> j & 1:
            return Fraction(0)
        return self.f.weights[j]


@dataclass(frozen=True)
class Coverage(SetFunction):
    """Weighted coverage: f(S) is the weight of the union of the items' element sets."""

    weights: Tuple[Fraction, ...]
    covers: Tuple[frozenset, ...]
    element_labels: Optional[Tuple[str, ...]] = None
    _cover_masks: Tuple[int, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        w = tuple(as_value(x) for x in self.weights)
        if any(x < 0 for x in w):
            raise ValueError("coverage weights must be non-negative")
        covers = tuple(frozenset(c) for c in self.covers)
        for c in covers:
            for e in c:
                if not 0 <= e < len(w):
                    raise IndexError(f"element {e} outside universe of size {len(w)}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "covers", covers)
        if self.element_labels is not None:
            labels = tuple(self.element_labels)
            if len(labels) != len(w):
                raise ValueError("one label per universe element required")
            object.__setattr__(self, "element_labels", labels)
        object.__setattr__(self, "_cover_masks", tuple(to_mask(c) for c in covers))

    @property
    def n(self) -> int:
        return len(self.covers)

    def covered(self, mask: int) -> int:
        out = 0
        masks = self._cover_masks
        for j in iter_bits(mask):
            out |= masks[j]
        return out

    def value(self, mask: int) -> Fraction:
        self._check_mask(mask)
        return _mask_weight(self.weights, self.covered(mask))

    def tracker(self, mask: int = 0) -> Tracker:
        return _CoverageTracker(self, mask)

    def denominator(self) -> int:
        return _lcm_all(self.weights)


class _CoverageTracker(Tracker):
    __slots__ = ("elements",)

    def __init__(self, f: Coverage, mask: int = 0):
        super().__init__(f, mask)
        self.elements = f.covered(mask)

    def marginal(self, j: int) -> Fraction:
        if self.mask >> j & 1:
            return Fraction(0)
        return _mask_weight(self.f.weights, self.f._cover_masks[j] & ~self.elements)

    def add(self, j: int) -> Fraction:
        gain = self.marginal(j)
        self.mask |= 1 << j
        self.elements |= self.f._cover_masks[j]
        self.value += gain
        return gain


@dataclass(frozen=True)
class Table(SetFunction):
    """Explicit value for every subset; ``values[mask]`` is f of that subset."""

    values: Tuple[Fraction, ...]

    def __post_init__(self):
        vals = tuple(as_value(x) for x in self.values)
        size = len(vals)
        n = size.bit_length() - 1
        if size == 0 or 1 << n != size:
            raise ValueError("table must list 2**n values")
        if n > TABLE_LIMIT:
            raise ValueError(f"table ground set limited to {TABLE_LIMIT} items")
        base = vals[0]
        if base != 0:
            vals = tuple(v - base for v in vals)
        if any(v < 0 for v in vals):
            raise ValueError("table values must be non-negative")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, n: int, fn) -> "Table":
        """Tabulate ``fn(frozenset_of_items)`` over all subsets of ``range(n)``."""
        return cls(tuple(fn(from_mask(mask)) for mask in range(1 << n)))

    @classmethod
    def from_mapping(cls, n: int, mapping) -> "Table":
        """Build from ``{iterable_of_items: value}``; unlisted subsets raise."""
        vals: list = [None] * (1 << n)
        vals[0] = Fraction(0)
        for key, v in mapping.items():
            vals[to_mask(key, n)] = as_value(v)
        missing = [m for m, v in enumerate(vals) if v is None]
        if missing:
            raise ValueError(f"table missing subset {sorted(from_mask(missing[0]))}")
        return cls(tuple(vals))

    @property
    def n(self) -> int:
        return len(self.values).bit_length() - 1

    def value(self, mask: int) -> Fraction:
        self._check_mask(mask)
        return self.values[mask]

    def denominator(self) -> int:
        return _lcm_all(self.values)


@dataclass(frozen=True)
class Truncated(SetFunction):
    inner: SetFunction
    cap: Fraction

    def __post_init__(self):
        object.__setattr__(self, "cap", as_value(self.cap))
        if self.cap < 0:
            raise ValueError("truncation cap must be non-negative")

    @property
    def n(self) -> int:
        return self.inner.n

    def value(self, mask: int) -> Fraction:
        return min(self.cap, self.inner.value(mask))

    def tracker(self, mask: int = 0) -> Tracker:
        return _TruncatedTracker(self, mask)

    def denominator(self) -> int:
        return math.lcm(self.inner.denominator(), self.cap.denominator)


class _TruncatedTracker(Tracker):
    __slots__ = ("inner",)

    def __init__(self, f: Truncated, mask: int = 0):
        self.f = f
        self.inner = f.inner.tracker(mask)
        self.mask = mask
        self.value = min(f.cap, self.inner.value)

    def marginal(self, j: int) -> Fraction:
        if self.value >= self.f.cap:
            return Fraction(0)
        return min(self.f.cap, self.inner.value + self.inner.marginal(j)) - self.value

    def add(self, j: int) -> Fraction:
        before = self.value
        self.inner.add(j)
        self.mask |= 1 << j
        self.value = min(self.f.cap, self.inner.value)
        return self.value - before


@dataclass(frozen=True)
class Augmented(SetFunction):
    """``inner`` plus one new item (index ``inner.n``) that adds ``bonus`` to any set."""

    inner: SetFunction
    bonus: Fraction

    def __post_init__(self):
        object.__setattr__(self, "bonus", as_value(self.bonus))

    @property
    def n(self) -> int:
        return self.inner.n + 1

    @property
    def new_item(self) -> int:
        return self.inner.n

    def value(self, mask: int) -> Fraction:
        self._check_mask(mask)
        z = self.inner.n
        base = self.inner.value(mask & ((1 << z) - 1))
        return base + self.bonus if mask >> z & 1 else base

    def denominator(self) -> int:
        return math.lcm(self.inner.denominator(), self.bonus.denominator)


@dataclass(frozen=True)
class DisjointSum(SetFunction):
    """Sum of functions on consecutive blocks of the ground set."""

    parts: Tuple[SetFunction, ...]
    _offsets: Tuple[int, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("disjoint sum needs at least one part")
        offsets, acc = [], 0
        for p in parts:
            offsets.append(acc)
            acc += p.n
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "_offsets", tuple(offsets))

    @property
    def n(self) -> int:
        return self._offsets[-1] + self.parts[-1].n

    def split(self, mask: int) -> list:
        return [(mask >> off) & ((1 << p.n) - 1) for p, off in zip(self.parts, self._offsets)]

    def locate(self, j: int) -> Tuple[int, int]:
        """Return ``(part index, local item index)`` for global item ``j``."""
        lo, hi = 0, len(self._offsets) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self._offsets[mid] <= j:
                lo = mid
            else:
                hi = mid - 1
        return lo, j - self._offsets[lo]

    def value(self, mask: int) -> Fraction:
        self._check_mask(mask)
        return sum((p.value(sub) for p, sub in zip(self.parts, self.split(mask))), Fraction(0))

    def tracker(self, mask: int = 0) -> Tracker:
        return _SumTracker(self, mask)

    def denominator(self) -> int:
        d = 1
        for p in self.parts:
            d = math.lcm(d, p.denominator())
        return d


class _SumTracker(Tracker):
    __slots__ = ("subs",)

    def __init__(self, f: DisjointSum, mask: int = 0):
        self.f = f
        self.mask = mask
        self.subs = [p.tracker(sub) for p, sub in zip(f.parts, f.split(mask))]
        self.value = sum((t.value for t in self.subs), Fraction(0))

    def marginal(self, j: int) -> Fraction:
        k, local = self.f.locate(j)
        return self.subs[k].marginal(local)

    def add(self, j: int) -> Fraction:
        k, local = self.f.locate(j)
        gain = self.subs[k].add(local)
        self.mask |= 1 << j
        self.value += gain
        return gain


@dataclass(frozen=True)
class Restricted(SetFunction):
    """``inner`` restricted to ``items``; local item ``i`` is ``items[i]`` of ``inner``."""

    inner: SetFunction
    items: Tuple[int, ...]

    def __post_init__(self):
        items = tuple(self.items)
        if len(set(items)) != len(items):
            raise ValueError("restriction items must be distinct")
        for j in items:
            if not 0 <= j < self.inner.n:
                raise IndexError(f"item {j} outside ground set of size {self.inner.n}")
        object.__setattr__(self, "items", items)

    @property
    def n(self) -> int:
        return len(self.items)

    def lift(self, mask: int) -> int:
        out = 0
        for i in iter_bits(mask):
            out |= 1 << self.items[i]
        return out

    def value(self, mask: int) -> Fraction:
        self._check_mask(mask)
        return self.inner.value(self.lift(mask))

    def tracker(self, mask: int = 0) -> Tracker:
        return _RestrictedTracker(self, mask)

    def denominator(self) -> int:
        return self.inner.denominator()


class _RestrictedTracker(Tracker):
    __slots__ = ("inner",)

    def __init__(self, f: Restricted, mask: int = 0):
        self.f = f
        self.mask = mask
        self.inner = f.inner.tracker(f.lift(mask))
        self.value = self.inner.value

    def marginal(self, j: int) -> Fraction:
        return self.inner.marginal(self.f.items[j])

    def add(self, j: int) -> Fraction:
        gain = self.inner.add(self.f.items[j])
        self.mask |= 1 << j
        self.value = self.inner.value
        return gain


# ---------------------------------------------------------------- oracle ops

def evaluate(f: SetFunction, items: Iterable[int]) -> Fraction:
    return f.value(to_mask(items, f.n))


def marginal(f: SetFunction, j: int, items: Iterable[int]) -> Fraction:
    """Gain f(S + j) - f(S); zero when ``j`` is already in S."""
    if not 0 <= j < f.n:
        raise IndexError(f"item {j} outside ground set of size {f.n}")
    mask = to_mask(items, f.n)
    if mask >> j & 1:
        return Fraction(0)
    return f.value(mask | 1 << j) - f.value(mask)


def marginal_set(f: SetFunction, s_items: Iterable[int], t_items: Iterable[int]) -> Fraction:
    """Gain f(S | T) - f(T) of adding the whole set S on top of T."""
    s = to_mask(s_items, f.n)
    t = to_mask(t_items, f.n)
    return f.value(s | t) - f.value(t)


def remove_marginal(f: SetFunction, j: int, items: Iterable[int]) -> Fraction:
    """Loss f(S) - f(S - j) of taking ``j`` out of S."""
    mask = to_mask(items, f.n)
    if not mask >> j & 1:
        raise ValueError(f"item {j} is not in the set")
    return f.value(mask) - f.value(mask & ~(1 << j))


def value_table(f: SetFunction) -> list:
    """All 2**n values, indexed by mask."""
    if f.n > TABLE_LIMIT:
        raise ValueError(f"cannot tabulate {f.n} items (limit {TABLE_LIMIT})")
    if isinstance(f, Table):
        return list(f.values)
    return [f.value(mask) for mask in range(1 << f.n)]


# ---------------------------------------------------------------- checking

@dataclass(frozen=True)
class SubmodularityReport:
    submodular: bool
    monotone: bool
    witness: Optional[Tuple[int, frozenset, frozenset]] = None
    monotone_witness: Optional[Tuple[frozenset, frozenset]] = None
    mode: str = "exhaustive"
    checked: int = 0

    @property
    def ok(self) -> bool:
        return self.submodular and self.monotone


def check_submodular_monotone(f: SetFunction, samples: Optional[int] = None,
                              seed: int = 0) -> SubmodularityReport:
    """Check diminishing returns and monotonicity.

    Without ``samples`` the check is exhaustive and uses the local form: for
    every S, every k outside S and every j outside S + k,
    ``marginal(j | S) >= marginal(j | S + k)``.  This is equivalent to the
    condition over all pairs S <= T.  The first violation in the order
    (S by mask, then k, then j) is returned as ``(j, S, S + k)``.

    With ``samples`` random triples (j, S, T) with S <= T are drawn from
    ``random.Random(seed)``.
    """
    n = f.n
    if samples is None:
        if n > EXHAUSTIVE_LIMIT:
            raise ValueError(f"ground set of {n} items is too large for an exhaustive "
                             f"check; pass samples=")
        return _check_exhaustive(f)
    return _check_sampled(f, samples, seed)


def _check_exhaustive(f: SetFunction) -> SubmodularityReport:
    n = f.n
    table = value_table(f)
    witness = mono = None
    checked = 0
    for s in range(1 << n):
        fs = table[s]
        for k in range(n):
            kb = 1 << k
            if s & kb:
                continue
            t = s | kb
            if mono is None and table[t] < fs:
                mono = (from_mask(s), from_mask(t))
            if witness is not None:
                continue
            ft = table[t]
            for j in range(n):
                jb = 1 << j
                if t & jb:
                    continue
                checked += 1
                if table[s | jb] - fs < table[t | jb] - ft:
                    witness = (j, from_mask(s), from_mask(t))
                    break
        if witness is not None and mono is not None:
            break
    return SubmodularityReport(witness is None, mono is None, witness, mono,
                               "exhaustive", checked)


def _check_sampled(f: SetFunction, samples: int, seed: int) -> SubmodularityReport:
    if samples < 1:
        raise ValueError("samples must be positive")
    n = f.n
    rng = random.Random(seed)
    witness = mono = None
    for _ in range(samples):
        t = rng.getrandbits(n) if n else 0
        s = t & (rng.getrandbits(n) if n else 0)
        ft, fs = f.value(t), f.value(s)
        if mono is None and ft < fs:
            mono = (from_mask(s), from_mask(t))
        outside = [j for j in range(n) if not t >> j & 1]
        if outside and witness is None:
            j = rng.choice(outside)
            jb = 1 << j
            if f.value(s | jb) - fs < f.value(t | jb) - ft:
                witness = (j, from_mask(s), from_mask(t))
    return SubmodularityReport(witness is None, mono is None, witness, mono,
                               "sampled", samples)
