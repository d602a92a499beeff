"""Instance generators: the 4/3 gap instance, the Sylvester tightness family and
its submodular lift, and seeded random families."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .greedy import ByPermutation, greedy_with_threshold
from .matroids import Matroid, Partition, Uniform
from .model import Allocation, Instance
from .valuation import (Additive, Coverage, DisjointSum, Table, check_submodular_monotone)

__all__ = [
    "gen_gap_instance", "sylvester", "SylvesterFamily", "gen_sylvester_additive",
    "LiftError", "LiftedInstance", "lift_preconditions", "lift_to_submodular",
    "asymptotic_ratio", "gen_random", "random_matroids", "MAX_SYLVESTER_N",
]

MAX_SYLVESTER_N = 6


# ------------------------------------------------------------------ gap instance

def gen_gap_instance() -> Instance:
    """Six items j1..j3, k1..k3 and three players; integral optimum 3, LP optimum 4."""

    def f(items: frozenset) -> int:
        if len(items) >= 3:
            return 4
        if len(items) == 2:
            a, b = sorted(items)
            return 4 if (a < 3) == (b < 3) else 3
        return 2 * len(items)

    table = Table.from_function(6, f)
    report = check_submodular_monotone(table)
    assert report.ok, report
    return Instance(table, m=3, labels=("j1", "j2", "j3", "k1", "k2", "k3"))


# ------------------------------------------------------------------ Sylvester family

def sylvester(count: int) -> List[int]:
    """First ``count`` Sylvester numbers: 2, 3, 7, 43, ..."""
    out: List[int] = []
    prod = 1
    for _ in range(count):
        out.append(prod + 1)
        prod *= out[-1]
    return out


@dataclass(frozen=True)
class SylvesterFamily:
    N: int
    s: Tuple[int, ...]
    S: Fraction
    delta: Fraction
    instance: Instance
    policy: ByPermutation
    greedy_reference: Allocation
    partial_reference: Allocation
    unallocated_item: int
    groups: Dict[str, Tuple[int, ...]]

    @property
    def mids_used(self) -> int:
        """Mid-size items consumed by the greedy reference (equals m)."""
        m = self.instance.m
        return m // 2 + sum(Fraction(m, 2 * si) for si in self.s[:-1]) + 1


def gen_sylvester_additive(N: int) -> SylvesterFamily:
    """Additive instance on which the greedy can be steered to 2 + delta.

    Items are laid out by decreasing size: m/2 large items, m mid items,
    then m/2 items for each of the first N-1 small groups and m/2 + 1 for the
    last.  The returned policy routes every item to the player that holds it
    in the greedy reference; any threshold above 2 + delta reproduces it.
    """
    if not isinstance(N, int) or not 1 <= N <= MAX_SYLVESTER_N:
        raise ValueError(f"N must be an integer in 1..{MAX_SYLVESTER_N}")
    s = sylvester(N)
    S = sum((Fraction(1, si - 1) for si in s), Fraction(0))
    delta = (2 - S) / (4 + 3 * S)
    m = 2 * (s[-1] - 1)
    h = m // 2
    # the identity the mid-item count relies on
    assert sum((Fraction(1, si) for si in s[:-1]), Fraction(0)) == 1 - Fraction(1, s[-1] - 1)

    weights: List[Fraction] = []
    labels: List[str] = []
    groups: Dict[str, Tuple[int, ...]] = {}

    def add(name: str, count: int, size: Fraction, tag: str):
        start = len(weights)
        weights.extend([size] * count)
        labels.extend(f"{tag}{k}" for k in range(count))
        groups[name] = tuple(range(start, start + count))

    add("large", h, 2 + delta, "L")
    add("mid", m, (3 - delta) / 2, "M")
    for i, si in enumerate(s, start=1):
        add(f"small{i}", h + (i == N), (1 + 3 * delta) / (2 * (si - 1)), f"S{i}_")

    owners: Dict[int, int] = {}
    bundles: List[List[int]] = [[] for _ in range(m)]
    large, mid = groups["large"], groups["mid"]
    for p in range(h):
        owners[large[p]] = p
        owners[mid[h + p]] = p
        owners[mid[p]] = h + p
    p = h
    for i, si in enumerate(s, start=1):
        items = groups[f"small{i}"]
        players = 1 if i == N else m // (2 * si)
        for k in range(players):
            for j in items[k * si:(k + 1) * si]:
                owners[j] = p + k
        p += players
    assert p == m
    for j, q in owners.items():
        bundles[q].append(j)
    assert len(owners) == len(weights)

    partial: List[List[int]] = []
    for k in range(h):
        partial.append([large[k]] + [groups[f"small{i}"][k] for i in range(1, N + 1)])
    for k in range(h):
        partial.append([mid[2 * k], mid[2 * k + 1]])
    unallocated = groups[f"small{N}"][-1]

    n = len(weights)
    inst = Instance(Additive(tuple(weights)), m=m, labels=tuple(labels))
    policy = ByPermutation(tuple(range(n)), tuple(range(m)), tuple(sorted(owners.items())))
    family = SylvesterFamily(
        N=N, s=tuple(s), S=S, delta=delta, instance=inst, policy=policy,
        greedy_reference=Allocation.from_bundles(bundles, n),
        partial_reference=Allocation.from_bundles(partial, n),
        unallocated_item=unallocated, groups=groups,
    )
    assert family.mids_used == m
    return family


# ------------------------------------------------------------------ lift

class LiftError(ValueError):
    pass


@dataclass(frozen=True)
class LiftedInstance:
    instance: Instance
    policy: ByPermutation
    copies: int
    s_prime: Fraction
    z_count: int
    special_player: int
    z_star: int
    reference: Allocation  # B*: every player at least 5
    target: Fraction  # value 2 + delta that caps the special player under greedy

    def copy_item(self, base_item: int, copy: int) -> int:
        return base_item * self.copies + copy

    def copy_player(self, base_player: int, copy: int) -> int:
        return base_player * self.copies + copy

    def z_item(self, player: int, i: int) -> int:
        return self.z_star - (self.special_player - player) * self.z_count + i


def lift_preconditions(inst: Instance, j: int, delta: Fraction, partial: Optional[Allocation],
                       policy: Optional[ByPermutation],
                       thresholds: Sequence[Fraction] = ()) -> List[str]:
    """Failed preconditions of the lift, as short descriptions (empty when all hold)."""
    failed = []
    f = inst.valuation
    if not isinstance(f, Additive):
        return ["valuation is not additive"]
    if delta < 0:
        failed.append("delta must be non-negative")
    if partial is None or partial.m != inst.m or partial.n != inst.n:
        failed.append("partial allocation: no partial allocation for this instance")
    else:
        if partial.owner_of(j) is not None:
            failed.append(f"partial allocation: item {j} is allocated in the partial allocation")
        if f.weights[j] <= 0:
            failed.append(f"partial allocation: item {j} has value 0")
        if partial.min_value(f) < 3 - delta:
            failed.append(f"partial allocation: only reaches {partial.min_value(f)}")
    if policy is None:
        failed.append("greedy run: no tie-break policy supplied")
    else:
        for tau in thresholds or (2 + delta + Fraction(1, 1000),):
            if tau <= 2 + delta:
                failed.append(f"greedy run: threshold {tau} is not above 2 + delta")
                continue
            alloc, _ = greedy_with_threshold(inst, tau, policy)
            if alloc.unallocated_mask:
                failed.append(f"greedy run: greedy at threshold {tau} leaves items unallocated")
    return failed


def lift_to_submodular(additive_inst: Instance, j: int, delta, *, partial: Allocation,
                       policy: ByPermutation, thresholds: Sequence[Fraction] = (),
                       samples: int = 200, seed: int = 0) -> LiftedInstance:
    """Coverage-style lift: optimum at least 5 while greedy can stay at 2 + delta.

    Copies the additive instance ceil(5/f(j)) times (item copy t of base item
    i has index i*c + t, likewise for players), adds per-player items z^p_i
    of value s' over a shared gadget and a saturating item z*, and one extra
    player p* that the supplied policy seeds with z*.
    """
    delta = Fraction(delta)
    failed = lift_preconditions(additive_inst, j, delta, partial, policy, thresholds)
    if failed:
        raise LiftError("; ".join(failed))
    weights = additive_inst.valuation.weights
    n, m = additive_inst.n, additive_inst.m
    c = math.ceil(Fraction(5) / weights[j])
    s_min = min(weights)
    if s_min <= 0:
        raise LiftError("zero-value items must be discarded before lifting")
    top = 2 + delta
    k = math.ceil(top / s_min)
    s_prime = top / k
    assert s_prime <= s_min and s_prime * k == top

    players = m * c
    p_star = players
    copy_weights = [weights[i] for i in range(n) for _ in range(c)]
    covers = [frozenset({i}) for _ in range(players) for i in range(k)]
    covers.append(frozenset(range(k)))
    gadget = Coverage(tuple([s_prime] * k), tuple(covers),
                      tuple(f"e{i}" for i in range(k)))
    f = DisjointSum((Additive(tuple(copy_weights)), gadget))
    base_items = n * c
    z_star = base_items + players * k

    labels = [f"{additive_inst.labels[i]}#{t}" for i in range(n) for t in range(c)]
    labels += [f"z{p}_{i}" for p in range(players) for i in range(k)]
    labels.append("z*")
    inst = Instance(f, m=players + 1, labels=tuple(labels))

    owners: List[Tuple[int, int]] = []
    for item, base_owner in policy.owners:
        for t in range(c):
            owners.append((item * c + t, base_owner * c + t))
    for p in range(players):
        owners.extend((base_items + p * k + i, p) for i in range(k))
    owners.append((z_star, p_star))
    base_item_order = [i * c + t for i in policy.items for t in range(c)]
    item_order = base_item_order + list(range(base_items, z_star + 1))
    player_order = [p * c + t for p in policy.players for t in range(c)] + [p_star]
    lifted_policy = ByPermutation(tuple(item_order), tuple(player_order), tuple(owners))

    reference: List[List[int]] = [[] for _ in range(players)]
    for p in range(m):
        base = sorted(partial.bundles[p])
        for t in range(c):
            q = p * c + t
            reference[q] = [i * c + t for i in base] + [base_items + q * k + i for i in range(k)]
    reference.append([j * c + t for t in range(c)])
    ref_alloc = Allocation.from_bundles(reference, inst.n)

    report = check_submodular_monotone(f, samples=samples, seed=seed)
    if not report.ok:
        raise LiftError(f"lifted function failed the sampled check: {report}")
    lifted = LiftedInstance(inst, lifted_policy, c, s_prime, k, p_star, z_star, ref_alloc, top)
    values = ref_alloc.values(f)
    if min(values) < 5:
        raise LiftError(f"reference allocation only reaches {min(values)}")
    return lifted


def asymptotic_ratio(terms: int = 8) -> float:
    """Limit of (2 + S)/(4 + 3S) as N grows, S the sum of 1/(s_i - 1)."""
    S = sum((Fraction(1, si - 1) for si in sylvester(terms)), Fraction(0))
    return float((2 + S) / (4 + 3 * S))


# ------------------------------------------------------------------ random families

def _rational(rng: random.Random, bound: int, integral: bool) -> Fraction:
    den = 1 if integral else rng.randint(1, 3)
    return Fraction(rng.randint(1, bound * den), den)


def gen_random(kind: str, n: int, m: int, seed: int, weight_bound: int = 5,
               integral: bool = False) -> Instance:
    """Seeded random instance; ``kind`` is ``"additive"`` or ``"coverage"``.

    Coverage instances draw every item's element set (non-empty) from a
    universe of 2n weighted elements.
    """
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    if weight_bound < 1:
        raise ValueError("weight bound must be at least 1")
    rng = random.Random(f"{kind}:{n}:{m}:{seed}:{weight_bound}:{integral}")
    if kind == "additive":
        f = Additive(tuple(_rational(rng, weight_bound, integral) for _ in range(n)))
    elif kind == "coverage":
        size = 2 * n
        weights = tuple(_rational(rng, weight_bound, integral) for _ in range(size))
        covers = []
        for _ in range(n):
            k = rng.randint(1, min(4, size))
            covers.append(frozenset(rng.sample(range(size), k)))
        f = Coverage(weights, tuple(covers), tuple(f"u{e}" for e in range(size)))
    else:
        raise ValueError(f"unknown instance kind {kind!r}")
    return Instance(f, m=m)


def random_matroids(n: int, seed: int, count: Optional[int] = None) -> Tuple[Matroid, ...]:
    """One or two seeded uniform/partition matroids on ``n`` items."""
    rng = random.Random(f"matroids:{n}:{seed}")
    count = rng.randint(1, 2) if count is None else count
    out: List[Matroid] = []
    for _ in range(count):
        if rng.random() < 0.5:
            out.append(Uniform(n, rng.randint(1, max(1, n - 1))))
        else:
            nblocks = rng.randint(1, min(3, n))
            assign = [rng.randrange(nblocks) for _ in range(n)]
            blocks = tuple(frozenset(j for j in range(n) if assign[j] == b) for b in range(nblocks))
            caps = tuple(rng.randint(1, max(1, len(b))) for b in blocks)
            out.append(Partition(n, blocks, caps))
    return tuple(out)
