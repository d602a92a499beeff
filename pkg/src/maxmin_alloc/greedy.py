"""Truncated max-sum greedy.

After seeding every player with one of the m largest singletons, the greedy
repeatedly hands out the (item, player) pair with the largest marginal gain,
considering only players whose bundle is still below the threshold.

Candidate pairs are ordered by gain first and then by the tie-break policy,
which is always item-major: compare item priority, then player priority for
that item.  This lets the main loop keep one lazy heap keyed by item.  Each
entry carries an upper bound on the item's gain for every still-eligible
player; bounds stay valid because bundles only grow and a player never
becomes eligible again.
"""
from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .model import Allocation, Instance
from .valuation import iter_bits, value_table

__all__ = [
    "TieBreakPolicy", "Lexicographic", "ByPermutation", "LEXICOGRAPHIC",
    "Step", "GreedyTrace", "ApproxResult", "Reduction",
    "greedy_with_threshold", "greedy_cardinality", "preprocess_big_items",
    "solve_approx", "candidate_thresholds", "replay_trace", "GreedyDiagnostics",
    "greedy_diagnostics",
]

logger = logging.getLogger(__name__)

GRID_LIMIT = 20


# ---------------------------------------------------------------- tie-breaking

class TieBreakPolicy:
    """Total order on (item, player) pairs, item-major."""

    def item_rank(self, j: int) -> int:
        raise NotImplementedError

    def player_rank(self, j: int, p: int) -> int:
        raise NotImplementedError

    def pair_key(self, j: int, p: int) -> Tuple[int, int]:
        return self.item_rank(j), self.player_rank(j, p)

    def base_rank(self, p: int) -> int:
        """Player priority before any per-item preference."""
        raise NotImplementedError

    def owner(self, j: int) -> Optional[int]:
        return None

    def player_order(self, j: int, players: Sequence[int]):
        """Iterate ``players`` (given in ``base_rank`` order) in pair order for item ``j``."""
        own = self.owner(j)
        if own is None or own not in players:
            yield from players
            return
        yield own
        for p in players:
            if p != own:
                yield p

    def restrict(self, items: Sequence[int], players: Sequence[int]) -> "TieBreakPolicy":
        raise NotImplementedError


@dataclass(frozen=True)
class Lexicographic(TieBreakPolicy):
    """Smallest item index first, then smallest player index."""

    def item_rank(self, j: int) -> int:
        return j

    def player_rank(self, j: int, p: int) -> int:
        return p

    def base_rank(self, p: int) -> int:
        return p

    def restrict(self, items, players):
        return self


LEXICOGRAPHIC = Lexicographic()


@dataclass(frozen=True)
class ByPermutation(TieBreakPolicy):
    """Explicit priorities.

    ``items`` and ``players`` list indices from most to least preferred.
    ``owners`` optionally names, per item, one player that is preferred over
    all others for that item; the remaining players follow ``players``.
    """

    items: Tuple[int, ...]
    players: Tuple[int, ...]
    owners: Tuple[Tuple[int, int], ...] = ()
    _item_rank: Dict[int, int] = field(default=None, repr=False, compare=False)
    _player_rank: Dict[int, int] = field(default=None, repr=False, compare=False)
    _owner: Dict[int, int] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        items, players = tuple(self.items), tuple(self.players)
        if sorted(items) != list(range(len(items))):
            raise ValueError("item priority must be a permutation of 0..n-1")
        if sorted(players) != list(range(len(players))):
            raise ValueError("player priority must be a permutation of 0..m-1")
        owners = self.owners
        if isinstance(owners, Mapping):
            owners = owners.items()
        owners = tuple(sorted((int(j), int(p)) for j, p in owners))
        for j, p in owners:
            if not (0 <= j < len(items) and 0 <= p < len(players)):
                raise ValueError(f"owner entry ({j}, {p}) out of range")
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "players", players)
        object.__setattr__(self, "owners", owners)
        object.__setattr__(self, "_item_rank", {j: r for r, j in enumerate(items)})
        object.__setattr__(self, "_player_rank", {p: r for r, p in enumerate(players)})
        object.__setattr__(self, "_owner", dict(owners))

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def m(self) -> int:
        return len(self.players)

    def owner(self, j: int) -> Optional[int]:
        return self._owner.get(j)

    def item_rank(self, j):
        return self._item_rank[j]

    def player_rank(self, j, p):
        if self._owner.get(j) == p:
            return -1
        return self._player_rank[p]

    def base_rank(self, p):
        return self._player_rank[p]

    def restrict(self, items, players):
        inew = {j: i for i, j in enumerate(items)}
        pnew = {p: i for i, p in enumerate(players)}
        return ByPermutation(
            tuple(inew[j] for j in self.items if j in inew),
            tuple(pnew[p] for p in self.players if p in pnew),
            tuple((inew[j], pnew[p]) for j, p in self.owners if j in inew and p in pnew),
        )


def _check_policy(inst: Instance, policy: TieBreakPolicy) -> None:
    if isinstance(policy, ByPermutation) and (policy.n != inst.n or policy.m != inst.m):
        raise ValueError(f"policy is for n={policy.n}, m={policy.m}; "
                         f"instance has n={inst.n}, m={inst.m}")


# ---------------------------------------------------------------- traces

@dataclass(frozen=True)
class Step:
    item: int
    player: int
    gain: Fraction


@dataclass(frozen=True)
class GreedyTrace:
    seeds: Tuple[Step, ...]
    steps: Tuple[Step, ...]
    threshold: Fraction
    fixed: Tuple[Tuple[int, int], ...] = ()

    def player_steps(self, p: int) -> List[Step]:
        return [s for s in self.seeds + self.steps if s.player == p]


@dataclass(frozen=True)
class ApproxResult:
    allocation: Allocation
    achieved_min: Fraction
    guessed_opt: Fraction
    threshold: Fraction
    trace: GreedyTrace


# ---------------------------------------------------------------- the greedy

def _run(inst: Instance, threshold: Fraction, policy: TieBreakPolicy,
         limit: int) -> Tuple[Allocation, GreedyTrace]:
    f = inst.valuation
    n, m = inst.n, inst.m
    threshold = Fraction(threshold)
    trackers = [f.tracker() for _ in range(m)]
    singles = [f.value(1 << j) for j in range(n)]
    order = sorted(range(n), key=lambda j: (-singles[j], policy.item_rank(j)))
    nseed = min(m, n, limit)

    by_rank = sorted(range(m), key=policy.base_rank)
    seeds = []
    unseeded = list(by_rank)
    for j in order[:nseed]:
        p = next(policy.player_order(j, unseeded))
        unseeded.remove(p)
        seeds.append(Step(j, p, trackers[p].add(j)))

    eligible = [p for p in by_rank if trackers[p].value < threshold]
    heap = [(-singles[j], policy.item_rank(j), j) for j in order[nseed:]]
    heapq.heapify(heap)
    steps = []
    allocated = nseed
    while heap and eligible and allocated < limit:
        neg_ub, rank, j = heapq.heappop(heap)
        ub = -neg_ub
        best_gain, best_p = None, None
        for p in policy.player_order(j, eligible):
            gain = trackers[p].marginal(j)
            if best_gain is None or gain > best_gain:
                best_gain, best_p = gain, p
                if gain == ub:
                    break
        if heap and (-best_gain, rank) > heap[0][:2]:
            heapq.heappush(heap, (-best_gain, rank, j))
            continue
        trackers[best_p].add(j)
        steps.append(Step(j, best_p, best_gain))
        allocated += 1
        if trackers[best_p].value >= threshold:
            eligible.remove(best_p)

    alloc = Allocation(tuple(t.mask for t in trackers), n)
    return alloc, GreedyTrace(tuple(seeds), tuple(steps), threshold)


def _no_matroids(inst: Instance) -> None:
    if inst.matroids:
        raise ValueError("greedy does not support matroids")


def greedy_with_threshold(inst: Instance, threshold, policy: TieBreakPolicy = LEXICOGRAPHIC
                          ) -> Tuple[Allocation, GreedyTrace]:
    """One run of the truncated max-sum greedy with a fixed threshold.

    >>> from maxmin_alloc.valuation import Additive
    >>> inst = Instance(Additive((3, 3, 2, 2, 2)), m=2)
    >>> alloc, trace = greedy_with_threshold(inst, Fraction(12, 5))
    >>> alloc.bundles, len(trace.steps)
    ((frozenset({0}), frozenset({1})), 0)
    """
    _no_matroids(inst)
    if inst.cardinality_cap is not None:
        raise ValueError("instance has a cardinality cap; use greedy_cardinality")
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    _check_policy(inst, policy)
    return _run(inst, threshold, policy, inst.n)


def greedy_cardinality(inst: Instance, threshold, policy: TieBreakPolicy = LEXICOGRAPHIC,
                       k: Optional[int] = None) -> Tuple[Allocation, GreedyTrace]:
    """Greedy that stops once ``k`` items (seeds included) are allocated.

    ``k`` defaults to the instance's cardinality cap.
    """
    _no_matroids(inst)
    k = inst.cardinality_cap if k is None else k
    if k is None:
        raise ValueError("no cardinality cap given")
    if k < 1:
        raise ValueError("cardinality cap must be at least 1")
    _check_policy(inst, policy)
    return _run(inst, threshold, policy, min(k, inst.n))


# ---------------------------------------------------------------- big items

@dataclass(frozen=True)
class Reduction:
    instance: Optional[Instance]
    fixed: Tuple[Tuple[int, int], ...]
    items: Tuple[int, ...]
    players: Tuple[int, ...]
    discarded: Tuple[int, ...]


def preprocess_big_items(inst: Instance, threshold) -> Reduction:
    """Give every item worth at least ``threshold`` on its own to a dedicated player.

    Big items are handed out in order of decreasing value (index breaks
    ties) to players 0, 1, ...; once players run out the rest of the big
    items, and all small items, are discarded.  The remaining players and
    small items form the reduced instance (``None`` when no player is left).
    """
    threshold = Fraction(threshold)
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    f = inst.valuation
    singles = [f.value(1 << j) for j in range(inst.n)]
    big = sorted((j for j in range(inst.n) if singles[j] >= threshold),
                 key=lambda j: (-singles[j], j))
    small = tuple(j for j in range(inst.n) if singles[j] < threshold)
    if not big:
        return Reduction(inst, (), tuple(range(inst.n)), tuple(range(inst.m)), ())
    kept = big[:inst.m]
    fixed = tuple((p, j) for p, j in enumerate(kept))
    rest_m = inst.m - len(kept)
    players = tuple(range(len(kept), inst.m))
    cap = inst.cardinality_cap
    if cap is not None:
        cap -= len(kept)
        if cap < 1:
            small = ()
        cap = min(cap, len(small)) if small else None
    if rest_m == 0:
        small = ()
    reduced = inst.restrict(small, m=rest_m, cardinality_cap=cap) if rest_m else None
    used = set(kept) | set(small)
    discarded = tuple(j for j in range(inst.n) if j not in used)
    return Reduction(reduced, fixed, tuple(small), players, discarded)


def _combine(inst: Instance, red: Reduction, alloc: Optional[Allocation],
             trace: Optional[GreedyTrace], threshold: Fraction) -> Tuple[Allocation, GreedyTrace]:
    masks = [0] * inst.m
    for p, j in red.fixed:
        masks[p] |= 1 << j
    seeds, steps = (), ()
    if alloc is not None:
        for local_p, bundle in enumerate(alloc.masks):
            p = red.players[local_p]
            for i in iter_bits(bundle):
                masks[p] |= 1 << red.items[i]

        def back(s: Step) -> Step:
            return Step(red.items[s.item], red.players[s.player], s.gain)

        seeds = tuple(back(s) for s in trace.seeds)
        steps = tuple(back(s) for s in trace.steps)
    return (Allocation(tuple(masks), inst.n),
            GreedyTrace(seeds, steps, threshold, red.fixed))


def _attempt(inst: Instance, threshold: Fraction, policy: TieBreakPolicy
             ) -> Tuple[Allocation, GreedyTrace]:
    red = preprocess_big_items(inst, threshold)
    if red.instance is None:
        return _combine(inst, red, None, None, threshold)
    sub_policy = policy.restrict(red.items, red.players)
    if red.instance.cardinality_cap is not None:
        alloc, trace = greedy_cardinality(red.instance, threshold, sub_policy)
    elif inst.cardinality_cap is not None:
        # the big items used up the whole cap
        alloc, trace = _run(red.instance, threshold, sub_policy, 0)
    else:
        alloc, trace = greedy_with_threshold(red.instance, threshold, sub_policy)
    return _combine(inst, red, alloc, trace, threshold)


def candidate_thresholds(inst: Instance) -> List[Fraction]:
    """Distinct positive bundle values not above a cheap bound on OPT, largest first.

    The bound is min(f(J), sum of singletons / m): bundles of an optimal
    allocation each reach OPT and subadditivity caps their total.
    """
    f = inst.valuation
    bound = min(f.value(f.full_mask()),
                sum((f.value(1 << j) for j in range(inst.n)), Fraction(0)) / inst.m)
    values = set(value_table(f))
    return sorted((v for v in values if 0 < v <= bound), reverse=True)


def solve_approx(inst: Instance, alpha, policy: TieBreakPolicy = LEXICOGRAPHIC) -> ApproxResult:
    """Search for a guess T of OPT at which the greedy reaches alpha * T.

    For n <= 20 every distinct bundle value up to a bound on OPT is a
    candidate; they are tried from the largest down and the first success is
    returned.  Greedy success is not known to be monotone in T, so this scan
    is exact: when the greedy succeeds at T = OPT the result is at least
    alpha * OPT.  Larger instances bisect on the grid of multiples of 1/D,
    with D a common denominator of all values, and re-run the result.
    """
    alpha = Fraction(alpha)
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    _no_matroids(inst)
    _check_policy(inst, policy)
    f = inst.valuation
    n, m = inst.n, inst.m
    total = f.value(f.full_mask())

    if m == 1:
        everything = total + 1
        if inst.cardinality_cap is not None:
            alloc, trace = greedy_cardinality(inst, everything, policy)
        else:
            alloc, trace = greedy_with_threshold(inst, everything, policy)
        return ApproxResult(alloc, alloc.min_value(f), alloc.min_value(f), alpha * alloc.min_value(f), trace)

    def attempt(T: Fraction):
        tau = alpha * T
        alloc, trace = _attempt(inst, tau, policy)
        return alloc, trace, alloc.min_value(f) >= tau

    if n >= m:
        if n <= GRID_LIMIT:
            for T in candidate_thresholds(inst):
                alloc, trace, ok = attempt(T)
                if ok:
                    return ApproxResult(alloc, alloc.min_value(f), T, alpha * T, trace)
        else:
            found = _bisect_integer_grid(inst, attempt)
            if found is not None:
                T, alloc, trace = found
                return ApproxResult(alloc, alloc.min_value(f), T, alpha * T, trace)

    zero = Fraction(0)
    if inst.cardinality_cap is not None:
        alloc, trace = greedy_cardinality(inst, zero, policy)
    else:
        alloc, trace = greedy_with_threshold(inst, zero, policy)
    return ApproxResult(alloc, alloc.min_value(f), zero, zero, trace)


def _bisect_integer_grid(inst: Instance, attempt):
    f = inst.valuation
    d = f.denominator()
    bound = min(f.value(f.full_mask()),
                sum((f.value(1 << j) for j in range(inst.n)), Fraction(0)) / inst.m)
    lo, hi = 1, math.floor(bound * d)
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        T = Fraction(mid, d)
        alloc, trace, ok = attempt(T)
        if ok:
            best = (T, alloc, trace)
            lo = mid + 1
        else:
            hi = mid - 1
    if best is None:
        return None
    T = best[0]
    alloc, trace, ok = attempt(T)
    if not ok:  # pragma: no cover - attempts are deterministic
        raise RuntimeError("greedy result changed on re-validation")
    logger.debug("bisection settled on T=%s", T)
    return T, alloc, trace


# ---------------------------------------------------------------- checking runs

def replay_trace(inst: Instance, trace: GreedyTrace, policy: TieBreakPolicy = LEXICOGRAPHIC,
                 limit: Optional[int] = None) -> List[str]:
    """Re-run a trace with brute-force argmax checks; returns a list of problems."""
    f = inst.valuation
    n, m = inst.n, inst.m
    limit = n if limit is None else limit
    problems = []
    masks = [0] * m
    singles = [f.value(1 << j) for j in range(n)]
    nseed = min(m, n, limit)
    top = sorted(range(n), key=lambda j: (-singles[j], policy.item_rank(j)))[:nseed]
    if sorted(s.item for s in trace.seeds) != sorted(top):
        problems.append("seed items are not the largest singletons")
    for s in trace.seeds:
        masks[s.player] |= 1 << s.item
    available = set(range(n)) - {s.item for s in trace.seeds}
    for idx, s in enumerate(trace.steps):
        cands = []
        for p in range(m):
            fp = f.value(masks[p])
            if fp >= trace.threshold:
                continue
            for j in available:
                gain = f.value(masks[p] | 1 << j) - fp
                cands.append((-gain, policy.pair_key(j, p), j, p))
        if not cands:
            problems.append(f"step {idx}: no eligible pair")
            break
        _, _, j, p = min(cands)
        if (j, p) != (s.item, s.player):
            problems.append(f"step {idx}: expected ({j}, {p}), trace has ({s.item}, {s.player})")
        if f.value(masks[s.player] | 1 << s.item) - f.value(masks[s.player]) != s.gain:
            problems.append(f"step {idx}: recorded gain is wrong")
        masks[s.player] |= 1 << s.item
        available.discard(s.item)
    return problems


@dataclass(frozen=True)
class GreedyDiagnostics:
    """Per-run inequalities of a greedy allocation, with q the lowest min player."""

    q: int
    below_threshold: bool
    bundle_bound: bool
    lhs_gain_sum: Fraction
    rhs_others_sum: Fraction
    gain_sum_bound: Optional[bool]
    opt_min: Fraction
    average_bound: Optional[bool]

    @property
    def ok(self) -> bool:
        return self.bundle_bound and self.gain_sum_bound is not False and self.average_bound is not False


def greedy_diagnostics(inst: Instance, alloc: Allocation, threshold,
                       reference: Allocation) -> GreedyDiagnostics:
    """Check the per-run inequalities of a greedy allocation against ``reference``.

    * every bundle is at most threshold + the largest singleton value;
    * if the min player q is below the threshold, the gains of all items of
      ``reference`` on top of q's bundle sum to at most the total value of
      the other bundles;
    * in that case also (when n >= m) the reference min value is strictly
      below f(A_q) plus the average bundle value.

    The last two are ``None`` when q reached the threshold.
    """
    f = inst.valuation
    threshold = Fraction(threshold)
    vals = alloc.values(f)
    q = vals.index(min(vals))
    big = max((f.value(1 << j) for j in range(inst.n)), default=Fraction(0))
    bundle_bound = all(v <= threshold + big for v in vals)
    aq = alloc.masks[q]
    fq = vals[q]
    lhs = Fraction(0)
    for b in reference.masks:
        for j in iter_bits(b):
            if not aq >> j & 1:
                lhs += f.value(aq | 1 << j) - fq
    rhs = sum(vals) - fq
    opt_min = reference.min_value(f)
    below = fq < threshold
    gain_ok = avg_ok = None
    if below:
        gain_ok = lhs <= rhs
        if inst.n >= inst.m:
            avg_ok = opt_min < fq + Fraction(sum(vals), inst.m)
    return GreedyDiagnostics(q, below, bundle_bound, lhs, rhs, gain_ok, opt_min, avg_ok)
