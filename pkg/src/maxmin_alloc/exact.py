"""Brute-force oracles for desk-scale instances.

Assignments are enumerated item by item in index order.  Because all players
share one valuation, player labels are interchangeable: an item may only go
to a player that already holds something or to the next fresh player, which
removes up to m! symmetric copies.  When skipping items is allowed (matroid
constraints or a cardinality cap) the option "unallocated" is tried last.
"""
from __future__ import annotations

import os
from fractions import Fraction
from typing import Callable, Iterator, List, Optional, Tuple

from .model import Allocation, Instance
from .valuation import TABLE_LIMIT, from_mask, value_table

__all__ = [
    "BudgetExceeded", "DEFAULT_BUDGET", "default_budget", "opt_maxmin",
    "opt_truncated_maxsum", "enumerate_configurations", "search_space",
]

DEFAULT_BUDGET = 10 ** 8
CONFIG_LIMIT = 24


class BudgetExceeded(RuntimeError):
    """The enumeration would exceed the configured state budget."""


def default_budget() -> int:
    env = os.environ.get("MAXMIN_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


def _skippable(inst: Instance) -> bool:
    return bool(inst.matroids) or inst.cardinality_cap is not None


def search_space(inst: Instance) -> int:
    """Number of raw assignment vectors, before symmetry pruning."""
    return (inst.m + _skippable(inst)) ** inst.n


def _check_budget(inst: Instance, budget: Optional[int]) -> None:
    budget = default_budget() if budget is None else budget
    states = search_space(inst)
    if states > budget:
        raise BudgetExceeded(f"{states} assignment states for n={inst.n}, m={inst.m} "
                             f"exceed the budget of {budget}")


def _evaluator(inst: Instance) -> Callable[[int], Fraction]:
    if inst.n <= min(TABLE_LIMIT, 16):
        return value_table(inst.valuation).__getitem__
    return inst.valuation.value


def _search(inst: Instance, objective, bound) -> Tuple[Optional[Fraction], Optional[List[int]]]:
    """Depth-first search returning the first assignment with the best objective.

    ``objective(bundles)`` scores a complete assignment and
    ``bound(bundles, opened, rest)`` must upper-bound every completion.
    Subtrees whose bound does not beat the incumbent are cut, so among equal
    scores the lexicographically smallest assignment vector wins.
    """
    n, m = inst.n, inst.m
    skip = _skippable(inst)
    cap = inst.cardinality_cap if inst.cardinality_cap is not None else n
    matroids = inst.matroids
    bundles = [0] * m
    best: List = [None, None]

    def rec(j: int, opened: int, used: int) -> None:
        if j == n:
            score = objective(bundles)
            if best[0] is None or score > best[0]:
                best[0], best[1] = score, list(bundles)
            return
        rest = ((1 << n) - 1) & ~((1 << j) - 1)
        if best[0] is not None and bound(bundles, opened, rest) <= best[0]:
            return
        bit = 1 << j
        if used < cap:
            for p in range(min(opened + 1, m)):
                cand = bundles[p] | bit
                if matroids and not all(mat.independent(cand) for mat in matroids):
                    continue
                bundles[p] = cand
                rec(j + 1, max(opened, p + 1), used + 1)
                bundles[p] ^= bit
        if skip:
            rec(j + 1, opened, used)

    rec(0, 0, 0)
    return best[0], best[1]


def opt_maxmin(inst: Instance, budget: Optional[int] = None) -> Tuple[Fraction, Allocation]:
    """Exact max-min value and a witness allocation.

    Matroid constraints and the cardinality cap are honoured; with either of
    them items may stay unallocated.
    """
    _check_budget(inst, budget)
    f = _evaluator(inst)
    m = inst.m

    def objective(bundles):
        return min(f(b) for b in bundles)

    def bound(bundles, opened, rest):
        ub = min(f(bundles[p] | rest) for p in range(opened)) if opened else None
        if opened < m:
            fresh = f(rest)
            ub = fresh if ub is None else min(ub, fresh)
        return ub

    value, masks = _search(inst, objective, bound)
    return value, Allocation(tuple(masks), inst.n)


def opt_truncated_maxsum(inst: Instance, cap, budget: Optional[int] = None) -> Allocation:
    """Allocation maximising the sum over players of min(cap, f(bundle)).

    Without constraints every item is allocated.  Ties go to the
    lexicographically least assignment vector (players in order of first
    use, "unallocated" sorting after every player).
    """
    cap = Fraction(cap)
    _check_budget(inst, budget)
    f = _evaluator(inst)
    m = inst.m

    def objective(bundles):
        return sum((min(cap, f(b)) for b in bundles), Fraction(0))

    def bound(bundles, opened, rest):
        total = sum((min(cap, f(bundles[p] | rest)) for p in range(opened)), Fraction(0))
        return total + (m - opened) * min(cap, f(rest))

    _, masks = _search(inst, objective, bound)
    return Allocation(tuple(masks), inst.n)


def enumerate_configurations(inst: Instance, threshold, strict: bool = False) -> Iterator[frozenset]:
    """Every item set reaching ``threshold`` (exceeding it if ``strict``), in mask order.

    With matroids only sets independent in all of them are produced.
    """
    yield from (from_mask(mask) for mask in configuration_masks(inst, threshold, strict))


def configuration_masks(inst: Instance, threshold, strict: bool = False) -> Iterator[int]:
    n = inst.n
    if n > CONFIG_LIMIT:
        raise BudgetExceeded(f"cannot enumerate configurations of {n} items "
                             f"(limit {CONFIG_LIMIT})")
    threshold = Fraction(threshold)
    f = _evaluator(inst)
    for mask in range(1 << n):
        v = f(mask)
        if (v > threshold if strict else v >= threshold) and inst.independent(mask):
            yield mask
