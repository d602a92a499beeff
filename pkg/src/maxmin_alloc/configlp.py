"""Configuration LP for identical valuations, its covering dual, and dual certificates.

With identical valuations the per-player configuration variables can be
aggregated: the LP at threshold T is feasible iff the packing LP

    max sum_C z_C   s.t.  sum_{C containing j} z_C <= 1,  z >= 0

over configurations C (item sets of value >= T) reaches m.  Its LP dual is
the covering problem min sum_j y_j s.t. y(C) >= 1, so an optimum below m is
at the same time a fractional hitting set of size < m, i.e. a dual
certificate of infeasibility.  Only inclusion-minimal configurations are
used; supersets add nothing to either side.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .exact import (CONFIG_LIMIT, BudgetExceeded, configuration_masks, opt_maxmin,
                    opt_truncated_maxsum)
from .model import Instance
from .simplex import maximize
from .valuation import as_value, from_mask, iter_bits, popcount, to_mask, value_table

__all__ = [
    "DualCertificate", "Repair", "CertificateCheck", "CertificateInvalid",
    "PrimalWitness", "PrimalFeasible", "PrimalInfeasible",
    "minimal_configurations", "solve_covering_lp", "decide_configuration_lp",
    "verify_certificate", "verify_primal_witness", "lp_grid", "next_grid_value",
    "lp_opt", "integrality_gap", "build_certificate_thm3", "build_certificate_thm8",
    "greedy_pricing_heuristic",
]

ZERO = Fraction(0)
ONE = Fraction(1)


# ------------------------------------------------------------------ types

@dataclass(frozen=True)
class Repair:
    """The explicit decrease that turns ``sum y <= m`` into ``sum y < m``."""

    item: int
    amount: Fraction
    slack: Optional[Fraction]  # None: no configuration contains the item


@dataclass(frozen=True)
class DualCertificate:
    """Item weights y hitting every configuration above ``threshold``.

    ``strict`` selects the configuration family: f(C) > threshold when set,
    f(C) >= threshold otherwise.
    """

    y: Tuple[Fraction, ...]
    threshold: Fraction
    m: int
    strict: bool = False
    matroid_constrained: bool = False
    source: str = "lp"
    opt: Optional[Fraction] = None
    removed: Tuple[Tuple[int, int], ...] = ()
    min_player: Optional[int] = None
    player_totals: Tuple[Fraction, ...] = ()
    repair: Optional[Repair] = None

    @property
    def total(self) -> Fraction:
        return sum(self.y, ZERO)

    def weight(self, items: Union[int, Iterable[int]]) -> Fraction:
        mask = items if isinstance(items, int) else to_mask(items, len(self.y))
        return sum((self.y[j] for j in iter_bits(mask)), ZERO)


@dataclass(frozen=True)
class CertificateCheck:
    ok: bool
    nonnegative: bool
    total_below_m: bool
    violation: Optional[int]
    configurations: int
    all_strict: bool

    @property
    def violating_set(self) -> Optional[frozenset]:
        return None if self.violation is None else from_mask(self.violation)


class CertificateInvalid(AssertionError):
    """A constructed certificate failed verification."""

    def __init__(self, message: str, certificate: DualCertificate,
                 check: Optional[CertificateCheck] = None):
        super().__init__(message)
        self.certificate = certificate
        self.check = check

    @property
    def witness(self) -> Optional[frozenset]:
        return self.check.violating_set if self.check else None


@dataclass(frozen=True)
class PrimalWitness:
    """Fractional assignment: ``entries`` lists (player, configuration mask, weight)."""

    threshold: Fraction
    m: int
    entries: Tuple[Tuple[int, int, Fraction], ...]

    def player_total(self, p: int) -> Fraction:
        return sum((x for q, _, x in self.entries if q == p), ZERO)

    def item_load(self, j: int) -> Fraction:
        return sum((x for _, c, x in self.entries if c >> j & 1), ZERO)


@dataclass(frozen=True)
class PrimalFeasible:
    witness: PrimalWitness
    feasible = True


@dataclass(frozen=True)
class PrimalInfeasible:
    certificate: DualCertificate
    feasible = False


LPVerdict = Union[PrimalFeasible, PrimalInfeasible]


# ------------------------------------------------------------------ LP core

def _table(inst: Instance) -> list:
    if inst.n > CONFIG_LIMIT:
        raise BudgetExceeded(f"configuration LP needs n <= {CONFIG_LIMIT}, got {inst.n}")
    return value_table(inst.valuation)


def minimal_configurations(inst: Instance, threshold, strict: bool = False) -> List[int]:
    """Inclusion-minimal configurations as masks, in mask order."""
    threshold = as_value(threshold)
    f = _table(inst)

    def reaches(v):
        return v > threshold if strict else v >= threshold

    out = []
    for mask in configuration_masks(inst, threshold, strict):
        if all(not reaches(f[mask & ~(1 << j)]) for j in iter_bits(mask)):
            out.append(mask)
    return out


def _normalise(configs, n: int) -> List[int]:
    seen, out = set(), []
    for c in configs:
        mask = c if isinstance(c, int) else to_mask(c, n)
        if mask not in seen:
            seen.add(mask)
            out.append(mask)
    return out


def _packing(masks: Sequence[int], n: int):
    rows = sorted({j for c in masks for j in iter_bits(c)})
    a = [[1 if c >> j & 1 else 0 for c in masks] for j in rows]
    res = maximize([1] * len(masks), a, [1] * len(rows))
    y = [ZERO] * n
    for j, d in zip(rows, res.duals):
        y[j] = d
    return res.value, tuple(y), res.x


def solve_covering_lp(configs, n: int) -> Tuple[Fraction, Tuple[Fraction, ...]]:
    """Exact optimum of min sum(y) subject to y(C) >= 1 for every C, y >= 0.

    >>> solve_covering_lp([{0, 1}, {0, 2}, {1, 2}], 3)[0]
    Fraction(3, 2)
    """
    masks = _normalise(configs, n)
    if 0 in masks:
        raise ValueError("the empty configuration cannot be covered: LP infeasible")
    if not masks:
        return ZERO, (ZERO,) * n
    value, y, _ = _packing(masks, n)
    return value, y


def _split_among_players(masks: Sequence[int], z: Sequence[Fraction], m: int):
    """Cut the total mass m of z into m unit intervals, one per player."""
    entries = []
    p, room = 0, ONE
    for c, x in zip(masks, z):
        while x > 0 and p < m:
            take = min(x, room)
            entries.append((p, c, take))
            x -= take
            room -= take
            if room == 0:
                p, room = p + 1, ONE
    return tuple(entries)


def decide_configuration_lp(inst: Instance, threshold) -> LPVerdict:
    """Feasibility of the configuration LP at ``threshold``, with a witness either way."""
    threshold = as_value(threshold)
    m, n = inst.m, inst.n
    constrained = bool(inst.matroids)
    if threshold <= 0:
        return PrimalFeasible(PrimalWitness(threshold, m, tuple((p, 0, ONE) for p in range(m))))
    masks = minimal_configurations(inst, threshold)
    if not masks:
        cert = DualCertificate((ZERO,) * n, threshold, m, matroid_constrained=constrained)
        return PrimalInfeasible(cert)
    value, y, z = _packing(masks, n)
    if value < m:
        return PrimalInfeasible(DualCertificate(y, threshold, m, matroid_constrained=constrained))
    scale = Fraction(m) / value
    witness = PrimalWitness(threshold, m, _split_among_players(masks, [x * scale for x in z], m))
    return PrimalFeasible(witness)


def verify_primal_witness(inst: Instance, witness: PrimalWitness) -> List[str]:
    """Problems found when substituting the witness into the primal constraints."""
    f = inst.valuation
    problems = []
    for p, c, x in witness.entries:
        if not 0 <= p < inst.m:
            problems.append(f"player {p} out of range")
        if x < 0:
            problems.append(f"negative weight on player {p}")
        if f.value(c) < witness.threshold:
            problems.append(f"configuration {sorted(from_mask(c))} is below the threshold")
        if not inst.independent(c):
            problems.append(f"configuration {sorted(from_mask(c))} is not independent")
    for p in range(inst.m):
        if witness.player_total(p) < 1:
            problems.append(f"player {p} receives less than one unit")
    for j in range(inst.n):
        if witness.item_load(j) > 1:
            problems.append(f"item {j} is used more than once")
    return problems


def verify_certificate(inst: Instance, cert: DualCertificate) -> CertificateCheck:
    """Exact check of both dual constraints; the least violating mask is reported."""
    target = inst if cert.matroid_constrained else inst.replace(matroids=())
    nonneg = all(v >= 0 for v in cert.y) and len(cert.y) == inst.n
    below = cert.total < inst.m
    violation, count, strict_all = None, 0, True
    for c in configuration_masks(target, cert.threshold, cert.strict):
        count += 1
        w = cert.weight(c)
        if w < 1:
            violation = c
            break
        if w == 1:
            strict_all = False
    ok = nonneg and below and violation is None
    return CertificateCheck(ok, nonneg, below, violation, count, strict_all)


# ------------------------------------------------------------------ LP optimum

def lp_grid(inst: Instance) -> List[Fraction]:
    """Distinct positive values of independent sets, ascending."""
    f = _table(inst)
    return sorted({f[s] for s in range(1 << inst.n) if f[s] > 0 and inst.independent(s)})


def next_grid_value(inst: Instance, threshold) -> Optional[Fraction]:
    threshold = as_value(threshold)
    return next((v for v in lp_grid(inst) if v > threshold), None)


def lp_opt(inst: Instance) -> Fraction:
    """Largest grid threshold at which the configuration LP is feasible.

    Feasibility is monotone in the threshold, so a bisection over the grid
    is exact.
    """
    grid = lp_grid(inst)
    lo, hi = -1, len(grid)  # grid[lo] feasible (or lo = -1), grid[hi] infeasible
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if decide_configuration_lp(inst, grid[mid]).feasible:
            lo = mid
        else:
            hi = mid
    return grid[lo] if lo >= 0 else ZERO


def integrality_gap(inst: Instance, budget: Optional[int] = None) -> Fraction:
    opt, _ = opt_maxmin(inst, budget)
    if opt == 0:
        raise ZeroDivisionError("integrality gap is undefined when the integral optimum is 0")
    return lp_opt(inst) / opt


# ------------------------------------------------------------------ certificates

def _drop_big_items(inst: Instance, budget) -> Tuple[List[int], List[Tuple[int, int]], Fraction]:
    """Repeatedly remove an item worth more than the current optimum, with one player."""
    single = [inst.valuation.value(1 << j) for j in range(inst.n)]
    kept = list(range(inst.n))
    removed: List[Tuple[int, int]] = []
    players = inst.m
    first_opt = None
    while True:
        opt, _ = opt_maxmin(inst.restrict(kept, m=players), budget)
        if first_opt is None:
            first_opt = opt
        big = [j for j in kept if single[j] > opt and inst.independent(1 << j)]
        if not big:
            return kept, removed, first_opt
        j = min(big, key=lambda i: (-single[i], i))
        removed.append((j, len(removed)))
        kept.remove(j)
        players -= 1


def _removal_weights(f: list, cap: Fraction, bundle: int):
    def fbar(s):
        return min(cap, f[s])
    top = fbar(bundle)
    losses = {j: top - fbar(bundle & ~(1 << j)) for j in iter_bits(bundle)}
    return losses, sum(losses.values(), ZERO)


def _build(inst: Instance, factor: int, with_matroids: bool, strict: bool,
           budget: Optional[int]) -> DualCertificate:
    if inst.cardinality_cap is not None:
        raise ValueError("certificates are defined for instances without a cardinality cap")
    _table(inst)
    kept, removed, opt = _drop_big_items(inst, budget)
    if opt <= 0:
        raise ValueError("a certificate needs a positive integral optimum")
    n, m = inst.n, inst.m
    reduced = inst.restrict(kept, m=m - len(removed))
    opt_red, _ = opt_maxmin(reduced, budget)
    cap = 2 * opt_red
    alloc = opt_truncated_maxsum(reduced, cap, budget)
    f = value_table(reduced.valuation)

    y = [ZERO] * n
    for j, _ in removed:
        y[j] = ONE
    totals = []
    for p, bundle in enumerate(alloc.masks):
        losses, total = _removal_weights(f, cap, bundle)
        totals.append(total)
        if total > cap:
            cert = DualCertificate(tuple(y), factor * opt, m, strict, with_matroids,
                                   f"thm{3 if factor == 3 else 8}", opt)
            raise CertificateInvalid(f"player {p}: removal total {total} exceeds {cap}", cert)
        if total:
            for i, loss in losses.items():
                y[kept[i]] = loss / total
    q = alloc.min_player(reduced.valuation)
    if with_matroids:
        for i in iter_bits(alloc.masks[q] | alloc.unallocated_mask):
            y[kept[i]] = ZERO

    cert = DualCertificate(
        y=tuple(y), threshold=factor * opt, m=m, strict=strict,
        matroid_constrained=with_matroids, source="thm3" if factor == 3 else "thm8",
        opt=opt, removed=tuple(removed), min_player=q, player_totals=tuple(totals),
    )
    if cert.total == m:
        cert = _repair(inst, cert)
    check = verify_certificate(inst, cert)
    if not check.ok:
        raise CertificateInvalid(_describe(check, cert), cert, check)
    return cert


def _describe(check: CertificateCheck, cert: DualCertificate) -> str:
    if not check.nonnegative:
        return "negative item weight"
    if check.violation is not None:
        return (f"configuration {sorted(from_mask(check.violation))} has weight "
                f"{cert.weight(check.violation)} < 1")
    return f"total weight {cert.total} is not below m={cert.m}"


def _repair(inst: Instance, cert: DualCertificate) -> DualCertificate:
    """Lower one item that sits in no tight configuration constraint."""
    target = inst if cert.matroid_constrained else inst.replace(matroids=())
    slack: Dict[int, Optional[Fraction]] = {j: None for j in range(inst.n)}
    for c in configuration_masks(target, cert.threshold, cert.strict):
        s = cert.weight(c) - 1
        for j in iter_bits(c):
            slack[j] = s if slack[j] is None else min(slack[j], s)
    for j in range(inst.n):
        yj, s = cert.y[j], slack[j]
        if yj > 0 and (s is None or s > 0):
            amount = (yj if s is None else min(yj, s)) / 2
            y = list(cert.y)
            y[j] -= amount
            return DualCertificate(
                tuple(y), cert.threshold, cert.m, cert.strict, cert.matroid_constrained,
                cert.source, cert.opt, cert.removed, cert.min_player, cert.player_totals,
                Repair(j, amount, s))
    return cert


def build_certificate_thm3(inst: Instance, strict: bool = True,
                           budget: Optional[int] = None) -> DualCertificate:
    """Dual certificate at three times the integral optimum.

    Items worth more than the optimum are peeled off first (weight 1 each,
    one player each).  On the rest, an allocation maximising the sum of
    bundle values truncated at twice the reduced optimum prices every item
    by its share of its bundle's removal losses.
    """
    if inst.matroids:
        raise ValueError("use build_certificate_thm8 for matroid-constrained instances")
    return _build(inst, 3, False, strict, budget)


def build_certificate_thm8(inst: Instance, strict: bool = True,
                           budget: Optional[int] = None) -> DualCertificate:
    """Matroid-constrained certificate at five times the optimum.

    Same pricing as the unconstrained certificate, except that the items of
    the poorest bundle and all unallocated items are free.
    """
    if not inst.matroids:
        raise ValueError("build_certificate_thm8 needs at least one matroid")
    return _build(inst, 5, True, strict, budget)


# ------------------------------------------------------------------ pricing

def greedy_pricing_heuristic(inst: Instance, y: Sequence, threshold) -> Optional[frozenset]:
    """Look for a configuration whose y-weight is below 1.

    Grows a set by best value-per-weight (free items first), starting once
    from every single item, then trims redundant items.  Finding nothing
    proves nothing.
    """
    threshold = as_value(threshold)
    y = [as_value(v) for v in y]
    if any(v < 0 for v in y):
        raise ValueError("item weights must be non-negative")
    f = inst.valuation
    n = inst.n
    best = None
    for start in range(n):
        if not inst.independent(1 << start):
            continue
        c = 1 << start
        while f.value(c) < threshold:
            base = f.value(c)
            pick, pick_key = None, None
            for j in range(n):
                if c >> j & 1 or not inst.independent(c | 1 << j):
                    continue
                gain = f.value(c | 1 << j) - base
                if gain <= 0:
                    continue
                key = (1, gain) if y[j] == 0 else (0, gain / y[j])
                if pick_key is None or key > pick_key:
                    pick, pick_key = j, key
            if pick is None:
                break
            c |= 1 << pick
        if f.value(c) < threshold:
            continue
        for j in sorted(iter_bits(c), key=lambda i: (-y[i], i)):
            if popcount(c) > 1 and f.value(c & ~(1 << j)) >= threshold:
                c &= ~(1 << j)
        w = sum((y[j] for j in iter_bits(c)), ZERO)
        if w < 1 and (best is None or w < best[0]):
            best = (w, c)
    return None if best is None else from_mask(best[1])
