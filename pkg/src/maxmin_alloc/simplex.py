"""Dense tableau simplex over the rationals with Bland's pivoting rule.

Only the form needed here is supported: maximise c.x subject to A x <= b,
x >= 0 with b >= 0, so the slack basis is feasible from the start.  Bland's
rule (lowest-index entering column, lowest-index leaving variable on ratio
ties) guarantees termination without any tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

__all__ = ["LPResult", "Unbounded", "maximize"]


class Unbounded(ArithmeticError):
    pass


@dataclass(frozen=True)
class LPResult:
    value: Fraction
    x: Tuple[Fraction, ...]
    duals: Tuple[Fraction, ...]
    pivots: int


def maximize(c: Sequence, a: Sequence[Sequence], b: Sequence) -> LPResult:
    rows, cols = len(a), len(c)
    zero, one = Fraction(0), Fraction(1)
    if any(Fraction(v) < 0 for v in b):
        raise ValueError("right-hand side must be non-negative")
    width = cols + rows
    tab: List[List[Fraction]] = []
    for i in range(rows):
        if len(a[i]) != cols:
            raise ValueError("constraint row has the wrong length")
        row = [Fraction(v) for v in a[i]] + [zero] * rows + [Fraction(b[i])]
        row[cols + i] = one
        tab.append(row)
    cost = [Fraction(v) for v in c] + [zero] * rows
    obj = zero
    basis = list(range(cols, cols + rows))
    pivots = 0

    while True:
        enter = next((k for k in range(width) if cost[k] > 0), None)
        if enter is None:
            break
        leave, best = None, None
        for i in range(rows):
            aik = tab[i][enter]
            if aik > 0:
                ratio = tab[i][-1] / aik
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave is None:
            raise Unbounded(f"objective unbounded along column {enter}")
        prow = tab[leave]
        piv = prow[enter]
        if piv != 1:
            prow = [v / piv for v in prow]
            tab[leave] = prow
        for i in range(rows):
            if i == leave:
                continue
            factor = tab[i][enter]
            if factor:
                row = tab[i]
                tab[i] = [v - factor * w for v, w in zip(row, prow)]
        factor = cost[enter]
        cost = [v - factor * w for v, w in zip(cost, prow[:-1])]
        obj += factor * prow[-1]
        basis[leave] = enter
        pivots += 1

    x = [zero] * cols
    for i, var in enumerate(basis):
        if var < cols:
            x[var] = tab[i][-1]
    duals = tuple(-cost[cols + i] for i in range(rows))
    return LPResult(obj, tuple(x), duals, pivots)
