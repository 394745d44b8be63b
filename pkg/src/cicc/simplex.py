"""Exact rational simplex (two-phase, Bland's rule).

Solves ``max c.x  s.t.  A x <= b`` over :class:`fractions.Fraction`.
Variables flagged nonnegative get a single column; free variables are
split as ``x = x+ - x-``.  No floating-point operation happens here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: str
    value: Fraction | None = None
    x: tuple[Fraction, ...] | None = None


def _pivot(rows, cost, r, c):
    prow = rows[r]
    p = prow[c]
    if p != 1:
        prow = [v / p for v in prow]
        rows[r] = prow
    nz = [(j, v) for j, v in enumerate(prow) if v]
    for i, row in enumerate(rows):
        if i == r:
            continue
        f = row[c]
        if f:
            for j, v in nz:
                row[j] -= f * v
    f = cost[c]
    if f:
        for j, v in nz:
            cost[j] -= f * v


def _run(rows, cost, basis, allowed):
    """Primal simplex on a feasible tableau; returns False if unbounded."""
    while True:
        col = next((j for j in allowed if cost[j] > 0), None)
        if col is None:
            return True
        best = None
        for i, row in enumerate(rows):
            a = row[col]
            if a > 0:
                ratio = row[-1] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return False
        r = best[1]
        _pivot(rows, cost, r, col)
        basis[r] = col


def maximize(
    c: Sequence,
    A: Sequence[Sequence],
    b: Sequence,
    nonneg: Sequence[bool] | None = None,
) -> LPResult:
    """Maximize ``c.x`` subject to ``A x <= b`` in exact arithmetic."""
    nvar = len(c)
    if nonneg is None:
        nonneg = [False] * nvar
    # structural columns
    cols = []  # (var, sign)
    for j in range(nvar):
        cols.append((j, 1))
        if not nonneg[j]:
            cols.append((j, -1))
    ns = len(cols)
    m = len(A)
    neg_rows = [i for i in range(m) if b[i] < 0]
    na = len(neg_rows)
    width = ns + m + na
    rows = []
    basis = []
    art = 0
    for i in range(m):
        row = [Fraction(0)] * (width + 1)
        for k, (j, s) in enumerate(cols):
            if A[i][j]:
                row[k] = Fraction(A[i][j]) * s
        row[ns + i] = Fraction(1)
        row[-1] = Fraction(b[i])
        if b[i] < 0:
            row = [-v for v in row]
            row[ns + m + art] = Fraction(1)
            basis.append(ns + m + art)
            art += 1
        else:
            basis.append(ns + i)
        rows.append(row)

    if na:
        cost = [Fraction(0)] * (width + 1)
        for j in range(ns + m, width):
            cost[j] = Fraction(-1)
        for i, bv in enumerate(basis):
            if bv >= ns + m:
                for j, v in enumerate(rows[i]):
                    if v:
                        cost[j] += v
        _run(rows, cost, basis, range(width))
        if cost[-1] != 0:
            return LPResult(INFEASIBLE)
        # drive zero-level artificials out of the basis
        drop = []
        for i, bv in enumerate(basis):
            if bv >= ns + m:
                col = next((j for j in range(ns + m) if rows[i][j]), None)
                if col is None:
                    drop.append(i)
                else:
                    _pivot(rows, cost, i, col)
                    basis[i] = col
        for i in reversed(drop):
            del rows[i]
            del basis[i]
        for i, row in enumerate(rows):
            rows[i] = row[: ns + m] + [row[-1]]
        width = ns + m

    cost = [Fraction(0)] * (width + 1)
    for k, (j, s) in enumerate(cols):
        cost[k] = Fraction(c[j]) * s
    for i, bv in enumerate(basis):
        f = cost[bv]
        if f:
            for j, v in enumerate(rows[i]):
                if v:
                    cost[j] -= f * v
    if not _run(rows, cost, basis, range(width)):
        return LPResult(UNBOUNDED)
    x = [Fraction(0)] * nvar
    for i, bv in enumerate(basis):
        if bv < ns:
            j, s = cols[bv]
            x[j] += s * rows[i][-1]
    value = sum((Fraction(c[j]) * x[j] for j in range(nvar)), Fraction(0))
    return LPResult(OPTIMAL, value, tuple(x))

