"""Exact two-phase simplex over the rationals, Bland's rule throughout.

Problems are tiny (a few dozen variables), so a dense tableau of Fractions is
plenty.  Exactness is the point: extremality and membership decisions never
depend on a tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: list[Fraction] | None = None
    value: Fraction | None = None


class _Tableau:
    def __init__(self, rows: list[list[Fraction]], rhs: list[Fraction], basis: list[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis

    def pivot(self, r: int, c: int):
        rows, rhs = self.rows, self.rhs
        p = rows[r][c]
        if p != 1:
            rows[r] = [a / p for a in rows[r]]
            rhs[r] = rhs[r] / p
        pr = rows[r]
        for i in range(len(rows)):
            if i != r:
                f = rows[i][c]
                if f:
                    rows[i] = [a - f * b for a, b in zip(rows[i], pr)]
                    rhs[i] -= f * rhs[r]
        self.basis[r] = c

    def run(self, cost: list[Fraction], allowed: int, max_iter: int = 100000) -> str:
        """Minimise ``cost . x`` over columns ``< allowed`` (Bland's rule)."""
        for _ in range(max_iter):
            reduced = self.reduced_costs(cost)
            enter = next((j for j in range(allowed) if reduced[j] < 0), None)
            if enter is None:
                return "optimal"
            best = None
            for i, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    ratio = self.rhs[i] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return "unbounded"
            self.pivot(best[1], enter)
        raise RuntimeError("simplex iteration cap reached")

    def reduced_costs(self, cost: list[Fraction]) -> list[Fraction]:
        red = list(cost)
        for i, bv in enumerate(self.basis):
            cb = cost[bv]
            if cb:
                row = self.rows[i]
                red = [r - cb * a for r, a in zip(red, row)]
        return red

    def solution(self, n: int) -> list[Fraction]:
        x = [Fraction(0)] * n
        for i, bv in enumerate(self.basis):
            if bv < n:
                x[bv] = self.rhs[i]
        return x


def solve_standard(A: Sequence[Sequence], b: Sequence, c: Sequence | None = None) -> LPResult:
    """Minimise ``c . x`` subject to ``A x = b``, ``x >= 0``, exactly.

    With ``c`` omitted this is a pure feasibility problem and the returned
    point is a basic feasible solution (at most ``len(b)`` nonzeros).
    """
    m = len(A)
    n = len(A[0]) if m else (len(c) if c is not None else 0)
    c = [Fraction(0)] * n if c is None else [Fraction(v) for v in c]
    if m == 0:
        if any(v < 0 for v in c):
            return LPResult("unbounded")
        return LPResult("optimal", [Fraction(0)] * n, Fraction(0))
    rows, rhs = [], []
    for row, bi in zip(A, b):
        row = [Fraction(v) for v in row]
        bi = Fraction(bi)
        if bi < 0:
            row = [-v for v in row]
            bi = -bi
        rows.append(row)
        rhs.append(bi)
    # phase 1: one artificial per row
    for i in range(m):
        rows[i] = rows[i] + [Fraction(1) if j == i else Fraction(0) for j in range(m)]
    tab = _Tableau(rows, rhs, [n + i for i in range(m)])
    phase1 = [Fraction(0)] * n + [Fraction(1)] * m
    tab.run(phase1, n + m)
    if sum(tab.rhs[i] for i, bv in enumerate(tab.basis) if bv >= n) > 0:
        return LPResult("infeasible")
    # drive remaining (zero-level) artificials out of the basis
    keep = []
    for i in range(m):
        if tab.basis[i] >= n:
            col = next((j for j in range(n) if tab.rows[i][j]), None)
            if col is None:
                continue  # redundant row
            tab.pivot(i, col)
        keep.append(i)
    tab.rows = [tab.rows[i][:n] for i in keep]
    tab.rhs = [tab.rhs[i] for i in keep]
    tab.basis = [tab.basis[i] for i in keep]
    status = tab.run(c, n)
    if status == "unbounded":
        return LPResult("unbounded")
    x = tab.solution(n)
    return LPResult("optimal", x, sum(ci * xi for ci, xi in zip(c, x)))
