"""Exact rational linear algebra: row reduction, kernels and a small simplex.

Arithmetic is exact throughout (``gmpy2.mpq`` inside the hot loops,
``fractions.Fraction`` at the interface) so that feasibility and
positivity questions are decided without rounding. Problem sizes are tiny
(a few dozen rows and columns), so a dense tableau is fine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from gmpy2 import mpq

Matrix = list[list[Fraction]]


def _frac(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


def rref(rows: Sequence[Sequence[int | Fraction]]) -> tuple[list[list[mpq]], list[int]]:
    """Reduced row echelon form (entries ``mpq``) and the list of pivot columns."""
    m = [[mpq(v) for v in row] for row in rows]
    if not m:
        return m, []
    n_rows, n_cols = len(m), len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        p = next((i for i in range(r, n_rows) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(n_rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank(rows: Sequence[Sequence[int | Fraction]]) -> int:
    return len(rref(rows)[1])


def kernel_basis(rows: Sequence[Sequence[int | Fraction]], n_cols: int) -> Matrix:
    """Basis of the right kernel, one vector per free column.

    Each basis vector has a 1 in its free column and zeros in the other
    free columns.
    """
    if not rows:
        return [[Fraction(int(i == j)) for i in range(n_cols)] for j in range(n_cols)]
    red, pivots = rref(rows)
    free = [c for c in range(n_cols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * n_cols
        v[f] = Fraction(1)
        for row, pc in zip(red, pivots):
            v[pc] = -_frac(row[f])
        basis.append(v)
    return basis


def primitive_integer_vector(v: Sequence[Fraction]) -> list[int]:
    """Scale a rational vector to coprime integers, keeping its direction."""
    den = 1
    for x in v:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    if g == 0:
        raise ValueError("zero vector has no primitive representative")
    return [x // g for x in ints]


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: list[Fraction] | None = None
    value: Fraction | None = None


class _Tableau:
    """Dense simplex tableau over ``gmpy2.mpq`` using Bland's rule."""

    def __init__(self, rows: Matrix, rhs: list[Fraction], basis: list[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis

    def pivot(self, r: int, c: int) -> None:
        row = self.rows[r]
        inv = 1 / row[c]
        row = [v * inv if v else v for v in row]
        self.rows[r] = row
        self.rhs[r] *= inv
        nz = [j for j, v in enumerate(row) if v]
        for i, other in enumerate(self.rows):
            if i != r and other[c] != 0:
                f = other[c]
                for j in nz:
                    other[j] -= f * row[j]
                self.rhs[i] -= f * self.rhs[r]
        self.basis[r] = c

    def minimize(self, cost: list[Fraction], allowed: set[int]) -> str:
        n = len(cost)
        while True:
            # reduced costs: c_j - c_B B^-1 A_j
            reduced = list(cost)
            for r, b in enumerate(self.basis):
                cb = cost[b]
                if cb != 0:
                    row = self.rows[r]
                    for j in range(n):
                        if row[j] != 0:
                            reduced[j] -= cb * row[j]
            enter = next((j for j in range(n) if j in allowed and reduced[j] < 0), None)
            if enter is None:
                return "optimal"
            leave = None
            best = None
            for r, row in enumerate(self.rows):
                if row[enter] > 0:
                    ratio = self.rhs[r] / row[enter]
                    if best is None or ratio < best or (ratio == best and self.basis[r] < self.basis[leave]):
                        best, leave = ratio, r
            if leave is None:
                return "unbounded"
            self.pivot(leave, enter)


def linprog_exact(
    c: Sequence[int | Fraction],
    A_eq: Sequence[Sequence[int | Fraction]] = (),
    b_eq: Sequence[int | Fraction] = (),
    A_ub: Sequence[Sequence[int | Fraction]] = (),
    b_ub: Sequence[int | Fraction] = (),
) -> LPResult:
    """Minimize ``c @ x`` subject to ``A_eq x = b_eq``, ``A_ub x <= b_ub``, ``x >= 0``.

    Two-phase simplex with Bland's anti-cycling rule, exact arithmetic.
    """
    n = len(c)
    rows = []
    rhs = []
    n_slack = len(A_ub)
    width = n + n_slack
    for i, (a, b) in enumerate(zip(A_ub, b_ub)):
        row = [mpq(v) for v in a] + [mpq(0)] * n_slack
        row[n + i] = mpq(1)
        rows.append(row)
        rhs.append(mpq(b))
    for a, b in zip(A_eq, b_eq):
        rows.append([mpq(v) for v in a] + [mpq(0)] * n_slack)
        rhs.append(mpq(b))
    for i in range(len(rows)):
        if rhs[i] < 0:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]

    m = len(rows)
    # phase 1: one artificial per row
    for i in range(m):
        rows[i] = rows[i] + [mpq(int(i == k)) for k in range(m)]
    tab = _Tableau(rows, rhs, [width + i for i in range(m)])
    phase1_cost = [mpq(0)] * width + [mpq(1)] * m
    tab.minimize(phase1_cost, set(range(width + m)))
    infeas = sum((tab.rhs[r] for r, b in enumerate(tab.basis) if b >= width), mpq(0))
    if infeas > 0:
        return LPResult("infeasible")

    # drive remaining (zero-level) artificials out of the basis
    keep = []
    for r in range(m):
        if tab.basis[r] >= width:
            col = next((j for j in range(width) if tab.rows[r][j] != 0), None)
            if col is None:
                continue  # redundant row
            tab.pivot(r, col)
        keep.append(r)
    tab.rows = [tab.rows[r][:width] for r in keep]
    tab.rhs = [tab.rhs[r] for r in keep]
    tab.basis = [tab.basis[r] for r in keep]

    cost = [mpq(v) for v in c] + [mpq(0)] * n_slack
    status = tab.minimize(cost, set(range(width)))
    if status == "unbounded":
        return LPResult("unbounded")
    x = [Fraction(0)] * width
    for r, b in enumerate(tab.basis):
        x[b] = _frac(tab.rhs[r])
    x = x[:n]
    value = sum((Fraction(ci) * xi for ci, xi in zip(c, x)), Fraction(0))
    return LPResult("optimal", x, value)


def ilp_min_exact(
    c: Sequence[int | Fraction],
    A_eq: Sequence[Sequence[int | Fraction]],
    b_eq: Sequence[int | Fraction],
    lower: Sequence[int],
    upper: Sequence[int],
) -> LPResult:
    """Integer minimization of ``c @ x`` with box bounds, by branch and bound.

    The box must be finite; every node solves an exact LP relaxation.
    """
    n = len(c)
    best: LPResult = LPResult("infeasible")

    def relax(lo: list[int], hi: list[int]) -> LPResult:
        # shift x = lo + y, y >= 0, y <= hi - lo
        b_shift = [
            Fraction(b) - sum(Fraction(a[j]) * lo[j] for j in range(n)) for a, b in zip(A_eq, b_eq)
        ]
        A_ub = [[int(i == j) for j in range(n)] for i in range(n)]
        b_ub = [hi[i] - lo[i] for i in range(n)]
        res = linprog_exact(c, A_eq, b_shift, A_ub, b_ub)
        if res.status != "optimal":
            return res
        x = [lo[i] + res.x[i] for i in range(n)]
        value = sum((Fraction(ci) * xi for ci, xi in zip(c, x)), Fraction(0))
        return LPResult("optimal", x, value)

    stack = [(list(lower), list(upper))]
    while stack:
        lo, hi = stack.pop()
        if any(l > h for l, h in zip(lo, hi)):
            continue
        res = relax(lo, hi)
        if res.status != "optimal":
            continue
        if best.status == "optimal" and res.value >= best.value:
            continue
        frac = next((i for i, v in enumerate(res.x) if v.denominator != 1), None)
        if frac is None:
            best = res
            continue
        v = res.x[frac]
        down_hi = list(hi)
        down_hi[frac] = math.floor(v)
        up_lo = list(lo)
        up_lo[frac] = math.ceil(v)
        # explore the "down" branch first (popped last pushed)
        stack.append((up_lo, hi))
        stack.append((lo, down_hi))
    return best
