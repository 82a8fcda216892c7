"""Dense two-phase primal simplex over exact rationals.

Solves  max c.x  s.t.  A x = b, x >= 0  with every entry a Fraction.
Bland's rule (smallest eligible index enters, smallest basic index breaks
ratio ties) guarantees termination without any tolerance.  Intended for the
Sherali-Adams relaxations built in this package: a few thousand variables at
most, exactness mandatory, speed secondary.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


class LpInfeasible(RuntimeError):
    pass


class LpUnbounded(RuntimeError):
    pass


def _pivot(tableau, obj, basis, r, s):
    row_r = tableau[r]
    piv = row_r[s]
    if piv != 1:
        inv = 1 / piv
        row_r = [x * inv for x in row_r]
        tableau[r] = row_r
    nz = [(j, v) for j, v in enumerate(row_r) if v != 0]
    for i, row in enumerate(tableau):
        if i == r:
            continue
        f = row[s]
        if f != 0:
            for j, v in nz:
                row[j] -= f * v
    f = obj[s]
    if f != 0:
        for j, v in nz:
            obj[j] -= f * v
    basis[r] = s


def _iterate(tableau, obj, basis, allowed_cols):
    m = len(tableau)
    while True:
        enter = None
        for j in allowed_cols:
            if obj[j] > 0:
                enter = j
                break
        if enter is None:
            return
        leave = None
        best_ratio = None
        for i in range(m):
            a = tableau[i][enter]
            if a > 0:
                ratio = tableau[i][-1] / a
                if (
                    leave is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[i] < basis[leave])
                ):
                    leave, best_ratio = i, ratio
        if leave is None:
            raise LpUnbounded("objective unbounded above")
        _pivot(tableau, obj, basis, leave, enter)


def simplex_max(
    c: Sequence[Fraction],
    rows: Sequence[Sequence[tuple[int, Fraction]]],
    rhs: Sequence[Fraction],
) -> tuple[Fraction, list[Fraction]]:
    """Maximize c.x subject to the sparse equality rows; returns (value, x).

    Each row is a list of (variable index, coefficient) pairs.  Rows with a
    negative right-hand side are negated on entry.
    """
    n = len(c)
    m = len(rows)
    tableau = []
    for i in range(m):
        row = [ZERO] * (n + m + 1)
        sign = ONE if rhs[i] >= 0 else -ONE
        for j, coef in rows[i]:
            row[j] += sign * coef
        row[n + i] = ONE
        row[-1] = sign * rhs[i]
        tableau.append(row)
    basis = [n + i for i in range(m)]

    # phase one: maximize -(sum of artificials); start reduced
    obj = [ZERO] * (n + m + 1)
    for j in range(n, n + m):
        obj[j] = -ONE
    for row in tableau:
        for j, v in enumerate(row):
            if v != 0:
                obj[j] += v
    _iterate(tableau, obj, basis, range(n))
    if obj[-1] != 0:
        raise LpInfeasible("equality system has no nonnegative solution")

    # drive leftover artificials out of the basis; drop redundant rows
    keep = []
    for i in range(m):
        if basis[i] >= n:
            s = next((j for j in range(n) if tableau[i][j] != 0), None)
            if s is None:
                continue  # redundant constraint
            _pivot(tableau, obj, basis, i, s)
        keep.append(i)
    # artificial columns are dead from here on; strip them
    tableau = [tableau[i][:n] + [tableau[i][-1]] for i in keep]
    basis = [basis[i] for i in keep]

    # phase two on structural columns only
    obj = list(c) + [ZERO]
    for i, row in enumerate(tableau):
        f = obj[basis[i]]
        if f != 0:
            for j, v in enumerate(row):
                if v != 0:
                    obj[j] -= f * v
    _iterate(tableau, obj, basis, range(n))

    x = [ZERO] * n
    for i, bv in enumerate(basis):
        if bv < n:
            x[bv] = tableau[i][-1]
    value = sum((ci * xi for ci, xi in zip(c, x)), ZERO)
    return value, x
