"""Exact two-phase simplex over the rationals.

Solves  min/max c.x  subject to  A_ub x <= b_ub,  A_eq x = b_eq  with free
variables, using Bland's rule for termination.  Optimal results carry an
exactly matching dual vector; infeasible results carry a Farkas certificate;
unbounded results carry an improving feasible ray.  All certificates are
re-verified before being returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

from .linalg import Q, Vec, vdot, vzero

OPTIMAL = "Optimal"
UNBOUNDED = "Unbounded"
INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class LPResult:
    status: str
    value: Optional[Fraction] = None
    x: Optional[Vec] = None
    dual_ub: Optional[Vec] = None
    dual_eq: Optional[Vec] = None
    ray: Optional[Vec] = None
    farkas_ub: Optional[Vec] = None
    farkas_eq: Optional[Vec] = None


class _Tableau:
    def __init__(self, rows, rhs, ncols):
        self.rows = rows          # list of lists of Fraction, len ncols
        self.rhs = rhs            # list of Fraction, all >= 0 invariant holds at start
        self.ncols = ncols
        self.basis = [None] * len(rows)

    def pivot(self, r, c):
        row = self.rows[r]
        inv = row[c]
        self.rows[r] = [x / inv for x in row]
        self.rhs[r] = self.rhs[r] / inv
        prow = self.rows[r]
        prhs = self.rhs[r]
        for i in range(len(self.rows)):
            if i == r:
                continue
            f = self.rows[i][c]
            if f != 0:
                self.rows[i] = [x - f * y for x, y in zip(self.rows[i], prow)]
                self.rhs[i] = self.rhs[i] - f * prhs

    def simplex(self, cost, banned):
        """Minimize cost over the tableau; returns 'optimal' or ('unbounded', col).

        cost is priced out against the current basis on entry.
        """
        m = len(self.rows)
        red = list(cost)
        obj = Q(0)
        for i in range(m):
            b = self.basis[i]
            f = red[b]
            if f != 0:
                red = [x - f * y for x, y in zip(red, self.rows[i])]
                obj += f * self.rhs[i]
        while True:
            enter = None
            for j in range(self.ncols):
                if j not in banned and red[j] < 0:
                    enter = j
                    break
            if enter is None:
                return "optimal", obj, red
            leave = None
            best = None
            for i in range(m):
                a = self.rows[i][enter]
                if a > 0:
                    ratio = self.rhs[i] / a
                    if best is None or ratio < best or (
                        ratio == best and self.basis[i] < self.basis[leave]
                    ):
                        best = ratio
                        leave = i
            if leave is None:
                return "unbounded", enter, red
            self.pivot(leave, enter)
            f = red[enter]
            if f != 0:
                red = [x - f * y for x, y in zip(red, self.rows[leave])]
                obj += f * self.rhs[leave]
            self.basis[leave] = enter


def lp_solve(
    c: Sequence[Fraction],
    a_ub: Sequence[Vec] = (),
    b_ub: Sequence[Fraction] = (),
    a_eq: Sequence[Vec] = (),
    b_eq: Sequence[Fraction] = (),
    sense: str = "min",
) -> LPResult:
    """Solve min (or max) c.x s.t. a_ub x <= b_ub, a_eq x = b_eq, x free."""
    n = len(c)
    c = [Q(x) for x in c]
    if sense == "max":
        inner = lp_solve([-x for x in c], a_ub, b_ub, a_eq, b_eq, "min")
        if inner.status == OPTIMAL:
            return LPResult(
                OPTIMAL, -inner.value, inner.x,
                tuple(-y for y in inner.dual_ub),
                tuple(-y for y in inner.dual_eq),
            )
        return inner
    if sense != "min":
        raise ValueError(f"unknown sense {sense!r}")

    m_ub, m_eq = len(a_ub), len(a_eq)
    rows = []
    rhs = []
    kinds = []      # ('ub', i) or ('eq', i)
    flips = []
    for i in range(m_ub):
        if len(a_ub[i]) != n:
            raise ValueError("inequality row dimension mismatch")
        rows.append(list(a_ub[i]))
        rhs.append(Q(b_ub[i]))
        kinds.append(("ub", i))
    for i in range(m_eq):
        if len(a_eq[i]) != n:
            raise ValueError("equality row dimension mismatch")
        rows.append(list(a_eq[i]))
        rhs.append(Q(b_eq[i]))
        kinds.append(("eq", i))
    m = len(rows)

    # columns: u(0..n), v(n..2n), slacks, artificials
    slack_col = {}
    ncols = 2 * n
    for i in range(m):
        if kinds[i][0] == "ub":
            slack_col[i] = ncols
            ncols += 1
    art_col = {}
    for i in range(m):
        art_col[i] = ncols
        ncols += 1

    trows = []
    trhs = []
    for i in range(m):
        flip = rhs[i] < 0
        flips.append(flip)
        sgn = Q(-1) if flip else Q(1)
        row = [sgn * x for x in rows[i]] + [-sgn * x for x in rows[i]]
        row += [Q(0)] * (ncols - 2 * n)
        if i in slack_col:
            row[slack_col[i]] = sgn
        row[art_col[i]] = Q(1)
        trows.append(row)
        trhs.append(sgn * rhs[i])

    tab = _Tableau(trows, trhs, ncols)
    for i in range(m):
        # start from a slack basis where possible, artificial otherwise
        if i in slack_col and not flips[i]:
            tab.basis[i] = slack_col[i]
            tab.rows[i][art_col[i]] = Q(0)
        else:
            tab.basis[i] = art_col[i]

    phase1 = [Q(0)] * ncols
    for i in range(m):
        phase1[art_col[i]] = Q(1)
    status, obj, _ = tab.simplex(phase1, banned=frozenset())
    assert status == "optimal"
    if obj > 0:
        y = _basis_duals(tab, phase1, rows, slack_col, art_col, flips, m, n)
        f_ub = [Q(0)] * m_ub
        f_eq = [Q(0)] * m_eq
        for i in range(m):
            kind, idx = kinds[i]
            if kind == "ub":
                f_ub[idx] = y[i]
            else:
                f_eq[idx] = y[i]
        _check_farkas(f_ub, f_eq, a_ub, b_ub, a_eq, b_eq, n)
        return LPResult(INFEASIBLE, farkas_ub=tuple(f_ub), farkas_eq=tuple(f_eq))

    banned = frozenset(art_col.values())
    # drive any artificial still basic (at level 0) out of the basis
    for i in range(m):
        if tab.basis[i] in banned:
            for j in range(2 * n + m_ub):
                if tab.rows[i][j] != 0:
                    tab.pivot(i, j)
                    tab.basis[i] = j
                    break

    cost = c + [-x for x in c] + [Q(0)] * (ncols - 2 * n)
    status, res, red = tab.simplex(cost, banned=banned)
    if status == "unbounded":
        enter = res
        ray_std = [Q(0)] * ncols
        ray_std[enter] = Q(1)
        for i in range(m):
            ray_std[tab.basis[i]] = -tab.rows[i][enter]
        ray = tuple(ray_std[j] - ray_std[n + j] for j in range(n))
        assert vdot(tuple(c[:n]), ray) < 0
        for i in range(m_ub):
            assert vdot(tuple(a_ub[i]), ray) <= 0
        for i in range(m_eq):
            assert vdot(tuple(a_eq[i]), ray) == 0
        return LPResult(UNBOUNDED, ray=ray)

    obj = res
    xs = [Q(0)] * ncols
    for i in range(m):
        xs[tab.basis[i]] = tab.rhs[i]
    x = tuple(xs[j] - xs[n + j] for j in range(n))
    y = _basis_duals(tab, cost, rows, slack_col, art_col, flips, m, n)
    d_ub = [Q(0)] * m_ub
    d_eq = [Q(0)] * m_eq
    for i in range(m):
        kind, idx = kinds[i]
        if kind == "ub":
            d_ub[idx] = y[i]
        else:
            d_eq[idx] = y[i]
    value = vdot(tuple(c[:n]), x)
    dual_value = sum((d_ub[i] * Q(b_ub[i]) for i in range(m_ub)), Q(0)) + sum(
        (d_eq[i] * Q(b_eq[i]) for i in range(m_eq)), Q(0)
    )
    assert value == dual_value, "strong duality violated"
    for yi in d_ub:
        assert yi <= 0
    return LPResult(OPTIMAL, value, x, tuple(d_ub), tuple(d_eq))


def _basis_duals(tab, cost, rows, slack_col, art_col, flips, m, n):
    """Solve B^T y = c_B over the *stored* (flipped) rows, then unflip."""
    from .linalg import rref

    aug = []
    for i in range(m):
        col = []
        b = tab.basis[i]
        for r in range(m):
            sgn = Q(-1) if flips[r] else Q(1)
            if b < n:
                col.append(sgn * rows[r][b])
            elif b < 2 * n:
                col.append(-sgn * rows[r][b - n])
            elif b in slack_col.values():
                which = next(k for k, v in slack_col.items() if v == b)
                col.append(sgn if which == r else Q(0))
            else:
                which = next(k for k, v in art_col.items() if v == b)
                col.append(Q(1) if which == r else Q(0))
        aug.append(tuple(col) + (cost[b],))
    red, pivots = rref(aug)
    y = [Q(0)] * m
    for r, p in zip(red, pivots):
        if p == m:
            raise AssertionError("dual system inconsistent")
        y[p] = r[-1]
    return [(-y[i] if flips[i] else y[i]) for i in range(m)]


def _check_farkas(f_ub, f_eq, a_ub, b_ub, a_eq, b_eq, n):
    # y_ub <= 0, A_ub^T y_ub + A_eq^T y_eq = 0, b_ub.y_ub + b_eq.y_eq > 0
    for y in f_ub:
        assert y <= 0
    comb = [Q(0)] * n
    for y, row in zip(f_ub, a_ub):
        for j in range(n):
            comb[j] += y * row[j]
    for y, row in zip(f_eq, a_eq):
        for j in range(n):
            comb[j] += y * row[j]
    assert all(x == 0 for x in comb), "Farkas combination is nonzero"
    val = sum((y * Q(b) for y, b in zip(f_ub, b_ub)), Q(0)) + sum(
        (y * Q(b) for y, b in zip(f_eq, b_eq)), Q(0)
    )
    assert val > 0, "Farkas certificate does not separate"
