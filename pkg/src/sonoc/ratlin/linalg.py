"""Exact rational vectors and matrices.

Vectors are tuples of Fraction, matrices are tuples of row tuples.  Everything
here is pure and exact; no floats ever enter this module.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Optional, Sequence, Tuple

Q = Fraction
Vec = Tuple[Fraction, ...]
Mat = Tuple[Vec, ...]


def frac(x) -> Fraction:
    """Coerce an int, string ``"p/q"`` or Fraction to an exact rational."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("boolean is not a rational scalar")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot build exact rational from {type(x).__name__}: {x!r}")


def vec(xs: Iterable) -> Vec:
    return tuple(frac(x) for x in xs)


def mat(rows: Iterable[Iterable]) -> Mat:
    return tuple(vec(r) for r in rows)


def vzero(n: int) -> Vec:
    return (Q(0),) * n


def vunit(n: int, i: int) -> Vec:
    return tuple(Q(1) if j == i else Q(0) for j in range(n))


def vadd(a: Vec, b: Vec) -> Vec:
    return tuple(x + y for x, y in zip(a, b, strict=True))


def vsub(a: Vec, b: Vec) -> Vec:
    return tuple(x - y for x, y in zip(a, b, strict=True))


def vneg(a: Vec) -> Vec:
    return tuple(-x for x in a)


def vscale(c: Fraction, a: Vec) -> Vec:
    return tuple(c * x for x in a)


def vdot(a: Vec, b: Vec) -> Fraction:
    return sum((x * y for x, y in zip(a, b, strict=True)), Q(0))


def is_zero_vec(a: Vec) -> bool:
    return all(x == 0 for x in a)


def mat_vec(m: Mat, v: Vec) -> Vec:
    return tuple(vdot(row, v) for row in m)


def transpose(m: Mat) -> Mat:
    if not m:
        return ()
    return tuple(tuple(row[j] for row in m) for j in range(len(m[0])))


def mat_t_vec(m: Mat, v: Vec) -> Vec:
    """m^T v for an m-by-n matrix given by rows."""
    if not m:
        return ()
    n = len(m[0])
    return tuple(sum((m[i][j] * v[i] for i in range(len(m))), Q(0)) for j in range(n))


def outer_quad(m: Mat, d: Vec) -> Fraction:
    """d^T M d."""
    return vdot(d, mat_vec(m, d))


def primitive(v: Vec) -> Vec:
    """Scale a rational vector to a primitive integer vector (same direction).

    The zero vector is returned unchanged.  The sign of the vector is kept.
    """
    if is_zero_vec(v):
        return v
    denom_lcm = 1
    for x in v:
        denom_lcm = denom_lcm * x.denominator // gcd(denom_lcm, x.denominator)
    ints = [x.numerator * (denom_lcm // x.denominator) for x in v]
    g = 0
    for k in ints:
        g = gcd(g, abs(k))
    return tuple(Q(k // g) for k in ints)


def primitive_signed(v: Vec) -> Vec:
    """Primitive vector with the first nonzero entry made positive."""
    p = primitive(v)
    for x in p:
        if x != 0:
            return p if x > 0 else vneg(p)
    return p


def rref(rows: Sequence[Vec]) -> Tuple[Mat, Tuple[int, ...]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    work = [list(r) for r in rows]
    if not work:
        return (), ()
    ncols = len(work[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(work)):
            if work[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        work[r], work[piv] = work[piv], work[r]
        inv = work[r][c]
        work[r] = [x / inv for x in work[r]]
        for i in range(len(work)):
            if i != r and work[i][c] != 0:
                f = work[i][c]
                work[i] = [x - f * y for x, y in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
        if r == len(work):
            break
    return tuple(tuple(row) for row in work[:r]), tuple(pivots)


def rank(rows: Sequence[Vec]) -> int:
    return len(rref(rows)[0])


def nullspace(rows: Sequence[Vec], ncols: int) -> Tuple[Vec, ...]:
    """Basis of {x : rows @ x = 0}, one vector per free column."""
    red, pivots = rref(rows)
    pivset = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivset:
            continue
        v = [Q(0)] * ncols
        v[free] = Q(1)
        for r, p in zip(red, pivots):
            v[p] = -r[free]
        basis.append(tuple(v))
    return tuple(basis)


def solve_linear(a_rows: Sequence[Vec], b: Vec) -> Optional[Vec]:
    """One exact solution of A x = b, or None if inconsistent."""
    if not a_rows:
        return ()
    ncols = len(a_rows[0])
    aug = [tuple(row) + (bi,) for row, bi in zip(a_rows, b, strict=True)]
    red, pivots = rref(aug)
    if ncols in pivots:
        return None
    x = [Q(0)] * ncols
    for r, p in zip(red, pivots):
        x[p] = r[-1]
    return tuple(x)


def in_span(v: Vec, basis: Sequence[Vec]) -> bool:
    if is_zero_vec(v):
        return True
    if not basis:
        return False
    return rank(list(basis)) == rank(list(basis) + [v])


def span_basis(vectors: Sequence[Vec]) -> Tuple[Vec, ...]:
    """Canonical (RREF, primitive) basis of the span of the given vectors."""
    red, _ = rref(vectors)
    return tuple(primitive_signed(r) for r in red)
