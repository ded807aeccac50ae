"""Small exact linear algebra over Fraction (matrices are lists of rows)."""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import List, Sequence

Matrix = List[List[Fraction]]


class SingularSystem(ArithmeticError):
    pass


def to_matrix(rows) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def bareiss_det(rows: Sequence[Sequence[int]]) -> Fraction:
    """Fraction-free determinant (exact for integer and rational input)."""
    a = to_matrix(rows)
    n = len(a)
    if n == 0:
        return Fraction(1)
    sign = 1
    prev = Fraction(1)
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _row_reduce(a: Matrix):
    """In-place reduced row echelon form; returns pivot columns."""
    rows, cols = len(a), len(a[0]) if a else 0
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return pivots


def rank(rows) -> int:
    a = to_matrix(rows)
    if not a or not a[0]:
        return 0
    return len(_row_reduce(a))


def solve(rows, rhs) -> List[Fraction]:
    """Solve a square system exactly; raises SingularSystem."""
    n = len(rows)
    aug = [list(map(Fraction, r)) + [Fraction(b)] for r, b in zip(rows, rhs)]
    pivots = _row_reduce(aug)
    if len(pivots) < n or pivots[-1] == n:
        raise SingularSystem("matrix is singular")
    return [aug[i][n] for i in range(n)]


def nullspace(rows, ncols: int) -> Matrix:
    """Basis of the right nullspace."""
    a = to_matrix(rows) if rows else []
    pivots = _row_reduce(a) if a else []
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -a[i][f]
        basis.append(v)
    return basis


def primitive(vec) -> tuple:
    """Primitive integer vector on the ray spanned by a rational vector."""
    vec = [Fraction(x) for x in vec]
    lcm = 1
    for x in vec:
        lcm = lcm * x.denominator // gcd(lcm, x.denominator)
    ints = [int(x * lcm) for x in vec]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        raise ValueError("zero vector has no primitive representative")
    return tuple(x // g for x in ints)
