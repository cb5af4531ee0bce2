"""Exact linear algebra over the rationals.

Plain Gaussian elimination on Fraction matrices with deterministic
first-nonzero pivoting, so nullspace bases come out in a reproducible order.
Matrices are lists of lists of Fractions; nothing here ever touches floats.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd


def _clone(m):
    return [list(map(Fraction, row)) for row in m]


def rref(matrix, cols: int | None = None):
    """Reduced row echelon form.  Returns (rows, pivot_columns).

    Pivot search walks columns left to right and takes the first row with a
    nonzero entry; `cols` limits pivoting to a left block (used when rows
    carry bookkeeping columns on the right)."""
    m = _clone(matrix)
    if not m:
        return [], []
    ncols = len(m[0]) if cols is None else cols
    pivots = []
    r = 0
    for c in range(ncols):
        pivot_row = None
        for i in range(r, len(m)):
            if m[i][c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        m[r], m[pivot_row] = m[pivot_row], m[r]
        pv = m[r][c]
        m[r] = [e / pv for e in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(matrix) -> int:
    return len(rref(matrix)[1])


def primitive(vec):
    """Scale a rational vector to coprime integers, first nonzero positive."""
    den = 1
    for e in vec:
        den = den * e.denominator // gcd(den, e.denominator)
    ints = [int(e * den) for e in vec]
    g = 0
    for e in ints:
        g = gcd(g, abs(e))
    if g > 1:
        ints = [e // g for e in ints]
    for e in ints:
        if e != 0:
            if e < 0:
                ints = [-x for x in ints]
            break
    return [Fraction(e) for e in ints]


def nullspace(matrix):
    """Basis of {x : Ax = 0}, one primitive vector per free column."""
    if not matrix:
        return []
    ncols = len(matrix[0])
    rows, pivots = rref(matrix)
    pivot_set = set(pivots)
    free = [c for c in range(ncols) if c not in pivot_set]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for row, pc in zip(rows, pivots):
            vec[pc] = -row[fc]
        basis.append(primitive(vec))
    return basis


def span_equal(a, b) -> bool:
    """Row spans coincide: rank A = rank B = rank of the stack."""
    ra, rb = rank(a), rank(b)
    return ra == rb == rank(list(a) + list(b))


def coordinates_in_rowspan(rows, target):
    """Express target as a combination of the given rows, or None.

    Returns coefficients c with sum_i c_i rows[i] = target."""
    if not rows:
        return None if any(e != 0 for e in target) else []
    n = len(rows[0])
    aug = [list(map(Fraction, row)) + _unit(len(rows), i) for i, row in enumerate(rows)]
    red, pivots = rref(aug, cols=n)
    t = list(map(Fraction, target))
    coeffs = [Fraction(0)] * len(rows)
    for row, pc in zip(red, pivots):
        f = t[pc]
        if f == 0:
            continue
        for j in range(n):
            t[j] -= f * row[j]
        for j in range(len(rows)):
            coeffs[j] += f * row[n + j]
    if any(e != 0 for e in t):
        return None
    return coeffs


def _unit(n, i):
    out = [Fraction(0)] * n
    out[i] = Fraction(1)
    return out
