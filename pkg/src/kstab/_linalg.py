"""Small exact linear-algebra helpers over the rationals.

Everything here works on plain lists of Fractions.  The entry points are
deliberately minimal: solve a linear system exactly, compute a rank or a
determinant, and find a kernel basis.  Right-hand sides may contain any
values from a commutative Q-algebra (e.g. polynomials), which is what the
parametric chamber solver relies on.
"""

from __future__ import annotations

from fractions import Fraction


def solve(rows, rhs):
    """One exact solution of ``A x = b``, or None if inconsistent.

    Free variables (underdetermined systems) are set to zero.  ``rhs``
    entries may be Fractions or any values supporting +, -, * by Fraction
    and truth testing (e.g. Poly); the matrix entries must be Fractions.
    """
    m = [list(map(Fraction, row)) for row in rows]
    b = list(rhs)
    nrows = len(m)
    ncols = len(m[0]) if m else 0
    pivots: list[tuple[int, int]] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        b[r], b[pivot] = b[pivot], b[r]
        inv = Fraction(1) / m[r][c]
        m[r] = [x * inv for x in m[r]]
        b[r] = b[r] * inv
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
                b[i] = b[i] - f * b[r]
        pivots.append((r, c))
        r += 1
        if r == nrows:
            break
    for i in range(r, nrows):
        if b[i]:
            return None
    x = [Fraction(0)] * ncols
    for i, c in pivots:
        x[c] = b[i]
    return x


def rank(rows) -> int:
    m = [list(map(Fraction, row)) for row in rows]
    nrows = len(m)
    ncols = len(m[0]) if m else 0
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        for i in range(r + 1, nrows):
            if m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        r += 1
        if r == nrows:
            break
    return r


def det(rows) -> Fraction:
    m = [list(map(Fraction, row)) for row in rows]
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValueError("determinant requires a square matrix")
    sign = Fraction(1)
    result = Fraction(1)
    for c in range(n):
        pivot = next((i for i in range(c, n) if m[i][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            m[c], m[pivot] = m[pivot], m[c]
            sign = -sign
        result *= m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / m[c][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return sign * result


def kernel(rows):
    """A basis (list of Fraction vectors) of the right kernel of A."""
    m = [list(map(Fraction, row)) for row in rows]
    nrows = len(m)
    ncols = len(m[0]) if m else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = Fraction(1) / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            vec[pc] = -m[i][fc]
        basis.append(vec)
    return basis
