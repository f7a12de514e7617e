"""Exact rational linear algebra on small dense matrices.

Everything here works on tuples of ints or Fractions and returns exact
results.  Vectors over the integers are kept primitive (content 1) whenever
a scaling convention is needed, since canonical cone keys depend on it.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd


def dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def vec_content(v) -> int:
    g = 0
    for x in v:
        g = gcd(g, abs(x))
        if g == 1:
            return 1
    return g


def primitive(v) -> tuple:
    """Scale an integer vector by a positive rational so its content is 1."""
    g = vec_content(v)
    if g in (0, 1):
        return tuple(v)
    return tuple(x // g for x in v)


def integerize(v) -> tuple:
    """Clear denominators of a rational vector; result is primitive."""
    denom = 1
    for x in v:
        if isinstance(x, Fraction):
            denom = denom * x.denominator // gcd(denom, x.denominator)
    w = tuple(int(x * denom) for x in v)
    return primitive(w)


def rref(rows, width=None):
    """Reduced row echelon form over the rationals.

    Returns (rows, pivots) where rows is a list of Fraction tuples with
    leading coefficient 1 and pivots the 0-based pivot column indices
    (leftmost-pivot convention).
    """
    mat = [list(map(Fraction, r)) for r in rows]
    if width is None:
        width = len(mat[0]) if mat else 0
    pivots = []
    r = 0
    for c in range(width):
        pivot = None
        for i in range(r, len(mat)):
            if mat[i][c] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        inv = mat[r][c]
        mat[r] = [x / inv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return [tuple(row) for row in mat[:r]], pivots


def rank(rows, width=None) -> int:
    return len(rref(rows, width)[0])


def kernel_basis(rows, width):
    """Basis of {v : rows @ v = 0}, returned in reduced row echelon form.

    The output rows are Fraction tuples; the second return value is their
    pivot column set.
    """
    ech, pivots = rref(rows, width)
    free = [c for c in range(width) if c not in pivots]
    basis = []
    for c in free:
        v = [Fraction(0)] * width
        v[c] = Fraction(1)
        for row, p in zip(ech, pivots):
            v[p] = -row[c]
        basis.append(tuple(v))
    return rref(basis, width)


def rref_integer_rows(rows, width=None):
    """RREF rescaled so each row is a primitive integer vector.

    Canonical for a given row space; used for lineality-space keys.
    """
    ech, pivots = rref(rows, width)
    return [integerize(r) for r in ech], pivots


def reduce_mod_rowspace(v, ech_rows, pivots):
    """Canonical coset representative of v modulo the row space.

    ech_rows must be in RREF with the given pivot columns; the result has
    zero entries in all pivot positions.
    """
    w = list(map(Fraction, v))
    for row, p in zip(ech_rows, pivots):
        if w[p] != 0:
            f = w[p] / row[p]
            w = [x - f * y for x, y in zip(w, row)]
    return tuple(w)


def in_rowspace(v, ech_rows, pivots) -> bool:
    return all(x == 0 for x in reduce_mod_rowspace(v, ech_rows, pivots))


def solve(rows, rhs):
    """Solve rows @ x = rhs exactly; returns a Fraction tuple or None."""
    if not rows:
        return None
    width = len(rows[0])
    aug = [list(map(Fraction, r)) + [Fraction(b)] for r, b in zip(rows, rhs)]
    ech, pivots = rref(aug, width + 1)
    if width in pivots:
        return None
    x = [Fraction(0)] * width
    for row, p in zip(ech, pivots):
        x[p] = row[-1] - sum(row[c] * x[c] for c in range(p + 1, width))
    # back substitution above is valid because ech is fully reduced
    return tuple(x)
