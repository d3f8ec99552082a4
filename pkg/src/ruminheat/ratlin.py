"""Dense exact linear algebra over the rationals.

Small helper kit used by the symbolic layer: reduced row echelon form,
nullspaces, exact inverses of nonsingular matrices, Moore-Penrose
pseudo-inverses via rank factorization, orthogonal projectors, and a
square-root-free Gram-Schmidt.  Matrices are lists of lists of Fraction;
vectors are lists of Fraction.  Everything is exact.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import List

Vec = List[Fraction]
Mat = List[List[Fraction]]


def mat(rows) -> Mat:
    return [[Fraction(v) for v in row] for row in rows]


def zeros(m: int, n: int) -> Mat:
    return [[Fraction(0)] * n for _ in range(m)]


def identity(n: int) -> Mat:
    out = zeros(n, n)
    for i in range(n):
        out[i][i] = Fraction(1)
    return out


def shape(a: Mat):
    return len(a), len(a[0]) if a else 0


def transpose(a: Mat) -> Mat:
    m, n = shape(a)
    return [[a[i][j] for i in range(m)] for j in range(n)]


def matmul(a: Mat, b: Mat) -> Mat:
    m, k = shape(a)
    k2, n = shape(b)
    if k != k2:
        raise ValueError("shape mismatch in matmul")
    out = zeros(m, n)
    for i in range(m):
        ai = a[i]
        oi = out[i]
        for p in range(k):
            v = ai[p]
            if v:
                bp = b[p]
                for j in range(n):
                    if bp[j]:
                        oi[j] += v * bp[j]
    return out


def matvec(a: Mat, v: Vec) -> Vec:
    return [sum(ai[j] * v[j] for j in range(len(v))) for ai in a]


def madd(a: Mat, b: Mat) -> Mat:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def msub(a: Mat, b: Mat) -> Mat:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def dot(u: Vec, v: Vec) -> Fraction:
    return sum(a * b for a, b in zip(u, v))


def is_zero_matrix(a: Mat) -> bool:
    return all(all(v == 0 for v in row) for row in a)


def rref(a: Mat):
    """Reduced row echelon form; returns (rref matrix, pivot column list)."""
    m, n = shape(a)
    r = [row[:] for row in a]
    pivots = []
    lead = 0
    for col in range(n):
        if lead >= m:
            break
        piv = None
        for i in range(lead, m):
            if r[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        r[lead], r[piv] = r[piv], r[lead]
        inv = Fraction(1) / r[lead][col]
        r[lead] = [v * inv for v in r[lead]]
        for i in range(m):
            if i != lead and r[i][col] != 0:
                f = r[i][col]
                r[i] = [vi - f * vl for vi, vl in zip(r[i], r[lead])]
        pivots.append(col)
        lead += 1
    return r, pivots


def nullspace(a: Mat) -> List[Vec]:
    """Canonical basis of the kernel from the RREF free columns."""
    m, n = shape(a)
    if m == 0:
        return [[Fraction(1) if j == i else Fraction(0) for j in range(n)] for i in range(n)]
    r, pivots = rref(a)
    pivot_set = set(pivots)
    basis = []
    for free in range(n):
        if free in pivot_set:
            continue
        v = [Fraction(0)] * n
        v[free] = Fraction(1)
        for row_idx, pc in enumerate(pivots):
            v[pc] = -r[row_idx][free]
        basis.append(v)
    return basis


def inverse(a: Mat) -> Mat:
    """Exact inverse by Gauss-Jordan; raises on singular input."""
    m, n = shape(a)
    if m != n:
        raise ValueError("inverse of non-square matrix")
    aug = [row[:] + ident_row for row, ident_row in zip(a, identity(n))]
    r, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return [row[n:] for row in r[:n]]


def column_space_basis(a: Mat) -> Mat:
    """Matrix whose columns are the pivot columns of a (a basis of Im a)."""
    _, pivots = rref(a)
    m, _ = shape(a)
    return [[a[i][j] for j in pivots] for i in range(m)]


def pinv(a: Mat) -> Mat:
    """Moore-Penrose pseudo-inverse, exact, via rank factorization a = c f."""
    m, n = shape(a)
    r, pivots = rref(a)
    rank = len(pivots)
    if rank == 0:
        return zeros(n, m)
    c = [[a[i][j] for j in pivots] for i in range(m)]     # m x r
    f = [r[i][:] for i in range(rank)]                    # r x n
    ct = transpose(c)
    ft = transpose(f)
    left = inverse(matmul(ct, c))                         # (c^T c)^-1
    right = inverse(matmul(f, ft))                        # (f f^T)^-1
    return matmul(matmul(ft, right), matmul(left, ct))    # f^T (ff^T)^-1 (c^T c)^-1 c^T


def projector_onto_columns(a: Mat) -> Mat:
    """Orthogonal projector onto the column space of a."""
    m, _ = shape(a)
    c = column_space_basis(a)
    if shape(c)[1] == 0:
        return zeros(m, m)
    ct = transpose(c)
    mid = inverse(matmul(ct, c))
    return matmul(c, matmul(mid, ct))


def primitive_scale(v: Vec) -> Vec:
    """Scale to integer entries with content 1, first nonzero positive."""
    den = 1
    for x in v:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        return [Fraction(0)] * len(v)
    ints = [x // g for x in ints]
    for x in ints:
        if x != 0:
            if x < 0:
                ints = [-y for y in ints]
            break
    return [Fraction(x) for x in ints]


def gram_schmidt_sqrtfree(vectors: List[Vec]):
    """Orthogonalize without normalizing; returns (vectors, squared norms).

    Each output vector is scaled to primitive integer form, so callers carry
    the squared norms separately instead of dividing by irrational lengths.
    Zero vectors in the input are dropped.
    """
    ortho: List[Vec] = []
    norms2: List[Fraction] = []
    for v in vectors:
        w = list(v)
        for u, n2 in zip(ortho, norms2):
            c = dot(w, u) / n2
            if c:
                w = [wi - c * ui for wi, ui in zip(w, u)]
        w = primitive_scale(w)
        n2 = dot(w, w)
        if n2 == 0:
            continue
        ortho.append(w)
        norms2.append(n2)
    return ortho, norms2
