"""Left-invariant exterior algebra on the Heisenberg group of index n.

The dual frame is omega_1 .. omega_{2n+1} with omega_i = dx_i, omega_{n+i} =
dy_i for i <= n and omega_{2n+1} = theta, the contact form.  The monomial
wedges omega_I (I a strictly increasing index tuple) are declared orthonormal
and orient the group through dV = omega_1 ^ ... ^ omega_{2n+1}.

Weights: horizontal 1-covectors have weight 1, theta has weight 2, and a
monomial's weight is the sum.  An h-covector therefore splits into a weight-h
(horizontal) and a weight-(h+1) (theta wedge horizontal) component; the two
are orthogonal.

The differential of theta is fixed once from theta = dt - (1/2) sum (x_j dy_j
- y_j dx_j) as

    d theta = - sum_j omega_j ^ omega_{n+j},

and `dtheta_from_coordinates` re-derives that constant so a regression test
can guard the sign.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Dict, Tuple

Index = Tuple[int, ...]


def basis_indices(n: int, h: int):
    """All strictly increasing index tuples of length h in 1..2n+1."""
    return list(combinations(range(1, 2 * n + 2), h))


def index_weight(n: int, idx: Index) -> int:
    return len(idx) + (1 if (2 * n + 1) in idx else 0)


def merge_sign(a: Index, b: Index):
    """Sorted merge of disjoint index tuples with the permutation sign.

    Returns (merged tuple, sign) or (None, 0) when an index repeats.
    """
    out = []
    sign = 1
    i = j = 0
    while i < len(a) and j < len(b):
        if a[i] == b[j]:
            return None, 0
        if a[i] < b[j]:
            out.append(a[i])
            i += 1
        else:
            # b[j] hops over the remaining entries of a
            if (len(a) - i) % 2 == 1:
                sign = -sign
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out), sign


class Covector:
    """A left-invariant h-covector: coefficients over the monomial basis."""

    __slots__ = ("n", "degree", "terms")

    def __init__(self, n: int, degree: int, terms: Dict[Index, object] | None = None):
        self.n = n
        self.degree = degree
        clean: Dict[Index, object] = {}
        if terms:
            for idx, c in terms.items():
                idx = tuple(idx)
                if len(idx) != degree:
                    raise ValueError("index tuple has wrong length for degree %d" % degree)
                if c != 0:
                    clean[idx] = c
        self.terms = clean

    @staticmethod
    def zero(n: int, degree: int) -> "Covector":
        return Covector(n, degree, {})

    @staticmethod
    def basis(n: int, idx: Index) -> "Covector":
        idx = tuple(idx)
        return Covector(n, len(idx), {idx: Fraction(1)})

    @staticmethod
    def one(n: int) -> "Covector":
        return Covector(n, 0, {(): Fraction(1)})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return (
            isinstance(other, Covector)
            and self.n == other.n
            and self.degree == other.degree
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.n, self.degree, frozenset(self.terms.items())))

    def __add__(self, other: "Covector") -> "Covector":
        if self.degree != other.degree or self.n != other.n:
            raise ValueError("degree or index mismatch")
        terms = dict(self.terms)
        for idx, c in other.terms.items():
            terms[idx] = terms.get(idx, 0) + c
        return Covector(self.n, self.degree, terms)

    def __sub__(self, other: "Covector") -> "Covector":
        return self + other.scale(-1)

    def __neg__(self) -> "Covector":
        return self.scale(-1)

    def scale(self, c) -> "Covector":
        return Covector(self.n, self.degree, {i: c * v for i, v in self.terms.items()})

    def coefficients(self, order=None):
        """Coefficient vector over the monomial basis in the given order."""
        order = order or basis_indices(self.n, self.degree)
        return [Fraction(self.terms.get(idx, 0)) for idx in order]

    @staticmethod
    def from_coefficients(n: int, degree: int, coeffs, order=None) -> "Covector":
        order = order or basis_indices(n, degree)
        return Covector(n, degree, dict(zip(order, coeffs)))

    def to_json_dict(self):
        return {
            ",".join(str(i) for i in idx): str(self.terms[idx])
            for idx in sorted(self.terms)
        }

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for idx in sorted(self.terms):
            name = "^".join("w%d" % i for i in idx) if idx else "1"
            bits.append("%s*%s" % (self.terms[idx], name))
        return " + ".join(bits)


def wedge(a: Covector, b: Covector) -> Covector:
    if a.n != b.n:
        raise ValueError("index mismatch")
    n = a.n
    deg = a.degree + b.degree
    if deg > 2 * n + 1:
        return Covector.zero(n, min(deg, 2 * n + 1))
    terms: Dict[Index, object] = {}
    for ia, ca in a.terms.items():
        for ib, cb in b.terms.items():
            merged, sign = merge_sign(ia, ib)
            if merged is None:
                continue
            terms[merged] = terms.get(merged, 0) + sign * ca * cb
    return Covector(n, deg, terms)


def inner(a: Covector, b: Covector):
    """Inner product making the monomial wedge basis orthonormal."""
    if a.degree != b.degree or a.n != b.n:
        raise ValueError("degree or index mismatch")
    total = 0
    for idx, ca in a.terms.items():
        cb = b.terms.get(idx)
        if cb is not None:
            total += ca * cb
    return total


def hodge_star(a: Covector) -> Covector:
    """Hodge dual: u ^ star(v) = <u, v> dV for the orientation dV."""
    n = a.n
    full = tuple(range(1, 2 * n + 2))
    terms: Dict[Index, object] = {}
    for idx, c in a.terms.items():
        comp = tuple(i for i in full if i not in idx)
        _, sign = merge_sign(idx, comp)
        terms[comp] = terms.get(comp, 0) + sign * c
    return Covector(n, 2 * n + 1 - a.degree, terms)


def dtheta(n: int) -> Covector:
    """The fixed constant d theta = - sum_j omega_j ^ omega_{n+j}."""
    return Covector(n, 2, {(j + 1, n + j + 1): Fraction(-1) for j in range(n)})


def dtheta_from_coordinates(n: int):
    """Recompute d theta from the coordinate expression of theta.

    theta = dt - (1/2) sum_j (x_j dy_j - y_j dx_j), so d theta =
    -(1/2) sum_j (dx_j ^ dy_j - dy_j ^ dx_j) = - sum_j dx_j ^ dy_j.
    Carried out with explicit coefficient bookkeeping so the frozen constant
    in `dtheta` has an independent derivation in the test suite.
    """
    half = Fraction(1, 2)
    terms: Dict[Index, Fraction] = {}
    # d(x_j dy_j) = dx_j ^ dy_j, d(y_j dx_j) = dy_j ^ dx_j = -dx_j ^ dy_j
    for j in range(1, n + 1):
        key = (j, n + j)
        terms[key] = terms.get(key, Fraction(0)) - half   # from -(1/2) x_j dy_j
        terms[key] = terms.get(key, Fraction(0)) - half   # from +(1/2) y_j dx_j
    return Covector(n, 2, terms)


def lefschetz(a: Covector) -> Covector:
    """Wedge with d theta."""
    return wedge(dtheta(a.n), a)


def weight_split(a: Covector):
    """Split into the weight-h and weight-(h+1) components (orthogonal)."""
    n = a.n
    low: Dict[Index, object] = {}
    high: Dict[Index, object] = {}
    for idx, c in a.terms.items():
        if (2 * n + 1) in idx:
            high[idx] = c
        else:
            low[idx] = c
    return Covector(n, a.degree, low), Covector(n, a.degree, high)


def pure_weight(a: Covector):
    """Weight if every monomial agrees, None for mixed, raises on zero."""
    if a.is_zero():
        raise ValueError("weight of the zero covector is undefined")
    weights = {index_weight(a.n, idx) for idx in a.terms}
    return weights.pop() if len(weights) == 1 else None


def volume_form(n: int) -> Covector:
    return Covector.basis(n, tuple(range(1, 2 * n + 2)))
