"""Operators with polynomial coefficients in the group coordinates.

Extends the constant-coefficient Weyl algebra by multiplication operators
M_zeta for polynomials zeta(x, y, t).  The commutation rule is the Leibniz
exchange W M_q = M_q W + M_{Wq}, with the frame acting on coordinates by

    X_i q = dq/dx_i - (1/2) y_i dq/dt,
    Y_i q = dq/dy_i + (1/2) x_i dq/dt,
    T q   = dq/dt.

Used to verify the order structure of the commutators [d_c, zeta]: order 0
away from the middle degree, order <= 1 at h = n.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Tuple

from .weyl import Monomial, WeylPolynomial

# exponent tuple over (x_1..x_n, y_1..y_n, t)
CoordMono = Tuple[int, ...]


class CoordPoly:
    """Polynomial in the exponential coordinates, exact coefficients."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Dict[CoordMono, Fraction] | None = None):
        self.n = n
        self.terms: Dict[CoordMono, Fraction] = {}
        if terms:
            for m, c in terms.items():
                c = Fraction(c)
                if c != 0:
                    self.terms[tuple(m)] = c

    @staticmethod
    def zero(n: int) -> "CoordPoly":
        return CoordPoly(n, {})

    @staticmethod
    def constant(n: int, c) -> "CoordPoly":
        return CoordPoly(n, {(0,) * (2 * n + 1): Fraction(c)})

    @staticmethod
    def coordinate(n: int, i: int) -> "CoordPoly":
        """x_i for i in 1..n, y_{i-n} for n < i <= 2n, t for i = 2n+1."""
        exps = [0] * (2 * n + 1)
        exps[i - 1] = 1
        return CoordPoly(n, {tuple(exps): Fraction(1)})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, CoordPoly) and self.n == other.n and self.terms == other.terms

    def __add__(self, other: "CoordPoly") -> "CoordPoly":
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, Fraction(0)) + c
        return CoordPoly(self.n, terms)

    def __neg__(self) -> "CoordPoly":
        return CoordPoly(self.n, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "CoordPoly") -> "CoordPoly":
        out: Dict[CoordMono, Fraction] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                key = tuple(a + b for a, b in zip(ma, mb))
                out[key] = out.get(key, Fraction(0)) + ca * cb
        return CoordPoly(self.n, out)

    def scale(self, c) -> "CoordPoly":
        c = Fraction(c)
        return CoordPoly(self.n, {m: c * v for m, v in self.terms.items()})

    def diff(self, axis: int) -> "CoordPoly":
        """Partial derivative along coordinate axis (0-based)."""
        out: Dict[CoordMono, Fraction] = {}
        for m, c in self.terms.items():
            e = m[axis]
            if e:
                key = m[:axis] + (e - 1,) + m[axis + 1 :]
                out[key] = out.get(key, Fraction(0)) + c * e
        return CoordPoly(self.n, out)

    def frame_derivative(self, i: int) -> "CoordPoly":
        """Action of the i-th frame field (1-based) on this polynomial."""
        n = self.n
        dt = self.diff(2 * n)
        if i == 2 * n + 1:
            return dt
        if i <= n:  # X_i
            out = self.diff(i - 1)
            if not dt.is_zero():
                out = out - CoordPoly.coordinate(n, n + i) * dt.scale(Fraction(1, 2))
            return out
        # Y_{i-n}
        j = i - n
        out = self.diff(n + j - 1)
        if not dt.is_zero():
            out = out + CoordPoly.coordinate(n, j) * dt.scale(Fraction(1, 2))
        return out


class CoeffOp:
    """Normal form  sum  M_{p_I} W^I  with polynomial coefficients p_I."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Dict[Monomial, CoordPoly] | None = None):
        self.n = n
        self.terms: Dict[Monomial, CoordPoly] = {}
        if terms:
            for m, p in terms.items():
                if not p.is_zero():
                    self.terms[tuple(m)] = p

    @staticmethod
    def from_weyl(p: WeylPolynomial) -> "CoeffOp":
        n = p.n
        return CoeffOp(
            n, {m: CoordPoly.constant(n, c) for m, c in p.terms.items()}
        )

    @staticmethod
    def multiplication(zeta: CoordPoly) -> "CoeffOp":
        return CoeffOp(zeta.n, {(0,) * (2 * zeta.n + 1): zeta})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "CoeffOp") -> "CoeffOp":
        terms = dict(self.terms)
        for m, p in other.terms.items():
            cur = terms.get(m)
            s = cur + p if cur is not None else p
            if s.is_zero():
                terms.pop(m, None)
            else:
                terms[m] = s
        return CoeffOp(self.n, terms)

    def __sub__(self, other: "CoeffOp") -> "CoeffOp":
        return self + other.scale(-1)

    def scale(self, c) -> "CoeffOp":
        return CoeffOp(self.n, {m: p.scale(c) for m, p in self.terms.items()})

    def __mul__(self, other: "CoeffOp") -> "CoeffOp":
        out = CoeffOp(self.n, {})
        for ma, pa in self.terms.items():
            for mb, pb in other.terms.items():
                pushed = _compose_mono_with_poly(self.n, ma, pb)
                for mono_mid, poly_mid in pushed.items():
                    prod_w = WeylPolynomial(self.n, {mono_mid: Fraction(1)}) * WeylPolynomial(
                        self.n, {mb: Fraction(1)}
                    )
                    coef_poly = pa * poly_mid
                    add_terms = {
                        m: coef_poly.scale(c) for m, c in prod_w.terms.items()
                    }
                    out = out + CoeffOp(self.n, add_terms)
        return out

    def differential_order(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def order_split(self):
        """Map differential order -> CoeffOp of the terms at that order."""
        buckets: Dict[int, CoeffOp] = {}
        for m, p in self.terms.items():
            k = sum(m)
            buckets.setdefault(k, CoeffOp(self.n, {}))
            buckets[k] = buckets[k] + CoeffOp(self.n, {m: p})
        return buckets


def _compose_mono_with_poly(n: int, mono: Monomial, q: CoordPoly) -> Dict[Monomial, CoordPoly]:
    """Normal form of W^mono o M_q as a map monomial -> coefficient."""
    if all(e == 0 for e in mono):
        return {mono: q}
    # strip the rightmost factor of the PBW word (largest index with exponent)
    pos = max(i for i, e in enumerate(mono) if e > 0)
    rest = mono[:pos] + (mono[pos] - 1,) + mono[pos + 1 :]
    gen = pos + 1
    out: Dict[Monomial, CoordPoly] = {}

    def accumulate(d: Dict[Monomial, CoordPoly]):
        for m, p in d.items():
            cur = out.get(m)
            s = cur + p if cur is not None else p
            if s.is_zero():
                out.pop(m, None)
            else:
                out[m] = s

    # W^rest o (M_q o W_gen): append the generator on the right
    for m, p in _compose_mono_with_poly(n, rest, q).items():
        prod = WeylPolynomial(n, {m: Fraction(1)}) * WeylPolynomial.generator(n, gen)
        accumulate({mm: p.scale(c) for mm, c in prod.terms.items()})
    # W^rest o M_{W_gen q}
    dq = q.frame_derivative(gen)
    if not dq.is_zero():
        accumulate(_compose_mono_with_poly(n, rest, dq))
    return out


def commutator_with_coordinate(op: WeylPolynomial, zeta: CoordPoly) -> CoeffOp:
    """[op, M_zeta] = op o M_zeta - M_zeta o op in normal form."""
    a = CoeffOp.from_weyl(op)
    m = CoeffOp.multiplication(zeta)
    return a * m - m * a
