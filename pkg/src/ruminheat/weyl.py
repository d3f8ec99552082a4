"""Normal-ordered polynomial algebra in the left-invariant frame.

The frame W_1 .. W_{2n+1} consists of X_1 .. X_n, Y_1 .. Y_n, T with the
single family of nontrivial commutators [X_j, Y_j] = T, T central.  By
Poincare-Birkhoff-Witt the ordered monomials

    W^I = X_1^{i_1} ... X_n^{i_n} Y_1^{j_1} ... Y_n^{j_n} T^{k}

form a linear basis of the algebra of left-invariant differential operators,
so every element is stored as a map {exponent tuple -> Fraction} with keys in
that canonical order.  Products are rewritten into the basis through the
closed-form pair exchange

    Y^p X^q = sum_k  C(p,k) C(q,k) k! (-T)^k X^{q-k} Y^{p-k},

applied independently per index j (distinct pairs commute).

Homogeneity is measured against the group dilations: X and Y count 1, T
counts 2.  Formal adjoints follow the left-invariant rule W* = -W, so the
adjoint of a monomial is the reversed product with sign (-1)^{order},
re-normal-ordered.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb, factorial
from typing import Dict, Iterable, Tuple

Monomial = Tuple[int, ...]


def generator_names(n: int):
    return ["X%d" % (i + 1) for i in range(n)] + ["Y%d" % (i + 1) for i in range(n)] + ["T"]


def generator_degrees(n: int):
    """Homogeneous degree of each generator: 1 for X, Y and 2 for T."""
    return (1,) * (2 * n) + (2,)


def monomial_degree(n: int, mono: Monomial) -> int:
    degs = generator_degrees(n)
    return sum(d * e for d, e in zip(degs, mono))


def monomial_order(mono: Monomial) -> int:
    """Differential order |I| (number of derivatives)."""
    return sum(mono)


def _mul_monomials(n: int, a: Monomial, b: Monomial) -> Dict[Monomial, Fraction]:
    """Normal-ordered product of two PBW monomials."""
    # Only the Y_j of a crossing the X_j of b produce commutator terms.
    choices = [(a[n + j], b[j]) for j in range(n)]
    out: Dict[Monomial, Fraction] = {}
    ks = [0] * n

    def rec(j: int, coef: Fraction, ksum: int):
        if j == n:
            exps = [0] * (2 * n + 1)
            for i in range(n):
                exps[i] = a[i] + b[i] - ks[i]
                exps[n + i] = a[n + i] + b[n + i] - ks[i]
            exps[2 * n] = a[2 * n] + b[2 * n] + ksum
            key = tuple(exps)
            out[key] = out.get(key, Fraction(0)) + coef
            return
        p, q = choices[j]
        for k in range(min(p, q) + 1):
            c = comb(p, k) * comb(q, k) * factorial(k)
            ks[j] = k
            rec(j + 1, coef * ((-1) ** k * c), ksum + k)
        ks[j] = 0

    rec(0, Fraction(1), 0)
    return {m: c for m, c in out.items() if c != 0}


class WeylPolynomial:
    """Immutable normal-ordered noncommutative polynomial."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Dict[Monomial, Fraction] | None = None):
        self.n = n
        clean: Dict[Monomial, Fraction] = {}
        if terms:
            width = 2 * n + 1
            for mono, coef in terms.items():
                if len(mono) != width:
                    raise ValueError("monomial width mismatch")
                c = Fraction(coef)
                if c != 0:
                    clean[tuple(int(e) for e in mono)] = c
        self.terms = clean

    # -- constructors -------------------------------------------------
    @staticmethod
    def zero(n: int) -> "WeylPolynomial":
        return WeylPolynomial(n, {})

    @staticmethod
    def one(n: int) -> "WeylPolynomial":
        return WeylPolynomial.constant(n, 1)

    @staticmethod
    def constant(n: int, c) -> "WeylPolynomial":
        return WeylPolynomial(n, {(0,) * (2 * n + 1): Fraction(c)})

    @staticmethod
    def generator(n: int, i: int) -> "WeylPolynomial":
        """The i-th frame field, i in 1 .. 2n+1."""
        if not 1 <= i <= 2 * n + 1:
            raise ValueError("generator index out of range")
        exps = [0] * (2 * n + 1)
        exps[i - 1] = 1
        return WeylPolynomial(n, {tuple(exps): Fraction(1)})

    # -- predicates ----------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return isinstance(other, WeylPolynomial) and self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    # -- arithmetic ----------------------------------------------------
    def _check(self, other: "WeylPolynomial"):
        if self.n != other.n:
            raise ValueError("mixing algebras of different index n")

    def __add__(self, other: "WeylPolynomial") -> "WeylPolynomial":
        self._check(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, Fraction(0)) + c
        return WeylPolynomial(self.n, terms)

    def __sub__(self, other: "WeylPolynomial") -> "WeylPolynomial":
        self._check(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, Fraction(0)) - c
        return WeylPolynomial(self.n, terms)

    def __neg__(self) -> "WeylPolynomial":
        return WeylPolynomial(self.n, {m: -c for m, c in self.terms.items()})

    def scale(self, c) -> "WeylPolynomial":
        c = Fraction(c)
        return WeylPolynomial(self.n, {m: c * v for m, v in self.terms.items()})

    def __mul__(self, other: "WeylPolynomial") -> "WeylPolynomial":
        """Operator composition self then-acting-after other, normal ordered."""
        self._check(other)
        out: Dict[Monomial, Fraction] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                for m, c in _mul_monomials(self.n, ma, mb).items():
                    out[m] = out.get(m, Fraction(0)) + ca * cb * c
        return WeylPolynomial(self.n, out)

    def power(self, k: int) -> "WeylPolynomial":
        out = WeylPolynomial.one(self.n)
        for _ in range(k):
            out = out * self
        return out

    # -- structure -----------------------------------------------------
    def adjoint(self) -> "WeylPolynomial":
        """Formal L2 adjoint under W* = -W (unimodular left-invariant frame)."""
        n = self.n
        out = WeylPolynomial.zero(n)
        for mono, coef in self.terms.items():
            xs = mono[:n] + (0,) * (n + 1)
            ys = (0,) * n + mono[n : 2 * n] + (0,)
            sign = (-1) ** monomial_order(mono)
            prod = _mul_monomials(n, ys, xs)  # reversed order: Y block before X block
            terms = {}
            for m, c in prod.items():
                key = m[: 2 * n] + (m[2 * n] + mono[2 * n],)
                terms[key] = sign * coef * c
            out = out + WeylPolynomial(n, terms)
        return out

    def homogeneous_degree(self):
        """Common dilation degree of all monomials, or None if mixed."""
        if not self.terms:
            raise ValueError("homogeneous degree of the zero polynomial is undefined")
        degs = {monomial_degree(self.n, m) for m in self.terms}
        if len(degs) == 1:
            return degs.pop()
        return None

    def differential_order(self) -> int:
        if not self.terms:
            return 0
        return max(monomial_order(m) for m in self.terms)

    # -- rendering -------------------------------------------------------
    def to_text(self) -> str:
        if not self.terms:
            return "0"
        names = generator_names(self.n)
        parts = []
        for mono in sorted(self.terms, key=lambda m: (monomial_degree(self.n, m), m)):
            coef = self.terms[mono]
            factors = []
            for name, e in zip(names, mono):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append("%s^%d" % (name, e))
            body = "*".join(factors) if factors else "1"
            if coef == 1 and factors:
                term = body
            elif coef == -1 and factors:
                term = "-" + body
            elif factors:
                term = "%s*%s" % (coef, body)
            else:
                term = str(coef)
            parts.append(term)
        text = parts[0]
        for term in parts[1:]:
            text += " - " + term[1:] if term.startswith("-") else " + " + term
        return text

    def to_json_dict(self) -> Dict[str, str]:
        """Map 'i1,...,i_{2n+1}' -> rational coefficient as a string."""
        return {
            ",".join(str(e) for e in mono): str(self.terms[mono])
            for mono in sorted(self.terms)
        }

    def __repr__(self):
        return "WeylPolynomial(n=%d, %s)" % (self.n, self.to_text())


def poly_sum(n: int, polys: Iterable[WeylPolynomial]) -> WeylPolynomial:
    out = WeylPolynomial.zero(n)
    for p in polys:
        out = out + p
    return out
