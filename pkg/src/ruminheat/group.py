"""Heisenberg group arithmetic in exponential coordinates.

A point of the group of index n is p = (x, y, t) with x, y real vectors of
length n and t a real scalar.  The product carries the symplectic twist in
the t component,

    p * q = (x + x', y + y', t + t' + (1/2) sum_j (x_j y'_j - y_j x'_j)),

the anisotropic dilations are delta_lam(x, y, t) = (lam x, lam y, lam^2 t),
and the Koranyi gauge is rho(p) = ((|x|^2 + |y|^2)^2 + 16 t^2)^(1/4).

All operations are generic over the scalar type: they work with exact
`fractions.Fraction` components (symbolic layer) as well as with floats
(numeric layer).  Conversion between the two layers is explicit via
`GroupPoint.to_float` / `GroupPoint.from_rationals`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


@dataclass(frozen=True)
class GroupDims:
    """Dimensional data of the group of index n."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("group index n must be >= 1")

    @property
    def topological(self) -> int:
        return 2 * self.n + 1

    @property
    def homogeneous(self) -> int:
        """Scaling exponent Q of the volume under dilations: Q = 2n + 2."""
        return 2 * self.n + 2


@dataclass(frozen=True)
class GroupPoint:
    """A group element in exponential coordinates (x, y, t)."""

    x: tuple
    y: tuple
    t: object  # scalar; Fraction or float

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(self.x))
        object.__setattr__(self, "y", tuple(self.y))
        if len(self.x) != len(self.y):
            raise ValueError("x and y must have equal length")

    @property
    def n(self) -> int:
        return len(self.x)

    @staticmethod
    def origin(n: int, exact: bool = False) -> "GroupPoint":
        zero = Fraction(0) if exact else 0.0
        return GroupPoint((zero,) * n, (zero,) * n, zero)

    @staticmethod
    def from_coords(coords: Sequence, n: int) -> "GroupPoint":
        """Build from a flat (2n+1)-sequence ordered (x_1..x_n, y_1..y_n, t)."""
        coords = list(coords)
        if len(coords) != 2 * n + 1:
            raise ValueError("expected %d coordinates" % (2 * n + 1))
        return GroupPoint(tuple(coords[:n]), tuple(coords[n : 2 * n]), coords[2 * n])

    @staticmethod
    def from_rationals(coords: Sequence, n: int) -> "GroupPoint":
        return GroupPoint.from_coords([Fraction(c) for c in coords], n)

    def coords(self) -> tuple:
        return self.x + self.y + (self.t,)

    def to_float(self) -> "GroupPoint":
        return GroupPoint(
            tuple(float(v) for v in self.x),
            tuple(float(v) for v in self.y),
            float(self.t),
        )


def group_mul(p: GroupPoint, q: GroupPoint) -> GroupPoint:
    """Group product p * q."""
    if p.n != q.n:
        raise ValueError("dimension mismatch: %d vs %d" % (p.n, q.n))
    half = Fraction(1, 2) if isinstance(p.t, Fraction) or isinstance(q.t, Fraction) else 0.5
    twist = sum(p.x[j] * q.y[j] - p.y[j] * q.x[j] for j in range(p.n))
    return GroupPoint(
        tuple(a + b for a, b in zip(p.x, q.x)),
        tuple(a + b for a, b in zip(p.y, q.y)),
        p.t + q.t + half * twist,
    )


def inverse(p: GroupPoint) -> GroupPoint:
    """Group inverse; p^{-1} = (-x, -y, -t) since the twist vanishes there."""
    return GroupPoint(tuple(-v for v in p.x), tuple(-v for v in p.y), -p.t)


def dilate(lam, p: GroupPoint) -> GroupPoint:
    """Anisotropic dilation delta_lam, an automorphism for every lam > 0."""
    if lam <= 0:
        raise ValueError("dilation parameter must be positive")
    return GroupPoint(
        tuple(lam * v for v in p.x),
        tuple(lam * v for v in p.y),
        lam * lam * p.t,
    )


def koranyi_norm(p: GroupPoint) -> float:
    """Koranyi gauge rho(p) = ((|x|^2+|y|^2)^2 + 16 t^2)^(1/4)."""
    r2 = sum(v * v for v in p.x) + sum(v * v for v in p.y)
    return math.sqrt(math.sqrt(float(r2) ** 2 + 16.0 * float(p.t) ** 2))


def koranyi_norm4(p: GroupPoint):
    """Fourth power of the gauge; exact when the components are exact."""
    r2 = sum(v * v for v in p.x) + sum(v * v for v in p.y)
    return r2 * r2 + 16 * p.t * p.t


def koranyi_dist(p: GroupPoint, q: GroupPoint) -> float:
    """Left-invariant gauge distance d(p, q) = rho(p^{-1} * q)."""
    return koranyi_norm(group_mul(inverse(p), q))
