"""Rumin complex, hypoelliptic heat semigroups and Calderon reproduction
on Heisenberg groups.

Symbolic layer: exact construction of the complex (E0, d_c) and its
Laplacians with normal-ordered Weyl-polynomial entries.  Numeric layer:
finite-difference realization of the heat semigroup exp(-s Delta) on
truncated grids, with scaling / semigroup / symmetry / fundamental-solution
checks and the Calderon reproducing formula at desk scale.
"""

__version__ = "0.1.0"

from .group import (
    GroupDims,
    GroupPoint,
    dilate,
    group_mul,
    inverse,
    koranyi_dist,
    koranyi_norm,
)
from .weyl import WeylPolynomial
from .exterior import Covector, hodge_star, lefschetz, wedge, weight_split
from .rumin import OperatorMatrix, RuminComplex, get_complex

__all__ = [
    "GroupDims",
    "GroupPoint",
    "group_mul",
    "inverse",
    "dilate",
    "koranyi_norm",
    "koranyi_dist",
    "WeylPolynomial",
    "Covector",
    "wedge",
    "hodge_star",
    "lefschetz",
    "weight_split",
    "RuminComplex",
    "OperatorMatrix",
    "get_complex",
]
