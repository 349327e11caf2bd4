#!/usr/bin/env python3
"""
Exact linear algebra over Q and prime fields
Thin layer over sympy's DomainMatrix; vectors and matrices travel as Fractions
"""

import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from sympy import GF, QQ
from sympy.polys.matrices import DomainMatrix

logger = logging.getLogger(__name__)

Rows = Sequence[Sequence[Union[int, Fraction]]]
SparseRows = Dict[int, Dict[int, Union[int, Fraction]]]


def field(characteristic: int = 0):
    return QQ if characteristic == 0 else GF(characteristic)


def _convert(value, dom, characteristic):
    value = Fraction(value)
    if characteristic == 0:
        return dom(value.numerator, value.denominator)
    return dom(value.numerator * pow(value.denominator, -1, characteristic) % characteristic)


def to_domain_matrix(rows: Union[Rows, SparseRows], shape: Optional[Tuple[int, int]] = None,
                     characteristic: int = 0) -> DomainMatrix:
    dom = field(characteristic)
    if isinstance(rows, dict):
        if shape is None:
            raise ValueError("Sparse rows need an explicit shape")
        data = {}
        for i, row in rows.items():
            converted = {j: _convert(v, dom, characteristic) for j, v in row.items() if v}
            if converted:
                data[i] = converted
        return DomainMatrix(data, shape, dom)
    rows = [list(r) for r in rows]
    if shape is None:
        shape = (len(rows), len(rows[0]) if rows else 0)
    return DomainMatrix([[_convert(v, dom, characteristic) for v in r] for r in rows], shape, dom)


def _to_fraction(value, dom, characteristic) -> Fraction:
    number = dom.to_sympy(value)
    if characteristic == 0:
        return Fraction(int(number.p), int(number.q))
    return Fraction(int(number) % characteristic)


def sparse_entries(M: DomainMatrix, characteristic: int = 0) -> Dict[int, Dict[int, Fraction]]:
    """Nonzero entries of M as {row: {col: Fraction}}"""
    dom = M.domain
    out = {}
    for i, row in M.to_sparse().rep.items():
        converted = {j: _to_fraction(v, dom, characteristic) for j, v in row.items() if v}
        if converted:
            out[i] = converted
    return out


def from_domain_matrix(M: DomainMatrix, characteristic: int = 0) -> List[List[Fraction]]:
    m, n = M.shape
    out = [[Fraction(0)] * n for _ in range(m)]
    for i, row in sparse_entries(M, characteristic).items():
        for j, v in row.items():
            out[i][j] = v
    return out


def _shape_of(rows, shape):
    if shape is not None:
        return shape
    rows = list(rows)
    return (len(rows), len(rows[0]) if rows else 0)


def rref_sparse(rows: Union[Rows, SparseRows], characteristic: int = 0,
                shape: Optional[Tuple[int, int]] = None
                ) -> Tuple[Dict[int, Dict[int, Fraction]], Tuple[int, ...]]:
    m, n = _shape_of(rows, shape)
    if m == 0 or n == 0:
        return {}, ()
    reduced, pivots = to_domain_matrix(rows, (m, n), characteristic).rref()
    return sparse_entries(reduced, characteristic), tuple(pivots)


def rref(rows: Union[Rows, SparseRows], characteristic: int = 0,
         shape: Optional[Tuple[int, int]] = None) -> Tuple[List[List[Fraction]], Tuple[int, ...]]:
    """Reduced row echelon form and pivot columns"""
    m, n = _shape_of(rows, shape)
    entries, pivots = rref_sparse(rows, characteristic, (m, n))
    out = [[Fraction(0)] * n for _ in range(m)]
    for i, row in entries.items():
        for j, v in row.items():
            out[i][j] = v
    return out, pivots


def rank(rows: Union[Rows, SparseRows], characteristic: int = 0,
         shape: Optional[Tuple[int, int]] = None) -> int:
    m, n = _shape_of(rows, shape)
    if m == 0 or n == 0:
        return 0
    return to_domain_matrix(rows, (m, n), characteristic).rank()


def nullspace(rows: Union[Rows, SparseRows], ncols: int, characteristic: int = 0,
              nrows: Optional[int] = None) -> List[List[Fraction]]:
    """Basis of {v : A v = 0}, one vector per free column"""
    if isinstance(rows, dict):
        m = nrows if nrows is not None else (max(rows) + 1 if rows else 0)
    else:
        m = len(rows)
    if m == 0:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    reduced, pivots = rref_sparse(rows, characteristic, (m, ncols))
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        v = [Fraction(0)] * ncols
        v[free] = Fraction(1)
        for r, col in enumerate(pivots):
            v[col] = -reduced.get(r, {}).get(free, Fraction(0))
        basis.append(v)
    return basis


def solve(rows: Union[Rows, SparseRows], rhs: Sequence[Union[int, Fraction]], ncols: int,
          characteristic: int = 0) -> Optional[List[Fraction]]:
    """One solution of A x = b (free variables set to zero), or None"""
    m = len(rhs)
    if isinstance(rows, dict):
        augmented = {i: dict(row) for i, row in rows.items()}
    else:
        augmented = {i: {j: v for j, v in enumerate(row) if v} for i, row in enumerate(rows)}
    for i, b in enumerate(rhs):
        if b:
            augmented.setdefault(i, {})[ncols] = b
    if m == 0:
        return [Fraction(0)] * ncols
    reduced, pivots = rref_sparse(augmented, characteristic, (m, ncols + 1))
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for r, col in enumerate(pivots):
        x[col] = reduced.get(r, {}).get(ncols, Fraction(0))
    return x


def inverse(rows: Rows, characteristic: int = 0) -> Optional[List[List[Fraction]]]:
    """Inverse of a square matrix, or None when singular"""
    n = len(rows)
    if n == 0:
        return []
    augmented = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(rows)]
    reduced, pivots = rref(augmented, characteristic)
    if len(pivots) < n or tuple(pivots[:n]) != tuple(range(n)):
        return None
    return [row[n:] for row in reduced[:n]]


def column_basis(rows: Rows, characteristic: int = 0) -> Tuple[int, ...]:
    """Indices of a maximal independent set of columns"""
    return rref(rows, characteristic)[1]


def transpose(rows: Rows) -> List[List[Fraction]]:
    return [list(col) for col in zip(*rows)] if rows else []
