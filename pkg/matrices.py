#!/usr/bin/env python3
"""
Matrices with polynomial entries
Shared value type for differentials, maps and descended operators
"""

from fractions import Fraction
from itertools import permutations
from typing import Callable, List, Sequence, Tuple, Union

from sympy.combinatorics import Permutation

from errors import ContextMismatch, ShapeMismatch
from polyring import Polynomial, RingContext, to_polynomial

Entry = Union[Polynomial, int, Fraction, str]


def permutation_sign(images: Sequence[int]) -> int:
    return Permutation(list(images)).signature() if len(images) > 1 else 1


class PolyMatrix:
    """Dense m x n matrix over one ring context"""

    __slots__ = ('ctx', 'rows', 'nrows', 'ncols')

    def __init__(self, ctx: RingContext, rows: Sequence[Sequence[Entry]], shape: Tuple[int, int] = None):
        self.ctx = ctx
        self.rows: Tuple[Tuple[Polynomial, ...], ...] = tuple(
            tuple(to_polynomial(e, ctx) for e in row) for row in rows)
        if shape is None:
            shape = (len(self.rows), len(self.rows[0]) if self.rows else 0)
        self.nrows, self.ncols = shape
        if len(self.rows) != self.nrows or any(len(r) != self.ncols for r in self.rows):
            raise ShapeMismatch(f"Rows do not form a {self.nrows}x{self.ncols} matrix")

    @classmethod
    def _raw(cls, ctx, rows, shape):
        mat = cls.__new__(cls)
        mat.ctx = ctx
        mat.rows = tuple(tuple(r) for r in rows)
        mat.nrows, mat.ncols = shape
        return mat

    @classmethod
    def zeros(cls, ctx: RingContext, nrows: int, ncols: int) -> 'PolyMatrix':
        zero = ctx.zero()
        return cls._raw(ctx, [[zero] * ncols for _ in range(nrows)], (nrows, ncols))

    @classmethod
    def identity(cls, ctx: RingContext, n: int, scalar: Entry = 1) -> 'PolyMatrix':
        value = to_polynomial(scalar, ctx)
        zero = ctx.zero()
        return cls._raw(ctx, [[value if i == j else zero for j in range(n)] for i in range(n)], (n, n))

    @classmethod
    def from_function(cls, ctx: RingContext, nrows: int, ncols: int,
                      entry: Callable[[int, int], Polynomial]) -> 'PolyMatrix':
        return cls._raw(ctx, [[entry(i, j) for j in range(ncols)] for i in range(nrows)], (nrows, ncols))

    @staticmethod
    def block(blocks: Sequence[Sequence['PolyMatrix']]) -> 'PolyMatrix':
        """Assemble a block matrix; each block row must have a common height"""
        ctx = blocks[0][0].ctx
        rows: List[List[Polynomial]] = []
        ncols = sum(b.ncols for b in blocks[0])
        for block_row in blocks:
            height = block_row[0].nrows
            for b in block_row:
                if b.ctx != ctx:
                    raise ContextMismatch("Blocks live over different contexts")
                if b.nrows != height:
                    raise ShapeMismatch("Blocks in one row have different heights")
            for i in range(height):
                row = []
                for b in block_row:
                    row.extend(b.rows[i])
                if len(row) != ncols:
                    raise ShapeMismatch("Block rows have different widths")
                rows.append(row)
        return PolyMatrix._raw(ctx, rows, (len(rows), ncols))

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, index):
        i, j = index
        return self.rows[i][j]

    def entries(self):
        for i, row in enumerate(self.rows):
            for j, e in enumerate(row):
                yield i, j, e

    def submatrix(self, row_indices: Sequence[int], col_indices: Sequence[int]) -> 'PolyMatrix':
        return PolyMatrix._raw(self.ctx, [[self.rows[i][j] for j in col_indices] for i in row_indices],
                               (len(row_indices), len(col_indices)))

    def _check_same(self, other: 'PolyMatrix'):
        if other.ctx != self.ctx:
            raise ContextMismatch(f"Matrices over {self.ctx!r} and {other.ctx!r}")
        if other.shape != self.shape:
            raise ShapeMismatch(f"Shapes {self.shape} and {other.shape} differ")

    def __add__(self, other: 'PolyMatrix') -> 'PolyMatrix':
        self._check_same(other)
        return PolyMatrix._raw(self.ctx, [[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)],
                               self.shape)

    def __sub__(self, other: 'PolyMatrix') -> 'PolyMatrix':
        self._check_same(other)
        return PolyMatrix._raw(self.ctx, [[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)],
                               self.shape)

    def __neg__(self) -> 'PolyMatrix':
        return self.map(lambda e: -e)

    def scale(self, value: Entry) -> 'PolyMatrix':
        value = to_polynomial(value, self.ctx)
        return self.map(lambda e: e * value)

    def __matmul__(self, other: 'PolyMatrix') -> 'PolyMatrix':
        if other.ctx != self.ctx:
            raise ContextMismatch(f"Matrices over {self.ctx!r} and {other.ctx!r}")
        if self.ncols != other.nrows:
            raise ShapeMismatch(f"Cannot multiply {self.shape} by {other.shape}")
        zero = self.ctx.zero()
        out = [[zero] * other.ncols for _ in range(self.nrows)]
        for i, row in enumerate(self.rows):
            acc = out[i]
            for k, a in enumerate(row):
                if not a:
                    continue
                for j, b in enumerate(other.rows[k]):
                    if b:
                        acc[j] = acc[j] + a * b
        return PolyMatrix._raw(self.ctx, out, (self.nrows, other.ncols))

    def __mul__(self, other):
        if isinstance(other, PolyMatrix):
            return self @ other
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return self.ctx == other.ctx and self.shape == other.shape and self.rows == other.rows

    def __hash__(self):
        return hash((self.shape, self.rows))

    def map(self, func: Callable[[Polynomial], Polynomial], ctx: RingContext = None) -> 'PolyMatrix':
        return PolyMatrix._raw(ctx or self.ctx, [[func(e) for e in row] for row in self.rows], self.shape)

    def embed(self, ctx: RingContext) -> 'PolyMatrix':
        if ctx == self.ctx:
            return self
        return self.map(lambda e: e.embed(ctx), ctx)

    def derivative(self, name: str) -> 'PolyMatrix':
        return self.map(lambda e: e.derivative(name))

    def substitute(self, values) -> 'PolyMatrix':
        return self.map(lambda e: e.substitute(values))

    def transpose(self) -> 'PolyMatrix':
        return PolyMatrix._raw(self.ctx, [list(col) for col in zip(*self.rows)] if self.nrows else [],
                               (self.ncols, self.nrows))

    def is_zero(self) -> bool:
        return all(not e for row in self.rows for e in row)

    def is_constant(self) -> bool:
        return all(e.is_constant() for row in self.rows for e in row)

    def to_fractions(self) -> List[List[Fraction]]:
        return [[e.constant_value() for e in row] for row in self.rows]

    def trace(self) -> Polynomial:
        if self.nrows != self.ncols:
            raise ShapeMismatch("Trace of a non-square matrix")
        total = self.ctx.zero()
        for i in range(self.nrows):
            total = total + self.rows[i][i]
        return total

    def det(self) -> Polynomial:
        """Determinant by permutation expansion; meant for the small n x n Jacobians"""
        if self.nrows != self.ncols:
            raise ShapeMismatch("Determinant of a non-square matrix")
        total = self.ctx.zero()
        for perm in permutations(range(self.nrows)):
            term = self.ctx.constant(permutation_sign(perm))
            for i, j in enumerate(perm):
                term = term * self.rows[i][j]
                if not term:
                    break
            total = total + term
        return total

    def max_degree(self) -> int:
        return max((e.degree() for row in self.rows for e in row), default=-1)

    def __str__(self):
        return '[' + ', '.join('[' + ', '.join(str(e) for e in row) + ']' for row in self.rows) + ']'

    def __repr__(self):
        return f"PolyMatrix({self})"
