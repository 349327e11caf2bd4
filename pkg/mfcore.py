#!/usr/bin/env python3
"""
Matrix factorisations and the Z/2-graded calculus on them
Maps, homotopies, shift, dual, tensor products with Koszul signs, Hom and supertraces
"""

import logging
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Dict, List, Optional, Sequence, Tuple, Union

from errors import ContextMismatch, HomotopyIdentityFailed, NotAFactorisation, NotAMorphism, ShapeMismatch
from linalg import solve
from matrices import Entry, PolyMatrix
from polyring import Monomial, Polynomial, RingContext, to_polynomial

logger = logging.getLogger(__name__)


class MatrixFactorisation:
    """Free Z/2-graded module of ranks (r0, r1) with odd d, d0: X0 -> X1 and d1: X1 -> X0, d^2 = W"""

    def __init__(self, ctx: RingContext, potential: Polynomial, d0: PolyMatrix, d1: PolyMatrix,
                 validate: bool = True):
        if d0.ctx != ctx or d1.ctx != ctx or potential.ctx != ctx:
            raise ContextMismatch("Differential blocks and potential must share the factorisation's context")
        r1, r0 = d0.shape
        if d1.shape != (r0, r1):
            raise ShapeMismatch(f"d0 is {d0.shape} so d1 must be {(r0, r1)}, got {d1.shape}")
        self.ctx = ctx
        self.potential = potential
        self.rank0 = r0
        self.rank1 = r1
        self.d0 = d0
        self.d1 = d1
        self._full = None
        if validate:
            self._validate()

    def _validate(self):
        W = self.potential
        for name, product in (('d1*d0', self.d1 @ self.d0), ('d0*d1', self.d0 @ self.d1)):
            for i, j, e in product.entries():
                expected = W if i == j else self.ctx.zero()
                if e != expected:
                    raise NotAFactorisation(
                        f"d^2 != W*I: entry ({i},{j}) of {name} is {e}, expected {expected}", entry=(name, i, j))

    @property
    def rank(self) -> int:
        return self.rank0 + self.rank1

    @property
    def ranks(self) -> Tuple[int, int]:
        return (self.rank0, self.rank1)

    def parity(self, index: int) -> int:
        return 0 if index < self.rank0 else 1

    def parities(self) -> List[int]:
        return [0] * self.rank0 + [1] * self.rank1

    @property
    def differential(self) -> PolyMatrix:
        """Full odd matrix [[0, d1], [d0, 0]] on the even-first basis"""
        if self._full is None:
            ctx = self.ctx
            self._full = PolyMatrix.block([
                [PolyMatrix.zeros(ctx, self.rank0, self.rank0), self.d1],
                [self.d0, PolyMatrix.zeros(ctx, self.rank1, self.rank1)],
            ]) if self.rank else PolyMatrix.zeros(ctx, 0, 0)
        return self._full

    def sign_matrix(self) -> PolyMatrix:
        return PolyMatrix.from_function(self.ctx, self.rank, self.rank,
                                        lambda i, j: self.ctx.constant((-1) ** self.parity(i) if i == j else 0))

    @classmethod
    def from_differential(cls, ctx: RingContext, potential: Polynomial, D: PolyMatrix, rank0: int,
                          validate: bool = True) -> 'MatrixFactorisation':
        n = D.nrows
        even, odd = list(range(rank0)), list(range(rank0, n))
        for block in (D.submatrix(even, even), D.submatrix(odd, odd)):
            if not block.is_zero():
                raise NotAFactorisation("Differential is not odd: a diagonal block is nonzero")
        return cls(ctx, potential, D.submatrix(odd, even), D.submatrix(even, odd), validate)

    def is_folded(self) -> bool:
        return not self.potential

    def __eq__(self, other):
        if not isinstance(other, MatrixFactorisation):
            return NotImplemented
        return (self.ctx == other.ctx and self.potential == other.potential and self.ranks == other.ranks
                and self.d0 == other.d0 and self.d1 == other.d1)

    def __hash__(self):
        return hash((self.ctx, self.ranks, self.d0, self.d1))

    def __repr__(self):
        return f"MatrixFactorisation(W={self.potential}, ranks={self.ranks}, d0={self.d0}, d1={self.d1})"


class FoldedComplex(MatrixFactorisation):
    """A factorisation of zero, i.e. a Z/2-folded complex"""

    def __init__(self, ctx, potential, d0, d1, validate=True):
        if potential:
            raise NotAFactorisation(f"A folded complex needs potential 0, got {potential}")
        super().__init__(ctx, potential, d0, d1, validate)


def make_mf(ctx: RingContext, W: Union[Polynomial, str, int], d0: Sequence[Sequence[Entry]],
            d1: Sequence[Sequence[Entry]], ranks: Optional[Tuple[int, int]] = None) -> MatrixFactorisation:
    """Validated factorisation; d0 has one row per odd basis vector, d1 one row per even one"""
    W = to_polynomial(W, ctx)
    if ranks is None:
        r1 = d0.nrows if isinstance(d0, PolyMatrix) else len(d0)
        r0 = d1.nrows if isinstance(d1, PolyMatrix) else len(d1)
    else:
        r0, r1 = ranks
    m0 = d0 if isinstance(d0, PolyMatrix) else PolyMatrix(ctx, d0, (r1, r0))
    m1 = d1 if isinstance(d1, PolyMatrix) else PolyMatrix(ctx, d1, (r0, r1))
    cls = FoldedComplex if not W else MatrixFactorisation
    return cls(ctx, W, m0, m1)


def unit_mf(ctx: RingContext) -> FoldedComplex:
    """Rank (1, 0) factorisation of zero; the unit for tensor"""
    return FoldedComplex(ctx, ctx.zero(), PolyMatrix.zeros(ctx, 0, 1), PolyMatrix.zeros(ctx, 1, 0))


class MFMap:
    """Homogeneous map between factorisations, stored as a full matrix on the even-first bases"""

    def __init__(self, source: MatrixFactorisation, target: MatrixFactorisation, parity: int,
                 matrix: PolyMatrix, validate: bool = True):
        if source.ctx != target.ctx or matrix.ctx != source.ctx:
            raise ContextMismatch("Map, source and target must share one context")
        if matrix.shape != (target.rank, source.rank):
            raise ShapeMismatch(f"Map matrix is {matrix.shape}, expected {(target.rank, source.rank)}")
        self.source = source
        self.target = target
        self.parity = parity % 2
        self.matrix = matrix
        if validate:
            for i, j, e in matrix.entries():
                if e and target.parity(i) != (source.parity(j) + self.parity) % 2:
                    raise ShapeMismatch(f"Entry ({i},{j}) is nonzero but breaks parity {self.parity}")

    @property
    def ctx(self) -> RingContext:
        return self.source.ctx

    @classmethod
    def from_blocks(cls, source, target, parity: int, f0: PolyMatrix, f1: PolyMatrix) -> 'MFMap':
        """f0 acts on the even part of the source, f1 on the odd part"""
        ctx = source.ctx
        parity %= 2
        if parity == 0:
            blocks = [[f0, PolyMatrix.zeros(ctx, target.rank0, source.rank1)],
                      [PolyMatrix.zeros(ctx, target.rank1, source.rank0), f1]]
        else:
            blocks = [[PolyMatrix.zeros(ctx, target.rank0, source.rank0), f1],
                      [f0, PolyMatrix.zeros(ctx, target.rank1, source.rank1)]]
        if not source.rank or not target.rank:
            return cls(source, target, parity, PolyMatrix.zeros(ctx, target.rank, source.rank))
        return cls(source, target, parity, PolyMatrix.block(blocks))

    def _rows_of_parity(self, p):
        return list(range(self.target.rank0)) if p == 0 else list(range(self.target.rank0, self.target.rank))

    @property
    def f0(self) -> PolyMatrix:
        return self.matrix.submatrix(self._rows_of_parity(self.parity), list(range(self.source.rank0)))

    @property
    def f1(self) -> PolyMatrix:
        return self.matrix.submatrix(self._rows_of_parity((1 + self.parity) % 2),
                                     list(range(self.source.rank0, self.source.rank)))

    def compose(self, other: 'MFMap') -> 'MFMap':
        """self after other"""
        if other.target != self.source:
            raise ShapeMismatch("Composition needs matching target and source")
        return MFMap(other.source, self.target, self.parity + other.parity, self.matrix @ other.matrix,
                     validate=False)

    __matmul__ = compose

    def _same_kind(self, other: 'MFMap'):
        if other.source != self.source or other.target != self.target or other.parity != self.parity:
            raise ShapeMismatch("Maps differ in source, target or parity")

    def __add__(self, other: 'MFMap') -> 'MFMap':
        self._same_kind(other)
        return MFMap(self.source, self.target, self.parity, self.matrix + other.matrix, validate=False)

    def __sub__(self, other: 'MFMap') -> 'MFMap':
        self._same_kind(other)
        return MFMap(self.source, self.target, self.parity, self.matrix - other.matrix, validate=False)

    def __neg__(self) -> 'MFMap':
        return MFMap(self.source, self.target, self.parity, -self.matrix, validate=False)

    def scale(self, value) -> 'MFMap':
        return MFMap(self.source, self.target, self.parity, self.matrix.scale(value), validate=False)

    def is_zero(self) -> bool:
        return self.matrix.is_zero()

    def __eq__(self, other):
        if not isinstance(other, MFMap):
            return NotImplemented
        return (self.parity == other.parity and self.source == other.source and self.target == other.target
                and self.matrix == other.matrix)

    def __hash__(self):
        return hash((self.parity, self.matrix))

    def __repr__(self):
        return f"MFMap(parity={self.parity}, matrix={self.matrix})"


def identity(X: MatrixFactorisation) -> MFMap:
    return MFMap(X, X, 0, PolyMatrix.identity(X.ctx, X.rank), validate=False)


def zero_map(X: MatrixFactorisation, Y: MatrixFactorisation, parity: int = 0) -> MFMap:
    return MFMap(X, Y, parity, PolyMatrix.zeros(X.ctx, Y.rank, X.rank), validate=False)


def scalar_map(X: MatrixFactorisation, value: Union[Polynomial, int]) -> MFMap:
    return MFMap(X, X, 0, PolyMatrix.identity(X.ctx, X.rank, value), validate=False)


def differential_map(X: MatrixFactorisation) -> MFMap:
    return MFMap(X, X, 1, X.differential, validate=False)


def coboundary(h: MFMap) -> MFMap:
    """d(h) = d_Y h - (-1)^|h| h d_X, the differential of the Hom complex"""
    sign = -1 if h.parity == 0 else 1
    matrix = h.target.differential @ h.matrix + (h.matrix @ h.source.differential).scale(sign)
    return MFMap(h.source, h.target, h.parity + 1, matrix, validate=False)


def is_morphism(f: MFMap) -> bool:
    return coboundary(f).is_zero()


def supertrace(matrix: PolyMatrix, rank0: int) -> Polynomial:
    total = matrix.ctx.zero()
    for i in range(matrix.nrows):
        total = total + (matrix[i, i] if i < rank0 else -matrix[i, i])
    return total


def supertrace_endo(f: MFMap) -> Polynomial:
    """str(f) = tr(f0) - tr(f1); zero for odd endomorphisms"""
    if f.source.ranks != f.target.ranks:
        raise ShapeMismatch("Supertrace needs an endomorphism")
    if f.parity:
        return f.ctx.zero()
    return supertrace(f.matrix, f.source.rank0)


# -- shift and dual --

def shift(X: MatrixFactorisation) -> MatrixFactorisation:
    """X[1]: gradings swapped and d replaced by -d"""
    cls = FoldedComplex if isinstance(X, FoldedComplex) else MatrixFactorisation
    return cls(X.ctx, X.potential, -X.d1, -X.d0, validate=False)


def dual(X: MatrixFactorisation) -> MatrixFactorisation:
    """Factorisation of -W with d1' = d0^T and d0' = -d1^T"""
    cls = FoldedComplex if isinstance(X, FoldedComplex) else MatrixFactorisation
    return cls(X.ctx, -X.potential, -X.d1.transpose(), X.d0.transpose(), validate=False)


def double_dual_iso(X: MatrixFactorisation) -> MFMap:
    """The sign diagonal X -> dual(dual(X))"""
    return MFMap(X, dual(dual(X)), 0, X.sign_matrix(), validate=False)


def dual_map(alpha: MFMap) -> MFMap:
    """alpha: X -> Y gives dual(Y) -> dual(X) with matrix alpha^T S^|alpha|"""
    matrix = alpha.matrix.transpose()
    if alpha.parity:
        matrix = matrix @ alpha.target.sign_matrix()
    return MFMap(dual(alpha.target), dual(alpha.source), alpha.parity, matrix, validate=False)


# -- tensor products --

def tensor_basis(X: MatrixFactorisation, Y: MatrixFactorisation) -> List[Tuple[int, int]]:
    """Basis of X (x) Y as (x index, y index) pairs: lexicographic, then even pairs first"""
    pairs = [(a, b) for a in range(X.rank) for b in range(Y.rank)]
    even = [p for p in pairs if (X.parity(p[0]) + Y.parity(p[1])) % 2 == 0]
    odd = [p for p in pairs if (X.parity(p[0]) + Y.parity(p[1])) % 2 == 1]
    return even + odd


def _tensor_matrix(F: PolyMatrix, F_parity: int, G: PolyMatrix, G_parity: int,
                   rows: List[Tuple[int, int]], cols: List[Tuple[int, int]], source_x_parity) -> PolyMatrix:
    ctx = F.ctx
    zero = ctx.zero()
    out = [[zero] * len(cols) for _ in rows]
    row_index = {p: i for i, p in enumerate(rows)}
    # (F (x) G)(x (x) y) = (-1)^{|G||x|} F x (x) G y
    for j, (a2, b2) in enumerate(cols):
        sign = -1 if (G_parity and source_x_parity(a2)) else 1
        for a in range(F.nrows):
            f = F[a, a2]
            if not f:
                continue
            for b in range(G.nrows):
                g = G[b, b2]
                if g:
                    i = row_index[(a, b)]
                    term = f * g
                    out[i][j] = out[i][j] + (term if sign == 1 else -term)
    return PolyMatrix._raw(ctx, out, (len(rows), len(cols)))


def tensor(X: MatrixFactorisation, Y: MatrixFactorisation) -> MatrixFactorisation:
    """X (x) Y with d = d_X (x) 1 + 1 (x) d_Y, a factorisation of W_X + W_Y"""
    if X.ctx != Y.ctx:
        raise ContextMismatch(f"Tensor of factorisations over {X.ctx!r} and {Y.ctx!r}")
    ctx = X.ctx
    basis = tensor_basis(X, Y)
    D = (_tensor_matrix(X.differential, 1, PolyMatrix.identity(ctx, Y.rank), 0, basis, basis, X.parity)
         + _tensor_matrix(PolyMatrix.identity(ctx, X.rank), 0, Y.differential, 1, basis, basis, X.parity))
    rank0 = sum(1 for a, b in basis if (X.parity(a) + Y.parity(b)) % 2 == 0)
    W = X.potential + Y.potential
    cls = MatrixFactorisation if W else FoldedComplex
    result = cls.from_differential(ctx, W, D, rank0)
    logger.debug(f"Tensor product of ranks {X.ranks} and {Y.ranks} has ranks {result.ranks}")
    return result


def tensor_maps(F: MFMap, G: MFMap, source: MatrixFactorisation = None,
                target: MatrixFactorisation = None) -> MFMap:
    """F (x) G with the Koszul sign, between the tensor products of sources and of targets"""
    source = source or tensor(F.source, G.source)
    target = target or tensor(F.target, G.target)
    matrix = _tensor_matrix(F.matrix, F.parity, G.matrix, G.parity, tensor_basis(F.target, G.target),
                            tensor_basis(F.source, G.source), F.source.parity)
    return MFMap(source, target, F.parity + G.parity, matrix, validate=False)


def hom(X: MatrixFactorisation, Y: MatrixFactorisation) -> MatrixFactorisation:
    """Hom(X, Y) presented as dual(X) (x) Y, a factorisation of W_Y - W_X"""
    if X.ctx != Y.ctx:
        raise ContextMismatch(f"Hom between factorisations over {X.ctx!r} and {Y.ctx!r}")
    return tensor(dual(X), Y)


def hom_map(alpha: MFMap, beta: MFMap) -> MFMap:
    """Hom(alpha, beta) = dual(alpha) (x) beta, acting on Hom(X', Y) -> Hom(X, Y')"""
    return tensor_maps(dual_map(alpha), beta)


def koszul_mf(pairs: Sequence[Tuple[Polynomial, Polynomial]], ctx: Optional[RingContext] = None
              ) -> MatrixFactorisation:
    """Tensor product of the rank (1,1) factorisations (a_i | b_i): d1 = a_i, d0 = b_i"""
    if ctx is None:
        if not pairs:
            raise ValueError("A context is required for an empty Koszul factorisation")
        ctx = pairs[0][0].ctx
    result = unit_mf(ctx)
    for a, b in pairs:
        a, b = to_polynomial(a, ctx), to_polynomial(b, ctx)
        result = tensor(result, make_mf(ctx, a * b, [[b]], [[a]]))
    return result


def direct_sum(X: MatrixFactorisation, Y: MatrixFactorisation) -> MatrixFactorisation:
    """X (+) Y with basis (X even, Y even, X odd, Y odd)"""
    if X.ctx != Y.ctx or X.potential != Y.potential:
        raise ContextMismatch("Direct sum needs a common context and potential")
    ctx = X.ctx

    def diag(A, B):
        zero_ab = PolyMatrix.zeros(ctx, A.nrows, B.ncols)
        zero_ba = PolyMatrix.zeros(ctx, B.nrows, A.ncols)
        rows = [list(A.rows[i]) + list(zero_ab.rows[i]) for i in range(A.nrows)]
        rows += [list(zero_ba.rows[i]) + list(B.rows[i]) for i in range(B.nrows)]
        return PolyMatrix(ctx, rows, (A.nrows + B.nrows, A.ncols + B.ncols))

    cls = FoldedComplex if not X.potential else MatrixFactorisation
    return cls(ctx, X.potential, diag(X.d0, Y.d0), diag(X.d1, Y.d1))


def extend_scalars(X: MatrixFactorisation, ctx: RingContext) -> MatrixFactorisation:
    """X over a context containing its variables"""
    if ctx == X.ctx:
        return X
    cls = FoldedComplex if isinstance(X, FoldedComplex) else MatrixFactorisation
    return cls(ctx, X.potential.embed(ctx), X.d0.embed(ctx), X.d1.embed(ctx), validate=False)


def extend_map(f: MFMap, source: MatrixFactorisation, target: MatrixFactorisation) -> MFMap:
    return MFMap(source, target, f.parity, f.matrix.embed(source.ctx), validate=False)


def partial_homotopy(X: MatrixFactorisation, variable: str) -> MFMap:
    """lambda_v = d/dv (d_X), an odd map with lambda d + d lambda = dW/dv"""
    lam = MFMap(X, X, 1, X.differential.derivative(variable), validate=False)
    check = coboundary(lam)
    if check.matrix != PolyMatrix.identity(X.ctx, X.rank, X.potential.derivative(variable)):
        raise HomotopyIdentityFailed(f"d/d{variable} of the differential is not a homotopy for dW/d{variable}")
    return lam


# -- homotopy search --

@dataclass(frozen=True)
class Inconclusive:
    """No witness exists among maps with entries of degree at most the bound"""
    degree_bound: int
    unknowns: int = 0


def default_degree_bound(X: MatrixFactorisation, Y: Optional[MatrixFactorisation] = None) -> int:
    Y = Y or X
    degree = max(X.potential.degree(), Y.potential.degree(), 1)
    return 2 * degree * max(X.rank, Y.rank, 1)


def _monomials_up_to(ctx: RingContext, degree: int) -> List[Monomial]:
    monomials = []
    for total in range(degree + 1):
        for combo in combinations_with_replacement(range(ctx.nvars), total):
            exps = [0] * ctx.nvars
            for i in combo:
                exps[i] += 1
            monomials.append(tuple(exps))
        if ctx.nvars == 0:
            break
    return monomials


def _solve_homotopy(f: MFMap, degree: int) -> Optional[MFMap]:
    ctx = f.ctx
    X, Y = f.source, f.target
    hp = (f.parity + 1) % 2
    sign = -1 if hp == 0 else 1  # coboundary: d_Y h + sign * h d_X
    monomials = _monomials_up_to(ctx, degree)
    DX, DY = X.differential, Y.differential

    entries = [(r, c) for r in range(Y.rank) for c in range(X.rank)
               if Y.parity(r) == (X.parity(c) + hp) % 2]
    unknowns = {}
    for r, c in entries:
        for m in monomials:
            unknowns[(r, c, m)] = len(unknowns)

    row_keys: Dict[Tuple[int, int, Monomial], int] = {}
    system: Dict[int, Dict[int, object]] = {}

    def add(row_key, col, value):
        i = row_keys.setdefault(row_key, len(row_keys))
        row = system.setdefault(i, {})
        row[col] = row.get(col, 0) + value

    for (s, c, m), col in unknowns.items():
        # d_Y h: entry (r, c) gains D_Y[r][s] * y^m
        for r in range(Y.rank):
            e = DY[r, s]
            for mono, coeff in e.terms.items():
                add((r, c, tuple(a + b for a, b in zip(mono, m))), col, coeff)
        # sign * h d_X: entry (s, c2) gains y^m * D_X[c][c2]
        for c2 in range(X.rank):
            e = DX[c, c2]
            for mono, coeff in e.terms.items():
                add((s, c2, tuple(a + b for a, b in zip(mono, m))), col, sign * coeff)

    for r, c, e in f.matrix.entries():
        for mono in e.terms:
            row_keys.setdefault((r, c, mono), len(row_keys))
    rhs = [0] * len(row_keys)
    for r, c, e in f.matrix.entries():
        for mono, coeff in e.terms.items():
            rhs[row_keys[(r, c, mono)]] = coeff

    solution = solve(system, rhs, len(unknowns), ctx.characteristic)
    if solution is None:
        return None
    zero = ctx.zero()
    grid = [[dict() for _ in range(X.rank)] for _ in range(Y.rank)]
    for (r, c, m), col in unknowns.items():
        if solution[col]:
            grid[r][c][m] = solution[col]
    matrix = PolyMatrix._raw(ctx, [[Polynomial(ctx, grid[r][c]) if grid[r][c] else zero for c in range(X.rank)]
                                   for r in range(Y.rank)], (Y.rank, X.rank))
    return MFMap(X, Y, hp, matrix, validate=False)


def find_homotopy(f: MFMap, degree_bound: Optional[int] = None) -> Union[MFMap, Inconclusive]:
    """Witness h with f = d_Y h - (-1)^|h| h d_X and entries of degree <= bound"""
    if not is_morphism(f):
        raise NotAMorphism("find_homotopy needs a closed map")
    if degree_bound is None:
        degree_bound = default_degree_bound(f.source, f.target)
    if f.is_zero():
        return zero_map(f.source, f.target, f.parity + 1)

    lowest = max(0, f.matrix.max_degree() - max(f.source.differential.max_degree(),
                                                f.target.differential.max_degree(), 0))
    schedule = []
    step = lowest
    while step < degree_bound:
        schedule.append(step)
        step = 2 * step + 1
    schedule.append(degree_bound)

    for degree in schedule:
        h = _solve_homotopy(f, degree)
        if h is not None:
            if coboundary(h) != f:
                raise HomotopyIdentityFailed("Solved homotopy does not reproduce the map")
            logger.debug(f"Homotopy witness found with entries of degree <= {degree}")
            return h
    logger.warning(f"No homotopy witness with entries of degree <= {degree_bound}")
    return Inconclusive(degree_bound)
