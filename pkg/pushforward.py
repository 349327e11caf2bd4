#!/usr/bin/env python3
"""
Finite models of pushforwards of matrix factorisations
The reduced factorisation X/tX, its idempotent e (closed form and perturbation route),
splitting over a field and removal of contractible summands
"""

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from math import comb, factorial
from typing import Dict, List, Optional, Sequence, Tuple, Union

from connection import (Form, KoszulRetract, TAdicFrame, add_form, descend, descend_commutator,
                        insert_index, koszul_retract, wedge_sign)
from errors import (BaseNotField, HomotopyIdentityFailed, PotentialNotBased,
                    SideConditionsViolated, UnsupportedConnection, VerificationFailed)
from linalg import column_basis, inverse, nullspace, rank, solve
from matrices import PolyMatrix, permutation_sign
from mfcore import (Inconclusive, MatrixFactorisation, MFMap, coboundary, find_homotopy, identity,
                    partial_homotopy, scalar_map)
from polyring import Polynomial

logger = logging.getLogger(__name__)

Element = Dict[Tuple[int, Tuple[int, ...]], Polynomial]


@dataclass
class VerificationRecord:
    strict: bool
    exact_idempotent: bool = False
    witness: Optional[Union[MFMap, Inconclusive]] = None

    @property
    def homotopy_idempotent(self) -> bool:
        return self.exact_idempotent or isinstance(self.witness, MFMap)


@dataclass
class FiniteModel:
    """X/tX over the base ring together with the idempotent cutting out the pushforward (shifted by n)"""
    source: MatrixFactorisation
    frame: TAdicFrame
    lambdas: Tuple[MFMap, ...]
    reduced: MatrixFactorisation
    e: MFMap
    record: VerificationRecord = field(default_factory=lambda: VerificationRecord(strict=False))

    @property
    def n(self) -> int:
        return self.frame.n

    @property
    def sign(self) -> int:
        return -1 if comb(self.n, 2) % 2 else 1

    @property
    def base_ctx(self):
        return self.frame.base_ctx

    @property
    def potential(self) -> Polynomial:
        return self.reduced.potential


def reduce_mod_t(X: MatrixFactorisation, frame: TAdicFrame, allow_based: bool = False) -> MatrixFactorisation:
    """X/tX on the basis xi_i (x) e_z, ordered with i outer"""
    if X.ctx != frame.ctx:
        raise UnsupportedConnection("The factorisation and the frame live over different contexts")
    W = X.potential
    if any(v in frame.yvars for v in W.variables_used()):
        if not allow_based:
            raise PotentialNotBased(f"Potential {W} involves the integrated variables {frame.yvars}")
        coords = frame.coordinates(W)
        unit = frame.quotient.index.get(frame.y_ctx.unit)
        if unit is None or any(c for z, c in enumerate(coords) if z != unit):
            raise PotentialNotBased(f"Potential {W} is not a base element modulo t")
        W_base = coords[unit]
    else:
        W_base = W.embed(frame.base_ctx)
    D = descend(frame, X.differential)
    reduced = MatrixFactorisation.from_differential(frame.base_ctx, W_base, D, X.rank0 * frame.mu)
    logger.debug(f"Reduced ranks {X.ranks} to {reduced.ranks} modulo t")
    return reduced


def _check_lambdas(X: MatrixFactorisation, frame: TAdicFrame, lambdas: Sequence[MFMap]):
    if len(lambdas) != frame.n:
        raise HomotopyIdentityFailed(f"Expected {frame.n} homotopies, got {len(lambdas)}")
    for j, (lam, t) in enumerate(zip(lambdas, frame.tgens)):
        if lam.parity != 1 or lam.source != X or lam.target != X:
            raise HomotopyIdentityFailed(f"lambda_{j + 1} is not an odd endomorphism of X")
        if coboundary(lam) != scalar_map(X, t):
            raise HomotopyIdentityFailed(f"lambda_{j + 1} d + d lambda_{j + 1} != {t}")


def default_homotopies(X: MatrixFactorisation, frame: TAdicFrame, degree_bound: Optional[int] = None
                       ) -> List[MFMap]:
    """Null-homotopies for t_j * 1: the derivative of d when t_j = dW/dv, otherwise a solved witness"""
    lambdas = []
    for j, t in enumerate(frame.tgens):
        lam = None
        for v in X.ctx.variables:
            if t and X.potential.derivative(v) == t:
                lam = partial_homotopy(X, v)
                break
        if lam is None:
            found = find_homotopy(scalar_map(X, t), degree_bound)
            if isinstance(found, Inconclusive):
                raise HomotopyIdentityFailed(f"No null-homotopy for t_{j + 1} = {t} within degree {found.degree_bound}")
            lam = found
        lambdas.append(lam)
    return lambdas


def _descended_product(frame: TAdicFrame, lambdas: Sequence[MFMap]) -> PolyMatrix:
    result = None
    for lam in lambdas:
        block = descend(frame, lam.matrix)
        result = block if result is None else result @ block
    return result


def theta_map(X: MatrixFactorisation, frame: TAdicFrame, lambdas: Sequence[MFMap],
              reduced: Optional[MatrixFactorisation] = None) -> MFMap:
    """theta = (-1)^n lambda_1 ... lambda_n on X/tX, of parity n"""
    reduced = reduced or reduce_mod_t(X, frame)
    n = frame.n
    if n == 0:
        return identity(reduced)
    matrix = _descended_product(frame, lambdas)
    if n % 2:
        matrix = -matrix
    return MFMap(reduced, reduced, n, matrix, validate=False)


def _closed_form(X: MatrixFactorisation, frame: TAdicFrame, lambdas: Sequence[MFMap],
                 reduced: MatrixFactorisation) -> PolyMatrix:
    n = frame.n
    base = frame.base_ctx
    if n == 0:
        return PolyMatrix.identity(base, reduced.rank)
    Lam = _descended_product(frame, lambdas)
    commutators = [descend_commutator(frame, j, X.differential) for j in range(n)]
    total = PolyMatrix.zeros(base, reduced.rank, reduced.rank)
    for tau in permutations(range(n)):
        term = Lam
        for j in tau:
            term = term @ commutators[j]
        total = total + (term if permutation_sign(tau) == 1 else -term)
    scale = Fraction(-1 if comb(n, 2) % 2 else 1, factorial(n))
    return total.scale(scale)


def idempotent(X: MatrixFactorisation, frame: TAdicFrame, lambdas: Sequence[MFMap]) -> FiniteModel:
    """e = (1/n!) (-1)^(n choose 2) sum_tau sgn(tau) lambda_1..lambda_n [d_t(tau 1), d]...[d_t(tau n), d]"""
    lambdas = tuple(lambdas)
    _check_lambdas(X, frame, lambdas)
    reduced = reduce_mod_t(X, frame)
    e = MFMap(reduced, reduced, 0, _closed_form(X, frame, lambdas, reduced))
    strict = (e.matrix @ reduced.differential) == (reduced.differential @ e.matrix)
    if not strict:
        logger.warning("Idempotent does not commute strictly with the reduced differential")
    logger.info(f"Finite model of ranks {reduced.ranks} over {frame.base_ctx.variables} built (n = {frame.n})")
    return FiniteModel(X, frame, lambdas, reduced, e, VerificationRecord(strict=strict))


# -- X (x) Omega: elements are {(basis index, form indices): coefficient} --

def _add(target: Element, key, value: Polynomial):
    if not value:
        return
    current = target.get(key)
    total = value if current is None else current + value
    if total:
        target[key] = total
    else:
        target.pop(key, None)


def apply_differential(X: MatrixFactorisation, element: Element) -> Element:
    """d (x) 1"""
    D = X.differential
    out: Element = {}
    for (i, omega), r in element.items():
        for i2 in range(X.rank):
            entry = D[i2, i]
            if entry:
                _add(out, (i2, omega), entry * r)
    return out


def apply_koszul(X: MatrixFactorisation, retract: KoszulRetract, element: Element) -> Element:
    """1 (x) delta with the Koszul sign (-1)^|x|"""
    out: Element = {}
    for (i, omega), r in element.items():
        sign = -1 if X.parity(i) else 1
        for omega2, r2 in retract.delta({omega: r}).items():
            _add(out, (i, omega2), r2.scale(sign))
    return out


def apply_contraction(X: MatrixFactorisation, retract: KoszulRetract, element: Element) -> Element:
    """1 (x) H with the Koszul sign (-1)^|x|"""
    grouped: Dict[int, Form] = {}
    for (i, omega), r in element.items():
        add_form(grouped.setdefault(i, {}), omega, r)
    out: Element = {}
    for i, form in grouped.items():
        sign = -1 if X.parity(i) else 1
        for omega, r in retract.homotopy(form).items():
            _add(out, (i, omega), r.scale(sign))
    return out


def total_differential(X: MatrixFactorisation, retract: KoszulRetract, element: Element) -> Element:
    out = apply_differential(X, element)
    for key, r in apply_koszul(X, retract, element).items():
        _add(out, key, r)
    return out


def sigma_element(frame: TAdicFrame, i: int, z: int) -> Element:
    return {(i, ()): frame.basis[z]}


def sigma_infinity(X: MatrixFactorisation, retract: KoszulRetract, element: Element) -> Element:
    """sum_m (-H d)^m applied to an element of X (x) Omega"""
    total = dict(element)
    current = element
    for _ in range(retract.frame.n):
        current = apply_contraction(X, retract, apply_differential(X, current))
        current = {key: -r for key, r in current.items()}
        if not current:
            break
        for key, r in current.items():
            _add(total, key, r)
    return total


def epsilon(X: MatrixFactorisation, n: int, element: Element) -> List[Polynomial]:
    """Top form coefficient with sign (-1)^(n |x|), as a vector in X"""
    top = tuple(range(n))
    vector = [X.ctx.zero()] * X.rank
    for (i, omega), r in element.items():
        if omega == top:
            sign = -1 if (n * X.parity(i)) % 2 else 1
            vector[i] = vector[i] + r.scale(sign)
    return vector


def psi(X: MatrixFactorisation, retract: KoszulRetract, element: Element) -> List[Polynomial]:
    """epsilon after sigma_infinity"""
    return epsilon(X, retract.frame.n, sigma_infinity(X, retract, element))


def theta_prime(X: MatrixFactorisation, lambdas: Sequence[MFMap], element: Element) -> Element:
    """(dt_1 - lambda_1) ... (dt_n - lambda_n), with dt_j ^ acting on x (x) omega with sign (-1)^|x|"""
    current = element
    for j in reversed(range(len(lambdas))):
        current = apply_homotopy_factor(X, j, lambdas[j], current)
    return current


def apply_homotopy_factor(X: MatrixFactorisation, j: int, lam: MFMap, element: Element) -> Element:
    """(dt_j - lambda_j) on one element"""
    out: Element = {}
    for (i, omega), r in element.items():
        if j not in omega:
            sign = wedge_sign(j, omega) * (-1 if X.parity(i) else 1)
            _add(out, (i, insert_index(j, omega)), r.scale(sign))
        for i2 in range(X.rank):
            entry = lam.matrix[i2, i]
            if entry:
                _add(out, (i2, omega), -(entry * r))
    return out


def e_via_perturbation(X: MatrixFactorisation, frame: TAdicFrame, lambdas: Sequence[MFMap]) -> MFMap:
    """lambda_1 ... lambda_n epsilon (H d)^n sigma, evaluated column by column"""
    if not frame.quasi_homogeneous:
        raise UnsupportedConnection("The perturbation route needs a quasi-homogeneous frame")
    _check_lambdas(X, frame, lambdas)
    reduced = reduce_mod_t(X, frame)
    retract = koszul_retract(frame)
    mu = frame.mu
    n = frame.n
    Lam = PolyMatrix.identity(X.ctx, X.rank)
    for lam in lambdas:
        Lam = Lam @ lam.matrix
    sign = -1 if n % 2 else 1
    base = frame.base_ctx
    columns = []
    for i in range(X.rank):
        for z in range(mu):
            vector = psi(X, retract, sigma_element(frame, i, z))
            image = [X.ctx.zero()] * X.rank
            for i1, v in enumerate(vector):
                if not v:
                    continue
                for i2 in range(X.rank):
                    if Lam[i2, i1]:
                        image[i2] = image[i2] + Lam[i2, i1] * v
            column = []
            for i2 in range(X.rank):
                column.extend(c.scale(sign) for c in frame.coordinates(image[i2]))
            columns.append(column)
    size = X.rank * mu
    matrix = PolyMatrix._raw(base, [[columns[c][r] for c in range(size)] for r in range(size)], (size, size))
    return MFMap(reduced, reduced, 0, matrix)


def check_idempotent(model: FiniteModel, degree_bound: Optional[int] = None) -> VerificationRecord:
    """Strict commutation with d, exact idempotency, and otherwise a homotopy witness for e^2 - e"""
    e = model.e
    d = model.reduced.differential
    strict = (e.matrix @ d) == (d @ e.matrix)
    square = e @ e
    exact = square == e
    witness = None
    if strict and not exact:
        witness = find_homotopy(square - e, degree_bound)
        if isinstance(witness, MFMap):
            logger.info("Found a homotopy witness for e^2 = e")
    record = VerificationRecord(strict=strict, exact_idempotent=exact, witness=witness)
    model.record = record
    return record


# -- cohomology over a field --

def _mat_vec(rows: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> List[Fraction]:
    return [sum((a * b for a, b in zip(row, v) if a and b), Fraction(0)) for row in rows]


class FieldCohomology:
    """H^0 = ker d0 / im d1 and H^1 = ker d1 / im d0 of a factorisation over a field"""

    def __init__(self, mf: MatrixFactorisation):
        if mf.ctx.nvars:
            raise BaseNotField(f"Cohomology needs a field base, got variables {mf.ctx.variables}")
        self.mf = mf
        self.p = mf.ctx.characteristic
        D = mf.differential.to_fractions()
        r0, r1 = mf.ranks
        self.rank0, self.rank1 = r0, r1
        if mf.potential:
            self.representatives = ([], [])
            self.boundaries = ([], [])
            return
        d0 = [row[:r0] for row in D[r0:]]
        d1 = [row[r0:] for row in D[:r0]]
        self.boundaries = ([[d1[i][k] for i in range(r0)] for k in range(r1)],
                           [[d0[i][k] for i in range(r1)] for k in range(r0)])
        cycles = (nullspace(d0, r0, self.p, nrows=r1), nullspace(d1, r1, self.p, nrows=r0))
        self.representatives = tuple(self._complement(self.boundaries[k], cycles[k], (r0, r1)[k])
                                     for k in range(2))

    def _complement(self, boundaries, cycles, dim) -> List[List[Fraction]]:
        vectors = list(boundaries) + list(cycles)
        if not vectors or dim == 0:
            return []
        columns = [[v[r] for v in vectors] for r in range(dim)]
        pivots = column_basis(columns, self.p)
        offset = len(boundaries)
        return [cycles[c - offset] for c in pivots if c >= offset]

    @property
    def dims(self) -> Tuple[int, int]:
        return (len(self.representatives[0]), len(self.representatives[1]))

    def coordinates(self, degree: int, vector: Sequence[Fraction]) -> List[Fraction]:
        """Class of a cycle in the representative basis"""
        boundaries = self.boundaries[degree]
        reps = self.representatives[degree]
        vectors = list(boundaries) + list(reps)
        dim = len(vector)
        columns = [[v[r] for v in vectors] for r in range(dim)]
        solution = solve(columns, vector, len(vectors), self.p)
        if solution is None:
            raise VerificationFailed("Vector is not a cycle")
        return solution[len(boundaries):]

    def induced(self, matrix: PolyMatrix) -> Tuple[List[List[Fraction]], List[List[Fraction]]]:
        """The map induced on H^0 and on H^1 by an even chain map"""
        M = matrix.to_fractions()
        r0 = self.rank0
        blocks = ([row[:r0] for row in M[:r0]], [row[r0:] for row in M[r0:]])
        result = []
        for degree in range(2):
            reps = self.representatives[degree]
            cols = [self.coordinates(degree, _mat_vec(blocks[degree], h)) for h in reps]
            result.append([[cols[c][r] for c in range(len(reps))] for r in range(len(reps))])
        return result[0], result[1]


def _mat_mul(A, B, characteristic: int = 0) -> List[List[Fraction]]:
    width = len(B[0]) if B else 0
    out = []
    for row in A:
        values = [sum((row[k] * B[k][j] for k in range(len(B))), Fraction(0)) for j in range(width)]
        if characteristic:
            values = [Fraction(int(v) % characteristic) for v in values]
        out.append(values)
    return out


def matrix_rank(rows, characteristic: int = 0) -> int:
    return rank(rows, characteristic) if rows and rows[0] else 0


@dataclass
class SplitResult:
    dims: Tuple[int, int]
    cohomology_dims: Tuple[int, int]
    induced: Tuple[List[List[Fraction]], List[List[Fraction]]]
    image_basis: Tuple[List[List[Fraction]], List[List[Fraction]]]


def split_over_point(model: FiniteModel) -> SplitResult:
    """Dimensions of the summand cut out by H(e) on the cohomology of X/tX"""
    if model.base_ctx.nvars:
        raise BaseNotField(f"Splitting needs a field base, got variables {model.base_ctx.variables}")
    cohomology = FieldCohomology(model.reduced)
    induced = cohomology.induced(model.e.matrix)
    p = model.reduced.ctx.characteristic
    dims = []
    images = []
    for degree, E in enumerate(induced):
        if E and _mat_mul(E, E, p) != E:
            raise VerificationFailed(f"Induced map on H^{degree} is not idempotent")
        dims.append(matrix_rank(E, p))
        reps = cohomology.representatives[degree]
        pivots = column_basis(E, p) if E else ()
        images.append([[sum((E[k][c] * reps[k][r] for k in range(len(reps))), Fraction(0))
                        for r in range(len(reps[0]))] for c in pivots] if reps else [])
    result = SplitResult(tuple(dims), cohomology.dims, (induced[0], induced[1]), (images[0], images[1]))
    logger.info(f"Split summand has dimensions {result.dims} inside cohomology {result.cohomology_dims}")
    return result


# -- splitting constant idempotents and removing contractible summands --

def split_constant_idempotent(model: FiniteModel) -> Tuple[MatrixFactorisation, MFMap, MFMap]:
    """(Z, f, g) with g f = e and f g = 1 for an idempotent with constant entries"""
    e = model.e
    if not e.matrix.is_constant() or (e @ e) != e:
        raise SideConditionsViolated("Splitting over the base needs a constant, strictly idempotent e")
    base = model.base_ctx
    p = base.characteristic
    E = e.matrix.to_fractions()
    r0 = model.reduced.rank0
    n = model.reduced.rank
    parts = [list(range(r0)), list(range(r0, n))]
    g_columns, f_rows, ranks = [], [], []
    for idx in parts:
        block = [[E[i][j] for j in idx] for i in idx]
        pivots = column_basis(block, p) if idx else ()
        image = [[block[i][c] for i in range(len(idx))] for c in pivots]
        ranks.append(len(image))
        # coordinates of E x in the image basis, for each basis vector x
        coords = []
        for j in range(len(idx)):
            column = [block[i][j] for i in range(len(idx))]
            sol = solve([[v[i] for v in image] for i in range(len(idx))], column, len(image), p) if image else []
            coords.append(sol)
        for v in image:
            full = [Fraction(0)] * n
            for k, i in enumerate(idx):
                full[i] = v[k]
            g_columns.append(full)
        for k in range(len(image)):
            row = [Fraction(0)] * n
            for j, i in enumerate(idx):
                row[i] = coords[j][k]
            f_rows.append(row)
    m = len(g_columns)
    g_mat = PolyMatrix(base, [[g_columns[c][r] for c in range(m)] for r in range(n)], (n, m))
    f_mat = PolyMatrix(base, f_rows, (m, n))
    d_split = f_mat @ model.reduced.differential @ g_mat
    Z = MatrixFactorisation.from_differential(base, model.potential, d_split, ranks[0])
    f = MFMap(model.reduced, Z, 0, f_mat)
    g = MFMap(Z, model.reduced, 0, g_mat)
    if (f @ g) != identity(Z) or (g @ f) != e:
        raise VerificationFailed("Splitting maps do not split the idempotent")
    return Z, f, g


@dataclass
class StripResult:
    mf: MatrixFactorisation
    to_stripped: MFMap
    from_stripped: MFMap


def _first_unit(D: PolyMatrix) -> Optional[Tuple[int, int]]:
    for i, j, e in D.entries():
        if e and e.is_constant():
            return i, j
    return None


def _elementary(ctx, n, i, j, c) -> PolyMatrix:
    """I + c E_ij"""
    zero = ctx.zero()
    one = ctx.one()
    rows = [[one if a == b else zero for b in range(n)] for a in range(n)]
    rows[i][j] = rows[i][j] + c
    return PolyMatrix._raw(ctx, rows, (n, n))


def strip_units(X: MatrixFactorisation) -> StripResult:
    """Split off trivial rank (1,1) summands at scalar unit entries until none remain"""
    ctx = X.ctx
    D = X.differential
    rank0 = X.rank0
    T = PolyMatrix.identity(ctx, X.rank)
    T_inv = PolyMatrix.identity(ctx, X.rank)
    removed = 0
    while True:
        unit = _first_unit(D)
        if unit is None:
            break
        i, j = unit
        a = D[i, j].constant_value()
        size = D.nrows
        for r in range(size):
            if r != i and D[r, j]:
                c = D[r, j] / a
                E = _elementary(ctx, size, r, i, -c)
                E_inv = _elementary(ctx, size, r, i, c)
                D = E @ D @ E_inv
                T = E @ T
                T_inv = T_inv @ E_inv
        for k in range(size):
            if k != j and D[i, k]:
                c = D[i, k] / a
                G = _elementary(ctx, size, j, k, c)
                G_inv = _elementary(ctx, size, j, k, -c)
                D = G @ D @ G_inv
                T = G @ T
                T_inv = T_inv @ G_inv
        keep = [k for k in range(size) if k not in (i, j)]
        D = D.submatrix(keep, keep)
        T = T.submatrix(keep, list(range(T.ncols)))
        T_inv = T_inv.submatrix(list(range(T_inv.nrows)), keep)
        rank0 -= 1
        removed += 1
    stripped = MatrixFactorisation.from_differential(ctx, X.potential, D, rank0)
    logger.debug(f"Removed {removed} trivial summands: ranks {X.ranks} -> {stripped.ranks}")
    return StripResult(stripped, MFMap(X, stripped, 0, T), MFMap(stripped, X, 0, T_inv))


def find_constant_isomorphism(X: MatrixFactorisation, Y: MatrixFactorisation, seed: int = 0
                              ) -> Optional[MFMap]:
    """An even isomorphism X -> Y with constant entries, if one exists"""
    if X.ranks != Y.ranks or X.ctx != Y.ctx or X.potential != Y.potential:
        return None
    ctx = X.ctx
    n = X.rank
    entries = [(r, c) for r in range(n) for c in range(n) if Y.parity(r) == X.parity(c)]
    DX, DY = X.differential, Y.differential
    keys: Dict[tuple, int] = {}
    system: Dict[int, Dict[int, Fraction]] = {}
    for col, (s, c) in enumerate(entries):
        # (D_Y P - P D_X)[r][c2]
        for r in range(n):
            for mono, coeff in DY[r, s].terms.items():
                row = system.setdefault(keys.setdefault((r, c, mono), len(keys)), {})
                row[col] = row.get(col, 0) + coeff
        for c2 in range(n):
            for mono, coeff in DX[c, c2].terms.items():
                row = system.setdefault(keys.setdefault((s, c2, mono), len(keys)), {})
                row[col] = row.get(col, 0) - coeff
    system = {r: {c: v for c, v in row.items() if v} for r, row in system.items()}
    basis = nullspace(system, len(entries), ctx.characteristic, nrows=len(keys))
    if not basis:
        return None
    rng = random.Random(seed)
    trials = [[Fraction(k + 1) for k in range(len(basis))]]
    trials += [[Fraction(rng.randint(-9, 9)) for _ in basis] for _ in range(20)]
    for weights in trials:
        values = [sum((w * v[k] for w, v in zip(weights, basis)), Fraction(0)) for k in range(len(entries))]
        grid = [[Fraction(0)] * n for _ in range(n)]
        for (r, c), v in zip(entries, values):
            grid[r][c] = v
        if inverse(grid, ctx.characteristic) is not None:
            return MFMap(X, Y, 0, PolyMatrix(ctx, grid, (n, n)))
    return None
