#!/usr/bin/env python3
"""
Chern characters, the boundary-bulk map and Riemann-Roch type pairings
All classes live in the Jacobi algebra J_W = k[x]/(dW/dx_1, ..., dW/dx_n)
"""

import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import List, Optional, Sequence, Tuple

from connection import TAdicFrame, descend
from errors import BoundExceeded, ContextMismatch, NotAMorphism, UnsupportedConnection, VerificationFailed
from groebner import QuotientAlgebra, groebner_basis
from linalg import nullspace, rank
from matrices import PolyMatrix
from mfcore import (MatrixFactorisation, MFMap, _monomials_up_to, dual, hom, hom_map, identity, is_morphism,
                    partial_homotopy, supertrace, tensor_maps)
from polyring import Polynomial, RingContext
from pushforward import FieldCohomology, FiniteModel, idempotent, split_over_point
from residue import ResidueQuery, wedge_power, residue_trace, residue_transform

logger = logging.getLogger(__name__)


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


def jacobi_algebra(W: Polynomial) -> QuotientAlgebra:
    """J_W; raises NotZeroDimensional when the singularity is not isolated"""
    ctx = W.ctx
    partials = [W.derivative(v) for v in ctx.variables]
    return QuotientAlgebra(groebner_basis(partials, ctx))


def jacobi_frame(W: Polynomial) -> TAdicFrame:
    """Frame integrating every variable against t = dW/dx"""
    ctx = W.ctx
    partials = [W.derivative(v) for v in ctx.variables]
    try:
        return TAdicFrame(ctx, ctx.variables, partials)
    except UnsupportedConnection:
        # only lifts and coordinates are used for a field base; no expansions happen
        logger.debug(f"Partials of {W} are not quasi-homogeneous; using a bounded frame")
        return TAdicFrame(ctx, ctx.variables, partials, bound=max(W.degree(), 1))


@dataclass(frozen=True)
class JacobiElement:
    """A class in J_W stored through its normal form"""
    algebra: QuotientAlgebra
    representative: Polynomial

    @classmethod
    def of(cls, algebra: QuotientAlgebra, p: Polynomial) -> 'JacobiElement':
        if p.ctx != algebra.ctx:
            p = p.embed(algebra.ctx)
        return cls(algebra, algebra.normal_form(p))

    def __add__(self, other: 'JacobiElement') -> 'JacobiElement':
        return JacobiElement.of(self.algebra, self.representative + other.representative)

    def __sub__(self, other: 'JacobiElement') -> 'JacobiElement':
        return JacobiElement.of(self.algebra, self.representative - other.representative)

    def __mul__(self, other) -> 'JacobiElement':
        if isinstance(other, JacobiElement):
            return JacobiElement.of(self.algebra, self.representative * other.representative)
        return JacobiElement.of(self.algebra, self.representative.scale(other))

    def __neg__(self) -> 'JacobiElement':
        return JacobiElement(self.algebra, -self.representative)

    def __eq__(self, other):
        if isinstance(other, JacobiElement):
            return self.representative == other.representative
        return self.representative == other

    def __hash__(self):
        return hash(self.representative)

    def __bool__(self):
        return not self.representative.is_zero()

    def coordinates(self) -> List[Fraction]:
        return self.algebra.coordinates(self.representative)

    def __str__(self):
        return str(self.representative)


def _ordered_derivative_product(X: MatrixFactorisation, variables: Sequence[str]) -> PolyMatrix:
    product = PolyMatrix.identity(X.ctx, X.rank)
    for v in variables:
        product = product @ X.differential.derivative(v)
    return product


def chern_character(X: MatrixFactorisation, algebra: Optional[QuotientAlgebra] = None) -> JacobiElement:
    """(-1)^(n choose 2) str(d_1 d ... d_n d) in J_W"""
    algebra = algebra or jacobi_algebra(X.potential)
    n = X.ctx.nvars
    if n % 2:
        return JacobiElement(algebra, algebra.ctx.zero())
    value = supertrace(_ordered_derivative_product(X, X.ctx.variables), X.rank0).scale(_sign(comb(n, 2)))
    return JacobiElement.of(algebra, value)


def boundary_bulk(Y: MatrixFactorisation, f: MFMap, algebra: Optional[QuotientAlgebra] = None) -> JacobiElement:
    """beta_Y(f) = (-1)^(m choose 2) str(f d_1(d_Y) ... d_m(d_Y))"""
    if f.source != Y or f.target != Y or f.parity:
        raise NotAMorphism("The boundary-bulk map takes even endomorphisms")
    if not is_morphism(f):
        raise NotAMorphism("f does not commute with the differential")
    algebra = algebra or jacobi_algebra(Y.potential)
    m = Y.ctx.nvars
    value = supertrace(f.matrix @ _ordered_derivative_product(Y, Y.ctx.variables), Y.rank0)
    return JacobiElement.of(algebra, value.scale(_sign(comb(m, 2))))


def jacobi_residue(W: Polynomial, g: Polynomial, frame: Optional[TAdicFrame] = None) -> Fraction:
    """Res[g dx / dW/dx_1, ..., dW/dx_n]"""
    frame = frame or jacobi_frame(W)
    value = residue_trace(ResidueQuery(frame, g, tuple(W.ctx.gens())))
    return value.constant_value()


def residue_pairing(W: Polynomial, a: Polynomial, b: Polynomial, frame: Optional[TAdicFrame] = None) -> Fraction:
    return jacobi_residue(W, a * b, frame)


def gram_matrix(W: Polynomial) -> List[List[Fraction]]:
    """Residue pairing on the standard monomial basis of J_W"""
    algebra = jacobi_algebra(W)
    frame = jacobi_frame(W)
    basis = algebra.basis_polynomials()
    return [[residue_pairing(W, a, b, frame) for b in basis] for a in basis]


def euler_chi_residue(X: MatrixFactorisation, Y: MatrixFactorisation) -> Fraction:
    """chi(Hom(X, Y)) = (-1)^(n choose 2) Res[ch(X) ch(Y) dx / dW]"""
    if X.ctx != Y.ctx or X.potential != Y.potential:
        raise ContextMismatch("Euler pairing needs factorisations of one potential")
    n = X.ctx.nvars
    if n % 2:
        return Fraction(0)
    algebra = jacobi_algebra(X.potential)
    product = chern_character(X, algebra) * chern_character(Y, algebra)
    return jacobi_residue(X.potential, product.representative) * _sign(comb(n, 2))


# -- cohomology of Hom over the point --

def hom_homotopies(X: MatrixFactorisation, Y: MatrixFactorisation, H: MatrixFactorisation) -> List[MFMap]:
    """Post-composition with d_i(d_Y) on Hom(X, Y)"""
    one = identity(dual(X))
    return [tensor_maps(one, partial_homotopy(Y, v), source=H, target=H) for v in X.ctx.variables]


def hom_model(X: MatrixFactorisation, Y: MatrixFactorisation) -> FiniteModel:
    if X.ctx != Y.ctx or X.potential != Y.potential:
        raise ContextMismatch("Hom over the point needs factorisations of one potential")
    H = hom(X, Y)
    frame = jacobi_frame(X.potential)
    return idempotent(H, frame, hom_homotopies(X, Y, H))


def hom_cohomology(X: MatrixFactorisation, Y: MatrixFactorisation) -> Tuple[int, int]:
    """(dim H^0, dim H^1) of Hom(X, Y) from the split finite model"""
    model = hom_model(X, Y)
    s0, s1 = split_over_point(model).dims
    # the model realises Hom(X, Y)[n]
    return (s1, s0) if model.n % 2 else (s0, s1)


def _truncated_dimension(H: MatrixFactorisation, parity: int, degree: int, extra: int) -> int:
    ctx = H.ctx
    D = H.differential

    def images(par, top):
        vectors = []
        monomials = _monomials_up_to(ctx, top)
        for i in range(H.rank):
            if H.parity(i) != par:
                continue
            for m in monomials:
                vector = {}
                for i2 in range(H.rank):
                    entry = D[i2, i]
                    if entry:
                        for mono, c in entry.mul_term(m).terms.items():
                            vector[(i2, mono)] = vector.get((i2, mono), 0) + c
                vectors.append(((i, m), {k: v for k, v in vector.items() if v}))
        return vectors

    p = ctx.characteristic
    sources = images(parity, degree)
    keys = {}
    for _, vec in sources:
        for k in vec:
            keys.setdefault(k, len(keys))
    # cocycles: kernel of the unknowns-to-image map
    system = {}
    for col, (_, vec) in enumerate(sources):
        for k, v in vec.items():
            system.setdefault(keys[k], {})[col] = v
    kernel = nullspace(system, len(sources), p, nrows=len(keys))
    cocycles = []
    for v in kernel:
        vector = {}
        for (label, _), c in zip(sources, v):
            if c:
                vector[label] = c
        cocycles.append(vector)
    boundaries = [vec for _, vec in images(1 - parity, degree + extra) if vec]

    def span_rank(vectors):
        columns = {}
        rows = {}
        for r, vec in enumerate(vectors):
            rows[r] = {columns.setdefault(k, len(columns)): v for k, v in vec.items()}
        return rank(rows, p, (len(vectors), len(columns))) if vectors and columns else 0

    z = len(cocycles)
    b = span_rank(boundaries)
    together = span_rank(cocycles + boundaries)
    return z - (z + b - together)


def truncation_oracle(X: MatrixFactorisation, Y: MatrixFactorisation, max_degree: Optional[int] = None
                      ) -> Tuple[int, int]:
    """Cohomology of Hom(X, Y) from degree-truncated cocycles and coboundaries

    Each parity is read at the first degree K >= 2 deg W where the truncated count
    agrees at K and K + 1.
    """
    H = hom(X, Y)
    deg_w = max(X.potential.degree(), 1)
    extra = max(H.differential.max_degree(), 0)
    max_degree = max_degree if max_degree is not None else 6 * deg_w + 8
    dims = []
    for parity in range(2):
        K = 0
        previous = _truncated_dimension(H, parity, K, extra)
        while True:
            current = _truncated_dimension(H, parity, K + 1, extra)
            if current == previous and K >= 2 * deg_w:
                break
            K += 1
            if K > max_degree:
                raise BoundExceeded(f"Truncated cohomology did not stabilise by degree {max_degree}")
            previous = current
        logger.debug(f"Truncation oracle: H^{parity} has dimension {previous} (stable at degree {K})")
        dims.append(previous)
    return dims[0], dims[1]


def cardy_check(X: MatrixFactorisation, Y: MatrixFactorisation, alpha: Optional[MFMap] = None,
                beta: Optional[MFMap] = None) -> Tuple[Fraction, Fraction]:
    """(str of H(Hom(alpha, beta)) on H(Hom(X, Y)), its residue expression)"""
    alpha = alpha or identity(X)
    beta = beta or identity(Y)
    for name, f, Z in (('alpha', alpha, X), ('beta', beta, Y)):
        if f.source != Z or f.target != Z or f.parity or not is_morphism(f):
            raise NotAMorphism(f"{name} must be an even endomorphism cocycle")
    model = hom_model(X, Y)
    n = model.n
    cohomology = FieldCohomology(model.reduced)
    E0, E1 = cohomology.induced(model.e.matrix)
    action = descend(model.frame, hom_map(alpha, beta).matrix)
    A0, A1 = cohomology.induced(action)

    def trace_of_product(E, A):
        return sum((E[i][k] * A[k][i] for i in range(len(E)) for k in range(len(E))), Fraction(0))

    lhs = (trace_of_product(E0, A0) - trace_of_product(E1, A1)) * _sign(n)
    if X.ctx.characteristic:
        lhs = Fraction(int(lhs) % X.ctx.characteristic)
    if n % 2:
        rhs = Fraction(0)
    else:
        product = (supertrace(alpha.matrix @ _ordered_derivative_product(X, X.ctx.variables), X.rank0)
                   * supertrace(beta.matrix @ _ordered_derivative_product(Y, Y.ctx.variables), Y.rank0))
        rhs = jacobi_residue(X.potential, product, model.frame) * _sign(comb(n, 2))
    logger.info(f"Cardy pairing: lhs = {lhs}, rhs = {rhs}")
    return lhs, rhs


# -- Chern character of a pushforward --

def _base_homotopies(model: FiniteModel) -> List[MFMap]:
    return [partial_homotopy(model.source, v) for v in model.base_ctx.variables]


def chern_of_pushforward_routes(model: FiniteModel, mus: Optional[Sequence[MFMap]] = None
                                ) -> Tuple[JacobiElement, JacobiElement]:
    """ch of the pushforward through e and through the residue formula"""
    X = model.source
    frame = model.frame
    base = model.base_ctx
    W = model.potential
    algebra = jacobi_algebra(W)
    m, n = base.nvars, model.n
    mus = list(mus) if mus is not None else _base_homotopies(model)
    if len(mus) != m:
        raise ContextMismatch(f"Expected {m} base homotopies, got {len(mus)}")
    zero = JacobiElement(algebra, base.zero())
    if m % 2:
        return zero, zero

    descended = PolyMatrix.identity(base, model.reduced.rank)
    for mu in mus:
        descended = descended @ descend(frame, mu.matrix)
    via_e = supertrace(descended @ model.e.matrix, model.reduced.rank0).scale(_sign(n + comb(m, 2)))

    product = PolyMatrix.identity(X.ctx, X.rank)
    for f in list(mus) + list(model.lambdas):
        product = product @ f.matrix
    integrand = supertrace(product @ wedge_power(X.differential, frame.yvars), X.rank0)
    via_residue = residue_transform(integrand, frame).scale(
        Fraction(_sign(comb(n + 1, 2) + comb(m, 2)), factorial(n)))
    return JacobiElement.of(algebra, via_e), JacobiElement.of(algebra, via_residue)


def chern_of_pushforward(model: FiniteModel, mus: Optional[Sequence[MFMap]] = None) -> JacobiElement:
    via_e, via_residue = chern_of_pushforward_routes(model, mus)
    if via_e != via_residue:
        raise VerificationFailed(f"Chern character routes disagree: {via_e} vs {via_residue}")
    return via_e


# -- homotopy-choice properties of supertraces --

def random_polynomial(ctx: RingContext, rng: random.Random, degree: int = 1, terms: int = 2) -> Polynomial:
    monomials = _monomials_up_to(ctx, degree)
    poly = ctx.zero()
    for _ in range(terms):
        poly = poly + ctx.monomial(rng.choice(monomials), rng.randint(-3, 3))
    return poly


def perturbed_homotopies(X: MatrixFactorisation, rng: random.Random, degree: int = 1) -> List[MFMap]:
    """lambda_i = d_i(d) + d rho_i - rho_i d with random even rho_i"""
    ctx = X.ctx
    D = X.differential
    result = []
    for v in ctx.variables:
        rho = PolyMatrix.from_function(
            ctx, X.rank, X.rank,
            lambda i, j: random_polynomial(ctx, rng, degree) if X.parity(i) == X.parity(j) else ctx.zero())
        matrix = D.derivative(v) + D @ rho - rho @ D
        result.append(MFMap(X, X, 1, matrix, validate=False))
    return result


def supertrace_class(X: MatrixFactorisation, lambdas: Sequence[MFMap], algebra: Optional[QuotientAlgebra] = None
                     ) -> JacobiElement:
    """str(lambda_1 ... lambda_p) in J_W"""
    algebra = algebra or jacobi_algebra(X.potential)
    product = PolyMatrix.identity(X.ctx, X.rank)
    for lam in lambdas:
        product = product @ lam.matrix
    return JacobiElement.of(algebra, supertrace(product, X.rank0))
