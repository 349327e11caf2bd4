#!/usr/bin/env python3
"""
Groebner bases with cofactor tracking, normal forms and ideal membership lifts
Finite-dimensional quotient algebras and their multiplication operators
"""

import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from sympy.polys.monomials import monomial_div, monomial_divides, monomial_lcm, monomial_mul

from errors import ContextMismatch, NotInIdeal, NotZeroDimensional
from matrices import PolyMatrix
from polyring import Monomial, Polynomial, RingContext

logger = logging.getLogger(__name__)


class GroebnerBasis:
    """Reduced Groebner basis together with the cofactors expressing it in the generators"""

    def __init__(self, ctx: RingContext, generators: Sequence[Polynomial], basis: Sequence[Polynomial],
                 cofactors: Sequence[Sequence[Polynomial]]):
        self.ctx = ctx
        self.generators = tuple(generators)
        self.basis = tuple(basis)
        self.cofactors = tuple(tuple(c) for c in cofactors)
        self.leading_monomials = tuple(g.leading_monomial() for g in self.basis)

    def __len__(self):
        return len(self.basis)

    def __repr__(self):
        return f"GroebnerBasis([{', '.join(str(g) for g in self.basis)}])"

    def _check(self, p: Polynomial):
        if p.ctx != self.ctx:
            raise ContextMismatch(f"Polynomial over {p.ctx!r} reduced by a basis over {self.ctx!r}")

    def divide(self, p: Polynomial) -> Tuple[List[Polynomial], Polynomial]:
        """Full division: p = sum q_k * basis[k] + remainder; each step uses the first divisor"""
        self._check(p)
        quotients = [self.ctx.zero() for _ in self.basis]
        remainder: Dict[Monomial, Fraction] = {}
        current = p
        while current:
            lm = current.leading_monomial()
            lc = current.leading_coefficient()
            for k, g in enumerate(self.basis):
                shift = monomial_div(lm, self.leading_monomials[k])
                if shift is not None:
                    factor = lc / g.leading_coefficient()
                    current = current - g.mul_term(shift, factor)
                    quotients[k] = quotients[k] + self.ctx.monomial(shift, factor)
                    break
            else:
                remainder[lm] = lc
                current = current - self.ctx.monomial(lm, lc)
        return quotients, Polynomial(self.ctx, remainder)

    def normal_form(self, p: Polynomial) -> Polynomial:
        return self.divide(p)[1]

    def contains(self, p: Polynomial) -> bool:
        return not self.normal_form(p)

    def lift(self, p: Polynomial) -> List[Polynomial]:
        """Coefficients a_j with p = sum a_j * generators[j]"""
        quotients, remainder = self.divide(p)
        if remainder:
            raise NotInIdeal(f"{p} is not in the ideal (normal form {remainder})")
        lifted = [self.ctx.zero() for _ in self.generators]
        for q, row in zip(quotients, self.cofactors):
            if not q:
                continue
            for j, c in enumerate(row):
                if c:
                    lifted[j] = lifted[j] + q * c
        return lifted


class _Element:
    __slots__ = ('poly', 'cofactors')

    def __init__(self, poly: Polynomial, cofactors: List[Polynomial]):
        self.poly = poly
        self.cofactors = cofactors

    def combine(self, other: '_Element', shift: Monomial, factor: Fraction) -> '_Element':
        """self - factor * y^shift * other"""
        return _Element(self.poly - other.poly.mul_term(shift, factor),
                        [a - b.mul_term(shift, factor) for a, b in zip(self.cofactors, other.cofactors)])

    def scaled(self, factor: Fraction) -> '_Element':
        return _Element(self.poly.scale(factor), [c.scale(factor) for c in self.cofactors])


def _reduce(element: _Element, against: Sequence[_Element]) -> _Element:
    """Fully reduce element by the list, keeping cofactors in step"""
    ctx = element.poly.ctx
    poly = element.poly
    cofactors = list(element.cofactors)
    remainder: Dict[Monomial, Fraction] = {}
    while poly:
        lm = poly.leading_monomial()
        lc = poly.leading_coefficient()
        for g in against:
            shift = monomial_div(lm, g.poly.leading_monomial())
            if shift is not None:
                factor = lc / g.poly.leading_coefficient()
                poly = poly - g.poly.mul_term(shift, factor)
                cofactors = [a - b.mul_term(shift, factor) for a, b in zip(cofactors, g.cofactors)]
                break
        else:
            remainder[lm] = lc
            poly = poly - ctx.monomial(lm, lc)
    return _Element(Polynomial(ctx, remainder), cofactors)


def groebner_basis(generators: Sequence[Polynomial], ctx: Optional[RingContext] = None) -> GroebnerBasis:
    """Buchberger's algorithm with normal pair selection and both standard criteria"""
    generators = list(generators)
    if ctx is None:
        if not generators:
            raise ValueError("A context is required for an empty generator list")
        ctx = generators[0].ctx
    for g in generators:
        if g.ctx != ctx:
            raise ContextMismatch(f"Generator {g} is over {g.ctx!r}, expected {ctx!r}")

    r = len(generators)
    zero = ctx.zero()
    work: List[_Element] = []
    for j, g in enumerate(generators):
        if g:
            unit = [zero] * r
            unit[j] = ctx.one()
            work.append(_Element(g, unit))

    pending = {(i, j) for j in range(len(work)) for i in range(j)}

    def lcm_of(pair):
        return monomial_lcm(work[pair[0]].poly.leading_monomial(), work[pair[1]].poly.leading_monomial())

    steps = 0
    while pending:
        pair = min(pending, key=lambda p: (ctx.key(lcm_of(p)), p))
        pending.discard(pair)
        i, j = pair
        lm_i = work[i].poly.leading_monomial()
        lm_j = work[j].poly.leading_monomial()
        lcm = monomial_lcm(lm_i, lm_j)

        # coprime leading monomials
        if monomial_mul(lm_i, lm_j) == lcm:
            continue
        # chain criterion
        chained = False
        for k in range(len(work)):
            if k in (i, j):
                continue
            if (monomial_divides(work[k].poly.leading_monomial(), lcm)
                    and (min(i, k), max(i, k)) not in pending and (min(j, k), max(j, k)) not in pending):
                chained = True
                break
        if chained:
            continue

        steps += 1
        a, b = work[i], work[j]
        s_left = a.scaled(Fraction(1) / a.poly.leading_coefficient())
        s_left = _Element(s_left.poly.mul_term(monomial_div(lcm, lm_i)),
                          [c.mul_term(monomial_div(lcm, lm_i)) for c in s_left.cofactors])
        s_poly = s_left.combine(b, monomial_div(lcm, lm_j), Fraction(1) / b.poly.leading_coefficient())
        reduced = _reduce(s_poly, work)
        if reduced.poly:
            work.append(reduced.scaled(Fraction(1) / reduced.poly.leading_coefficient()))
            t = len(work) - 1
            pending.update((k, t) for k in range(t))
            logger.debug(f"S-pair {pair} added basis element {t}: {reduced.poly.leading_monomial()}")

    # minimise: drop elements whose leading monomial is divisible by another's
    keep = []
    for idx, e in enumerate(work):
        lm = e.poly.leading_monomial()
        redundant = False
        for jdx, f in enumerate(work):
            if jdx == idx:
                continue
            other = f.poly.leading_monomial()
            if monomial_divides(other, lm) and (other != lm or jdx < idx):
                redundant = True
                break
        if not redundant:
            keep.append(e)

    # inter-reduce and make monic
    reduced_basis = []
    for idx, e in enumerate(keep):
        others = keep[:idx] + keep[idx + 1:]
        r_e = _reduce(e, others)
        reduced_basis.append(r_e.scaled(Fraction(1) / r_e.poly.leading_coefficient()))
    reduced_basis.sort(key=lambda e: ctx.key(e.poly.leading_monomial()))

    logger.debug(f"Groebner basis with {len(reduced_basis)} elements after {steps} reductions")
    return GroebnerBasis(ctx, generators, [e.poly for e in reduced_basis], [e.cofactors for e in reduced_basis])


def normal_form(p: Polynomial, gb: GroebnerBasis) -> Polynomial:
    return gb.normal_form(p)


def ideal_lift(p: Polynomial, gb: GroebnerBasis) -> List[Polynomial]:
    return gb.lift(p)


class QuotientAlgebra:
    """k[y]/I for a zero-dimensional ideal, with its standard monomial basis"""

    def __init__(self, gb: GroebnerBasis):
        self.gb = gb
        self.ctx = gb.ctx
        lms = gb.leading_monomials
        unit_ideal = self.ctx.unit in lms
        for i, name in enumerate(self.ctx.variables):
            if unit_ideal:
                break
            if not any(m[i] > 0 and sum(m) == m[i] for m in lms):
                raise NotZeroDimensional(f"No leading monomial is a pure power of {name!r}")

        basis = []
        unit = self.ctx.unit
        if not any(monomial_divides(m, unit) for m in lms):
            seen = {unit}
            frontier = [unit]
            while frontier:
                nxt = []
                for m in frontier:
                    basis.append(m)
                    for i in range(self.ctx.nvars):
                        up = m[:i] + (m[i] + 1,) + m[i + 1:]
                        if up not in seen and not any(monomial_divides(l, up) for l in lms):
                            seen.add(up)
                            nxt.append(up)
                frontier = nxt
        basis.sort(key=self.ctx.key)
        self.basis: Tuple[Monomial, ...] = tuple(basis)
        self.index = {m: i for i, m in enumerate(self.basis)}
        self.dim = len(self.basis)
        self._monomial_coordinates: Dict[Monomial, List[Fraction]] = {}
        logger.debug(f"Quotient algebra of dimension {self.dim} over {self.ctx.variables}")

    def __len__(self):
        return self.dim

    def basis_polynomials(self) -> List[Polynomial]:
        return [self.ctx.monomial(m) for m in self.basis]

    def normal_form(self, p: Polynomial) -> Polynomial:
        return self.gb.normal_form(p)

    def coordinates(self, p: Polynomial) -> List[Fraction]:
        reduced = self.normal_form(p)
        vector = [Fraction(0)] * self.dim
        for m, c in reduced.terms.items():
            vector[self.index[m]] = c
        return vector

    def from_coordinates(self, vector: Sequence[Fraction]) -> Polynomial:
        return Polynomial(self.ctx, {m: c for m, c in zip(self.basis, vector) if c})

    def monomial_coordinates(self, monom: Monomial) -> List[Fraction]:
        if monom not in self._monomial_coordinates:
            self._monomial_coordinates[monom] = self.coordinates(self.ctx.monomial(monom))
        return self._monomial_coordinates[monom]

    def split(self, r: Polynomial) -> Tuple[RingContext, Dict[Monomial, Polynomial]]:
        """r = sum_b c_b y^b with c_b over the variables outside the quotient"""
        coefficient_ctx = r.ctx.complement(self.ctx.variables)
        for name in self.ctx.variables:
            if name not in r.ctx.index:
                raise ContextMismatch(f"Variable {name!r} missing from {r.ctx!r}")
        return coefficient_ctx, r.split(self.ctx.variables, coefficient_ctx)

    def coordinates_over(self, r: Polynomial) -> List[Polynomial]:
        """Coordinates of the normal form of r, with coefficients in the outside variables"""
        coefficient_ctx, parts = self.split(r)
        vector = [coefficient_ctx.zero() for _ in range(self.dim)]
        for b, c in parts.items():
            for z, v in enumerate(self.monomial_coordinates(b)):
                if v:
                    vector[z] = vector[z] + c.scale(v)
        return vector

    def mult_operator(self, r: Polynomial) -> PolyMatrix:
        """Matrix of multiplication by r; column m holds the coordinates of r * e_m"""
        coefficient_ctx, parts = self.split(r)
        zero = coefficient_ctx.zero()
        columns = [[zero] * self.dim for _ in range(self.dim)]
        for m, e_m in enumerate(self.basis):
            col = columns[m]
            for b, c in parts.items():
                for z, v in enumerate(self.monomial_coordinates(monomial_mul(b, e_m))):
                    if v:
                        col[z] = col[z] + c.scale(v)
        return PolyMatrix._raw(coefficient_ctx, [[columns[m][z] for m in range(self.dim)] for z in range(self.dim)],
                               (self.dim, self.dim))


def quotient_algebra(gb: GroebnerBasis) -> QuotientAlgebra:
    return QuotientAlgebra(gb)


def mult_operator(r: Polynomial, quotient: QuotientAlgebra) -> PolyMatrix:
    return quotient.mult_operator(r)


def operator_trace(matrix: PolyMatrix) -> Polynomial:
    return matrix.trace()
