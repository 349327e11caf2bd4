#!/usr/bin/env python3
"""
Residue symbols Res[s dr_1..dr_n / t_1..t_n]
Computed by descended connection commutators and, independently, by the transformation law
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Optional, Sequence, Tuple

from connection import TAdicFrame, commutator_operator, descend, descend_commutator
from errors import ContextMismatch, NotAMorphism, UnsupportedConnection
from matrices import PolyMatrix, permutation_sign
from mfcore import MatrixFactorisation, MFMap, is_morphism, supertrace
from polyring import Polynomial, to_polynomial
from pushforward import reduce_mod_t

logger = logging.getLogger(__name__)


@dataclass
class ResidueQuery:
    """Res[s dr_1 .. dr_n / t]; r defaults to t itself"""
    frame: TAdicFrame
    s: Polynomial
    rs: Tuple[Polynomial, ...] = field(default=())

    def __post_init__(self):
        ctx = self.frame.ctx
        self.s = to_polynomial(self.s, ctx)
        if not self.rs:
            self.rs = tuple(self.frame.tgens)
        self.rs = tuple(to_polynomial(r, ctx) for r in self.rs)
        if len(self.rs) != self.frame.n:
            raise ContextMismatch(f"Expected {self.frame.n} differentials, got {len(self.rs)}")


def residue_trace(query: ResidueQuery) -> Polynomial:
    """sum_tau sgn(tau) tr(s [d/dt_tau(1), r_1] ... [d/dt_tau(n), r_n]) on R/tR"""
    frame = query.frame
    multiplier = frame.mult_operator(query.s)
    if multiplier.is_zero():
        return frame.base_ctx.zero()
    total = frame.base_ctx.zero()
    for tau in permutations(range(frame.n)):
        product = multiplier
        for i, j in enumerate(tau):
            product = product @ commutator_operator(frame, j, query.rs[i])
            if product.is_zero():
                break
        value = product.trace()
        total = total + (value if permutation_sign(tau) == 1 else -value)
    return total


def residue(frame: TAdicFrame, s, rs: Sequence = ()) -> Polynomial:
    return residue_trace(ResidueQuery(frame, s, tuple(rs)))


def residue_monomial(h: Polynomial, N: Sequence[int]) -> Fraction:
    """Res[h dy / y^N]: the coefficient of y^(N - 1) in h"""
    if len(N) != h.ctx.nvars:
        raise ContextMismatch(f"Exponent vector {tuple(N)} does not match {h.ctx.variables}")
    if any(e < 1 for e in N):
        return Fraction(0)
    return h.coefficient(tuple(e - 1 for e in N))


def jacobian(rs: Sequence[Polynomial], variables: Sequence[str]) -> PolyMatrix:
    ctx = rs[0].ctx
    return PolyMatrix._raw(ctx, [[r.derivative(v) for v in variables] for r in rs], (len(rs), len(variables)))


def _vanishing_powers(frame: TAdicFrame) -> Tuple[int, ...]:
    """Minimal N_i with y_i^N_i in (t), searched up to mu + 1"""
    powers = []
    for name in frame.yvars:
        y = frame.y_ctx.var(name)
        power = y
        for k in range(1, frame.mu + 2):
            if not frame.gb.normal_form(power):
                powers.append(k)
                break
            power = power * y
        else:
            raise UnsupportedConnection(f"No power of {name} up to {frame.mu + 1} lies in (t): "
                                        f"t has zeros away from the origin")
    return tuple(powers)


def residue_transform(g: Polynomial, frame: TAdicFrame, rs: Optional[Sequence[Polynomial]] = None) -> Polynomial:
    """Res[g dr / t] via y_i^N_i = sum_j A_ij t_j; r defaults to the integrated variables themselves"""
    ctx = frame.ctx
    g = to_polynomial(g, ctx)
    if rs is not None:
        g = g * jacobian([to_polynomial(r, ctx) for r in rs], frame.yvars).det()
    N = _vanishing_powers(frame)
    rows = [frame.lift(ctx.var(name) ** k) for name, k in zip(frame.yvars, N)]
    A = PolyMatrix._raw(ctx, rows, (frame.n, frame.n))
    numerator = g * A.det()
    logger.debug(f"Transformation law with exponents {N}")
    target = tuple(k - 1 for k in N)
    return numerator.split(frame.yvars, frame.base_ctx).get(target, frame.base_ctx.zero())


def residue_of_query(query: ResidueQuery) -> Polynomial:
    return residue_transform(query.s, query.frame, query.rs)


def _atiyah_power(frame: TAdicFrame, D: PolyMatrix) -> PolyMatrix:
    """(-1)^n sum_tau sgn(tau) [d/dt_tau(1), d] ... [d/dt_tau(n), d] on X/tX"""
    n = frame.n
    commutators = [descend_commutator(frame, j, D) for j in range(n)]
    size = D.nrows * frame.mu
    total = PolyMatrix.zeros(frame.base_ctx, size, size)
    for tau in permutations(range(n)):
        term = PolyMatrix.identity(frame.base_ctx, size)
        for j in tau:
            term = term @ commutators[j]
        total = total + (term if permutation_sign(tau) == 1 else -term)
    return -total if n % 2 else total


def wedge_power(D: PolyMatrix, variables: Sequence[str]) -> PolyMatrix:
    """Coefficient of dy_1..dy_n in (dD)^n"""
    n = len(variables)
    partials = [D.derivative(v) for v in variables]
    total = PolyMatrix.zeros(D.ctx, D.nrows, D.ncols)
    for tau in permutations(range(n)):
        term = PolyMatrix.identity(D.ctx, D.nrows)
        for j in tau:
            term = term @ partials[j]
        total = total + (term if permutation_sign(tau) == 1 else -term)
    return total


def atiyah_trace(X: MatrixFactorisation, frame: TAdicFrame, alpha: MFMap) -> Tuple[Polynomial, Polynomial]:
    """(str(alpha At^n), (-1)^n Res[str(alpha d(d)^n) / t]) with alpha of degree n"""
    reduced = reduce_mod_t(X, frame)
    descended = MFMap(reduced, reduced, alpha.parity, descend(frame, alpha.matrix), validate=False)
    if not is_morphism(descended):
        raise NotAMorphism("alpha does not descend to a morphism of X/tX")
    base = frame.base_ctx
    if alpha.is_zero():
        return base.zero(), base.zero()
    lhs = supertrace(descended.matrix @ _atiyah_power(frame, X.differential), reduced.rank0)
    integrand = supertrace(alpha.matrix @ wedge_power(X.differential, frame.yvars), X.rank0)
    rhs = residue_transform(integrand, frame)
    if frame.n % 2:
        rhs = -rhs
    logger.debug(f"Atiyah trace: lhs = {lhs}, rhs = {rhs}")
    return lhs, rhs
