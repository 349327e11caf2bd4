#!/usr/bin/env python3
"""
The t-adic frame of R = S[y] over S[t] for a regular sequence t in the y variables
Section, expansions, descended connection operators, the de Rham contraction
and the homological perturbation lemma for finite retract data
"""

import logging
from fractions import Fraction
from itertools import combinations, combinations_with_replacement
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from errors import (BoundExceeded, CharacteristicTooSmall, ContextMismatch, HomotopyIdentityFailed,
                    NotAFactorisation, PerturbationNotSmall, SideConditionsViolated, UnsupportedConnection)
from groebner import QuotientAlgebra, groebner_basis
from linalg import nullspace
from matrices import PolyMatrix
from mfcore import MatrixFactorisation, MFMap, coboundary, identity
from polyring import Monomial, Polynomial, RingContext, to_polynomial

logger = logging.getLogger(__name__)

MultiIndex = Tuple[int, ...]
Form = Dict[Tuple[int, ...], Polynomial]


def _detect_weights(y_ctx: RingContext, tgens: Sequence[Polynomial]) -> Optional[Tuple[int, ...]]:
    """Positive integer weights making every t_j quasi-homogeneous, if some simple choice works"""
    n = y_ctx.nvars
    ones = (1,) * n
    if all(t.quasi_degree(ones) is not None for t in tgens):
        return ones
    rows = []
    for t in tgens:
        monomials = list(t.terms)
        for m in monomials[1:]:
            rows.append([a - b for a, b in zip(m, monomials[0])])
    basis = nullspace(rows, n) if rows else [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    candidates = []
    for v in basis:
        candidates += [v, [-x for x in v]]
    if basis:
        total = [sum(col) for col in zip(*basis)]
        candidates += [total, [-x for x in total]]
    for v in candidates:
        if all(x > 0 for x in v):
            scale = 1
            for x in v:
                scale = scale * x.denominator // gcd(scale, x.denominator)
            ints = [int(x * scale) for x in v]
            g = 0
            for x in ints:
                g = gcd(g, x)
            return tuple(x // g for x in ints)
    return None


class TAdicFrame:
    """R = k[base, y] as a module over S[t]; sigma is the standard-monomial section of R/tR"""

    def __init__(self, ctx: RingContext, yvars: Sequence[str], tgens: Sequence[Polynomial],
                 weights: Optional[Sequence[int]] = None, bound: Optional[int] = None):
        self.ctx = ctx
        self.yvars = tuple(yvars)
        self.y_ctx = ctx.sub(self.yvars)
        self.base_ctx = ctx.complement(self.yvars)
        self.n = len(tgens)

        p = ctx.characteristic
        if p and p <= self.n:
            raise CharacteristicTooSmall(f"Characteristic {p} does not invert {self.n}!")

        local = []
        for j, t in enumerate(tgens):
            t = to_polynomial(t, ctx)
            stray = [v for v in t.variables_used() if v not in self.yvars]
            if stray:
                raise ContextMismatch(f"t_{j + 1} = {t} involves {stray}, outside the integrated variables")
            local.append(t.embed(self.y_ctx))
        self.tgens = tuple(t.embed(ctx) for t in local)
        self.t_local = tuple(local)

        self.gb = groebner_basis(self.t_local, self.y_ctx)
        self.quotient = QuotientAlgebra(self.gb)
        self.mu = self.quotient.dim

        if weights is not None:
            weights = tuple(weights)
            if any(t.quasi_degree(weights) is None for t in self.t_local):
                raise UnsupportedConnection(f"t is not quasi-homogeneous for weights {weights}")
        else:
            weights = _detect_weights(self.y_ctx, self.t_local)
        self.weights = weights
        self.quasi_homogeneous = weights is not None
        if not self.quasi_homogeneous and bound is None:
            raise UnsupportedConnection("t is not quasi-homogeneous and no expansion bound was given")
        self.bound = bound
        self.truncated = not self.quasi_homogeneous
        self.t_degrees = tuple(t.quasi_degree(weights) for t in self.t_local) if weights else None

        self._lifts: Dict[Monomial, List[Polynomial]] = {}
        self._t_powers: Dict[MultiIndex, Polynomial] = {}
        self._basis = [self.ctx.monomial(self._embed_exponent(m)) for m in self.quotient.basis]
        logger.info(f"Frame over {self.yvars} with t = {[str(t) for t in self.tgens]}: mu = {self.mu}, "
                    f"weights = {self.weights}")

    def __repr__(self):
        return f"TAdicFrame(yvars={list(self.yvars)}, t={[str(t) for t in self.tgens]}, mu={self.mu})"

    def _embed_exponent(self, b: Monomial) -> Monomial:
        exps = [0] * self.ctx.nvars
        for name, e in zip(self.yvars, b):
            exps[self.ctx.index[name]] = e
        return tuple(exps)

    def _check(self, p: Polynomial):
        if p.ctx != self.ctx:
            raise ContextMismatch(f"{p} is over {p.ctx!r}, the frame is over {self.ctx!r}")

    @property
    def basis(self) -> List[Polynomial]:
        """sigma(e_1), ..., sigma(e_mu) in R"""
        return list(self._basis)

    def coordinates(self, p: Polynomial) -> List[Polynomial]:
        """Coordinates of p mod t in the basis e_z, with coefficients in S"""
        self._check(p)
        return self.quotient.coordinates_over(p)

    def section(self, coordinates: Sequence[Polynomial]) -> Polynomial:
        total = self.ctx.zero()
        for c, e in zip(coordinates, self._basis):
            if c:
                total = total + c.embed(self.ctx) * e
        return total

    def reduce(self, p: Polynomial) -> Polynomial:
        """sigma(pi(p))"""
        return self.section(self.coordinates(p))

    def _monomial_lift(self, b: Monomial) -> List[Polynomial]:
        if b not in self._lifts:
            y_b = self.y_ctx.monomial(b)
            rest = y_b - self.gb.normal_form(y_b)
            lifted = self.gb.lift(rest) if rest else [self.y_ctx.zero()] * self.n
            self._lifts[b] = [a.embed(self.ctx) for a in lifted]
        return self._lifts[b]

    def lift(self, p: Polynomial) -> List[Polynomial]:
        """a_1..a_n with p - sigma(pi(p)) = sum a_i t_i"""
        self._check(p)
        result = [self.ctx.zero()] * self.n
        for b, c in p.split(self.yvars, self.base_ctx).items():
            c = c.embed(self.ctx)
            for i, a in enumerate(self._monomial_lift(b)):
                if a:
                    result[i] = result[i] + c * a
        return result

    def t_power(self, M: MultiIndex) -> Polynomial:
        if M not in self._t_powers:
            value = self.ctx.one()
            for t, e in zip(self.tgens, M):
                if e:
                    value = value * t ** e
            self._t_powers[M] = value
        return self._t_powers[M]

    def mult_operator(self, r: Polynomial) -> PolyMatrix:
        """Multiplication by r on R/tR, over S"""
        self._check(r)
        return self.quotient.mult_operator(r)


def make_frame(ctx: RingContext, yvars: Sequence[str], tgens: Sequence[Polynomial],
               weights: Optional[Sequence[int]] = None, bound: Optional[int] = None) -> TAdicFrame:
    return TAdicFrame(ctx, yvars, tgens, weights=weights, bound=bound)


def t_expand(frame: TAdicFrame, p: Polynomial, bound: Optional[int] = None) -> Dict[MultiIndex, Polynomial]:
    """{M: sigma(p_M)} with p = sum sigma(p_M) t^M modulo t-degree > bound"""
    if frame.quasi_homogeneous:
        limit = bound
    else:
        limit = frame.bound if bound is None else bound
        if limit > frame.bound:
            raise BoundExceeded(f"Expansion to t-degree {limit} exceeds the frame bound {frame.bound}")

    zero_index = (0,) * frame.n
    result: Dict[MultiIndex, Polynomial] = {}
    level = {zero_index: p}
    depth = 0
    while level:
        if limit is not None and depth > limit:
            break
        next_level: Dict[MultiIndex, Polynomial] = {}
        for M in sorted(level):
            q = level[M]
            sigma = frame.reduce(q)
            if sigma:
                result[M] = result[M] + sigma if M in result else sigma
            if limit is not None and depth == limit:
                continue
            for i, a in enumerate(frame.lift(q)):
                if a:
                    up = M[:i] + (M[i] + 1,) + M[i + 1:]
                    next_level[up] = next_level[up] + a if up in next_level else a
        level = {M: q for M, q in next_level.items() if q}
        depth += 1
    logger.debug(f"t-expansion of {p} has {len(result)} coefficients up to depth {depth - 1}")
    return {M: c for M, c in result.items() if c}


def commutator_operator(frame: TAdicFrame, j: int, r: Polynomial) -> PolyMatrix:
    """[d/dt_j, r] on R/tR: column m holds NF(a_j) from r e_m - sigma(NF(r e_m)) = sum a_i t_i"""
    frame._check(r)
    columns = []
    for e in frame.basis:
        a_j = frame.lift(r * e)[j]
        columns.append(frame.coordinates(a_j))
    mu = frame.mu
    return PolyMatrix._raw(frame.base_ctx, [[columns[m][z] for m in range(mu)] for z in range(mu)], (mu, mu))


def descend(frame: TAdicFrame, matrix: PolyMatrix) -> PolyMatrix:
    """Matrix over R acting on (R/tR)^n: block (i, i') is multiplication by the entry"""
    mu = frame.mu
    zero = frame.base_ctx.zero()
    rows = [[zero] * (matrix.ncols * mu) for _ in range(matrix.nrows * mu)]
    for i, k, e in matrix.entries():
        if not e:
            continue
        block = frame.mult_operator(e)
        for z in range(mu):
            for z2 in range(mu):
                rows[i * mu + z][k * mu + z2] = block[z, z2]
    return PolyMatrix._raw(frame.base_ctx, rows, (matrix.nrows * mu, matrix.ncols * mu))


def descend_commutator(frame: TAdicFrame, j: int, matrix: PolyMatrix) -> PolyMatrix:
    """[d/dt_j, matrix] descended blockwise to (R/tR)^n"""
    mu = frame.mu
    zero = frame.base_ctx.zero()
    rows = [[zero] * (matrix.ncols * mu) for _ in range(matrix.nrows * mu)]
    for i, k, e in matrix.entries():
        if not e:
            continue
        block = commutator_operator(frame, j, e)
        for z in range(mu):
            for z2 in range(mu):
                rows[i * mu + z][k * mu + z2] = block[z, z2]
    return PolyMatrix._raw(frame.base_ctx, rows, (matrix.nrows * mu, matrix.ncols * mu))


# -- forms on the Koszul complex of t --

def wedge_sign(j: int, omega: Tuple[int, ...]) -> int:
    """Sign of moving dt_j to its sorted place in dt_j ^ omega"""
    return -1 if sum(1 for i in omega if i < j) % 2 else 1


def insert_index(j: int, omega: Tuple[int, ...]) -> Tuple[int, ...]:
    return tuple(sorted(omega + (j,)))


def add_form(target: Form, omega: Tuple[int, ...], value: Polynomial):
    if not value:
        return
    current = target.get(omega)
    total = value if current is None else current + value
    if total:
        target[omega] = total
    else:
        target.pop(omega, None)


def forms_equal(a: Form, b: Form) -> bool:
    for omega in set(a) | set(b):
        x, y = a.get(omega), b.get(omega)
        if x is None or y is None:
            if x or y:
                return False
        elif x != y:
            return False
    return True


class KoszulRetract:
    """The de Rham contraction of the Koszul complex R (x) Lambda(dt) onto R/tR

    delta(r dt_i1..dt_ip) = sum_k (-1)^(k-1) t_ik r dt_i1..^..dt_ip and
    H(r omega) = sum_M sum_j M_j / (p + |M|) sigma(r_M) t^(M - e_j) dt_j ^ omega
    """

    def __init__(self, frame: TAdicFrame):
        if not frame.quasi_homogeneous and frame.bound is None:
            raise UnsupportedConnection("The contraction needs a quasi-homogeneous or bounded frame")
        self.frame = frame
        self.ctx = frame.ctx

    def delta(self, form: Form) -> Form:
        out: Form = {}
        for omega, r in form.items():
            for k, i in enumerate(omega):
                sign = -1 if k % 2 else 1
                add_form(out, omega[:k] + omega[k + 1:], (r * self.frame.tgens[i]).scale(sign))
        return out

    def homotopy(self, form: Form) -> Form:
        """H; the retract datum's homotopy is -H"""
        frame = self.frame
        out: Form = {}
        for omega, r in form.items():
            p = len(omega)
            for M, coefficient in t_expand(frame, r).items():
                size = sum(M)
                if size == 0:
                    continue
                for j, m_j in enumerate(M):
                    if not m_j or j in omega:
                        continue
                    down = M[:j] + (m_j - 1,) + M[j + 1:]
                    factor = Fraction(m_j, p + size) * wedge_sign(j, omega)
                    add_form(out, insert_index(j, omega), (coefficient * frame.t_power(down)).scale(factor))
        return out

    def sigma(self, p: Polynomial) -> Form:
        """sigma of the class of p, as a 0-form"""
        reduced = self.frame.reduce(p)
        return {(): reduced} if reduced else {}

    def pi(self, form: Form) -> Polynomial:
        """Class of the 0-form part, returned through the section"""
        return self.frame.reduce(form.get((), self.ctx.zero()))

    def sigma_pi(self, form: Form) -> Form:
        return self.sigma(form.get((), self.ctx.zero()))

    def datum_homotopy(self, form: Form) -> Form:
        return {omega: -r for omega, r in self.homotopy(form).items()}

    def check_identities(self, forms: Sequence[Form]) -> Dict[str, bool]:
        """H^2 = 0, H sigma = 0, pi H = 0 and delta H + H delta = 1 - sigma pi on the given forms"""
        results = {'H2': True, 'Hsigma': True, 'piH': True, 'contraction': True}
        for form in forms:
            H = self.homotopy(form)
            if self.homotopy(H):
                results['H2'] = False
            if self.homotopy(self.sigma_pi(form)):
                results['Hsigma'] = False
            if self.pi(H):
                results['piH'] = False
            lhs: Form = {}
            for omega, r in self.delta(H).items():
                add_form(lhs, omega, r)
            for omega, r in self.homotopy(self.delta(form)).items():
                add_form(lhs, omega, r)
            rhs: Form = dict(form)
            for omega, r in self.sigma_pi(form).items():
                add_form(rhs, omega, -r)
            if not forms_equal(lhs, rhs):
                results['contraction'] = False
        return results


def koszul_retract(frame: TAdicFrame) -> KoszulRetract:
    return KoszulRetract(frame)


def spanning_forms(frame: TAdicFrame, degree: int) -> List[Form]:
    """y^a dt_S for all |a| <= degree and all index sets S"""
    forms = []
    ctx = frame.ctx
    subsets = [s for k in range(frame.n + 1) for s in combinations(range(frame.n), k)]
    for total in range(degree + 1):
        for combo in combinations_with_replacement(frame.yvars, total):
            r = ctx.one()
            for name in combo:
                r = r * ctx.var(name)
            for s in subsets:
                forms.append({s: r})
    return forms


# -- finite deformation retracts and the perturbation lemma --

class DeformationRetract:
    """i: L -> M, p: M -> L, h odd on M with p i = 1 and i p = 1 + b h + h b"""

    def __init__(self, small: MatrixFactorisation, big: MatrixFactorisation, i: MFMap, p: MFMap, h: MFMap,
                 verify: bool = True):
        self.small = small
        self.big = big
        self.i = i
        self.p = p
        self.h = h
        if verify:
            self.verify()

    def verify(self):
        if (self.p @ self.i) != identity(self.small):
            raise HomotopyIdentityFailed("p i is not the identity")
        b = MFMap(self.big, self.big, 1, self.big.differential, validate=False)
        expected = identity(self.big) + b @ self.h + self.h @ b
        if (self.i @ self.p) != expected:
            raise HomotopyIdentityFailed("i p differs from 1 + b h + h b")
        if not coboundary(self.i).is_zero() or not coboundary(self.p).is_zero():
            raise HomotopyIdentityFailed("i or p is not a morphism")

    def side_conditions(self) -> Dict[str, bool]:
        return {
            'h2': (self.h @ self.h).is_zero(),
            'hi': (self.h @ self.i).is_zero(),
            'ph': (self.p @ self.h).is_zero(),
        }


def _rebase(f: MFMap, source: MatrixFactorisation, target: MatrixFactorisation) -> MFMap:
    return MFMap(source, target, f.parity, f.matrix, validate=False)


def perturb_retract(datum: DeformationRetract, mu: MFMap, nilpotency_bound: int = 64,
                    kind: Optional[int] = None) -> Tuple[DeformationRetract, int]:
    """Transfer the perturbation b + mu of M along the datum; returns the new datum and its type (1 or 2)"""
    M = datum.big
    ctx = M.ctx
    if mu.parity != 1 or mu.source != M or mu.target != M:
        raise SideConditionsViolated("The perturbation must be an odd endomorphism of M")

    conditions = datum.side_conditions()
    p_mu_zero = (datum.p @ mu).is_zero()
    if kind is None:
        if p_mu_zero and conditions['ph']:
            kind = 1
        elif all(conditions.values()):
            kind = 2
        else:
            raise SideConditionsViolated(f"Neither perturbation type applies: {conditions}, p mu = 0: {p_mu_zero}")
    elif kind == 1 and not (p_mu_zero and conditions['ph']):
        raise SideConditionsViolated("Type (1) needs p mu = 0 and p h = 0")
    elif kind == 2 and not all(conditions.values()):
        raise SideConditionsViolated(f"Type (2) needs h^2 = 0, h i = 0 and p h = 0: {conditions}")

    new_differential = M.differential + mu.matrix
    square = new_differential @ new_differential
    W_new = square[0, 0] if square.nrows else ctx.zero()
    if square != PolyMatrix.identity(ctx, M.rank, W_new):
        raise SideConditionsViolated("(b + mu)^2 is not a scalar multiple of the identity")

    mu_h = mu @ datum.h
    power = mu_h
    A = mu
    for step in range(nilpotency_bound + 1):
        if power.is_zero():
            break
        A = A + power @ mu
        power = power @ mu_h
    else:
        raise PerturbationNotSmall(f"(mu h) is not nilpotent within {nilpotency_bound} steps")

    h, i, p = datum.h, datum.i, datum.p
    i_inf = i + h @ A @ i
    p_inf = p + p @ A @ h
    h_inf = h + h @ A @ h
    b_inf = datum.small.differential + (p @ A @ i).matrix

    try:
        small = MatrixFactorisation.from_differential(ctx, W_new, b_inf, datum.small.rank0)
        big = MatrixFactorisation.from_differential(ctx, W_new, new_differential, M.rank0)
    except NotAFactorisation as e:
        raise HomotopyIdentityFailed(f"Perturbed differentials do not factorise {W_new}: {e}")
    result = DeformationRetract(small, big, _rebase(i_inf, small, big), _rebase(p_inf, big, small),
                                _rebase(h_inf, big, big))
    logger.debug(f"Perturbation of type ({kind}) transferred to a rank {small.ranks} factorisation of {W_new}")
    return result, kind
