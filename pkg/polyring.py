#!/usr/bin/env python3
"""
Sparse multivariate polynomials with exact coefficients
Ring contexts over sympy's distributed polynomial rings (QQ or GF(p)),
canonical printing and the polynomial grammar parser
"""

import logging
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from sympy import Symbol, isprime
from sympy.polys.domains import GF, QQ
from sympy.polys.monomials import monomial_deg, monomial_div
from sympy.polys.orderings import monomial_key
from sympy.polys.rings import PolyElement, PolyRing

from config import ORDERS
from errors import CharacteristicTooSmall, ContextMismatch, ParseError, UnknownVariable, VariableClash

logger = logging.getLogger(__name__)

Monomial = Tuple[int, ...]
Scalar = Union[int, Fraction]

# sympy's name for degree-reverse-lexicographic is 'grevlex'
_SYMPY_ORDERS = {'degrevlex': 'grevlex', 'lex': 'lex', 'grlex': 'grlex'}


@lru_cache(maxsize=None)
def coefficient_domain(characteristic: int):
    """QQ, or GF(p) with representatives 0..p-1; one shared instance per characteristic"""
    return QQ if characteristic == 0 else GF(characteristic, symmetric=False)


@lru_cache(maxsize=None)
def _poly_ring(variables: Tuple[str, ...], characteristic: int, order: str) -> PolyRing:
    return PolyRing([Symbol(name) for name in variables], coefficient_domain(characteristic),
                    _SYMPY_ORDERS[order])


class RingContext:
    """Ordered variables, coefficient characteristic and monomial order of k[y1..yn]"""

    def __init__(self, variables: Iterable[str], characteristic: int = 0, order: str = 'degrevlex'):
        variables = tuple(variables)
        seen = set()
        for name in variables:
            if not isinstance(name, str) or not name.isidentifier():
                raise VariableClash(f"Invalid variable name: {name!r}")
            if name in seen:
                raise VariableClash(f"Variable {name!r} appears twice")
            seen.add(name)
        if characteristic != 0 and not isprime(characteristic):
            raise ValueError(f"Characteristic must be 0 or a prime, got {characteristic}")
        if order not in ORDERS:
            raise ValueError(f"Unknown monomial order {order!r}")

        self.variables = variables
        self.nvars = len(variables)
        self.characteristic = characteristic
        self.order = order
        self.index = {name: i for i, name in enumerate(variables)}
        self.key = monomial_key(_SYMPY_ORDERS[order])
        self.domain = coefficient_domain(characteristic)
        self.ring = _poly_ring(variables, characteristic, order)

    def __eq__(self, other):
        return (isinstance(other, RingContext) and self.variables == other.variables
                and self.characteristic == other.characteristic and self.order == other.order)

    def __hash__(self):
        return hash((self.variables, self.characteristic, self.order))

    def __repr__(self):
        return f"RingContext({list(self.variables)}, characteristic={self.characteristic}, order={self.order!r})"

    def ground(self, value: Scalar):
        """A rational scalar as an element of the coefficient domain"""
        value = Fraction(value)
        if self.characteristic == 0:
            return QQ(value.numerator, value.denominator)
        if value.denominator % self.characteristic == 0:
            raise CharacteristicTooSmall(
                f"Coefficient {value} is not defined in characteristic {self.characteristic}")
        return self.domain(value.numerator) / self.domain(value.denominator)

    def to_fraction(self, c) -> Fraction:
        """A coefficient-domain element as a Fraction (0..p-1 in characteristic p)"""
        if self.characteristic == 0:
            return Fraction(int(QQ.numer(c)), int(QQ.denom(c)))
        return Fraction(int(c) % self.characteristic)

    def coerce(self, value: Scalar) -> Fraction:
        return self.to_fraction(self.ground(value))

    @property
    def unit(self) -> Monomial:
        return (0,) * self.nvars

    def wrap(self, element: PolyElement) -> 'Polynomial':
        return Polynomial._wrap(self, element)

    def zero(self) -> 'Polynomial':
        return self.wrap(self.ring.zero)

    def one(self) -> 'Polynomial':
        return self.wrap(self.ring.one)

    def constant(self, value: Scalar) -> 'Polynomial':
        return self.wrap(self.ring.ground_new(self.ground(value)))

    def monomial(self, exponents: Monomial, coefficient: Scalar = 1) -> 'Polynomial':
        return Polynomial(self, {tuple(exponents): coefficient})

    def var(self, name: str) -> 'Polynomial':
        if name not in self.index:
            raise UnknownVariable(f"Unknown variable {name!r}")
        return self.wrap(self.ring.gens[self.index[name]])

    def gens(self) -> List['Polynomial']:
        return [self.var(name) for name in self.variables]

    def parse(self, text: str) -> 'Polynomial':
        return parse_polynomial(text, self)

    def sub(self, names: Sequence[str]) -> 'RingContext':
        """Context on a subset of the variables, in the given order"""
        for name in names:
            if name not in self.index:
                raise ContextMismatch(f"Variable {name!r} is not in {self!r}")
        return RingContext(names, self.characteristic, self.order)

    def complement(self, names: Sequence[str]) -> 'RingContext':
        dropped = set(names)
        return RingContext([v for v in self.variables if v not in dropped], self.characteristic, self.order)

    def extend(self, names: Sequence[str]) -> 'RingContext':
        """Context with extra variables appended; shared names are kept once"""
        extra = [n for n in names if n not in self.index]
        return RingContext(self.variables + tuple(extra), self.characteristic, self.order)

    def same_field(self, other: 'RingContext') -> bool:
        return self.characteristic == other.characteristic


class Polynomial:
    """Immutable polynomial over a RingContext, backed by a sympy PolyElement

    `terms` is the read-only view {exponent tuple: Fraction} used for printing and coefficient access.
    """

    __slots__ = ('ctx', 'element', '_terms')

    def __init__(self, ctx: RingContext, terms: Optional[Mapping[Monomial, Scalar]] = None):
        grounded = {}
        for monom, coeff in (terms or {}).items():
            if len(monom) != ctx.nvars:
                raise ContextMismatch(f"Exponent {monom} does not fit {ctx!r}")
            c = ctx.ground(coeff)
            if c:
                grounded[tuple(monom)] = c
        self.ctx = ctx
        self.element = ctx.ring.from_dict(grounded)
        self._terms = None

    @classmethod
    def _wrap(cls, ctx: RingContext, element: PolyElement) -> 'Polynomial':
        poly = cls.__new__(cls)
        poly.ctx = ctx
        poly.element = element
        poly._terms = None
        return poly

    def _new(self, element: PolyElement) -> 'Polynomial':
        return Polynomial._wrap(self.ctx, element)

    @property
    def terms(self) -> Dict[Monomial, Fraction]:
        if self._terms is None:
            to_fraction = self.ctx.to_fraction
            self._terms = {m: to_fraction(c) for m, c in self.element.items() if c}
        return self._terms

    # -- inspection --

    def is_zero(self) -> bool:
        return not self.element

    def __bool__(self):
        return bool(self.element)

    def is_constant(self) -> bool:
        return self.element.is_ground

    def constant_value(self) -> Fraction:
        """Coefficient of the unit monomial"""
        return self.terms.get(self.ctx.unit, Fraction(0))

    def coefficient(self, monom: Monomial) -> Fraction:
        return self.terms.get(tuple(monom), Fraction(0))

    def monomials(self) -> List[Monomial]:
        """Monomials in descending order"""
        return self.element.monoms() if self.element else []

    def leading_monomial(self) -> Monomial:
        if not self.element:
            raise ValueError("The zero polynomial has no leading monomial")
        return self.element.LM

    def leading_coefficient(self) -> Fraction:
        if not self.element:
            raise ValueError("The zero polynomial has no leading coefficient")
        return self.ctx.to_fraction(self.element.LC)

    def degree(self) -> int:
        """Total degree; -1 for zero"""
        return max((monomial_deg(m) for m in self.element), default=-1)

    def degree_in(self, name: str) -> int:
        i = self.ctx.index[name]
        return max((m[i] for m in self.element), default=-1)

    def variables_used(self) -> List[str]:
        used = set()
        for monom in self.element:
            used.update(i for i, e in enumerate(monom) if e)
        return [self.ctx.variables[i] for i in sorted(used)]

    # -- arithmetic --

    def _lift(self, other) -> 'Polynomial':
        if isinstance(other, Polynomial):
            if other.ctx != self.ctx:
                raise ContextMismatch(f"Cannot combine polynomials over {self.ctx!r} and {other.ctx!r}")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ctx.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return self._new(self.element + other.element)

    __radd__ = __add__

    def __neg__(self):
        return self._new(-self.element)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return self._new(self.element - other.element)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return self._new(self.element * other.element)

    __rmul__ = __mul__

    def scale(self, value: Scalar) -> 'Polynomial':
        return self._new(self.element.mul_ground(self.ctx.ground(value)))

    def mul_term(self, monom: Monomial, coeff: Scalar = 1) -> 'Polynomial':
        return self._new(self.element.mul_term((tuple(monom), self.ctx.ground(coeff))))

    def __truediv__(self, other):
        if isinstance(other, Polynomial):
            if not other.is_constant() or other.is_zero():
                raise TypeError("Only division by nonzero constants is supported")
            other = other.constant_value()
        if not isinstance(other, (int, Fraction)):
            return NotImplemented
        return self.scale(Fraction(1) / Fraction(other))

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("Exponent must be a non-negative integer")
        if exponent == 0:
            return self.ctx.one()
        if not self.element:
            return self
        return self._new(self.element ** exponent)

    def divide_monomial(self, monom: Monomial) -> Optional['Polynomial']:
        """Exact division by a monomial, or None when some term is not divisible"""
        terms = {}
        for m, c in self.element.items():
            q = monomial_div(m, monom)
            if q is None:
                return None
            terms[q] = c
        return self._new(self.ctx.ring.from_dict(terms))

    # -- comparison --

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.ctx == other.ctx and self.element == other.element
        if isinstance(other, (int, Fraction)):
            return self.element == self.ctx.ring.ground_new(self.ctx.ground(other))
        return NotImplemented

    def __hash__(self):
        return hash((self.ctx, frozenset(self.terms.items())))

    # -- calculus and substitution --

    def derivative(self, name: str) -> 'Polynomial':
        if name not in self.ctx.index:
            raise UnknownVariable(f"Unknown variable {name!r}")
        result = self.element.diff(self.ctx.ring.gens[self.ctx.index[name]])
        # coefficients such as p * c vanish in characteristic p
        result.strip_zero()
        return self._new(result)

    def substitute(self, values: Mapping[str, Union['Polynomial', Scalar]]) -> 'Polynomial':
        """Replace variables by polynomials (over this context) or scalars, simultaneously"""
        ring = self.ctx.ring
        replacements = []
        for name, value in values.items():
            if name not in self.ctx.index:
                raise UnknownVariable(f"Unknown variable {name!r}")
            image = self._lift(value) if not isinstance(value, Polynomial) else value
            if image.ctx != self.ctx:
                raise ContextMismatch(f"Substitution for {name!r} lives over {image.ctx!r}")
            replacements.append((ring.gens[self.ctx.index[name]], image.element))
        if not replacements:
            return self
        return self._new(self.element.compose(replacements))

    def quasi_degree(self, weights: Sequence[int]) -> Optional[int]:
        """Weighted degree if every term has the same weight, else None (also for zero)"""
        if not self.element:
            return None
        degrees = {sum(w * e for w, e in zip(weights, m)) for m in self.element}
        return degrees.pop() if len(degrees) == 1 else None

    def embed(self, ctx: RingContext) -> 'Polynomial':
        """The same polynomial viewed over another context, matching variables by name"""
        if ctx == self.ctx:
            return self
        if not ctx.same_field(self.ctx):
            raise ContextMismatch(f"Characteristic mismatch between {self.ctx!r} and {ctx!r}")
        positions = [ctx.index.get(name) for name in self.ctx.variables]
        terms = {}
        for m, c in self.element.items():
            target = [0] * ctx.nvars
            for i, e in enumerate(m):
                if e:
                    if positions[i] is None:
                        raise ContextMismatch(
                            f"Variable {self.ctx.variables[i]!r} of {self} is not in {ctx!r}")
                    target[positions[i]] = e
            terms[tuple(target)] = c
        return Polynomial._wrap(ctx, ctx.ring.from_dict(terms))

    def split(self, names: Sequence[str], coefficient_ctx: Optional[RingContext] = None
              ) -> Dict[Monomial, 'Polynomial']:
        """Write p = sum_b c_b * y^b; returns {b: c_b} with c_b over the remaining variables"""
        inner = [self.ctx.index.get(n) for n in names]
        coefficient_ctx = coefficient_ctx or self.ctx.complement(names)
        if not coefficient_ctx.same_field(self.ctx):
            raise ContextMismatch(f"Characteristic mismatch between {self.ctx!r} and {coefficient_ctx!r}")
        outer = [coefficient_ctx.index.get(v) for v in self.ctx.variables]
        grouped: Dict[Monomial, dict] = {}
        for m, c in self.element.items():
            b = tuple(m[i] if i is not None else 0 for i in inner)
            rest = [0] * coefficient_ctx.nvars
            for i, e in enumerate(m):
                if e and i not in inner:
                    if outer[i] is None:
                        raise ContextMismatch(f"Variable {self.ctx.variables[i]!r} has no place in {coefficient_ctx!r}")
                    rest[outer[i]] = e
            grouped.setdefault(b, {})[tuple(rest)] = c
        return {b: Polynomial._wrap(coefficient_ctx, coefficient_ctx.ring.from_dict(t)) for b, t in grouped.items()}

    # -- printing --

    def _monomial_str(self, monom: Monomial) -> str:
        parts = []
        for name, e in zip(self.ctx.variables, monom):
            if e == 1:
                parts.append(name)
            elif e > 1:
                parts.append(f"{name}^{e}")
        return '*'.join(parts)

    def __str__(self):
        if not self.element:
            return "0"
        out = []
        terms = self.terms
        for i, monom in enumerate(self.monomials()):
            c = terms[monom]
            negative = c < 0
            magnitude = -c if negative else c
            body = self._monomial_str(monom)
            if not body:
                text = str(magnitude)
            elif magnitude == 1:
                text = body
            else:
                text = f"{magnitude}*{body}"
            if i == 0:
                out.append(f"-{text}" if negative else text)
            else:
                out.append(f" - {text}" if negative else f" + {text}")
        return ''.join(out)

    def __repr__(self):
        return f"Polynomial({str(self)!r})"


# -- parser --

_SYMBOLS = set('+-*/^()')


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(('NUM', text[i:j], i))
            i = j
        elif ch.isalpha() or ch == '_':
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == '_'):
                j += 1
            tokens.append(('VAR', text[i:j], i))
            i = j
        elif ch in _SYMBOLS:
            tokens.append((ch, ch, i))
            i += 1
        else:
            raise ParseError(f"Unexpected character {ch!r}", position=i, source=text)
    tokens.append(('END', '', len(text)))
    return tokens


class _Parser:
    """Recursive descent over: expr := term (('+'|'-') term)*, term := factor ('*' factor)*,
    factor := ('-'|'+') factor | power, power := atom ('^' INT)?,
    atom := NUMBER ('/' NUMBER)? | VAR | '(' expr ')'"""

    def __init__(self, text: str, ctx: RingContext):
        self.text = text
        self.ctx = ctx
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self, kind=None):
        token = self.tokens[self.pos]
        if kind is not None and token[0] != kind:
            expected = 'a number' if kind == 'NUM' else repr(kind)
            found = 'end of input' if token[0] == 'END' else repr(token[1])
            raise ParseError(f"Expected {expected}, found {found}", position=token[2], source=self.text)
        self.pos += 1
        return token

    def parse(self) -> Polynomial:
        if self.peek()[0] == 'END':
            raise ParseError("Empty polynomial", position=0, source=self.text)
        result = self.expr()
        token = self.peek()
        if token[0] != 'END':
            if token[0] in ('NUM', 'VAR', '('):
                raise ParseError("Implicit multiplication is not allowed; use '*'",
                                 position=token[2], source=self.text)
            raise ParseError(f"Unexpected {token[1]!r}", position=token[2], source=self.text)
        return result

    def expr(self) -> Polynomial:
        result = self.term()
        while self.peek()[0] in ('+', '-'):
            op = self.take()[0]
            rhs = self.term()
            result = result + rhs if op == '+' else result - rhs
        return result

    def term(self) -> Polynomial:
        result = self.factor()
        while self.peek()[0] == '*':
            self.take()
            result = result * self.factor()
        return result

    def factor(self) -> Polynomial:
        kind = self.peek()[0]
        if kind in ('+', '-'):
            self.take()
            inner = self.factor()
            return -inner if kind == '-' else inner
        return self.power()

    def power(self) -> Polynomial:
        base = self.atom()
        if self.peek()[0] == '^':
            self.take()
            exponent = int(self.take('NUM')[1])
            return base ** exponent
        return base

    def atom(self) -> Polynomial:
        kind, value, position = self.peek()
        if kind == 'NUM':
            self.take()
            number = Fraction(int(value))
            if self.peek()[0] == '/':
                self.take()
                den_token = self.take('NUM')
                if int(den_token[1]) == 0:
                    raise ParseError("Division by zero", position=den_token[2], source=self.text)
                number = number / int(den_token[1])
            return self.ctx.constant(number)
        if kind == 'VAR':
            self.take()
            if value not in self.ctx.index:
                raise UnknownVariable(f"Unknown variable {value!r}", position=position, source=self.text)
            return self.ctx.var(value)
        if kind == '(':
            self.take()
            inner = self.expr()
            self.take(')')
            return inner
        found = 'end of input' if kind == 'END' else repr(value)
        raise ParseError(f"Unexpected {found}", position=position, source=self.text)


def parse_polynomial(text: str, ctx: RingContext) -> Polynomial:
    return _Parser(text, ctx).parse()


def print_polynomial(p: Polynomial) -> str:
    return str(p)


def to_polynomial(value: Union[Polynomial, Scalar, str], ctx: RingContext) -> Polynomial:
    """Accept a polynomial, a scalar or a string over ctx"""
    if isinstance(value, Polynomial):
        return value.embed(ctx)
    if isinstance(value, str):
        return parse_polynomial(value, ctx)
    return ctx.constant(value)
