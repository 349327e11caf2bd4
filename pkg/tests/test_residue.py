"""Tests for residue symbols: trace formula against the transformation law"""

import random
from fractions import Fraction

import pytest

from chern import jacobi_frame, random_polynomial
from connection import TAdicFrame
from errors import ContextMismatch
from mfcore import MFMap, hom, identity
from residue import (ResidueQuery, atiyah_trace, residue, residue_monomial, residue_of_query,
                     residue_trace, residue_transform)
from polyring import RingContext

ONE = RingContext(['y'])
TWO = RingContext(['y1', 'y2'])


def _frame(ctx, V):
    W = ctx.parse(V)
    return TAdicFrame(ctx, ctx.variables, [W.derivative(v) for v in ctx.variables])


FRAMES = [(ONE, 'y^2'), (ONE, 'y^3'), (ONE, 'y^4'), (TWO, 'y1^2 + y2^2'), (TWO, 'y1^3 + y2^3'),
          (ONE, 'y^5'), (TWO, 'y1^2 + y2^4')]


def _value(p):
    return p.constant_value()


def test_single_variable_residue():
    frame = _frame(ONE, 'y^3')
    y = ONE.var('y')
    assert _value(residue(frame, y, [y])) == Fraction(1, 3)
    assert _value(residue_transform(y, frame)) == Fraction(1, 3)
    assert _value(residue(frame, 1, [y])) == 0


@pytest.mark.parametrize('ctx,V', FRAMES)
def test_residue_of_dt_over_t_is_mu(ctx, V):
    frame = _frame(ctx, V)
    assert _value(residue(frame, 1)) == frame.mu
    assert _value(residue_transform(1, frame, frame.tgens)) == frame.mu


@pytest.mark.parametrize('ctx,V', FRAMES)
@pytest.mark.parametrize('seed', range(100))
def test_trace_agrees_with_transformation_law(ctx, V, seed):
    frame = _frame(ctx, V)
    rng = random.Random(seed)
    s = random_polynomial(ctx, rng, degree=4, terms=4)
    rs = [random_polynomial(ctx, rng, degree=3, terms=3) for _ in range(frame.n)]
    query = ResidueQuery(frame, s, tuple(rs))
    assert residue_trace(query) == residue_of_query(query)


@pytest.mark.parametrize('ctx,V', FRAMES)
@pytest.mark.parametrize('seed', range(10))
def test_residue_vanishes_on_the_ideal(ctx, V, seed):
    frame = _frame(ctx, V)
    rng = random.Random(500 + seed)
    q = random_polynomial(ctx, rng, degree=3, terms=3)
    rs = tuple(random_polynomial(ctx, rng, degree=2, terms=3) for _ in range(frame.n))
    for t in frame.tgens:
        s = t * q
        assert not residue(frame, s)
        assert not residue_transform(s, frame)
        query = ResidueQuery(frame, s, rs)
        assert not residue_trace(query)
        assert not residue_of_query(query)


SECTIONS = [RingContext(['y1', 'y2']), RingContext(['y1', 'y2'], order='lex'), RingContext(['y2', 'y1'])]


@pytest.mark.parametrize('s', ["1", "y1*y2", "y2^2", "y1*y2^2 + 3*y2", "y1^3 - y2", "y2^3 + 2*y1^2*y2"])
def test_residue_ignores_the_section(s):
    values = set()
    bases = set()
    for ctx in SECTIONS:
        frame = TAdicFrame(ctx, ctx.variables, [ctx.parse("y1^2"), ctx.parse("y2^2 + y1*y2")])
        bases.add(frozenset(str(e) for e in frame.basis))
        rs = (ctx.parse("y1^2 + y2"), ctx.parse("y2^2 - y1"))
        query = ResidueQuery(frame, ctx.parse(s), rs)
        value = _value(residue_trace(query))
        assert value == _value(residue_of_query(query))
        values.add((value, _value(residue(frame, ctx.parse(s)))))
    assert len(bases) == 2
    assert len(values) == 1


def test_antisymmetry():
    frame = _frame(TWO, 'y1^3 + y2^3')
    y1, y2 = TWO.gens()
    s = y1 * y2
    forward = residue(frame, s, [y1 ** 2, y2 ** 2])
    backward = residue(frame, s, [y2 ** 2, y1 ** 2])
    assert forward == -backward
    assert residue_transform(s, frame, [y1 ** 2, y2 ** 2]) == -residue_transform(s, frame, [y2 ** 2, y1 ** 2])


def test_residue_monomial():
    x, y = RingContext(['x', 'y']).gens()
    h = x ** 2 * y + 3 * x * y ** 2
    assert residue_monomial(h, [2, 3]) == 3
    assert residue_monomial(h, [3, 2]) == 1
    assert residue_monomial(h, [0, 2]) == 0
    with pytest.raises(ContextMismatch):
        residue_monomial(h, [1])


def test_query_needs_one_differential_per_t():
    frame = _frame(TWO, 'y1^3 + y2^3')
    with pytest.raises(ContextMismatch):
        ResidueQuery(frame, 1, (TWO.var('y1'),))


def test_atiyah_trace_of_koszul_endomorphisms(koszul_xy):
    H = hom(koszul_xy, koszul_xy)
    frame = jacobi_frame(koszul_xy.potential)
    lhs, rhs = atiyah_trace(H, frame, identity(H))
    assert lhs == rhs


def test_atiyah_trace_of_the_differential(power_mf):
    X = power_mf(1, 3)
    H = hom(X, X)
    frame = jacobi_frame(X.potential)
    lhs, rhs = atiyah_trace(H, frame, MFMap(H, H, 1, H.differential))
    assert lhs == rhs
