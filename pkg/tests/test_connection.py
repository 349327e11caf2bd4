"""Tests for t-adic frames, the de Rham contraction and the perturbation lemma"""

import random
from fractions import Fraction

import pytest

from chern import random_polynomial
from connection import (DeformationRetract, TAdicFrame, commutator_operator, descend, koszul_retract,
                        perturb_retract, spanning_forms, t_expand)
from errors import CharacteristicTooSmall, PerturbationNotSmall, UnsupportedConnection
from matrices import PolyMatrix
from mfcore import FoldedComplex, MFMap
from polyring import RingContext

ONE = RingContext(['y'])
TWO = RingContext(['y1', 'y2'])


def _frame(ctx, V):
    W = ctx.parse(V)
    return TAdicFrame(ctx, ctx.variables, [W.derivative(v) for v in ctx.variables])


FRAMES = [(ONE, 'y^2'), (ONE, 'y^3'), (ONE, 'y^4'), (TWO, 'y1^2 + y2^2'), (TWO, 'y1^3 + y2^3')]


@pytest.mark.parametrize('ctx,V,mu', [(ONE, 'y^2', 1), (ONE, 'y^3', 2), (ONE, 'y^4', 3),
                                      (TWO, 'y1^2 + y2^2', 1), (TWO, 'y1^3 + y2^3', 4)])
def test_milnor_numbers(ctx, V, mu):
    assert _frame(ctx, V).mu == mu


def test_t_expansion_of_a_power():
    frame = _frame(ONE, 'y^3')
    assert t_expand(frame, ONE.parse("y^4")) == {(2,): ONE.constant(Fraction(1, 9))}


@pytest.mark.parametrize('ctx,V', FRAMES)
def test_t_expansion_reconstructs(ctx, V):
    frame = _frame(ctx, V)
    rng = random.Random(7)
    for _ in range(5):
        p = random_polynomial(ctx, rng, degree=5, terms=4)
        total = ctx.zero()
        for M, c in t_expand(frame, p).items():
            total = total + c * frame.t_power(M)
        assert total == p


@pytest.mark.parametrize('ctx,V', FRAMES)
def test_contraction_identities(ctx, V):
    frame = _frame(ctx, V)
    results = koszul_retract(frame).check_identities(spanning_forms(frame, 4))
    assert results == {'H2': True, 'Hsigma': True, 'piH': True, 'contraction': True}


@pytest.mark.parametrize('ctx,V', FRAMES[:4])
def test_commutator_with_t_is_the_identity(ctx, V):
    frame = _frame(ctx, V)
    for j, t in enumerate(frame.tgens):
        assert commutator_operator(frame, j, t) == PolyMatrix.identity(frame.base_ctx, frame.mu)
        others = [k for k in range(frame.n) if k != j]
        for k in others:
            assert commutator_operator(frame, k, t).is_zero()


@pytest.mark.parametrize('ctx,V', FRAMES)
def test_commutator_columns_are_first_order_coefficients(ctx, V):
    frame = _frame(ctx, V)
    rng = random.Random(3)
    zero = [frame.base_ctx.zero()] * frame.mu
    for _ in range(3):
        r = random_polynomial(ctx, rng, degree=4, terms=3)
        for j in range(frame.n):
            unit = tuple(int(k == j) for k in range(frame.n))
            operator = commutator_operator(frame, j, r)
            for m, e in enumerate(frame.basis):
                coefficient = t_expand(frame, r * e, bound=1).get(unit)
                expected = frame.coordinates(coefficient) if coefficient is not None else zero
                assert [operator[z, m] for z in range(frame.mu)] == expected


@pytest.mark.parametrize('V', ['y1^2 + y2^2', 'y1^3 + y2^3', 'y1^3 + y1*y2^2'])
def test_commutator_ignores_generator_order(V):
    W = TWO.parse(V)
    tgens = [W.derivative(v) for v in TWO.variables]
    frame = TAdicFrame(TWO, TWO.variables, tgens)
    swapped = TAdicFrame(TWO, TWO.variables, tgens[::-1])
    assert swapped.basis == frame.basis
    rng = random.Random(11)
    for _ in range(4):
        r = random_polynomial(TWO, rng, degree=4, terms=3)
        assert commutator_operator(swapped, 1, r) == commutator_operator(frame, 0, r)
        assert commutator_operator(swapped, 0, r) == commutator_operator(frame, 1, r)


def test_descend_kills_t():
    frame = _frame(TWO, 'y1^3 + y2^3')
    matrix = PolyMatrix(TWO, [[frame.tgens[0], 0], [0, frame.tgens[1]]])
    assert descend(frame, matrix).is_zero()


def test_frame_preconditions():
    with pytest.raises(UnsupportedConnection):
        TAdicFrame(ONE, ['y'], [ONE.parse("y^2 + y^3")])
    ctx = RingContext(['y1', 'y2'], characteristic=2)
    with pytest.raises(CharacteristicTooSmall):
        TAdicFrame(ctx, ['y1', 'y2'], [ctx.var('y1'), ctx.var('y2')])


# -- perturbation lemma on L (+) C with C contractible --
# basis of M: l0, c0 | l1, c1; b sends c0 to c1 and h sends c1 to -c0

CTX = RingContext(['x'])


def _datum():
    zero = CTX.zero()
    one = CTX.one()
    L = FoldedComplex.from_differential(CTX, zero, PolyMatrix.zeros(CTX, 2, 2), 1)
    b = PolyMatrix(CTX, [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 1, 0, 0]])
    M = FoldedComplex.from_differential(CTX, zero, b, 2)
    i = MFMap(L, M, 0, PolyMatrix(CTX, [[1, 0], [0, 0], [0, 1], [0, 0]]))
    p = MFMap(M, L, 0, PolyMatrix(CTX, [[1, 0, 0, 0], [0, 0, 1, 0]]))
    h = MFMap(M, M, 1, PolyMatrix(CTX, [[0, 0, 0, 0], [0, 0, 0, -one], [0, 0, 0, 0], [0, 0, 0, 0]]))
    return DeformationRetract(L, M, i, p, h)


def _perturbation(M, alpha, beta, gamma, delta):
    """Odd mu with (b + mu)^2 = delta (beta - alpha gamma) and (mu h)^2 = 0"""
    epsilon = -delta * gamma
    zeta = -alpha * delta
    eta = beta * delta
    zero = CTX.zero()
    rows = [[zero, zero, delta, zeta],
            [zero, zero, epsilon, eta],
            [beta, alpha, zero, zero],
            [gamma, zero, zero, zero]]
    return MFMap(M, M, 1, PolyMatrix(CTX, rows))


def test_unperturbed_datum_satisfies_side_conditions():
    datum = _datum()
    assert datum.side_conditions() == {'h2': True, 'hi': True, 'ph': True}


@pytest.mark.parametrize('seed', range(50))
def test_type_two_perturbations(seed):
    rng = random.Random(seed)
    datum = _datum()
    alpha, beta, gamma, delta = (random_polynomial(CTX, rng, degree=2, terms=2) for _ in range(4))
    mu = _perturbation(datum.big, alpha, beta, gamma, delta)
    result, kind = perturb_retract(datum, mu, kind=2)
    assert kind == 2
    result.verify()
    assert result.small.potential == delta * (beta - alpha * gamma)
    assert result.big.potential == result.small.potential


@pytest.mark.parametrize('seed', range(50))
def test_type_one_perturbations(seed):
    rng = random.Random(1000 + seed)
    datum = _datum()
    gamma = random_polynomial(CTX, rng, degree=3, terms=3)
    zero = CTX.zero()
    mu = _perturbation(datum.big, zero, zero, gamma, zero)
    result, kind = perturb_retract(datum, mu, kind=1)
    assert kind == 1
    result.verify()
    assert result.p.matrix == datum.p.matrix
    assert result.small.differential == datum.small.differential


def test_large_perturbations_are_rejected():
    datum = _datum()
    mu = MFMap(datum.big, datum.big, 1, datum.big.differential)
    with pytest.raises(PerturbationNotSmall):
        perturb_retract(datum, mu, nilpotency_bound=8)
