"""Tests for factorisations, maps, tensor products, duals and homotopy search"""

import pytest

from errors import ContextMismatch, NotAFactorisation, NotAMorphism
from matrices import PolyMatrix
from mfcore import (FoldedComplex, Inconclusive, MFMap, coboundary, direct_sum, double_dual_iso, dual, dual_map,
                    extend_scalars, find_homotopy, hom, identity, is_morphism, koszul_mf, make_mf,
                    partial_homotopy, scalar_map, shift, supertrace_endo, tensor, tensor_maps)
from polyring import RingContext


def test_validated_factorisation(power_mf):
    X = power_mf(1, 3)
    assert X.ranks == (1, 1)
    assert str(X.differential) == "[[0, x], [x^2, 0]]"


def test_corrupted_factorisation_names_the_entry(x_ring):
    x = x_ring.var('x')
    with pytest.raises(NotAFactorisation) as info:
        make_mf(x_ring, x ** 2, [[x]], [[1]])
    assert info.value.entry == ('d1*d0', 0, 0)


def test_koszul_differential(koszul_xy, xy_ring):
    assert koszul_xy.potential == xy_ring.parse("x*y")
    assert koszul_xy.d1 == PolyMatrix(xy_ring, [['x']])
    assert koszul_xy.d0 == PolyMatrix(xy_ring, [['y']])


def test_tensor_ranks_and_potential(xy_ring):
    x, y = xy_ring.gens()
    X = koszul_mf([(x, x), (y, y ** 2)])
    assert X.ranks == (2, 2)
    assert X.potential == x ** 2 + y ** 3
    T = tensor(X, X)
    assert T.ranks == (8, 8)
    assert T.potential == (x ** 2 + y ** 3).scale(2)


def test_tensor_needs_one_context(power_mf, koszul_xy):
    with pytest.raises(ContextMismatch):
        tensor(power_mf(1, 2), koszul_xy)


def test_shift_and_dual(power_mf):
    X = power_mf(1, 3)
    assert shift(shift(X)) == X
    D = dual(X)
    assert D.potential == -X.potential
    assert is_morphism(double_dual_iso(X))


def test_hom_is_a_folded_complex(power_mf):
    X = power_mf(1, 3)
    H = hom(X, X)
    assert isinstance(H, FoldedComplex)
    assert H.ranks == (2, 2)


def test_dual_map_of_a_morphism_is_a_morphism(power_mf):
    X = power_mf(1, 3)
    x = X.ctx.var('x')
    f = scalar_map(X, x)
    assert is_morphism(dual_map(f))
    odd = MFMap(X, X, 1, X.differential)
    assert is_morphism(dual_map(coboundary(odd)))


def test_partial_homotopy_and_tensor_signs(koszul_xy):
    X = koszul_xy
    lam = partial_homotopy(X, 'x')
    assert coboundary(lam) == scalar_map(X, X.ctx.var('y'))
    H = hom(X, X)
    lifted = tensor_maps(identity(dual(X)), lam, source=H, target=H)
    assert coboundary(lifted) == scalar_map(H, X.ctx.var('y'))


def test_find_homotopy_for_multiplication_by_a_partial(power_mf):
    X = power_mf(1, 2)
    f = scalar_map(X, X.ctx.var('x'))
    h = find_homotopy(f)
    assert isinstance(h, MFMap)
    assert coboundary(h) == f


def test_identity_of_a_nontrivial_factorisation_is_not_null_homotopic(power_mf):
    result = find_homotopy(identity(power_mf(1, 2)), degree_bound=3)
    assert isinstance(result, Inconclusive)
    assert result.degree_bound == 3


def test_contractible_factorisation(x_ring):
    X = make_mf(x_ring, x_ring.parse("x^2"), [[x_ring.parse("x^2")]], [[1]])
    h = find_homotopy(identity(X))
    assert isinstance(h, MFMap)
    assert coboundary(h) == identity(X)


def test_find_homotopy_rejects_open_maps(power_mf):
    X = power_mf(1, 2)
    with pytest.raises(NotAMorphism):
        find_homotopy(MFMap(X, X, 1, X.differential))


def test_direct_sum_and_supertrace(power_mf):
    X = power_mf(1, 3)
    S = direct_sum(X, X)
    assert S.ranks == (2, 2)
    assert supertrace_endo(identity(S)) == 0
    assert supertrace_endo(scalar_map(X, 5)) == 0


def test_extend_scalars_keeps_the_factorisation(power_mf):
    X = power_mf(2, 3)
    wider = RingContext(['x', 'y'])
    Y = extend_scalars(X, wider)
    assert Y.ctx == wider
    assert Y.potential == wider.parse("x^3")
    assert Y.ranks == X.ranks
