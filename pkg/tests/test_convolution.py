"""Tests for kernel convolution and Knorrer periodicity"""

import pytest

from chern import chern_character, chern_of_pushforward
from convolution import (Kernel, apply_kernel, chern_convolution, composition_check, convolution_kernel, convolve,
                         external_tensor, knorrer_kappa_check, knorrer_phi, knorrer_psi_model, object_kernel)
from errors import ContextMismatch, NotAFactorisation, VariableClash
from mfcore import direct_sum, koszul_mf
from polyring import RingContext
from pushforward import (check_idempotent, e_via_perturbation, find_constant_isomorphism,
                         split_constant_idempotent, strip_units)

XY = RingContext(['x', 'y'])
YZ = RingContext(['y', 'z'])


@pytest.fixture
def kernels():
    """E: x^2 -> y^2 and F: y^2 -> z^2, both rank (1, 1) Koszul kernels"""
    x, y = XY.gens()
    E = Kernel(koszul_mf([(y - x, y + x)]), ['x'], ['y'], x ** 2, y ** 2)
    y2, z = YZ.gens()
    F = Kernel(koszul_mf([(z - y2, z + y2)]), ['y'], ['z'], y2 ** 2, z ** 2)
    return F, E


@pytest.fixture
def fused(kernels):
    F, E = kernels
    return convolve(F, E)


def test_external_tensor(kernels):
    F, E = kernels
    T = external_tensor(F, E)
    assert T.ctx.variables == ('x', 'y', 'z')
    assert T.ranks == (2, 2)
    assert T.potential == T.ctx.parse("z^2 - x^2")


def test_convolution_model(fused):
    assert fused.frame.mu == 1
    assert fused.base_ctx.variables == ('x', 'z')
    assert fused.reduced.rank == 4
    assert fused.potential == fused.base_ctx.parse("z^2 - x^2")
    record = check_idempotent(fused)
    assert record.strict
    assert record.homotopy_idempotent


def test_convolution_routes_agree(fused):
    assert e_via_perturbation(fused.source, fused.frame, fused.lambdas) == fused.e


def test_chern_of_convolution(kernels, fused):
    F, E = kernels
    value = chern_convolution(F, E)
    assert value == 2
    assert chern_of_pushforward(fused) == value


def test_alternative_homotopies(kernels):
    F, E = kernels
    model = convolve(F, E, alternative=True)
    assert check_idempotent(model).strict
    assert e_via_perturbation(model.source, model.frame, model.lambdas) == model.e
    assert chern_of_pushforward(model) == chern_convolution(F, E)


def test_convolution_kernel_bookkeeping(kernels, fused):
    F, E = kernels
    K = convolution_kernel(fused, F, E)
    assert K.in_vars == ('x',)
    assert K.out_vars == ('z',)
    assert K.mf.potential == K.w_out - K.w_in


def test_applying_a_kernel_to_an_object(kernels):
    _, E = kernels
    x = RingContext(['x']).var('x')
    X = koszul_mf([(x, x)])
    model = apply_kernel(E, X)
    assert model.base_ctx.variables == ('y',)
    assert model.potential == model.base_ctx.parse("y^2")
    assert check_idempotent(model).strict


def test_composition_check(kernels):
    F, E = kernels
    x = RingContext(['x']).var('x')
    z = RingContext(['z']).var('z')
    X = koszul_mf([(x, x)])
    test_objects = [koszul_mf([(z, z)])]
    report = composition_check(F, E, X, test_objects)
    assert report.chern is not None
    assert len(report.hom_dims) == 1
    assert report.agrees


def test_kernel_validation():
    x, y = XY.gens()
    mf = koszul_mf([(y - x, y + x)])
    with pytest.raises(NotAFactorisation):
        Kernel(mf, ['x'], ['y'], 0, y ** 2)
    with pytest.raises(VariableClash):
        Kernel(mf, ['x', 'y'], ['y'], 0, y ** 2 - x ** 2)
    with pytest.raises(ContextMismatch):
        Kernel(mf, ['w'], ['y'], x ** 2, y ** 2)


def test_mismatched_middle_variables(kernels):
    F, E = kernels
    with pytest.raises(ContextMismatch):
        convolve(E, F)


def test_object_kernel(koszul_xy):
    K = object_kernel(koszul_xy)
    assert K.in_vars == ()
    assert K.out_vars == ('x', 'y')
    assert K.w_out == koszul_xy.potential


# -- Knorrer periodicity --

@pytest.mark.parametrize('a,d', [(a, d) for d in range(2, 6) for a in range(1, d)])
def test_knorrer_idempotent(power_mf, a, d):
    report = knorrer_kappa_check(power_mf(a, d))
    assert report.e_matches
    assert report.kappa_is_morphism
    assert report.kappa_g_identity
    assert report.kappa_e_equals_f
    assert report.ok


@pytest.mark.parametrize('a,d', [(a, d) for d in range(2, 6) for a in range(1, d)])
def test_knorrer_routes_agree(power_mf, a, d):
    model = knorrer_psi_model(knorrer_phi(power_mf(a, d)))
    assert e_via_perturbation(model.source, model.frame, model.lambdas) == model.e


def test_knorrer_idempotent_on_larger_factorisations(power_mf, koszul_xy):
    X = direct_sum(power_mf(1, 3), power_mf(2, 3))
    report = knorrer_kappa_check(X)
    assert report.ok
    assert report.e_matches
    report = knorrer_kappa_check(koszul_xy, 'p', 'q')
    assert report.ok
    assert report.e_matches


def test_knorrer_model_ranks(power_mf):
    X = power_mf(2, 5)
    Y = knorrer_phi(X)
    assert Y.ctx.variables == ('x', 'u', 'v')
    assert Y.ranks == (2, 2)
    assert Y.potential == Y.ctx.parse("x^5 + u*v")
    model = knorrer_psi_model(Y)
    assert model.frame.mu == 1
    assert model.reduced.ranks == (4, 4)
    assert model.e @ model.e == model.e


@pytest.mark.parametrize('a,d', [(1, 3), (2, 5)])
def test_knorrer_round_trip(power_mf, a, d):
    X = power_mf(a, d)
    model = knorrer_psi_model(knorrer_phi(X))
    Z, _, _ = split_constant_idempotent(model)
    stripped = strip_units(Z).mf
    assert find_constant_isomorphism(stripped, X) is not None


def test_knorrer_preserves_chern(koszul_xy):
    model = knorrer_psi_model(knorrer_phi(koszul_xy, 'p', 'q'), 'p', 'q')
    assert chern_of_pushforward(model) == chern_character(koszul_xy)


def test_knorrer_variable_clash(power_mf):
    with pytest.raises(VariableClash):
        knorrer_phi(power_mf(1, 3), u='x')
