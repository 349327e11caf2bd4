"""Tests for finite models of pushforwards"""

import random
from itertools import combinations

import pytest

from chern import hom_homotopies, hom_model, jacobi_frame, random_polynomial
from connection import TAdicFrame, koszul_retract
from convolution import knorrer_phi, knorrer_psi_model
from errors import BaseNotField, HomotopyIdentityFailed, PotentialNotBased
from mfcore import MFMap, coboundary, direct_sum, hom, identity, is_morphism, koszul_mf, make_mf, scalar_map
from pushforward import (FieldCohomology, apply_homotopy_factor, check_idempotent, default_homotopies,
                         e_via_perturbation, epsilon, find_constant_isomorphism, idempotent, reduce_mod_t,
                         split_constant_idempotent, split_over_point, strip_units, theta_map, theta_prime,
                         total_differential)


@pytest.fixture
def end_model(power_mf):
    """Model of End(x | x^2) over x^3, pushed forward to the point"""
    X = power_mf(1, 3)
    return hom_model(X, X)


def test_reduced_ranks(end_model):
    # hom has ranks (2, 2) and J has dimension 2
    assert end_model.frame.mu == 2
    assert end_model.reduced.ranks == (4, 4)
    assert end_model.base_ctx.nvars == 0
    assert not end_model.potential


def test_homotopies_contract_t(power_mf):
    X = power_mf(1, 3)
    H = hom(X, X)
    frame = jacobi_frame(X.potential)
    for lam, t in zip(hom_homotopies(X, X, H), frame.tgens):
        assert coboundary(lam) == scalar_map(H, t)


def test_idempotent_is_strict_and_idempotent(end_model):
    assert end_model.record.strict
    record = check_idempotent(end_model)
    assert record.strict
    assert record.homotopy_idempotent


def test_both_routes_give_the_same_idempotent(power_mf):
    for a, d in [(1, 2), (1, 3), (2, 4)]:
        X = power_mf(a, d)
        H = hom(X, X)
        frame = jacobi_frame(X.potential)
        lambdas = hom_homotopies(X, X, H)
        assert e_via_perturbation(H, frame, lambdas) == idempotent(H, frame, lambdas).e


@pytest.mark.parametrize('a,b,d,expected', [(1, 1, 2, 1), (1, 1, 3, 1), (2, 2, 4, 2), (1, 2, 4, 1), (2, 3, 5, 2)])
def test_split_dimensions(power_mf, a, b, d, expected):
    split = split_over_point(hom_model(power_mf(a, d), power_mf(b, d)))
    assert split.dims == (expected, expected)
    # X/tX is (Z + Z[1])^(2^(n-1)) for the pushforward Z, here n = 1
    assert split.cohomology_dims == (sum(split.dims), sum(split.dims))


@pytest.fixture
def cone_model(xy_ring):
    """Model of End(x - y | x + y) over x^2 - y^2, pushed forward to the point"""
    x, y = xy_ring.gens()
    K = koszul_mf([(x - y, x + y)])
    return hom_model(K, K)


def test_reduced_cohomology_counts_summands_twice(cone_model):
    split = split_over_point(cone_model)
    assert sum(split.dims) == 1
    h0, h1 = split.cohomology_dims
    assert h0 == h1 == 2 ** (cone_model.n - 1) * sum(split.dims)


def _sum(a, b):
    out = dict(a)
    for key, r in b.items():
        total = out[key] + r if key in out else r
        if total:
            out[key] = total
        else:
            out.pop(key)
    return out


def _random_element(X, n, rng):
    element = {}
    for k in range(n + 1):
        for omega in combinations(range(n), k):
            for i in range(X.rank):
                r = random_polynomial(X.ctx, rng, degree=2, terms=2)
                if r:
                    element[(i, omega)] = r
    return element


@pytest.mark.parametrize('name', ['end_model', 'cone_model'])
def test_epsilon_inverts_theta_prime(name, request):
    model = request.getfixturevalue(name)
    X = model.source
    rng = random.Random(2)
    for i in range(X.rank):
        r = random_polynomial(X.ctx, rng, degree=2, terms=3) + 1
        expected = [X.ctx.zero()] * X.rank
        expected[i] = r
        assert epsilon(X, model.n, theta_prime(X, model.lambdas, {(i, ()): r})) == expected


@pytest.mark.parametrize('name', ['end_model', 'cone_model'])
@pytest.mark.parametrize('seed', range(5))
def test_homotopy_factors_anticommute_with_total_differential(name, seed, request):
    model = request.getfixturevalue(name)
    X = model.source
    retract = koszul_retract(model.frame)
    element = _random_element(X, model.n, random.Random(seed))
    for j, lam in enumerate(model.lambdas):
        after = total_differential(X, retract, apply_homotopy_factor(X, j, lam, element))
        before = apply_homotopy_factor(X, j, lam, total_differential(X, retract, element))
        assert _sum(after, before) == {}


def test_theta_has_parity_n(end_model):
    theta = theta_map(end_model.source, end_model.frame, end_model.lambdas)
    assert theta.parity == 1
    assert is_morphism(MFMap(end_model.reduced, end_model.reduced, 0, end_model.e.matrix))


def test_default_homotopies_reuse_partials(koszul_xy, xy_ring):
    X = koszul_xy
    frame = TAdicFrame(xy_ring, ['x', 'y'], [xy_ring.var('y'), xy_ring.var('x')])
    for lam, t in zip(default_homotopies(X, frame), frame.tgens):
        assert coboundary(lam) == scalar_map(X, t)


def test_potential_must_live_on_the_base(koszul_xy, xy_ring):
    frame = TAdicFrame(xy_ring, ['y'], [xy_ring.var('y')])
    with pytest.raises(PotentialNotBased):
        reduce_mod_t(koszul_xy, frame)


def test_wrong_number_of_homotopies(power_mf):
    X = power_mf(1, 3)
    H = hom(X, X)
    with pytest.raises(HomotopyIdentityFailed):
        idempotent(H, jacobi_frame(X.potential), [])


def test_splitting_needs_a_field(power_mf):
    model = knorrer_psi_model(knorrer_phi(power_mf(1, 3)))
    with pytest.raises(BaseNotField):
        split_over_point(model)
    with pytest.raises(BaseNotField):
        FieldCohomology(power_mf(1, 3))


def test_split_constant_idempotent(power_mf):
    X = power_mf(1, 3)
    model = knorrer_psi_model(knorrer_phi(X))
    Z, f, g = split_constant_idempotent(model)
    assert f @ g == identity(Z)
    assert g @ f == model.e
    assert Z.ranks == X.ranks
    assert find_constant_isomorphism(Z, X) is not None


def test_strip_units(power_mf, x_ring):
    X = power_mf(1, 3)
    x = x_ring.var('x')
    trivial = make_mf(x_ring, x ** 3, [[1]], [[x ** 3]])
    result = strip_units(direct_sum(X, trivial))
    assert result.mf.ranks == (1, 1)
    assert result.to_stripped @ result.from_stripped == identity(result.mf)
    assert is_morphism(result.to_stripped)
    assert is_morphism(result.from_stripped)
    assert find_constant_isomorphism(result.mf, X) is not None


def test_no_isomorphism_between_different_summands(power_mf):
    assert find_constant_isomorphism(power_mf(1, 4), power_mf(2, 4)) is None
    assert find_constant_isomorphism(power_mf(1, 3), power_mf(1, 4)) is None
