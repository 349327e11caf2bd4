"""Tests for Chern characters, Riemann-Roch and the Cardy condition"""

import random
from fractions import Fraction

import pytest

from chern import (boundary_bulk, cardy_check, chern_character, chern_of_pushforward,
                   chern_of_pushforward_routes, euler_chi_residue, gram_matrix, hom_cohomology, jacobi_algebra,
                   perturbed_homotopies, random_polynomial, supertrace_class, truncation_oracle)
from convolution import knorrer_phi, knorrer_psi_model
from errors import NotAMorphism
from linalg import inverse
from matrices import PolyMatrix
from mfcore import (MFMap, coboundary, direct_sum, identity, koszul_mf, make_mf, partial_homotopy,
                    zero_map)
from polyring import RingContext


@pytest.fixture
def plane():
    return RingContext(['x', 'y'])


@pytest.fixture
def cone_pair(plane):
    """Koszul(x - y; x + y) and its swap, factorisations of x^2 - y^2"""
    x, y = plane.gens()
    return koszul_mf([(x - y, x + y)]), koszul_mf([(x + y, x - y)])


@pytest.fixture
def fermat(plane):
    """Koszul{(x, x^2), (y, y^2)}, a factorisation of x^3 + y^3"""
    x, y = plane.gens()
    return koszul_mf([(x, x ** 2), (y, y ** 2)])


def _random_even_cocycle(X, rng):
    """a * 1 + (d rho + rho d) for random a and odd rho"""
    ctx = X.ctx
    rho = MFMap(X, X, 1, PolyMatrix.from_function(
        ctx, X.rank, X.rank,
        lambda i, j: random_polynomial(ctx, rng, 1) if X.parity(i) != X.parity(j) else ctx.zero()))
    a = random_polynomial(ctx, rng, 1)
    return MFMap(X, X, 0, PolyMatrix.identity(ctx, X.rank, a)) + coboundary(rho), coboundary(rho)


def test_koszul_chern_character(koszul_xy, plane):
    x, y = plane.gens()
    assert chern_character(koszul_xy) == -1
    assert chern_character(koszul_mf([(y, x)])) == 1


def test_odd_number_of_variables(power_mf, x_ring):
    x = x_ring.var('x')
    assert chern_character(power_mf(1, 3)) == 0
    assert chern_character(koszul_mf([(x, x)])) == 0


def test_chern_is_additive(koszul_xy, cone_pair):
    assert chern_character(direct_sum(koszul_xy, koszul_xy)) == -2
    K1, K2 = cone_pair
    assert chern_character(K1) == -2
    assert chern_character(K2) == 2


def test_boundary_bulk_of_identity(fermat, cubic_line, cone_pair):
    for X in (fermat, cubic_line, *cone_pair):
        assert boundary_bulk(X, identity(X)) == chern_character(X)


@pytest.mark.parametrize('seed', range(20))
def test_boundary_bulk_is_cyclic(charged, seed):
    rng = random.Random(seed)
    f, _ = _random_even_cocycle(charged, rng)
    g, null = _random_even_cocycle(charged, rng)
    assert boundary_bulk(charged, f @ g) == boundary_bulk(charged, g @ f)
    assert not boundary_bulk(charged, null)


def test_boundary_bulk_rejects_odd_maps(fermat):
    with pytest.raises(NotAMorphism):
        boundary_bulk(fermat, partial_homotopy(fermat, 'x'))


def test_residue_pairing_is_nondegenerate(plane):
    W = plane.parse("x^3 + y^3")
    gram = gram_matrix(W)
    assert len(gram) == jacobi_algebra(W).dim == 4
    assert inverse(gram, 0) is not None


def test_euler_pairing(koszul_xy, cone_pair, power_mf):
    assert euler_chi_residue(koszul_xy, koszul_xy) == 1
    K1, K2 = cone_pair
    assert euler_chi_residue(K1, K1) == 1
    assert euler_chi_residue(K1, K2) == -1
    assert euler_chi_residue(K2, K1) == -1
    assert euler_chi_residue(K1, direct_sum(K1, K1)) == 2
    assert euler_chi_residue(power_mf(1, 3), power_mf(2, 3)) == 0


def test_euler_pairing_matches_cohomology(koszul_xy, cone_pair):
    K1, K2 = cone_pair
    for X, Y in [(koszul_xy, koszul_xy), (K1, K1), (K1, K2)]:
        h0, h1 = hom_cohomology(X, Y)
        assert euler_chi_residue(X, Y) == h0 - h1


@pytest.mark.parametrize('a,b,d', [(1, 1, 2), (1, 2, 4), (2, 2, 4), (1, 3, 5)])
def test_hom_cohomology_against_oracle(power_mf, a, b, d):
    X, Y = power_mf(a, d), power_mf(b, d)
    expected = min(a, b, d - a, d - b)
    assert hom_cohomology(X, Y) == (expected, expected)
    assert truncation_oracle(X, Y) == (expected, expected)


def test_hom_cohomology_two_variables(cone_pair):
    K1, K2 = cone_pair
    assert hom_cohomology(K1, K1) == truncation_oracle(K1, K1) == (1, 0)
    assert hom_cohomology(K1, K2) == truncation_oracle(K1, K2) == (0, 1)


def test_contractible_factorisation_has_no_cohomology(power_mf, x_ring):
    x = x_ring.var('x')
    trivial = make_mf(x_ring, x ** 2, [[1]], [[x ** 2]])
    assert hom_cohomology(trivial, power_mf(1, 2)) == (0, 0)


@pytest.mark.parametrize('a,b,d', [(1, 1, 3), (1, 2, 4), (2, 3, 5)])
def test_cardy_in_one_variable(power_mf, a, b, d):
    lhs, rhs = cardy_check(power_mf(a, d), power_mf(b, d))
    assert lhs == rhs == 0


def test_cardy_in_two_variables(fermat, cubic_line, cone_pair, koszul_xy):
    for X in (fermat, cubic_line, cone_pair[0], koszul_xy):
        lhs, rhs = cardy_check(X, X)
        assert lhs == rhs
        assert lhs == euler_chi_residue(X, X)


def test_cardy_with_zero_map(fermat):
    lhs, rhs = cardy_check(fermat, fermat, alpha=zero_map(fermat, fermat))
    assert (lhs, rhs) == (Fraction(0), Fraction(0))


def test_cardy_rejects_odd_maps(fermat):
    with pytest.raises(NotAMorphism):
        cardy_check(fermat, fermat, alpha=partial_homotopy(fermat, 'x'))


@pytest.mark.parametrize('name', ['cone', 'fermat', 'cubic_line'])
def test_chern_of_knorrer_pushforward(name, cone_pair, fermat, cubic_line):
    X = {'cone': cone_pair[0], 'fermat': fermat, 'cubic_line': cubic_line}[name]
    model = knorrer_psi_model(knorrer_phi(X))
    via_e, via_residue = chern_of_pushforward_routes(model)
    assert via_e == via_residue
    assert chern_of_pushforward(model) == chern_character(X)


# -- supertraces of null-homotopies --

@pytest.fixture
def cubic_line(plane):
    """Koszul(x + y; x^2 - xy + y^2), a rank one factorisation of x^3 + y^3"""
    x, y = plane.gens()
    return koszul_mf([(x + y, x ** 2 - x * y + y ** 2)])


@pytest.fixture
def circle_mod5():
    """Koszul(x + 2y; x - 2y), a factorisation of x^2 + y^2 over F_5"""
    ctx = RingContext(['x', 'y'], characteristic=5)
    x, y = ctx.gens()
    return koszul_mf([(x + 2 * y, x - 2 * y)])


@pytest.fixture
def cone_square():
    """Cone (x) cone over k[a, b, c, d], a factorisation of a^2 - b^2 + c^2 - d^2"""
    ctx = RingContext(['a', 'b', 'c', 'd'])
    a, b, c, d = ctx.gens()
    return koszul_mf([(a - b, a + b), (c - d, c + d)])


@pytest.fixture(params=['cubic_line', 'circle_mod5', 'cone'])
def charged(request, cubic_line, circle_mod5, cone_pair):
    """Two-variable factorisations with nonzero Chern character"""
    return {'cubic_line': cubic_line, 'circle_mod5': circle_mod5, 'cone': cone_pair[0]}[request.param]


def _standard(X):
    return [partial_homotopy(X, v) for v in X.ctx.variables]


def test_charged_fixtures_have_nonzero_class(cubic_line, circle_mod5, cone_square):
    for X in (cubic_line, circle_mod5, cone_square):
        assert chern_character(X)
    assert circle_mod5.potential == circle_mod5.ctx.parse("x^2 + y^2")


@pytest.mark.parametrize('seed', range(20))
def test_supertrace_ignores_choice_of_homotopies(charged, seed):
    rng = random.Random(seed)
    standard = supertrace_class(charged, _standard(charged))
    assert standard
    assert supertrace_class(charged, perturbed_homotopies(charged, rng)) == standard


@pytest.mark.parametrize('seed', range(20))
def test_quadratic_perturbations_on_cubic(cubic_line, seed):
    rng = random.Random(1000 + seed)
    lam = perturbed_homotopies(cubic_line, rng, degree=2)
    assert supertrace_class(cubic_line, lam) == supertrace_class(cubic_line, _standard(cubic_line))


@pytest.mark.parametrize('seed', range(5))
def test_supertrace_is_antisymmetric(charged, seed):
    lam = perturbed_homotopies(charged, random.Random(seed))
    full = supertrace_class(charged, lam)
    assert full
    assert supertrace_class(charged, [lam[1], lam[0]]) == -full


@pytest.mark.parametrize('seed', range(5))
def test_partial_supertraces_vanish(cone_square, seed):
    lam = perturbed_homotopies(cone_square, random.Random(seed))
    for subset in ([], [0], [0, 1], [1, 3], [2, 0], [0, 2, 3]):
        assert not supertrace_class(cone_square, [lam[i] for i in subset])


@pytest.mark.parametrize('seed', range(5))
def test_four_variable_antisymmetry(cone_square, seed):
    lam = perturbed_homotopies(cone_square, random.Random(seed))
    full = supertrace_class(cone_square, lam)
    assert full
    assert full == supertrace_class(cone_square, _standard(cone_square))
    assert supertrace_class(cone_square, [lam[1], lam[0], lam[2], lam[3]]) == -full
    assert supertrace_class(cone_square, [lam[1], lam[2], lam[0], lam[3]]) == full
    assert supertrace_class(cone_square, [lam[3], lam[2], lam[1], lam[0]]) == full
