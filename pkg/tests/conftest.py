"""Shared builders for the test suite"""

import pytest

from mfcore import koszul_mf, make_mf
from polyring import RingContext


@pytest.fixture
def x_ring():
    return RingContext(['x'])


@pytest.fixture
def xy_ring():
    return RingContext(['x', 'y'])


@pytest.fixture
def power_mf(x_ring):
    """(x^a | x^(d - a)) as a factorisation of x^d over k[x]"""
    x = x_ring.var('x')

    def build(a, d):
        return make_mf(x_ring, x ** d, [[x ** (d - a)]], [[x ** a]])

    return build


@pytest.fixture
def koszul_xy(xy_ring):
    """Koszul(x; y), a factorisation of xy"""
    x, y = xy_ring.gens()
    return koszul_mf([(x, y)])


@pytest.fixture
def write_doc(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text, encoding='utf-8')
        return str(path)

    return write
