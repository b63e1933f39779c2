import itertools
import pickle

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codiv.gf import (
    FieldMismatchError,
    FieldSpec,
    GFVector,
    default_field,
    gf_add,
    gf_dot,
    gf_mul,
    hamming_distance,
)


def _slow_mul(a, b, poly, B):
    # shift-and-add reference, independent of the tables
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a >> B:
            a ^= poly
    return r


@pytest.mark.parametrize("B", [1, 2, 3, 4])
def test_tables_match_shift_and_add(B):
    F = default_field(B)
    for a, b in itertools.product(range(F.q), repeat=2):
        assert F.mul(a, b) == _slow_mul(a, b, F.primitive_polynomial, B)


@pytest.mark.parametrize("B", [1, 2, 3, 4])
def test_field_axioms_exhaustive(B):
    F = default_field(B)
    x = np.arange(F.q)
    a, b, c = np.meshgrid(x, x, x, indexing="ij")
    assert np.array_equal(F.mul(a, b), F.mul(b, a))
    assert np.array_equal(F.mul(F.mul(a, b), c), F.mul(a, F.mul(b, c)))
    assert np.array_equal(F.mul(a, F.add(b, c)), F.add(F.mul(a, b), F.mul(a, c)))
    assert np.array_equal(F.mul(x, 1), x)
    assert not F.mul(x, 0).any()
    nz = x[1:]
    assert np.all(F.mul(nz, F.inv(nz)) == 1)


def test_inverse_of_zero_raises():
    with pytest.raises(ZeroDivisionError):
        default_field(3).inv(0)
    F = default_field(2)
    with pytest.raises(ZeroDivisionError):
        F.element(0).inverse()


def test_non_primitive_polynomial_rejected():
    # x^4 + x^3 + x^2 + x + 1 is irreducible but x has order 5
    with pytest.raises(ValueError):
        FieldSpec(4, 0b11111)
    with pytest.raises(ValueError):
        FieldSpec(0)


def test_spec_is_immutable_and_picklable():
    F = FieldSpec(3)
    with pytest.raises(AttributeError):
        F.B = 4
    assert pickle.loads(pickle.dumps(F)) == F


def test_small_examples():
    F1, F2 = default_field(1), FieldSpec(2, 0b111)
    assert gf_add(F1.element(1), F1.element(1)).value == 0
    assert gf_add(F2.element(2), F2.element(3)).value == 1
    assert gf_mul(F2.element(2), F2.element(2)).value == 3
    for a in range(4):
        assert gf_add(F2.element(a), F2.element(0)).value == a
    assert gf_dot(F1.vector([1, 0]), F1.vector([1, 1])).value == 1
    assert gf_dot(F1.vector([1, 1]), F1.vector([1, 1])).value == 0
    assert gf_dot(F2.vector([1, 2]), F2.vector([1, 3])).value == 0


def test_hamming_examples():
    F1, F2 = default_field(1), default_field(2)
    u = F2.vector([0, 1, 2])
    assert hamming_distance(u, u) == 0
    assert hamming_distance(u, F2.vector([0, 3, 2])) == 1
    a = F1.vector([0, 0, 0, 1, 0, 1, 0, 0, 1, 1])
    b = F1.vector([1, 0, 0, 0, 0, 0, 0, 1, 0, 1])
    assert hamming_distance(a, b) == 5


def test_mismatches_raise():
    a = FieldSpec(2).element(1)
    with pytest.raises(FieldMismatchError):
        gf_add(a, FieldSpec(3).element(1))
    F = default_field(1)
    with pytest.raises(ValueError):
        hamming_distance(F.vector([0, 1]), F.vector([0, 1, 1]))
    with pytest.raises(ValueError):
        gf_dot(F.vector([0, 1]), F.vector([1]))
    with pytest.raises(ValueError):
        F.vector([2])


def test_matmul_agrees_with_dot():
    F = default_field(3)
    rng = np.random.default_rng(0)
    a = rng.integers(0, 8, (20, 3))
    G = rng.integers(0, 8, (3, 5))
    out = F.matmul(a, G)
    for r in range(20):
        for i in range(5):
            assert out[r, i] == gf_dot(F.vector(a[r]), F.vector(G[:, i])).value


vectors = st.integers(1, 8).flatmap(
    lambda n: st.tuples(*[st.lists(st.integers(0, 3), min_size=n, max_size=n) for _ in range(3)])
)


@settings(max_examples=200, deadline=None)
@given(vectors)
def test_hamming_is_a_metric(uvw):
    F = default_field(2)
    u, v, w = (GFVector(tuple(x), F) for x in uvw)
    d = hamming_distance
    assert d(u, v) == d(v, u)
    assert (d(u, v) == 0) == (u == v)
    assert d(u, w) <= d(u, v) + d(v, w)
