"""Tests for prime fields."""

from fractions import Fraction

import numpy as np
import pytest

from ldp_compress.field import (BoolThreshold, FieldElem, affine_eval,
                                affine_eval_many, bool_map, bool_map_many,
                                check_prime, field_bits, find_prime,
                                is_prime, nonzero_vector)


@pytest.mark.parametrize('n, expected', [
    (0, False), (1, False), (2, True), (3, True), (4, False), (97, True),
    (561, False), (7919, True), (2147483647, True), (2147483649, False),
    ((1 << 61) - 1, True), (3215031751, False),
])
def test_is_prime(n, expected):
    assert is_prime(n) is expected


def test_find_prime():
    assert find_prime(8) == 11
    assert find_prime(11) == 11
    assert find_prime(2) == 2
    assert find_prime(2 ** 31) == 2147483659


def test_find_prime_out_of_range():
    with pytest.raises(ValueError):
        find_prime(1)
    with pytest.raises(ValueError):
        find_prime(1 << 62)


def test_check_prime():
    assert check_prime(307) == 307
    with pytest.raises(ValueError):
        check_prime(308)


def test_field_arithmetic():
    a = FieldElem(5, 7)
    b = FieldElem(4, 7)
    assert a + b == FieldElem(2, 7)
    assert a - b == FieldElem(1, 7)
    assert b - a == FieldElem(6, 7)
    assert a * b == FieldElem(6, 7)
    assert -a == FieldElem(2, 7)
    assert 3 + a == FieldElem(1, 7)
    assert int(a * 3) == 1


def test_field_elem_checks():
    with pytest.raises(ValueError):
        FieldElem(7, 7)
    with pytest.raises(ValueError):
        FieldElem(1, 8)
    with pytest.raises(ValueError):
        FieldElem(1, 7) + FieldElem(1, 11)


def test_bool_threshold():
    thr = BoolThreshold.from_alpha(Fraction(77, 307), 307)
    assert thr.threshold == 77
    assert thr.alpha == Fraction(77, 307)
    assert bool_map(76, thr) == 1
    assert bool_map(77, thr) == 0
    assert bool_map(FieldElem(0, 307), thr) == 1
    with pytest.raises(ValueError):
        BoolThreshold.from_alpha(Fraction(1, 3), 307)
    with pytest.raises(ValueError):
        BoolThreshold(0, 307)
    with pytest.raises(ValueError):
        bool_map(FieldElem(0, 11), thr)


def test_bool_map_many():
    thr = BoolThreshold(2, 5)
    values = np.array([[0, 1, 2], [3, 4, 1]])
    bits = bool_map_many(values, thr)
    assert bits.dtype == np.int64
    assert bits.tolist() == [[1, 1, 0], [0, 0, 1]]
    assert bits.tolist() == [[bool_map(int(z), thr) for z in row]
                             for row in values]


def test_affine_eval():
    assert affine_eval((3, 2), 4, 7) == FieldElem(4, 7)
    assert affine_eval((1, 2, 3), (1, 1), 5) == FieldElem(1, 5)
    assert affine_eval((0, 1), FieldElem(6, 7), 7) == FieldElem(6, 7)
    with pytest.raises(ValueError):
        affine_eval((1, 2, 3), 1, 5)


def test_affine_eval_many_matches_scalar():
    p = 13
    coefficients = np.array([[1, 2, 3], [0, 12, 5], [7, 0, 0]])
    points = np.array([nonzero_vector(j, p, 2) for j in range(1, 20)])
    values = affine_eval_many(coefficients, points, p)
    assert values.shape == (3, 19)
    for i, phi in enumerate(coefficients):
        for l, z in enumerate(points):
            assert values[i, l] == affine_eval(phi, z, p).value


def test_affine_eval_many_large_modulus():
    p = find_prime(1 << 40)
    coefficients = np.array([[p - 1, p - 2]], dtype=object)
    points = np.array([[p - 1], [1]], dtype=object)
    values = affine_eval_many(coefficients, points, p)
    assert list(values[0]) == [(p - 1 + (p - 2) * (p - 1)) % p,
                               (2 * p - 3) % p]


def test_nonzero_vector():
    assert nonzero_vector(1, 3, 2) == (0, 1)
    assert nonzero_vector(3, 3, 2) == (1, 0)
    assert nonzero_vector(8, 3, 2) == (2, 2)
    assert len({nonzero_vector(j, 5, 2) for j in range(1, 25)}) == 24
    with pytest.raises(IndexError):
        nonzero_vector(0, 3, 2)
    with pytest.raises(IndexError):
        nonzero_vector(9, 3, 2)


def test_field_bits():
    assert field_bits(2) == 1
    assert field_bits(307) == 9
    assert field_bits(257) == 9
    assert field_bits(11) == 4
