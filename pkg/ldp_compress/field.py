#!/usr/bin/env python
# vim: sw=4:ts=4:sts=4:fdm=indent:fdl=0:
# -*- coding: UTF8 -*-
#
# Seed compression of local randomizers.
# Copyright (C) 2026 The ldpcompress developers
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <http://www.gnu.org/licenses/>.

"""Prime fields.

Prime search, arithmetic over GF(p) for p < 2^62, and the threshold map
that turns a uniform field element into a Bernoulli bit:

    bool(z) = 1  iff  z < alpha0 * p

Only prime fields are supported, so the order on the field is the
ordinary order on the integers 0..p-1.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

MAX_MODULUS = 1 << 62

# Deterministic for every n < 3.3 * 10^24, so for every 64-bit integer.
_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def is_prime(n: int) -> bool:
    """Return True if n is prime (deterministic Miller-Rabin)."""
    if n < 2:
        return False
    for prime in _SMALL_PRIMES:
        if n % prime == 0:
            return n == prime

    # n - 1 = s * 2^r with s odd.
    r, s = 0, n - 1
    while s % 2 == 0:
        r += 1
        s //= 2

    for witness in _WITNESSES:
        x = pow(witness, s, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = pow(x, 2, n)
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=256)
def check_prime(p: int) -> int:
    """Return p if it is a prime modulus in range, else raise ValueError."""
    if not 2 <= p < MAX_MODULUS:
        raise(ValueError(f"Modulus out of range [2, 2^62): {p}"))
    if not is_prime(p):
        raise(ValueError(f"Modulus is not prime: {p}"))
    return p


def find_prime(minimum: int) -> int:
    """Return the smallest prime >= minimum."""
    if not 2 <= minimum < MAX_MODULUS:
        raise(ValueError(f"Prime search start out of range [2, 2^62): "
                         f"{minimum}"))

    candidate = minimum
    if candidate > 2 and candidate % 2 == 0:
        candidate += 1
    while not is_prime(candidate):
        candidate += 1 if candidate == 2 else 2
        if candidate >= MAX_MODULUS:
            raise(OverflowError(f"No prime >= {minimum} below 2^62"))
    return candidate


@dataclass(frozen=True)
class FieldElem(object):
    """An element of GF(p)."""

    value: int
    modulus: int

    def __post_init__(self):
        """Check the element is reduced and the modulus is prime."""
        check_prime(self.modulus)
        if not 0 <= self.value < self.modulus:
            raise(ValueError(f"{self.value} is not reduced mod "
                             f"{self.modulus}"))

    def __int__(self) -> int:
        """Return the integer representative."""
        return self.value

    def _other(self, other: Union['FieldElem', int]) -> int:
        """Return other as an integer, checking moduli agree."""
        if isinstance(other, FieldElem):
            if other.modulus != self.modulus:
                raise(ValueError(f"Mixed moduli {self.modulus} and "
                                 f"{other.modulus}"))
            return other.value
        return int(other)

    def __add__(self, other: Union['FieldElem', int]) -> 'FieldElem':
        """Return self + other in the field."""
        return FieldElem((self.value + self._other(other)) % self.modulus,
                         self.modulus)
    __radd__ = __add__

    def __sub__(self, other: Union['FieldElem', int]) -> 'FieldElem':
        """Return self - other in the field."""
        return FieldElem((self.value - self._other(other)) % self.modulus,
                         self.modulus)

    def __mul__(self, other: Union['FieldElem', int]) -> 'FieldElem':
        """Return self * other in the field."""
        return FieldElem((self.value * self._other(other)) % self.modulus,
                         self.modulus)
    __rmul__ = __mul__

    def __neg__(self) -> 'FieldElem':
        """Return the additive inverse."""
        return FieldElem((-self.value) % self.modulus, self.modulus)


@dataclass(frozen=True)
class BoolThreshold(object):
    """The threshold alpha0 * p of the bool map over GF(p)."""

    threshold: int
    modulus: int

    def __post_init__(self):
        """Check 1 <= threshold < p."""
        check_prime(self.modulus)
        if not 1 <= self.threshold < self.modulus:
            raise(ValueError(f"Threshold {self.threshold} outside "
                             f"[1, {self.modulus})"))

    @classmethod
    def from_alpha(cls, alpha0: Union[Fraction, int, str],
                   modulus: int) -> 'BoolThreshold':
        """Build the threshold for bias alpha0, which must make alpha0*p whole."""
        scaled = Fraction(alpha0) * modulus
        if scaled.denominator != 1:
            raise(ValueError(f"alpha0 * p = {scaled} is not an integer"))
        return cls(int(scaled), modulus)

    @property
    def alpha(self) -> Fraction:
        """The exact bias threshold / p."""
        return Fraction(self.threshold, self.modulus)


def _as_int(z: Union[FieldElem, int], p: int) -> int:
    """Return z as an integer in [0, p)."""
    if isinstance(z, FieldElem):
        if z.modulus != p:
            raise(ValueError(f"Element of GF({z.modulus}) used in GF({p})"))
        return z.value
    return int(z) % p


def affine_eval(phi: Sequence[int], z: Union[FieldElem, int, Sequence],
                p: int) -> FieldElem:
    """Return phi_0 + sum_u z_u * phi_u mod p.

    z is a single element when phi has two coefficients, otherwise a
    vector with one entry per non-constant coefficient.
    """
    if isinstance(z, (FieldElem, int, np.integer)):
        point = (z,)
    else:
        point = tuple(z)
    if len(point) != len(phi) - 1:
        raise(ValueError(f"Point has dimension {len(point)}, affine "
                         f"function expects {len(phi) - 1}"))

    total = int(phi[0])
    for coefficient, coordinate in zip(phi[1:], point):
        total += int(coefficient) * _as_int(coordinate, p)
    return FieldElem(total % p, p)


def bool_map(z: Union[FieldElem, int], thr: BoolThreshold) -> int:
    """Return 1 if z < threshold, else 0."""
    if isinstance(z, FieldElem) and z.modulus != thr.modulus:
        raise(ValueError(f"Element of GF({z.modulus}) mapped with a "
                         f"GF({thr.modulus}) threshold"))
    return 1 if int(z) < thr.threshold else 0


def bool_map_many(values: np.ndarray, thr: BoolThreshold) -> np.ndarray:
    """Return the int64 array of bool_map over an array of reduced values."""
    return (np.asarray(values) < thr.threshold).astype(np.int64)


def affine_eval_many(coefficients: np.ndarray, points: np.ndarray,
                     p: int) -> np.ndarray:
    """Evaluate n affine functions at k points.

    coefficients is (n, D+1) and points is (k, D); the result is the (n, k)
    array of values mod p.  Small moduli use int64 arithmetic, larger ones
    fall back to exact Python integers.
    """
    coefficients = np.asarray(coefficients)
    points = np.asarray(points)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    if coefficients.shape[1] != points.shape[1] + 1:
        raise(ValueError(f"Points have dimension {points.shape[1]}, affine "
                         f"functions expect {coefficients.shape[1] - 1}"))

    if p < (1 << 31):
        coefficients = coefficients.astype(np.int64)
        points = points.astype(np.int64)
        values = np.repeat(coefficients[:, :1], points.shape[0], axis=1)
        for u in range(points.shape[1]):
            # Each product is < 2^62 and is reduced before the next add.
            values = (values + np.outer(coefficients[:, u + 1],
                                        points[:, u]) % p) % p
        return values

    coefficients = coefficients.astype(object)
    points = points.astype(object)
    return (coefficients[:, :1] + coefficients[:, 1:].dot(points.T)) % p


def nonzero_vector(j: int, q: int, d: int) -> tuple[int, ...]:
    """Return z(j), the j-th nonzero vector of GF(q)^d in lexicographic order."""
    if not 1 <= j < q ** d:
        raise(IndexError(f"Index {j} outside [1, {q ** d - 1}]"))

    digits = []
    for _ in range(d):
        j, digit = divmod(j, q)
        digits.append(digit)
    return tuple(reversed(digits))


def field_bits(p: int) -> int:
    """Return the bits needed to write one element of GF(p)."""
    return (p - 1).bit_length()
