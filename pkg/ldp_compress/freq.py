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

"""Frequency estimation over the domain [k] = {1, ..., k}.

RAPPOR sends k noisy bits: bit j is Bern(alpha1) for the client's value
and Bern(alpha0) for every other value.  PI-RAPPOR sends one random
affine function phi over GF(p) instead, and bit j is read off as
bool(phi(j)).  The bits are then only pairwise independent, which is all
the debiased counts need, and the report takes 2 ceil(log2 p) bits.

The generalized form works over GF(q)^d with q prime, mapping j to the
j-th nonzero vector z(j), so q can be much smaller than k.
"""

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .compress import RandomizerSpec
from .field import (BoolThreshold, FieldElem, affine_eval, affine_eval_many,
                    bool_map, bool_map_many, check_prime, field_bits,
                    find_prime, nonzero_vector)
from .randcore import (BitStream, PrgSpec, bernoulli, function_prg,
                       uniform_mod)
from .utils import info_print

VARIANTS = ('deletion', 'replacement', 'noiseless')

DEFAULT_DELTA = 0.01

# Primes scanned when looking for an alpha0 that attains eps exactly.
EXACT_SCAN_PRIMES = 64


def _alpha0_for(p: int, eps: float) -> Fraction:
    """Return ceil(p / (e^eps + 1)) / p."""
    # The 1e-9 keeps float drift from bumping an exact quotient.
    return Fraction(math.ceil(p / (math.exp(eps) + 1) - 1e-9), p)


def _prime_bound(eps: float, delta: float) -> int:
    """Return ceil(max(e^eps, 1/eps) / delta), the least usable field size."""
    bound = max(math.exp(eps), 1 / eps) / delta
    if bound >= 1 << 62:
        raise(OverflowError(f"Prime bound {bound:.3g} beyond 2^62"))
    # Float drift can push an exact integer quotient just past it.
    return max(2, math.ceil(bound * (1 - 1e-12)))


def _dimension(k: int, q: int) -> int:
    """Return the smallest d with q^d >= k + 1."""
    dim = 1
    while q ** dim < k + 1:
        dim += 1
    return dim


@dataclass(frozen=True)
class RapporParams(object):
    """Parameters shared by the clients and the server.

    p is the field size (q for the generalized form, with dim > 1 or
    generalized set).  alpha0 and alpha1 are exact fractions and
    alpha0 * p is an integer, the threshold of the bool map.  Noisy
    parameters carry it as bool_threshold; noiseless ones have none.
    """

    k: int
    p: int
    alpha0: Fraction
    alpha1: Fraction
    variant: str = 'deletion'
    eps: float = 0.0
    dim: int = 1
    generalized: bool = False
    bool_threshold: Optional[BoolThreshold] = field(default=None, init=False,
                                                    compare=False, repr=False)

    def __post_init__(self):
        """Validate the parameters."""
        object.__setattr__(self, 'alpha0', Fraction(self.alpha0))
        object.__setattr__(self, 'alpha1', Fraction(self.alpha1))

        if self.k < 2:
            raise(ValueError(f"Domain size must be at least 2: {self.k}"))
        if self.variant not in VARIANTS:
            raise(ValueError(f"Unknown variant: {self.variant}"))
        check_prime(self.p)
        if not 0 <= self.alpha0 < self.alpha1 <= 1:
            raise(ValueError(f"Need 0 <= alpha0 < alpha1 <= 1, got "
                             f"{self.alpha0} and {self.alpha1}"))
        if (self.alpha0 * self.p).denominator != 1:
            raise(ValueError(f"alpha0 * p = {self.alpha0 * self.p} is not "
                             f"an integer"))
        if self.variant == 'noiseless':
            if (self.alpha0, self.alpha1) != (0, 1):
                raise(ValueError("Noiseless parameters need alpha0 = 0 and "
                                 "alpha1 = 1"))
        elif self.alpha0 == 0:
            raise(ValueError("alpha0 must be positive"))
        if self.dim < 1:
            raise(ValueError(f"Dimension must be positive: {self.dim}"))
        if self.p ** self.dim - 1 < self.k:
            raise(ValueError(f"k = {self.k} exceeds the {self.p ** self.dim - 1}"
                             f" nonzero vectors of GF({self.p})^{self.dim}"))

        if self.variant != 'noiseless':
            object.__setattr__(self, 'bool_threshold',
                               BoolThreshold.from_alpha(self.alpha0, self.p))

    @property
    def threshold(self) -> int:
        """alpha0 * p, the bool map threshold."""
        return int(self.alpha0 * self.p)

    @property
    def decode_threshold(self) -> BoolThreshold:
        """The bool map threshold of affine reports."""
        if self.bool_threshold is None:
            raise(ValueError("Noiseless parameters have no affine decode"))
        return self.bool_threshold

    @property
    def realized_eps(self) -> float:
        """The eps the rounded alpha0 and alpha1 actually give."""
        if self.variant == 'noiseless':
            return math.inf
        if self.variant == 'replacement':
            ratio = (self.alpha1 * (1 - self.alpha0)
                     / (self.alpha0 * (1 - self.alpha1)))
        else:
            ratio = max(self.alpha1 / self.alpha0,
                        (1 - self.alpha0) / (1 - self.alpha1))
        return math.log(ratio)

    @property
    def coefficient_count(self) -> int:
        """The coefficients in one affine function."""
        return self.dim + 1

    @property
    def report_bits(self) -> int:
        """The bits in one PI-RAPPOR report before byte packing."""
        return self.coefficient_count * field_bits(self.p)

    def point(self, j: int) -> tuple[int, ...]:
        """Return z(j), the field point value j is evaluated at."""
        if not 1 <= j <= self.k:
            raise(IndexError(f"Value {j} outside [1, {self.k}]"))
        if self.dim == 1:
            return (j,)
        return nonzero_vector(j, self.p, self.dim)

    def points(self) -> np.ndarray:
        """Return the (k, dim) array of z(1), ..., z(k)."""
        return _points(self.k, self.p, self.dim)


@lru_cache(maxsize=32)
def _points(k: int, p: int, dim: int) -> np.ndarray:
    """Return the (k, dim) array of evaluation points."""
    if dim == 1:
        points = np.arange(1, k + 1, dtype=np.int64).reshape(-1, 1)
    else:
        points = np.array([nonzero_vector(j, p, dim)
                           for j in range(1, k + 1)], dtype=np.int64)
    points.setflags(write=False)
    return points


def choose_params(k: int, eps: float, variant: str = 'deletion',
                  delta: float = DEFAULT_DELTA, prime: Optional[int] = None,
                  exact: bool = False) -> RapporParams:
    """Pick p and alpha0, alpha1 for PI-RAPPOR at privacy eps.

    p is the smallest prime at least max(k + 1, max(e^eps, 1/eps) / delta)
    unless prime is given.  alpha0 is ceil(p / (e^eps + 1)) / p, so the
    realized eps never exceeds eps.  With exact set the primes after the
    minimum are scanned for the alpha0 closest to 1 / (e^eps + 1).
    """
    if k < 2:
        raise(ValueError(f"Domain size must be at least 2: {k}"))
    if not eps > 0:
        raise(ValueError(f"eps must be positive: {eps}"))
    if variant not in ('deletion', 'replacement'):
        raise(ValueError(f"Unknown variant: {variant}"))
    if not delta > 0:
        raise(ValueError(f"delta must be positive: {delta}"))

    if prime is not None:
        p = check_prime(prime)
        if p <= k:
            raise(ValueError(f"Prime {p} must exceed k = {k}"))
    else:
        p = find_prime(max(k + 1, _prime_bound(eps, delta)))

    if exact and prime is None:
        target = 1 / (math.exp(eps) + 1)
        best, candidate = p, p
        for _ in range(EXACT_SCAN_PRIMES):
            if (abs(float(_alpha0_for(candidate, eps)) - target)
                    < abs(float(_alpha0_for(best, eps)) - target)):
                best = candidate
            if abs(float(_alpha0_for(best, eps)) - target) < 1e-12:
                break
            candidate = find_prime(candidate + 1)
        p = best

    alpha0 = _alpha0_for(p, eps)
    alpha1 = 1 - alpha0 if variant == 'deletion' else Fraction(1, 2)
    params = RapporParams(k=k, p=p, alpha0=alpha0, alpha1=alpha1,
                          variant=variant, eps=eps)
    info_print(f"k={k} eps={eps:.6g}: p={p} alpha0={alpha0} "
               f"realized eps={params.realized_eps:.6g}", tag=2)
    return params


def choose_general_params(k: int, eps: float, variant: str = 'deletion',
                          q: Optional[int] = None,
                          delta: float = DEFAULT_DELTA) -> RapporParams:
    """Pick a prime q and d = ceil(log_q(k + 1)) for generalized PI-RAPPOR."""
    if k < 2:
        raise(ValueError(f"Domain size must be at least 2: {k}"))
    if not eps > 0:
        raise(ValueError(f"eps must be positive: {eps}"))
    if variant not in ('deletion', 'replacement'):
        raise(ValueError(f"Unknown variant: {variant}"))
    if not delta > 0:
        raise(ValueError(f"delta must be positive: {delta}"))

    if q is None:
        q = find_prime(_prime_bound(eps, delta))
    check_prime(q)

    alpha0 = _alpha0_for(q, eps)
    if not 1 <= alpha0 * q < q:
        raise(ValueError(f"No usable threshold in GF({q}) at eps={eps}"))
    alpha1 = 1 - alpha0 if variant == 'deletion' else Fraction(1, 2)
    return RapporParams(k=k, p=q, alpha0=alpha0, alpha1=alpha1,
                        variant=variant, eps=eps, dim=_dimension(k, q),
                        generalized=True)


def noiseless_params(k: int) -> RapporParams:
    """Return the alpha0 = 0, alpha1 = 1 parameters (exact counts)."""
    return RapporParams(k=k, p=find_prime(k + 1), alpha0=Fraction(0),
                        alpha1=Fraction(1), variant='noiseless')


@dataclass(frozen=True)
class AffineFn(object):
    """phi(z) = phi_0 + sum_u z_u phi_u over GF(p)."""

    coefficients: tuple
    modulus: int

    def __post_init__(self):
        """Check the coefficients are reduced."""
        object.__setattr__(self, 'coefficients',
                           tuple(int(c) for c in self.coefficients))
        if len(self.coefficients) < 2:
            raise(ValueError("An affine function needs two coefficients"))
        for coefficient in self.coefficients:
            if not 0 <= coefficient < self.modulus:
                raise(ValueError(f"Coefficient {coefficient} not reduced "
                                 f"mod {self.modulus}"))

    def __call__(self, z: Union[int, Sequence[int]]) -> FieldElem:
        """Evaluate phi at z."""
        return affine_eval(self.coefficients, z, self.modulus)

    def bit(self, j: int, params: RapporParams) -> int:
        """Return bool(phi(z(j))), the report's bit for value j."""
        return bool_map(self(params.point(j)), params.decode_threshold)


def _check_index(j: int, params: RapporParams):
    """Raise IndexError unless 1 <= j <= k."""
    if not 1 <= j <= params.k:
        raise(IndexError(f"Value {j} outside [1, {params.k}]"))


def rappor_encode(j: int, params: RapporParams,
                  stream: BitStream) -> np.ndarray:
    """Return the k noisy RAPPOR bits of value j."""
    _check_index(j, params)
    bits = np.zeros(params.k, dtype=np.uint8)
    for i in range(1, params.k + 1):
        prob = params.alpha1 if i == j else params.alpha0
        bits[i - 1] = bernoulli(stream, prob)
    return bits


def sample_phi_conditioned(j: int, b: int, params: RapporParams,
                           stream: BitStream) -> AffineFn:
    """Return phi uniform over the affine functions with bool(phi(z(j))) == b.

    The non-constant coefficients are uniform, the value phi(z(j)) is
    uniform over [0, threshold) or [threshold, p), and phi_0 is solved
    for from them.
    """
    point = params.point(j)
    p, threshold = params.p, params.threshold
    if (b and threshold == 0) or (not b and threshold == p):
        raise(ValueError(f"No affine function has bool(phi(j)) = {b} with "
                         f"alpha0 = {params.alpha0}"))

    linear = [uniform_mod(stream, p) for _ in range(params.dim)]
    if b:
        value = uniform_mod(stream, threshold)
    else:
        value = threshold + uniform_mod(stream, p - threshold)

    offset = sum(z * phi for z, phi in zip(point, linear))
    return AffineFn(((value - offset) % p, *linear), p)


def pi_rappor_encode(j: int, params: RapporParams,
                     stream: BitStream) -> AffineFn:
    """Return the PI-RAPPOR report of value j."""
    _check_index(j, params)
    b = bernoulli(stream, params.alpha1)
    return sample_phi_conditioned(j, b, params, stream)


def gen_pi_rappor_encode(j: int, params: RapporParams,
                         stream: BitStream) -> AffineFn:
    """Return the generalized PI-RAPPOR report (d + 1 coefficients over GF(q))."""
    if params.p ** params.dim - 1 < params.k:
        raise(ValueError(f"k = {params.k} exceeds q^d - 1"))
    return pi_rappor_encode(j, params, stream)


def debias(ones: Union[int, np.ndarray], n: int,
           params: RapporParams) -> Union[float, np.ndarray]:
    """Return (ones - alpha0 n) / (alpha1 - alpha0)."""
    alpha0, alpha1 = float(params.alpha0), float(params.alpha1)
    if alpha1 == alpha0:
        raise(ZeroDivisionError("alpha1 == alpha0"))
    return (ones - alpha0 * n) / (alpha1 - alpha0)


@dataclass
class CountEstimate(object):
    """Debiased counts of the values 1, ..., k."""

    estimates: np.ndarray
    n: int
    params: RapporParams

    def __post_init__(self):
        """Check the estimates are finite."""
        self.estimates = np.asarray(self.estimates, dtype=np.float64)
        if not np.all(np.isfinite(self.estimates)):
            raise(ValueError("Count estimates are not finite"))

    def __getitem__(self, j: int) -> float:
        """Return the estimate of value j (1 based)."""
        _check_index(j, self.params)
        return float(self.estimates[j - 1])

    def l2_error(self, counts: Sequence[float]) -> float:
        """Return the squared l2 distance to the true counts."""
        return float(np.sum((self.estimates - np.asarray(counts)) ** 2))

    def linf_error(self, counts: Sequence[float]) -> float:
        """Return the l-infinity distance to the true counts."""
        return float(np.max(np.abs(self.estimates - np.asarray(counts))))


def true_counts(values: Iterable[int], k: int) -> np.ndarray:
    """Return c(S), the count of each value 1, ..., k."""
    counts = np.zeros(k, dtype=np.int64)
    for value in values:
        counts[value - 1] += 1
    return counts


def frequency_oracle(reports: Sequence[AffineFn], j: int,
                     params: RapporParams) -> float:
    """Return the debiased count of value j."""
    _check_index(j, params)
    ones = sum(report.bit(j, params) for report in reports)
    return float(debias(ones, len(reports), params))


def _coefficients(reports: Sequence[AffineFn],
                  params: RapporParams) -> np.ndarray:
    """Return the (n, dim + 1) coefficient array of the reports."""
    array = np.array([report.coefficients for report in reports],
                     dtype=np.int64)
    if array.shape[1] != params.coefficient_count:
        raise(ValueError(f"Reports have {array.shape[1]} coefficients, "
                         f"params expect {params.coefficient_count}"))
    return array


def histogram(reports: Sequence[AffineFn],
              params: RapporParams) -> CountEstimate:
    """Return the debiased counts of every value from PI-RAPPOR reports."""
    if not reports:
        raise(ValueError("No reports"))
    values = affine_eval_many(_coefficients(reports, params), params.points(),
                              params.p)
    ones = np.sum(bool_map_many(values, params.decode_threshold), axis=0)
    return CountEstimate(debias(ones, len(reports), params), len(reports),
                         params)


def gen_histogram(reports: Sequence[AffineFn],
                  params: RapporParams) -> CountEstimate:
    """Decode every report at every value, one at a time."""
    if not reports:
        raise(ValueError("No reports"))
    ones = np.zeros(params.k, dtype=np.int64)
    for report in reports:
        for j in range(1, params.k + 1):
            ones[j - 1] += report.bit(j, params)
    return CountEstimate(debias(ones, len(reports), params), len(reports),
                         params)


def gen_histogram_fast(reports: Sequence[AffineFn],
                       params: RapporParams) -> CountEstimate:
    """Decode each distinct report once, weighted by its multiplicity."""
    if not reports:
        raise(ValueError("No reports"))
    multiplicity = Counter(report.coefficients for report in reports)
    distinct = list(multiplicity)
    info_print(f"{len(reports)} reports, {len(distinct)} distinct", tag=2)

    values = affine_eval_many(np.array(distinct, dtype=np.int64),
                              params.points(), params.p)
    weights = np.array([multiplicity[phi] for phi in distinct],
                       dtype=np.int64)
    ones = weights @ bool_map_many(values, params.decode_threshold)
    return CountEstimate(debias(ones, len(reports), params), len(reports),
                         params)


def rappor_histogram(bit_reports: Sequence[np.ndarray],
                     params: RapporParams) -> CountEstimate:
    """Return the debiased counts from RAPPOR bit vectors."""
    if not len(bit_reports):
        raise(ValueError("No reports"))
    ones = np.sum(np.asarray(bit_reports, dtype=np.int64), axis=0)
    if ones.shape != (params.k,):
        raise(ValueError(f"Reports have {ones.shape} bits, expected "
                         f"{params.k}"))
    return CountEstimate(debias(ones, len(bit_reports), params),
                         len(bit_reports), params)


def theoretical_variance(params: RapporParams, n: int, c_j: float) -> float:
    """Return Var[c~_j] for n reports, c_j of which hold value j."""
    alpha0, alpha1 = params.alpha0, params.alpha1
    if alpha1 == alpha0:
        raise(ZeroDivisionError("alpha1 == alpha0"))
    gap = alpha1 - alpha0
    return float(c_j * (1 - alpha0 - alpha1) / gap
                 + n * alpha0 * (1 - alpha0) / gap ** 2)


def expected_l2_error(params: RapporParams, n: int,
                      counts: Sequence[float]) -> float:
    """Return E||c~ - c||^2, the sum of the per-value variances."""
    return sum(theoretical_variance(params, n, c_j) for c_j in counts)


def affine_from_seed(value: int, params: RapporParams) -> AffineFn:
    """Return the affine function numbered value (base p digits)."""
    coefficients = []
    for _ in range(params.coefficient_count):
        value, digit = divmod(value, params.p)
        coefficients.append(digit)
    return AffineFn(tuple(reversed(coefficients)), params.p)


def affine_to_seed(phi: AffineFn, params: RapporParams) -> int:
    """Return the number of phi, the inverse of affine_from_seed."""
    value = 0
    for coefficient in phi.coefficients:
        value = value * params.p + coefficient
    return value


def exact_report_law(j: int, params: RapporParams) -> dict:
    """Return {coefficients: probability} of pi_rappor_encode on j, exactly."""
    _check_index(j, params)
    p, threshold = params.p, params.threshold
    total = p ** params.coefficient_count
    if total > 1 << 20:
        raise(ValueError(f"{total} affine functions is too many to "
                         f"enumerate"))

    per_value = p ** params.dim
    one = params.alpha1 / (threshold * per_value)
    zero = (1 - params.alpha1) / ((p - threshold) * per_value)

    law = {}
    for value in range(total):
        phi = affine_from_seed(value, params)
        law[phi.coefficients] = one if phi.bit(j, params) else zero
    return law


def rappor_reference_law(params: RapporParams) -> dict:
    """Return the exact product Bern(alpha0)^k law of RAPPOR reports."""
    if params.k > 16:
        raise(ValueError(f"2^{params.k} reports is too many to enumerate"))
    law = {}
    for bits in itertools.product((0, 1), repeat=params.k):
        ones = sum(bits)
        law[bits] = (params.alpha0 ** ones
                     * (1 - params.alpha0) ** (params.k - ones))
    return law


def pi_rappor_as_compression(params: RapporParams
                             ) -> tuple[RandomizerSpec, PrgSpec]:
    """Return RAPPOR as a randomizer and the affine functions as its generator.

    The reference input is k uniform elements of GF(p), each drawn with
    uniform_mod from field_bits(p) bits; element j decodes to
    bool(element).  The generator maps the seed numbering phi to the
    elements phi(z(1)), ..., phi(z(k)), so the compressed randomizer emits
    affine functions with the PI-RAPPOR law.
    """
    k, p = params.k, params.p
    width = field_bits(p)
    thr = params.decode_threshold
    ratio_one = params.alpha1 / params.alpha0
    ratio_zero = (1 - params.alpha1) / (1 - params.alpha0)

    def ref_sample(stream: BitStream) -> tuple:
        return tuple(bool_map(uniform_mod(stream, p), thr) for _ in range(k))

    def density_ratio(j: int, y: tuple) -> Fraction:
        return ratio_one if y[j - 1] else ratio_zero

    def generator(value: int) -> int:
        phi = affine_from_seed(value, params)
        elements = 0
        for j in range(1, k + 1):
            elements = (elements << width) | phi(params.point(j)).value
        return elements

    spec = RandomizerSpec(
        t=width * k, ref_sample=ref_sample, density_ratio=density_ratio,
        eps=math.log(max(ratio_one, 1 / ratio_zero)),
        reference_law=rappor_reference_law(params),
        inputs=tuple(range(1, k + 1)), name=f"rappor(k={k}, p={p})")

    count = p ** params.coefficient_count
    prg = function_prg((count - 1).bit_length(), width * k, generator,
                       seed_count=count)
    return spec, prg
