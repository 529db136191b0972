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

"""Seed compression of local randomizers.

A randomizer is described by a reference sampler, which decodes t
uniform bits into an output y, and by its density ratio pi_x(y), the
probability of y on input x over its reference probability.  The client
draws seeds s and accepts the decoded output with probability
pi_x(y) / e^eps, at most J times; only the accepted seed is sent.  The
server decodes the seed with the same generator.

The exact oracles at the bottom enumerate small seed spaces to give the
law of the compressed randomizer, and the fooling gap of a generator
against the threshold tests ind{pi_x(y) >= theta}.
"""

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Hashable, Iterable, Optional, Sequence

import numpy as np

from .randcore import (BitStream, PrgSpec, Seed, bernoulli, derive_stream,
                       expand)
from .utils import SpecViolation, info_print

# Absolute slack allowed on density ratios computed in floating point.
RATIO_TOLERANCE = 1e-12

# Largest seed space (in bits) the exact oracles enumerate.
MAX_ENUM_BITS = 20

# Largest reference input (in bits) enumerated when no reference law is given.
MAX_REFERENCE_BITS = 16

PRIVACY_VARIANTS = ('deletion', 'replacement')


def output_key(y: Any) -> Hashable:
    """Return a hashable key for an output value."""
    if isinstance(y, np.ndarray):
        return tuple(y.tolist())
    if isinstance(y, list):
        return tuple(y)
    return y


@dataclass(frozen=True)
class RandomizerSpec(object):
    """A t-samplable local randomizer.

    ref_sample decodes a BitStream of t bits into an output.
    density_ratio(x, y) is the probability of y on input x over its
    reference probability.  reference_law optionally maps output keys to
    their exact reference probabilities; without it the reference is
    enumerated from all t-bit strings when t is small.
    """

    t: int
    ref_sample: Callable[[BitStream], Any]
    density_ratio: Callable[[Any, Any], Any]
    eps: float
    delta: float = 0.0
    privacy_variant: str = 'deletion'
    reference_law: Optional[dict] = field(default=None, compare=False)
    inputs: tuple = ()
    name: str = 'randomizer'

    def __post_init__(self):
        """Validate the privacy parameters."""
        if self.t < 1:
            raise(ValueError(f"Reference input must be at least 1 bit: "
                             f"{self.t}"))
        if not self.eps > 0:
            raise(ValueError(f"eps must be positive: {self.eps}"))
        if not 0 <= self.delta < 1:
            raise(ValueError(f"delta outside [0, 1): {self.delta}"))
        if self.privacy_variant not in PRIVACY_VARIANTS:
            raise(ValueError(f"Unknown privacy variant: "
                             f"{self.privacy_variant}"))

    @property
    def exp_eps(self) -> float:
        """e^eps."""
        return math.exp(self.eps)

    @property
    def is_pure(self) -> bool:
        """True for pure (delta = 0) randomizers."""
        return self.delta == 0

    def decode_bits(self, bits: bytes) -> Any:
        """Return the output decoded from a t-bit string."""
        return self.ref_sample(BitStream.from_bits(bits, self.t))

    def reference_outcomes(self) -> dict:
        """Return {output key: (output, probability)} under true randomness."""
        if self.reference_law is not None:
            return {output_key(y): (y, prob)
                    for y, prob in self.reference_law.items()}

        if self.t > MAX_REFERENCE_BITS:
            raise(ValueError(f"Reference input of {self.t} bits is too large "
                             f"to enumerate; give a reference_law"))

        weight = Fraction(1, 1 << self.t)
        outcomes = {}
        for value in range(1 << self.t):
            y = self.ref_sample(BitStream.from_int(value, self.t))
            key = output_key(y)
            previous = outcomes.get(key, (y, 0))[1]
            outcomes[key] = (y, previous + weight)
        return outcomes


def mean_ratio(spec: RandomizerSpec, x: Any, truncate: bool = False) -> float:
    """Return E[pi_x(y)] under the reference law (truncated at e^eps)."""
    total = 0.0
    for y, prob in spec.reference_outcomes().values():
        ratio = float(spec.density_ratio(x, y))
        if truncate:
            ratio = min(ratio, spec.exp_eps)
        total += float(prob) * ratio
    return total


@dataclass(frozen=True)
class CompressionConfig(object):
    """The rejection loop settings: failure mass, generator and J."""

    gamma: float
    prg: PrgSpec
    max_iters: int

    def __post_init__(self):
        """Check the ranges."""
        if not 0 < self.gamma < 1:
            raise(ValueError(f"gamma outside (0, 1): {self.gamma}"))
        if self.max_iters < 1:
            raise(ValueError(f"max_iters must be positive: {self.max_iters}"))

    @classmethod
    def for_spec(cls, spec: RandomizerSpec, gamma: float,
                 prg: PrgSpec) -> 'CompressionConfig':
        """Return the config with J = ceil(e^eps ln(1/gamma) / (1 - delta))."""
        if not 0 < gamma < 1:
            raise(ValueError(f"gamma outside (0, 1): {gamma}"))
        iters = spec.exp_eps * math.log(1 / gamma) / (1 - spec.delta)
        # Round away float drift before the ceiling.
        max_iters = max(1, math.ceil(iters - 1e-9))
        info_print(f"{spec.name}: J = {max_iters} for gamma={gamma}", tag=2)
        return cls(gamma, prg, max_iters)


def acceptance_probability(spec: RandomizerSpec, x: Any, y: Any,
                           truncate: bool) -> float:
    """Return pi_x(y) / e^eps, clamped to [0, 1].

    Without truncation a ratio above e^eps (beyond the tolerance) is a
    SpecViolation.
    """
    ratio = float(spec.density_ratio(x, y))
    limit = spec.exp_eps
    if not truncate and ratio > limit * (1 + RATIO_TOLERANCE) + RATIO_TOLERANCE:
        raise SpecViolation(f"{spec.name}: density ratio {ratio} exceeds "
                            f"e^eps = {limit}")
    return min(1.0, max(0.0, ratio / limit))


def decompress(seed: Seed, spec: RandomizerSpec, prg: PrgSpec) -> Any:
    """Return the output the seed decodes to."""
    if prg.output_bits != spec.t:
        raise(ValueError(f"Generator outputs {prg.output_bits} bits, "
                         f"randomizer reads {spec.t}"))
    return spec.ref_sample(BitStream.from_seed(seed, prg))


def _rejection_loop(x: Any, spec: RandomizerSpec, cfg: CompressionConfig,
                    entropy: BitStream, truncate: bool) -> Seed:
    """Run the rejection loop and return the emitted seed."""
    seed = None
    for iteration in range(1, cfg.max_iters + 1):
        seed = Seed.random(entropy, cfg.prg)
        y = decompress(seed, spec, cfg.prg)
        if bernoulli(entropy, acceptance_probability(spec, x, y, truncate)):
            info_print(f"{spec.name}: accepted at iteration {iteration}",
                       tag=3)
            return seed

    info_print(f"{spec.name}: no acceptance in {cfg.max_iters} iterations, "
               f"sending the last seed", tag=3)
    return seed


def compress_pure(x: Any, spec: RandomizerSpec, cfg: CompressionConfig,
                  entropy: BitStream) -> Seed:
    """Compress a pure randomizer's report on x into one seed."""
    if not spec.is_pure:
        raise(ValueError(f"{spec.name} has delta={spec.delta}, use "
                         f"compress_approx"))
    return _rejection_loop(x, spec, cfg, entropy, truncate=False)


def compress_approx(x: Any, spec: RandomizerSpec, cfg: CompressionConfig,
                    entropy: BitStream) -> Seed:
    """Compress an (eps, delta) randomizer's report, truncating ratios at e^eps."""
    return _rejection_loop(x, spec, cfg, entropy, truncate=True)


def compress(x: Any, spec: RandomizerSpec, cfg: CompressionConfig,
             entropy: BitStream) -> Seed:
    """Compress with compress_pure or compress_approx as delta requires."""
    if spec.is_pure:
        return compress_pure(x, spec, cfg, entropy)
    return compress_approx(x, spec, cfg, entropy)


@dataclass
class ExactLaw(object):
    """The exact law of a compressed randomizer on one input.

    seed_law is the stationary law of R[G] (seeds weighted by their
    density ratios), loop_law the law of the J-iteration rejection loop.
    The decoded laws map output keys to probabilities.  target_law is
    the randomizer's own output law when the reference law is known.
    """

    x: Any
    seeds: list
    outputs: list
    ratios: np.ndarray
    acceptance: np.ndarray
    seed_law: np.ndarray
    loop_law: np.ndarray
    decoded_law: dict
    decoded_loop_law: dict
    acceptance_rate: float
    mean_ratio: float
    max_iters: int
    target_law: Optional[dict] = None

    @property
    def reference_seed_law(self) -> np.ndarray:
        """The uniform law over the seeds in use."""
        return np.full(len(self.seeds), 1 / len(self.seeds))


def _decoded(outputs: Sequence, law: np.ndarray) -> dict:
    """Fold a law over seeds into a law over output keys."""
    decoded = defaultdict(float)
    for y, prob in zip(outputs, law):
        decoded[output_key(y)] += float(prob)
    return dict(decoded)


def exact_output_distribution(x: Any, spec: RandomizerSpec, prg: PrgSpec,
                              gamma: float = 0.01,
                              max_iters: Optional[int] = None) -> ExactLaw:
    """Enumerate every seed and return the exact law of R[G] on x.

    With N seeds, per-seed acceptance a_s and mean acceptance A, the loop
    emits seed s with probability

        a_s (1 - (1 - A)^J) / (N A) + (1 - A)^(J - 1) (1 - a_s) / N
    """
    if prg.count > 1 << MAX_ENUM_BITS:
        raise(ValueError(f"{prg.count} seeds is too many to enumerate "
                         f"(limit 2^{MAX_ENUM_BITS})"))
    if max_iters is None:
        max_iters = CompressionConfig.for_spec(spec, gamma, prg).max_iters

    truncate = not spec.is_pure
    seeds = list(prg.seeds())
    outputs = [decompress(seed, spec, prg) for seed in seeds]
    ratios = np.array([float(spec.density_ratio(x, y)) for y in outputs])
    acceptance = np.array([acceptance_probability(spec, x, y, truncate)
                           for y in outputs])
    if truncate:
        ratios = np.minimum(ratios, spec.exp_eps)

    count = len(seeds)
    seed_law = ratios / ratios.sum()
    rate = float(acceptance.mean())
    if rate > 0:
        miss = (1 - rate) ** max_iters
        loop_law = (acceptance * (1 - miss) / (count * rate)
                    + (1 - rate) ** (max_iters - 1) * (1 - acceptance) / count)
    else:
        loop_law = np.full(count, 1 / count)

    target = None
    try:
        outcomes = spec.reference_outcomes()
    except ValueError:
        outcomes = None
    if outcomes is not None:
        target = {key: float(prob) * float(spec.density_ratio(x, y))
                  for key, (y, prob) in outcomes.items()}

    info_print(f"{spec.name}: x={x!r} A={rate:.6g} over {count} seeds",
               tag=2)
    return ExactLaw(x=x, seeds=seeds, outputs=outputs, ratios=ratios,
                    acceptance=acceptance, seed_law=seed_law,
                    loop_law=loop_law,
                    decoded_law=_decoded(outputs, seed_law),
                    decoded_loop_law=_decoded(outputs, loop_law),
                    acceptance_rate=rate, mean_ratio=float(ratios.mean()),
                    max_iters=max_iters, target_law=target)


def tv_distance(law_a: dict, law_b: dict) -> float:
    """Return the total variation distance of two laws over keys."""
    keys = set(law_a) | set(law_b)
    return 0.5 * sum(abs(law_a.get(key, 0.0) - law_b.get(key, 0.0))
                     for key in keys)


def deletion_ratio_bounds(law: ExactLaw,
                          loop: bool = False) -> tuple[float, float]:
    """Return (max, min) over seeds of mu_x(s) / rho_G(s)."""
    seed_law = law.loop_law if loop else law.seed_law
    ratios = seed_law / law.reference_seed_law
    return float(ratios.max()), float(ratios.min())


def replacement_ratio_bound(law_a: ExactLaw, law_b: ExactLaw,
                            loop: bool = False) -> float:
    """Return the max over seeds of mu_a(s) / mu_b(s)."""
    first = law_a.loop_law if loop else law_a.seed_law
    second = law_b.loop_law if loop else law_b.seed_law
    if len(first) != len(second):
        raise(ValueError("Laws over different seed spaces"))
    with np.errstate(divide='ignore'):
        return float(np.max(first / second))


@dataclass(frozen=True)
class FoolingGap(object):
    """A measured fooling gap and where it is attained."""

    beta: float
    x: Any
    theta: float
    exact: bool
    half_width: float = 0.0


def _tail_probabilities(values: np.ndarray, weights: np.ndarray,
                        thetas: np.ndarray) -> np.ndarray:
    """Return P[value >= theta] for each theta."""
    order = np.argsort(values)
    values = values[order]
    tails = np.concatenate((np.cumsum(weights[order][::-1])[::-1], [0.0]))
    return tails[np.searchsorted(values, thetas, side='left')]


def estimate_fooling_gap(spec: RandomizerSpec, prg: PrgSpec,
                         probe_inputs: Iterable,
                         thetas: Optional[Sequence[float]] = None,
                         samples: int = 4096,
                         entropy: Optional[BitStream] = None) -> FoolingGap:
    """Return the largest gap between seeded and truly random threshold tests.

    For each probe x and threshold theta this compares
    P_s[pi_x(decode(G(s))) >= theta] with P_r[pi_x(decode(r)) >= theta].
    Each side is enumerated when it is small enough and sampled
    otherwise, in which case half_width is a three sigma bound on the
    sampling error.  Without thetas the grid is every breakpoint of the
    enumerated tails (exact) or 256 points on [0, e^eps].
    """
    probe_inputs = list(probe_inputs)
    if not probe_inputs:
        raise(ValueError("No probe inputs"))
    if entropy is None:
        entropy = derive_stream(0, 'fooling-gap', spec.name)

    seed_exact = prg.count <= 1 << MAX_ENUM_BITS
    if seed_exact:
        seed_outputs = [decompress(seed, spec, prg) for seed in prg.seeds()]
    else:
        seed_outputs = [decompress(Seed.random(entropy, prg), spec, prg)
                        for _ in range(samples)]
    seed_weights = np.full(len(seed_outputs), 1 / len(seed_outputs))

    try:
        outcomes = list(spec.reference_outcomes().values())
        ref_exact = True
    except ValueError:
        ref_exact = False
        nbytes = (spec.t + 7) // 8
        outcomes = [(spec.decode_bits(entropy.read_bytes(nbytes)),
                     Fraction(1, samples)) for _ in range(samples)]
    ref_outputs = [y for y, _ in outcomes]
    ref_weights = np.array([float(prob) for _, prob in outcomes])

    exact = seed_exact and ref_exact
    half_width = sum(3 * math.sqrt(0.25 / samples)
                     for side_exact in (seed_exact, ref_exact)
                     if not side_exact)

    best = FoolingGap(0.0, probe_inputs[0], 0.0, exact, half_width)
    for x in probe_inputs:
        seed_values = np.array([float(spec.density_ratio(x, y))
                                for y in seed_outputs])
        ref_values = np.array([float(spec.density_ratio(x, y))
                               for y in ref_outputs])
        if thetas is not None:
            grid = np.asarray(thetas, dtype=float)
        elif exact:
            grid = np.union1d(seed_values, ref_values)
        else:
            grid = np.linspace(0, spec.exp_eps, 256)

        gaps = np.abs(_tail_probabilities(seed_values, seed_weights, grid)
                      - _tail_probabilities(ref_values, ref_weights, grid))
        index = int(np.argmax(gaps))
        if gaps[index] > best.beta:
            best = FoolingGap(float(gaps[index]), x, float(grid[index]),
                              exact, half_width)

    info_print(f"{spec.name}: fooling gap {best.beta:.6g} at x={best.x!r} "
               f"theta={best.theta:.6g}", tag=2)
    return best


def deletion_privacy_bound(spec: RandomizerSpec, beta: float) -> float:
    """Return the deletion eps of R[G] for a generator with fooling gap beta.

    This is eps + 2 e^eps beta, plus 2 delta for (eps, delta) randomizers.
    """
    return spec.eps + 2 * spec.delta + 2 * spec.exp_eps * beta


def replacement_privacy_bound(spec: RandomizerSpec, replacement_eps: float,
                              beta: float) -> float:
    """Return the replacement eps of R[G] given the randomizer's own."""
    return replacement_eps + 4 * spec.exp_eps * beta


def empirical_sphere_prg(spec: RandomizerSpec, n: int,
                         master_seed: Any = 0) -> PrgSpec:
    """Return the table generator over n reference inputs drawn once.

    Seeds are indices of ceil(log2 n) bits; seed i expands to the i-th of
    n t-bit strings read from the stream derived from master_seed.
    """
    if n < 1:
        raise(ValueError(f"Table generator needs at least one entry: {n}"))

    stream = derive_stream(master_seed, 'empirical-table', spec.name)
    nbytes = (spec.t + 7) // 8
    shift = 8 * nbytes - spec.t
    table = tuple(int.from_bytes(stream.read_bytes(nbytes), 'big') >> shift
                  for _ in range(n))
    return PrgSpec(seed_bits=(n - 1).bit_length(), output_bits=spec.t,
                   family='table', seed_count=n, table=table)


def materialize(spec: RandomizerSpec, prg: PrgSpec) -> list:
    """Return the decoded output of every seed of prg, in seed order."""
    return [spec.decode_bits(expand(seed, prg)) for seed in prg.seeds()]
