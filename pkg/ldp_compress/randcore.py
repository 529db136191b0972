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

"""Deterministic seeded randomness.

A Seed expands under a PrgSpec into a t-bit string.  Bit strings are
held as bytes with the first bit in the high bit of the first byte, and
any padding bits after bit t set to zero.  A BitStream reads such a
string (or an unbounded keyed stream) sequentially, and the samplers
here consume BitStreams so the client and the server draw the same
values from the same seed.

Keyed expansion is SHAKE-256 in counter mode:

    chunk_i = SHAKE256(material || i as 8 bytes little endian)[:1024]
"""

import hashlib
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Union

import numpy as np
from scipy.special import ndtri

from .utils import StreamExhausted, info_print

CHUNK_BYTES = 1024

DEFAULT_SEED_BITS = 256

PRG_FAMILIES = ('shake256', 'identity', 'constant', 'table', 'function')

# The family byte written in wire headers.
FAMILY_IDS = {name: number for number, name in enumerate(PRG_FAMILIES)}

_TWO_M53 = 2.0 ** -53


def keystream(material: bytes, nbytes: int, start: int = 0) -> bytes:
    """Return nbytes of the counter-mode stream keyed by material."""
    out = bytearray()
    index = start
    while len(out) < nbytes:
        counter = index.to_bytes(8, 'little')
        out += hashlib.shake_256(material + counter).digest(CHUNK_BYTES)
        index += 1
    return bytes(out[:nbytes])


def int_to_bits(value: int, nbits: int) -> bytes:
    """Return the nbits-bit string of value, most significant bit first."""
    if value < 0 or value >> nbits:
        raise(ValueError(f"{value} doesn't fit in {nbits} bits"))
    nbytes = (nbits + 7) // 8
    return (value << (8 * nbytes - nbits)).to_bytes(nbytes, 'big')


def bits_to_int(bits: bytes, nbits: int) -> int:
    """Return the integer whose nbits-bit string is bits."""
    return int.from_bytes(bits, 'big') >> (8 * len(bits) - nbits)


def _mask_tail(data: bytes, nbits: int) -> bytes:
    """Return data cut to nbits bits with the padding bits cleared."""
    data = bytearray(data[:(nbits + 7) // 8])
    spare = 8 * len(data) - nbits
    if spare:
        data[-1] &= (0xff << spare) & 0xff
    return bytes(data)


@dataclass(frozen=True)
class Seed(object):
    """A fixed-width seed, the whole of a compressed report."""

    value: int
    bits: int = DEFAULT_SEED_BITS

    def __post_init__(self):
        """Check the value fits the width."""
        if self.bits < 0:
            raise(ValueError(f"Negative seed width: {self.bits}"))
        if self.value < 0 or self.value >> self.bits:
            raise(ValueError(f"Seed value doesn't fit in {self.bits} bits"))

    @property
    def nbytes(self) -> int:
        """The serialized width in bytes."""
        return (self.bits + 7) // 8

    def to_bytes(self) -> bytes:
        """Return the fixed-width big endian bytes of the seed."""
        return self.value.to_bytes(self.nbytes, 'big')

    @classmethod
    def from_bytes(cls, data: bytes, bits: int) -> 'Seed':
        """Read a seed written by to_bytes."""
        if len(data) != (bits + 7) // 8:
            raise(ValueError(f"A {bits}-bit seed takes {(bits + 7) // 8} "
                             f"bytes, got {len(data)}"))
        return cls(int.from_bytes(data, 'big'), bits)

    @classmethod
    def from_int(cls, value: int, bits: int) -> 'Seed':
        """Return the seed with the given value."""
        return cls(value, bits)

    def to_int(self) -> int:
        """Return the seed value."""
        return self.value

    @classmethod
    def random(cls, stream: 'BitStream', spec: 'PrgSpec') -> 'Seed':
        """Draw a seed uniformly over the seeds of spec."""
        return cls(uniform_mod(stream, spec.count), spec.seed_bits)


@dataclass(frozen=True)
class PrgSpec(object):
    """How seeds of seed_bits bits expand into output_bits bits.

    family is one of PRG_FAMILIES.  key keys the 'shake256', 'constant'
    and 'table' families.  seed_count limits the seeds in use (table
    generators hold N entries indexed by ceil(log2 N)-bit seeds).
    assumed_strength is the (T, beta) pair the generator is assumed to
    have; it is carried along and never checked.
    """

    seed_bits: int = DEFAULT_SEED_BITS
    output_bits: int = DEFAULT_SEED_BITS
    family: str = 'shake256'
    key: bytes = b''
    seed_count: Optional[int] = None
    assumed_strength: tuple = (None, None)
    function: Optional[Callable[[int], int]] = field(default=None,
                                                     compare=False,
                                                     repr=False)
    table: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        """Validate the family against the widths."""
        if self.family not in PRG_FAMILIES:
            raise(ValueError(f"Unknown generator family: {self.family}"))
        if self.seed_bits < 0 or self.output_bits < 1:
            raise(ValueError(f"Invalid widths: seed {self.seed_bits} bits, "
                             f"output {self.output_bits} bits"))
        if self.family == 'identity' and self.seed_bits != self.output_bits:
            raise(ValueError(f"Identity generator needs seed_bits == "
                             f"output_bits, got {self.seed_bits} and "
                             f"{self.output_bits}"))
        if self.family == 'function' and self.function is None:
            raise(ValueError("A 'function' generator needs a function"))
        if self.seed_count is not None:
            if not 1 <= self.seed_count <= 1 << self.seed_bits:
                raise(ValueError(f"seed_count {self.seed_count} outside "
                                 f"[1, 2^{self.seed_bits}]"))
        if self.table and len(self.table) != self.count:
            raise(ValueError(f"Table has {len(self.table)} entries for "
                             f"{self.count} seeds"))

    @property
    def count(self) -> int:
        """The number of seeds in use."""
        if self.seed_count is None:
            return 1 << self.seed_bits
        return self.seed_count

    @property
    def family_id(self) -> int:
        """The family byte used in wire headers."""
        return FAMILY_IDS[self.family]

    def seeds(self):
        """Yield every seed in use, in order."""
        for value in range(self.count):
            yield Seed(value, self.seed_bits)


def identity_prg(bits: int) -> PrgSpec:
    """Return the identity generator on bits-bit strings."""
    return PrgSpec(seed_bits=bits, output_bits=bits, family='identity')


def constant_prg(seed_bits: int, output_bits: int,
                 key: bytes = b'') -> PrgSpec:
    """Return the generator mapping every seed to one fixed string."""
    return PrgSpec(seed_bits=seed_bits, output_bits=output_bits,
                   family='constant', key=key)


def function_prg(seed_bits: int, output_bits: int,
                 function: Callable[[int], int],
                 seed_count: Optional[int] = None) -> PrgSpec:
    """Return the generator given by a seed -> t-bit integer function."""
    return PrgSpec(seed_bits=seed_bits, output_bits=output_bits,
                   family='function', function=function,
                   seed_count=seed_count)


def expand(seed: Seed, spec: PrgSpec) -> bytes:
    """Return the output_bits-bit expansion of seed under spec."""
    if seed.bits != spec.seed_bits:
        raise(ValueError(f"Seed is {seed.bits} bits, generator takes "
                         f"{spec.seed_bits}"))
    if seed.value >= spec.count:
        raise(ValueError(f"Seed {seed.value} outside the "
                         f"{spec.count} seeds in use"))

    t = spec.output_bits
    nbytes = (t + 7) // 8

    if spec.family == 'identity':
        return int_to_bits(seed.value, t)
    elif spec.family == 'function':
        return int_to_bits(spec.function(seed.value), t)
    elif spec.family == 'table' and spec.table:
        return int_to_bits(spec.table[seed.value], t)
    elif spec.family == 'constant':
        material = spec.key + b'constant'
    else:
        material = spec.key + b'seed' + seed.to_bytes()

    return _mask_tail(keystream(material, nbytes), t)


class BitStream(object):
    """Read a bit string sequentially.

    Bounded streams wrap a fixed string (a seed expansion or a counter
    value) and raise StreamExhausted when read past the end.  Unbounded
    streams read a keyed counter-mode stream chunk by chunk.
    """

    def __init__(self, data: bytes = b'', limit: Optional[int] = None,
                 material: Optional[bytes] = None):
        """Initialize the stream over data, or over the keyed material."""
        self._buffer = bytearray(data)
        self._pos = 0
        self._consumed = 0
        self._limit = limit
        self._material = material
        self._next_chunk = 0

        if material is None and limit is None:
            self._limit = 8 * len(data)

    def __repr__(self) -> str:
        """Return a representation of the stream."""
        kind = 'unbounded' if self._material is not None else 'bounded'
        return f"BitStream({kind}, consumed={self._consumed})"

    @classmethod
    def from_seed(cls, seed: Seed, spec: PrgSpec) -> 'BitStream':
        """Return the bounded stream of the expansion of seed."""
        return cls(expand(seed, spec), spec.output_bits)

    @classmethod
    def from_int(cls, value: int, nbits: int) -> 'BitStream':
        """Return the bounded stream of the nbits-bit string of value."""
        return cls(int_to_bits(value, nbits), nbits)

    @classmethod
    def from_bits(cls, bits: bytes, nbits: int) -> 'BitStream':
        """Return the bounded stream of the first nbits bits of bits."""
        return cls(_mask_tail(bits, nbits), nbits)

    @classmethod
    def entropy(cls, label: Optional[bytes] = None) -> 'BitStream':
        """Return an unbounded stream keyed by label, or by os.urandom."""
        if label is None:
            label = os.urandom(32)
        return cls(material=b'ldpc-entropy' + label)

    @property
    def bits_consumed(self) -> int:
        """The number of bits read so far."""
        return self._consumed

    @property
    def bits_left(self) -> Optional[int]:
        """The bits left in a bounded stream, None if unbounded."""
        if self._limit is None:
            return None
        return self._limit - self._consumed

    def _fill(self, nbits: int):
        """Make nbits unread bits available, or raise StreamExhausted."""
        if self._limit is not None and self._consumed + nbits > self._limit:
            raise StreamExhausted(f"read of {nbits} bits after "
                                  f"{self._consumed} of {self._limit}")

        # Drop bytes already read.
        if self._pos >= 8 * CHUNK_BYTES:
            drop = self._pos // 8
            del self._buffer[:drop]
            self._pos -= 8 * drop

        while 8 * len(self._buffer) - self._pos < nbits:
            self._buffer += keystream(self._material, CHUNK_BYTES,
                                      self._next_chunk)
            self._next_chunk += 1

    def read_bits(self, nbits: int) -> int:
        """Read nbits bits and return them as an integer."""
        if nbits < 0:
            raise(ValueError(f"Negative read: {nbits}"))
        if nbits == 0:
            return 0
        self._fill(nbits)

        first = self._pos // 8
        last = (self._pos + nbits + 7) // 8
        window = int.from_bytes(self._buffer[first:last], 'big')
        window >>= 8 * last - self._pos - nbits

        self._pos += nbits
        self._consumed += nbits
        return window & ((1 << nbits) - 1)

    def read_bytes(self, nbytes: int) -> bytes:
        """Read 8 * nbytes bits and return them as bytes."""
        if self._pos % 8:
            return self.read_bits(8 * nbytes).to_bytes(nbytes, 'big')
        self._fill(8 * nbytes)

        first = self._pos // 8
        data = bytes(self._buffer[first:first + nbytes])
        self._pos += 8 * nbytes
        self._consumed += 8 * nbytes
        return data

    def read_uniform_doubles(self, count: int) -> np.ndarray:
        """Read count 64-bit words and return uniform doubles in (0, 1).

        Each word is little endian; its top 53 bits k give (k + 1/2) / 2^53.
        """
        words = np.frombuffer(self.read_bytes(8 * count), dtype='<u8')
        return ((words >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53


def _label_bytes(label: Union[int, str, bytes]) -> bytes:
    """Return a length-prefixed encoding of one derivation label."""
    if isinstance(label, bytes):
        data = label
    elif isinstance(label, str):
        data = label.encode('utf-8')
    else:
        data = int(label).to_bytes(8, 'little', signed=True)
    return len(data).to_bytes(2, 'little') + data


def derive_stream(master_seed: Union[int, bytes],
                  *labels: Union[int, str, bytes]) -> BitStream:
    """Return the unbounded stream for the labels under master_seed.

    Distinct label tuples give independent streams, so (trial, client)
    pairs can be sampled in any order.
    """
    if isinstance(master_seed, bytes):
        master = master_seed
    else:
        master = int(master_seed).to_bytes(32, 'little')
    material = b'ldpc-derive' + master + b''.join(map(_label_bytes, labels))
    return BitStream(material=material)


def bernoulli(stream: BitStream, prob: Union[Fraction, float, int]) -> int:
    """Return 1 with probability prob, reading as few bits as needed.

    prob is compared exactly against a lazily read uniform binary fraction,
    two bits on average.  prob 0 and 1 read nothing.
    """
    prob = Fraction(prob)
    if not 0 <= prob <= 1:
        raise(ValueError(f"Probability outside [0, 1]: {prob}"))
    if prob == 0:
        return 0
    if prob == 1:
        return 1

    remainder, denominator = prob.numerator, prob.denominator
    while remainder:
        remainder *= 2
        prob_bit = 1 if remainder >= denominator else 0
        remainder -= prob_bit * denominator

        bit = stream.read_bits(1)
        if bit != prob_bit:
            return 1 if bit < prob_bit else 0

    # The uniform fraction equals prob's finite expansion so far.
    return 0


def uniform_mod(stream: BitStream, m: int) -> int:
    """Return a uniform integer in [0, m) by rejection."""
    if m < 1:
        raise(ValueError(f"Empty range: {m}"))
    nbits = (m - 1).bit_length()
    tries = 1
    while True:
        value = stream.read_bits(nbits)
        if value < m:
            if tries > 1:
                info_print(f"uniform_mod({m}): {tries} tries", tag=3)
            return value
        tries += 1


def uniform_double(stream: BitStream) -> float:
    """Return a uniform double in (0, 1) from 64 bits of stream."""
    return float(stream.read_uniform_doubles(1)[0])


def standard_normals(stream: BitStream, count: int) -> np.ndarray:
    """Return count standard normals by the inverse normal CDF."""
    return ndtri(stream.read_uniform_doubles(count))


def uniform_unit_vector(stream: BitStream, d: int) -> np.ndarray:
    """Return a uniform unit vector in d dimensions from 64 * d bits."""
    if d < 1:
        raise(ValueError(f"Dimension must be positive: {d}"))
    vector = standard_normals(stream, d)
    return vector / np.linalg.norm(vector)


def sphere_bits(d: int) -> int:
    """Return the bits uniform_unit_vector reads in d dimensions."""
    return 64 * d
